//! Comparison baselines: a logistic model of pairwise preference and the
//! uniform distribution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indices::PwiMatrix;
use crate::model::{MassDistribution, OmegaSample, Pair, PerformanceMatrix, PreferenceInfo};

pub const DEFAULT_RIDGE: f64 = 1e-4;
pub const MAX_ITERATIONS: usize = 500;
pub const GRADIENT_TOL: f64 = 1e-8;

/// `P(a ≿ b) = 1 / (1 + exp(β · (g(b) - g(a))))`, without intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub beta: Vec<f64>,
    pub reg: f64,
    pub iterations: usize,
    pub grad_norm: f64,
}

impl LogisticModel {
    pub fn zero(n: usize) -> Self {
        Self { beta: vec![0.0; n], reg: 0.0, iterations: 0, grad_norm: 0.0 }
    }

    pub fn prob(&self, a: &[f64], b: &[f64]) -> f64 {
        let s: f64 = self.beta.iter().zip(a.iter().zip(b)).map(|(w, (x, y))| w * (x - y)).sum();
        sigmoid(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }
}

fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(-s))` without overflow.
fn softplus_neg(s: f64) -> f64 {
    if s > 0.0 {
        (-s).exp().ln_1p()
    } else {
        -s + s.exp().ln_1p()
    }
}

/// Oriented training pairs: each strict statement once, each indifference
/// in both directions.
pub fn training_pairs(prefs: &PreferenceInfo) -> Vec<Pair> {
    prefs.uncertain_weak_pairs()
}

/// Penalized negative log-likelihood `Σ log(1 + e^{-β·x}) + (reg/2)‖β‖²`.
pub fn penalized_loss(perf: &PerformanceMatrix, statements: &[Pair], reg: f64, beta: &[f64]) -> f64 {
    let data = features(perf, statements);
    loss(&data, reg, beta)
}

fn features(perf: &PerformanceMatrix, statements: &[Pair]) -> Vec<Vec<f64>> {
    statements
        .iter()
        .map(|&(a, b)| perf.row(a).iter().zip(perf.row(b)).map(|(x, y)| x - y).collect())
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn loss(data: &[Vec<f64>], reg: f64, beta: &[f64]) -> f64 {
    data.iter().map(|x| softplus_neg(dot(beta, x))).sum::<f64>() + 0.5 * reg * dot(beta, beta)
}

/// Solves `H d = g` for symmetric positive definite `H` by Cholesky.
fn cholesky_solve(h: &[Vec<f64>], g: &[f64]) -> Option<Vec<f64>> {
    let n = g.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let v = h[i][i] - s;
                if !(v > 0.0) {
                    return None;
                }
                l[i][i] = v.sqrt();
            } else {
                l[i][j] = (h[i][j] - s) / l[j][j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        y[i] = (g[i] - (0..i).map(|k| l[i][k] * y[k]).sum::<f64>()) / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        x[i] = (y[i] - (i + 1..n).map(|k| l[k][i] * x[k]).sum::<f64>()) / l[i][i];
    }
    Some(x)
}

/// Ridge-penalized maximum likelihood for the stated pairs `(a, b)`,
/// each meaning `a` was preferred to `b`. Damped Newton with backtracking.
pub fn fit_logistic(perf: &PerformanceMatrix, statements: &[Pair], reg: f64) -> Result<LogisticModel> {
    if statements.is_empty() {
        return Err(Error::InvalidArgument("logistic fit needs at least one statement".into()));
    }
    if !(reg > 0.0) {
        return Err(Error::InvalidArgument(format!("ridge strength must be positive, got {reg}")));
    }
    let m = perf.num_alternatives();
    if let Some(&(a, b)) = statements.iter().find(|&&(a, b)| a >= m || b >= m) {
        return Err(Error::InvalidArgument(format!("statement ({a},{b}) out of range")));
    }
    let n = perf.num_criteria();
    let data = features(perf, statements);
    let mut beta = vec![0.0; n];
    let mut f = loss(&data, reg, &beta);
    for it in 0..MAX_ITERATIONS {
        let mut grad: Vec<f64> = beta.iter().map(|b| reg * b).collect();
        let mut hess = vec![vec![0.0; n]; n];
        for i in 0..n {
            hess[i][i] = reg;
        }
        for x in &data {
            let s = sigmoid(dot(&beta, x));
            let r = 1.0 - s;
            let w = s * r;
            for i in 0..n {
                grad[i] -= r * x[i];
                for j in 0..n {
                    hess[i][j] += w * x[i] * x[j];
                }
            }
        }
        let gnorm = dot(&grad, &grad).sqrt();
        if gnorm < GRADIENT_TOL {
            return Ok(LogisticModel { beta, reg, iterations: it, grad_norm: gnorm });
        }
        let step = cholesky_solve(&hess, &grad).unwrap_or_else(|| grad.clone());
        let slope = dot(&grad, &step);
        let mut t = 1.0;
        loop {
            let cand: Vec<f64> = beta.iter().zip(&step).map(|(b, d)| b - t * d).collect();
            let fc = loss(&data, reg, &cand);
            if fc <= f - 1e-4 * t * slope || t < 1e-12 {
                beta = cand;
                f = fc;
                break;
            }
            t *= 0.5;
        }
    }
    let grad_norm = {
        let mut grad: Vec<f64> = beta.iter().map(|b| reg * b).collect();
        for x in &data {
            let r = 1.0 - sigmoid(dot(&beta, x));
            for i in 0..n {
                grad[i] -= r * x[i];
            }
        }
        dot(&grad, &grad).sqrt()
    };
    if grad_norm < GRADIENT_TOL {
        return Ok(LogisticModel { beta, reg, iterations: MAX_ITERATIONS, grad_norm });
    }
    Err(Error::NonConvergence { iterations: MAX_ITERATIONS, grad_norm })
}

/// Pairwise preference probabilities of a fitted model; the diagonal is 0.
pub fn logistic_pwi(model: &LogisticModel, perf: &PerformanceMatrix) -> PwiMatrix {
    let m = perf.num_alternatives();
    let mut p = PwiMatrix::zeros(m);
    for a in 0..m {
        for b in 0..m {
            if a != b {
                p.set(a, b, model.prob(perf.row(a), perf.row(b)));
            }
        }
    }
    p
}

pub fn uniform_masses(omega: &OmegaSample) -> MassDistribution {
    MassDistribution::uniform(omega.len())
}
