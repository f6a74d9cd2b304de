//! Parametric distance-decay distributions fitted by maximizing the mass
//! of the models that agree with the stated comparisons.

use serde::{Deserialize, Serialize};

use super::problem::{DistanceProfile, DISTANCE_TIE_TOL, UTILITY_TIE_TOL};
use super::reference::{ReferenceKind, ReferenceModel};
use super::InferenceResult;
use crate::error::{Error, Result};
use crate::model::{
    barycenter, euclidean, MassDistribution, OmegaSample, PerformanceMatrix, PreferenceInfo, WeightVector,
};

/// Objective values closer than this count as ties.
const VALUE_TIE_TOL: f64 = 1e-12;
const GOLDEN_ITERS: usize = 80;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParametricFamily {
    /// `p ∝ exp(-d² / 2λ²)`.
    Normal,
    /// `p ∝ exp(-λ d)`.
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NlConfig {
    pub lambda_max_normal: f64,
    pub lambda_max_exponential: f64,
    /// Coarse λ grid size, including λ = 0.
    pub grid_points: usize,
    /// Objective evaluations allowed for the joint reference search.
    pub search_budget: usize,
}

impl Default for NlConfig {
    fn default() -> Self {
        Self { lambda_max_normal: 1e3, lambda_max_exponential: 1e3, grid_points: 64, search_budget: 5_000 }
    }
}

impl NlConfig {
    fn lambda_max(&self, family: ParametricFamily) -> f64 {
        match family {
            ParametricFamily::Normal => self.lambda_max_normal,
            ParametricFamily::Exponential => self.lambda_max_exponential,
        }
    }
}

/// The functions counted by the objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementSet {
    pub members: Vec<bool>,
    /// Minimum number of satisfied statements required of a member.
    pub k: usize,
    pub statements: usize,
}

impl AgreementSet {
    pub fn len(&self) -> usize {
        self.members.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Functions reproducing every uncertain statement; when none does, those
/// reproducing at least `k` of them for the largest such `k`.
pub fn agreement_set(omega: &OmegaSample, perf: &PerformanceMatrix, prefs: &PreferenceInfo) -> Result<AgreementSet> {
    prefs.validate(perf.num_alternatives())?;
    let weak = prefs.uncertain_weak_pairs();
    let statements = weak.len() + prefs.uncertain_intensity.len();
    let counts: Vec<usize> = omega
        .functions()
        .iter()
        .map(|w| {
            let u = perf.utilities(w);
            let pairs = weak.iter().filter(|&&(a, b)| u[a] - u[b] >= -UTILITY_TIE_TOL).count();
            let intens = prefs
                .uncertain_intensity
                .iter()
                .filter(|&&((a, b), (c, d))| u[a] - u[b] >= -UTILITY_TIE_TOL || u[c] - u[d] < -UTILITY_TIE_TOL)
                .count();
            pairs + intens
        })
        .collect();
    let mut k = statements;
    loop {
        let members: Vec<bool> = counts.iter().map(|&c| c >= k).collect();
        if k == 0 || members.iter().any(|&b| b) {
            return Ok(AgreementSet { members, k, statements });
        }
        k -= 1;
    }
}

fn log_weights(family: ParametricFamily, lambda: f64, d: &[f64]) -> Vec<f64> {
    match family {
        ParametricFamily::Exponential => d.iter().map(|&x| -lambda * x).collect(),
        ParametricFamily::Normal => {
            if lambda == 0.0 {
                let dmin = d.iter().copied().fold(f64::INFINITY, f64::min);
                d.iter()
                    .map(|&x| if x - dmin <= DISTANCE_TIE_TOL { 0.0 } else { f64::NEG_INFINITY })
                    .collect()
            } else {
                let s = 2.0 * lambda * lambda;
                d.iter().map(|&x| -x * x / s).collect()
            }
        }
    }
}

/// Normalized family masses over the distance profile `d`.
pub fn family_masses(family: ParametricFamily, lambda: f64, d: &[f64]) -> Vec<f64> {
    let lw = log_weights(family, lambda, d);
    let top = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = lw.iter().map(|&x| (x - top).exp()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

/// Family mass carried by the members of the agreement set.
pub fn family_objective(family: ParametricFamily, lambda: f64, d: &[f64], members: &[bool]) -> f64 {
    let lw = log_weights(family, lambda, d);
    let top = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut inside = 0.0;
    let mut total = 0.0;
    for (x, &m) in lw.iter().zip(members) {
        let w = (x - top).exp();
        total += w;
        if m {
            inside += w;
        }
    }
    inside / total
}

/// Optimum of one family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyOptimum {
    pub family: ParametricFamily,
    pub lambda: f64,
    pub objective: f64,
    pub at_boundary: bool,
}

fn lambda_grid(lambda_max: f64, points: usize) -> Vec<f64> {
    let mut g = vec![0.0];
    let rest = points.saturating_sub(1).max(2);
    let lo = lambda_max * 1e-6;
    for i in 0..rest {
        let t = i as f64 / (rest - 1) as f64;
        g.push(lo * (lambda_max / lo).powf(t));
    }
    *g.last_mut().unwrap() = lambda_max;
    g
}

fn golden_max(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..GOLDEN_ITERS {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
        if b - a <= 1e-13 * (1.0 + b.abs()) {
            break;
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Smallest λ among the candidates whose value ties the best.
fn pick(cands: &[(f64, f64)]) -> (f64, f64) {
    let best = cands.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
    cands
        .iter()
        .filter(|c| c.1 >= best - VALUE_TIE_TOL)
        .copied()
        .min_by(|x, y| x.0.total_cmp(&y.0))
        .expect("at least one candidate")
}

fn optimize_lambda(family: ParametricFamily, d: &[f64], members: &[bool], cfg: &NlConfig) -> FamilyOptimum {
    let lmax = cfg.lambda_max(family);
    let f = |l: f64| family_objective(family, l, d, members);
    let grid = lambda_grid(lmax, cfg.grid_points);
    let vals: Vec<f64> = grid.iter().map(|&l| f(l)).collect();
    let mut cands: Vec<(f64, f64)> = grid.iter().copied().zip(vals.iter().copied()).collect();
    let last = grid.len() - 1;
    for i in 0..grid.len() {
        let left = if i == 0 { f64::NEG_INFINITY } else { vals[i - 1] };
        let right = if i == last { f64::NEG_INFINITY } else { vals[i + 1] };
        if vals[i] >= left && vals[i] >= right {
            let a = grid[i.saturating_sub(1)];
            let b = grid[(i + 1).min(last)];
            if b > a {
                cands.push(golden_max(&f, a, b));
            }
        }
    }
    let (lambda, objective) = pick(&cands);
    FamilyOptimum { family, lambda, objective, at_boundary: lambda >= lmax * (1.0 - 1e-9) }
}

/// Exponential wins ties.
fn better_family(normal: &FamilyOptimum, exponential: &FamilyOptimum) -> FamilyOptimum {
    if normal.objective > exponential.objective + VALUE_TIE_TOL {
        *normal
    } else {
        *exponential
    }
}

/// Reference model carrier for the joint search: coefficients on a simplex
/// mapped to a weight vector.
struct Carrier<'a> {
    bases: Vec<&'a [f64]>,
    omega: &'a OmegaSample,
}

impl Carrier<'_> {
    fn dim(&self) -> usize {
        self.bases.len()
    }

    fn weights(&self, theta: &[f64]) -> Vec<f64> {
        let n = self.bases[0].len();
        let mut w = vec![0.0; n];
        for (b, &t) in self.bases.iter().zip(theta) {
            for (x, y) in w.iter_mut().zip(b.iter()) {
                *x += t * y;
            }
        }
        w
    }

    fn distances(&self, theta: &[f64]) -> Vec<f64> {
        let w = self.weights(theta);
        self.omega.functions().iter().map(|f| euclidean(f.as_slice(), &w)).collect()
    }
}

struct JointOptimum {
    theta: Vec<f64>,
    optimum: FamilyOptimum,
}

/// Compass search over `(θ, log λ)` started from `theta0`, with the 1-D
/// optimum at `theta0` kept as a candidate.
fn joint_search(
    family: ParametricFamily,
    carrier: &Carrier<'_>,
    theta0: Vec<f64>,
    members: &[bool],
    cfg: &NlConfig,
) -> JointOptimum {
    let lmax = cfg.lambda_max(family);
    let lmin_log = (lmax * 1e-6).ln();
    let lmax_log = lmax.ln();
    let start = optimize_lambda(family, &carrier.distances(&theta0), members, cfg);
    let mut evals = cfg.grid_points + 2 * GOLDEN_ITERS;
    let eval = |theta: &[f64], ll: f64| family_objective(family, ll.exp(), &carrier.distances(theta), members);

    let mut theta = theta0.clone();
    let mut ll = start.lambda.max(lmax * 1e-6).ln().clamp(lmin_log, lmax_log);
    let mut best = eval(&theta, ll);
    evals += 1;
    let k = carrier.dim();
    let mut step: f64 = 0.25;
    let mut lstep = 1.0;
    while evals < cfg.search_budget && (step > 1e-7 || lstep > 1e-7) {
        let mut improved = false;
        // Moves that keep θ on its simplex: mass shifted from j to i.
        'moves: for i in 0..k {
            for j in 0..k {
                if i == j || theta[j] <= 0.0 {
                    continue;
                }
                let s = step.min(theta[j]);
                let mut cand = theta.clone();
                cand[i] += s;
                cand[j] -= s;
                let v = eval(&cand, ll);
                evals += 1;
                if v > best + VALUE_TIE_TOL {
                    theta = cand;
                    best = v;
                    improved = true;
                    break 'moves;
                }
                if evals >= cfg.search_budget {
                    break 'moves;
                }
            }
        }
        if !improved && evals < cfg.search_budget {
            for dir in [1.0, -1.0] {
                let cand = (ll + dir * lstep).clamp(lmin_log, lmax_log);
                let v = eval(&theta, cand);
                evals += 1;
                if v > best + VALUE_TIE_TOL {
                    ll = cand;
                    best = v;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
            lstep *= 0.5;
        }
    }
    let refined = optimize_lambda(family, &carrier.distances(&theta), members, cfg);
    let searched = if refined.objective >= best - VALUE_TIE_TOL {
        refined
    } else {
        FamilyOptimum { family, lambda: ll.exp(), objective: best, at_boundary: ll >= lmax_log - 1e-9 }
    };
    if start.objective >= searched.objective - VALUE_TIE_TOL {
        JointOptimum { theta: theta0, optimum: start }
    } else {
        JointOptimum { theta, optimum: searched }
    }
}

/// Full outcome of the parametric method, with both families' optima.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NlOutcome {
    pub result: InferenceResult,
    pub normal: FamilyOptimum,
    pub exponential: FamilyOptimum,
    pub agreement: AgreementSet,
}

/// Fits the Normal and Exponential distance-decay families and keeps the
/// one placing more mass on the agreement set. For free reference kinds,
/// the reference is optimized jointly with λ.
pub fn acg_nl(
    omega: &OmegaSample,
    perf: &PerformanceMatrix,
    prefs: &PreferenceInfo,
    reference: &ReferenceModel,
    cfg: &NlConfig,
) -> Result<NlOutcome> {
    if omega.is_empty() {
        return Err(Error::EmptySample);
    }
    if omega.dim() != perf.num_criteria() {
        return Err(Error::DimensionMismatch { expected: perf.num_criteria(), actual: omega.dim() });
    }
    let agreement = agreement_set(omega, perf, prefs)?;
    let members = &agreement.members;
    let (kind, normal, exponential, ref_normal, ref_exp) = match reference {
        ReferenceModel::Fixed { kind, weights } => {
            let d = DistanceProfile::new(omega, weights)?;
            let nor = optimize_lambda(ParametricFamily::Normal, d.distances(), members, cfg);
            let exp = optimize_lambda(ParametricFamily::Exponential, d.distances(), members, cfg);
            (*kind, nor, exp, weights.as_slice().to_vec(), weights.as_slice().to_vec())
        }
        ReferenceModel::ConvexCombination { barycenter, arithmetic_mean, most_discriminant } => {
            let carrier = Carrier {
                bases: vec![barycenter.as_slice(), arithmetic_mean.as_slice(), most_discriminant.as_slice()],
                omega,
            };
            let theta0 = vec![1.0 / 3.0; 3];
            let nor = joint_search(ParametricFamily::Normal, &carrier, theta0.clone(), members, cfg);
            let exp = joint_search(ParametricFamily::Exponential, &carrier, theta0, members, cfg);
            (
                ReferenceKind::ConvexCombination,
                nor.optimum,
                exp.optimum,
                carrier.weights(&nor.theta),
                carrier.weights(&exp.theta),
            )
        }
        ReferenceModel::Unknown { dim } => {
            if *dim != omega.dim() {
                return Err(Error::DimensionMismatch { expected: omega.dim(), actual: *dim });
            }
            let units: Vec<Vec<f64>> = (0..*dim)
                .map(|i| {
                    let mut e = vec![0.0; *dim];
                    e[i] = 1.0;
                    e
                })
                .collect();
            let carrier = Carrier { bases: units.iter().map(Vec::as_slice).collect(), omega };
            let theta0: Vec<f64> = barycenter(omega)?.into();
            let nor = joint_search(ParametricFamily::Normal, &carrier, theta0.clone(), members, cfg);
            let exp = joint_search(ParametricFamily::Exponential, &carrier, theta0, members, cfg);
            (ReferenceKind::Unknown, nor.optimum, exp.optimum, nor.theta, exp.theta)
        }
    };
    let chosen = better_family(&normal, &exponential);
    let ref_w = if chosen.family == ParametricFamily::Normal { ref_normal } else { ref_exp };
    let d: Vec<f64> = omega.functions().iter().map(|f| euclidean(f.as_slice(), &ref_w)).collect();
    let masses = MassDistribution::normalized(family_masses(chosen.family, chosen.lambda, &d))?;
    let result = InferenceResult {
        method: "acg_nl".to_string(),
        epsilon_star: None,
        compatible: agreement.k == agreement.statements,
        reference: Some(kind),
        reference_weights: Some(WeightVector::from_sampled(ref_w)),
        family: Some(chosen.family),
        lambda: Some(chosen.lambda),
        lambda_at_boundary: Some(chosen.at_boundary),
        objective: Some(chosen.objective),
        agreement_k: Some(agreement.k),
        masses,
    };
    Ok(NlOutcome { result, normal, exponential, agreement })
}
