//! Hit-And-Run sampling from bounded convex polytopes.
//!
//! The walk starts at the Chebyshev center of the polytope (the center of
//! the largest ball inside it, measured within the affine hull of the
//! equality constraints), draws isotropic directions inside that affine
//! hull and moves to a uniform point of the feasible chord. Chord endpoints
//! come from exact ray/half-space intersections.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::MassProblem;
use crate::lp::{self, LinearProgram, LpStatus};
use crate::model::{
    OmegaSample, PerformanceMatrix, PreferenceInfo, Provenance, WeightVector, MASS_SUM_TOL,
};

/// Constraint tolerance every returned point satisfies.
pub const POINT_TOL: f64 = 1e-8;
/// Strict preference rows are sampled with `ε = SLACK_FRACTION · ε*`.
pub const SLACK_FRACTION: f64 = 0.01;

const MIN_RADIUS: f64 = 1e-10;
const RESYNC_EVERY: usize = 256;

/// `{x : A x = b, G x ≤ h, x_j ≥ 0 for flagged j}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolytopeSpec {
    pub dim: usize,
    pub eq_constraints: Vec<(Vec<f64>, f64)>,
    pub ineq_constraints: Vec<(Vec<f64>, f64)>,
    pub nonneg: Vec<bool>,
}

impl PolytopeSpec {
    pub fn new(dim: usize) -> Self {
        Self { dim, eq_constraints: Vec::new(), ineq_constraints: Vec::new(), nonneg: vec![false; dim] }
    }

    /// The probability simplex in `dim` coordinates.
    pub fn simplex(dim: usize) -> Self {
        let mut s = Self::new(dim);
        s.nonneg = vec![true; dim];
        s.eq_constraints.push((vec![1.0; dim], 1.0));
        s
    }

    /// Largest constraint violation at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let dot = |r: &[f64]| r.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        let mut worst = 0.0f64;
        for (r, b) in &self.eq_constraints {
            worst = worst.max((dot(r) - b).abs());
        }
        for (r, h) in &self.ineq_constraints {
            worst = worst.max(dot(r) - h);
        }
        for (xi, &nn) in x.iter().zip(&self.nonneg) {
            if nn {
                worst = worst.max(-xi);
            }
        }
        worst
    }

    fn check_dims(&self) -> Result<()> {
        if self.nonneg.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, actual: self.nonneg.len() });
        }
        for (r, _) in self.eq_constraints.iter().chain(&self.ineq_constraints) {
            if r.len() != self.dim {
                return Err(Error::DimensionMismatch { expected: self.dim, actual: r.len() });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerConfig {
    pub burn_in: usize,
    pub thinning: usize,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self { burn_in: 1_000, thinning: 10, seed: 0 }
    }
}

impl SamplerConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }
}

/// A Hit-And-Run walk over one polytope.
pub struct HitAndRun {
    spec: PolytopeSpec,
    /// Orthonormal basis of the row space of the equality constraints.
    basis: Vec<Vec<f64>>,
    /// Right-hand sides expressed in `basis`.
    basis_rhs: Vec<f64>,
    point: Vec<f64>,
    slack: Vec<f64>,
    radius: f64,
    rng: ChaCha8Rng,
    steps: usize,
}

impl HitAndRun {
    pub fn new(spec: PolytopeSpec, seed: u64) -> Result<Self> {
        spec.check_dims()?;
        let (basis, basis_rhs) = orthonormal_rows(&spec.eq_constraints);
        if basis.len() >= spec.dim {
            // The equalities alone pin a single point.
            return Err(Error::DegeneratePolytope { radius: 0.0 });
        }
        let (point, radius) = chebyshev_center(&spec, &basis)?;
        if radius < MIN_RADIUS {
            return Err(Error::DegeneratePolytope { radius });
        }
        let mut walk = Self {
            spec,
            basis,
            basis_rhs,
            point,
            slack: Vec::new(),
            radius,
            rng: ChaCha8Rng::seed_from_u64(seed),
            steps: 0,
        };
        walk.resync();
        Ok(walk)
    }

    pub fn chebyshev_radius(&self) -> f64 {
        self.radius
    }

    pub fn point(&self) -> &[f64] {
        &self.point
    }

    fn resync(&mut self) {
        // Pull the point back onto the affine hull and clip round-off.
        for (q, beta) in self.basis.iter().zip(&self.basis_rhs) {
            let r = dot(q, &self.point) - beta;
            for (x, qi) in self.point.iter_mut().zip(q) {
                *x -= r * qi;
            }
        }
        for (x, &nn) in self.point.iter_mut().zip(&self.spec.nonneg) {
            if nn && *x < 0.0 {
                *x = 0.0;
            }
        }
        self.slack =
            self.spec.ineq_constraints.iter().map(|(g, h)| h - dot(g, &self.point)).collect();
    }

    fn direction(&mut self) -> Vec<f64> {
        loop {
            let mut d: Vec<f64> =
                (0..self.spec.dim).map(|_| self.rng.sample::<f64, _>(StandardNormal)).collect();
            for q in &self.basis {
                let c = dot(q, &d);
                for (x, qi) in d.iter_mut().zip(q) {
                    *x -= c * qi;
                }
            }
            let norm = dot(&d, &d).sqrt();
            if norm > 1e-12 {
                d.iter_mut().for_each(|x| *x /= norm);
                return d;
            }
        }
    }

    /// Advances the walk by one chord move.
    pub fn step(&mut self) -> Result<()> {
        let d = self.direction();
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for ((x, di), &nn) in self.point.iter().zip(&d).zip(&self.spec.nonneg) {
            if !nn {
                continue;
            }
            let x = x.max(0.0);
            if *di > 1e-15 {
                lo = lo.max(-x / di);
            } else if *di < -1e-15 {
                hi = hi.min(-x / di);
            }
        }
        let gd: Vec<f64> = self.spec.ineq_constraints.iter().map(|(g, _)| dot(g, &d)).collect();
        for (s, gdi) in self.slack.iter().zip(&gd) {
            let s = s.max(0.0);
            if *gdi > 1e-15 {
                hi = hi.min(s / gdi);
            } else if *gdi < -1e-15 {
                lo = lo.max(s / gdi);
            }
        }
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Unbounded);
        }
        let t = if hi > lo { self.rng.gen_range(lo..=hi) } else { 0.0 };
        for (x, di) in self.point.iter_mut().zip(&d) {
            *x += t * di;
        }
        for (s, gdi) in self.slack.iter_mut().zip(&gd) {
            *s -= t * gdi;
        }
        self.steps += 1;
        if self.steps % RESYNC_EVERY == 0 {
            self.resync();
        }
        Ok(())
    }

    fn current(&mut self) -> Vec<f64> {
        self.resync();
        self.point.clone()
    }

    /// Runs `burn_in` steps, then keeps one point every `thinning` steps
    /// and hands it to `sink`.
    pub fn run(
        &mut self,
        count: usize,
        burn_in: usize,
        thinning: usize,
        mut sink: impl FnMut(&[f64]),
    ) -> Result<()> {
        if thinning == 0 {
            return Err(Error::InvalidArgument("thinning must be at least 1".into()));
        }
        for _ in 0..burn_in {
            self.step()?;
        }
        for _ in 0..count {
            for _ in 0..thinning {
                self.step()?;
            }
            let p = self.current();
            let v = self.spec.max_violation(&p);
            if v > POINT_TOL {
                return Err(Error::Numerical(format!("sample violates constraints by {v:e}")));
            }
            sink(&p);
        }
        Ok(())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gram-Schmidt on the equality rows; dependent rows are dropped.
fn orthonormal_rows(rows: &[(Vec<f64>, f64)]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    for (r, b) in rows {
        let mut v = r.clone();
        let mut beta = *b;
        // Two passes for numerical orthogonality.
        for _ in 0..2 {
            for (q, qb) in basis.iter().zip(&rhs) {
                let c = dot(q, &v);
                for (x, qi) in v.iter_mut().zip(q) {
                    *x -= c * qi;
                }
                beta -= c * qb;
            }
        }
        let norm = dot(&v, &v).sqrt();
        let scale = dot(r, r).sqrt().max(1.0);
        if norm > 1e-10 * scale {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
            rhs.push(beta / norm);
        }
    }
    (basis, rhs)
}

fn projected_norm(v: &[f64], basis: &[Vec<f64>]) -> f64 {
    let mut w = v.to_vec();
    for q in basis {
        let c = dot(q, &w);
        for (x, qi) in w.iter_mut().zip(q) {
            *x -= c * qi;
        }
    }
    dot(&w, &w).sqrt()
}

/// Center and radius of the largest ball inside the polytope, within the
/// affine hull of its equality constraints.
pub fn chebyshev_center(spec: &PolytopeSpec, basis: &[Vec<f64>]) -> Result<(Vec<f64>, f64)> {
    let n = spec.dim;
    // Per-coordinate ball offsets for the non-negativity bounds: x_j = y_j + r c_j.
    let shift: Vec<f64> = (0..n)
        .map(|j| {
            if spec.nonneg[j] {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                projected_norm(&e, basis)
            } else {
                0.0
            }
        })
        .collect();
    let mut obj = vec![0.0; n + 1];
    obj[n] = 1.0;
    let mut prog = LinearProgram::new(obj);
    for j in 0..n {
        if !spec.nonneg[j] {
            prog.lower_bounds[j] = None;
        }
    }
    for (a, b) in &spec.eq_constraints {
        let mut row = a.clone();
        row.push(dot(a, &shift));
        prog.add_eq(row, *b);
    }
    for (g, h) in &spec.ineq_constraints {
        let mut row = g.clone();
        row.push(dot(g, &shift) + projected_norm(g, basis));
        prog.add_le(row, *h);
    }
    let out = lp::solve(&prog)?;
    match out.status {
        LpStatus::Optimal => {
            let sol = out.solution.expect("optimal outcome has a solution");
            let r = sol[n];
            let x = (0..n).map(|j| sol[j] + r * shift[j]).collect();
            Ok((x, r))
        }
        LpStatus::Infeasible => Err(Error::Infeasible),
        LpStatus::Unbounded => Err(Error::Unbounded),
    }
}

/// Draws `count` points from `spec` with Hit-And-Run.
pub fn har_sample(spec: &PolytopeSpec, count: usize, cfg: &SamplerConfig) -> Result<Vec<Vec<f64>>> {
    let mut walk = HitAndRun::new(spec.clone(), cfg.seed)?;
    let mut out = Vec::with_capacity(count);
    walk.run(count, cfg.burn_in, cfg.thinning, |p| out.push(p.to_vec()))?;
    Ok(out)
}

/// Component-wise mean of `count` Hit-And-Run draws, without storing them.
pub fn har_mean(spec: &PolytopeSpec, count: usize, cfg: &SamplerConfig) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::InvalidArgument("need at least one draw".into()));
    }
    let mut walk = HitAndRun::new(spec.clone(), cfg.seed)?;
    let mut acc = vec![0.0; spec.dim];
    walk.run(count, cfg.burn_in, cfg.thinning, |p| {
        for (a, x) in acc.iter_mut().zip(p) {
            *a += x;
        }
    })?;
    acc.iter_mut().for_each(|a| *a /= count as f64);
    Ok(acc)
}

/// The weight simplex restricted by certain statements, with strict
/// inequalities realized by the slack `epsilon`.
pub fn weight_polytope(perf: &PerformanceMatrix, prefs: &PreferenceInfo, epsilon: f64) -> PolytopeSpec {
    let mut spec = PolytopeSpec::simplex(perf.num_criteria());
    let diff = |a: usize, b: usize| -> Vec<f64> {
        perf.row(a).iter().zip(perf.row(b)).map(|(x, y)| x - y).collect()
    };
    let neg = |v: Vec<f64>| v.into_iter().map(|x| -x).collect::<Vec<_>>();
    for &(a, b) in &prefs.certain_strict {
        spec.ineq_constraints.push((neg(diff(a, b)), -epsilon));
    }
    for &(a, b) in &prefs.certain_indiff {
        spec.eq_constraints.push((diff(a, b), 0.0));
    }
    for &((a, b), (c, d)) in &prefs.certain_intensity {
        let ab = diff(a, b);
        let cd = diff(c, d);
        let both: Vec<f64> = ab.iter().zip(&cd).map(|(x, y)| x - y).collect();
        spec.ineq_constraints.push((neg(both), -epsilon));
        spec.ineq_constraints.push((neg(cd), -epsilon));
    }
    spec
}

/// Samples `Ω` from the weight simplex, or from the part of it compatible
/// with the certain statements in `prefs`.
pub fn sample_weight_space(
    perf: &PerformanceMatrix,
    prefs: Option<&PreferenceInfo>,
    count: usize,
    cfg: &SamplerConfig,
) -> Result<OmegaSample> {
    let n = perf.num_criteria();
    let (spec, provenance) = match prefs.filter(|p| p.has_certain()) {
        None => (PolytopeSpec::simplex(n), Provenance::Simplex),
        Some(p) => {
            let compat = lp::compatibility_check(perf, p)?;
            let eps = SLACK_FRACTION * compat.epsilon_star;
            (weight_polytope(perf, p, eps), Provenance::Preferences { epsilon: eps })
        }
    };
    let points = har_sample(&spec, count, cfg)?;
    let functions = points.into_iter().map(WeightVector::from_sampled).collect();
    OmegaSample::new(functions, provenance)
}

/// Draws mass distributions from the constraint polytope of `problem` with
/// the strict-statement slack fixed at `SLACK_FRACTION · epsilon_star`.
pub fn sample_distribution_polytope(
    problem: &MassProblem,
    epsilon_star: f64,
    count: usize,
    cfg: &SamplerConfig,
) -> Result<Vec<crate::model::MassDistribution>> {
    if epsilon_star <= lp::COMPATIBILITY_EPS {
        return Err(Error::Incompatible { epsilon_star });
    }
    let spec = problem.polytope(SLACK_FRACTION * epsilon_star);
    har_sample(&spec, count, cfg)?
        .iter()
        .map(|x| {
            let masses = problem.expand(x);
            let s: f64 = masses.iter().sum();
            debug_assert!((s - 1.0).abs() <= MASS_SUM_TOL);
            crate::model::MassDistribution::normalized(masses)
        })
        .collect()
}

/// Barycenter of `count` draws from the constraint polytope of `problem`.
pub fn distribution_barycenter(
    problem: &MassProblem,
    epsilon_star: f64,
    count: usize,
    cfg: &SamplerConfig,
) -> Result<crate::model::MassDistribution> {
    if epsilon_star <= lp::COMPATIBILITY_EPS {
        return Err(Error::Incompatible { epsilon_star });
    }
    let spec = problem.polytope(SLACK_FRACTION * epsilon_star);
    let mean = har_mean(&spec, count, cfg)?;
    crate::model::MassDistribution::normalized(problem.expand(&mean))
}
