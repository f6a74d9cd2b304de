use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::LinearProgram;
use crate::model::{euclidean, OmegaSample, PerformanceMatrix, PreferenceInfo, WeightVector};
use crate::sampler::PolytopeSpec;

/// Utilities closer than this are treated as equal.
pub const UTILITY_TIE_TOL: f64 = 1e-12;
/// Distances closer than this fall in the same group.
pub const DISTANCE_TIE_TOL: f64 = 1e-12;

/// Distances from every element of `Ω` to a reference model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceProfile {
    d: Vec<f64>,
    max: f64,
}

impl DistanceProfile {
    pub fn new(omega: &OmegaSample, reference: &WeightVector) -> Result<Self> {
        if omega.dim() != reference.dim() {
            return Err(Error::DimensionMismatch { expected: omega.dim(), actual: reference.dim() });
        }
        let d: Vec<f64> =
            omega.functions().iter().map(|w| euclidean(w.as_slice(), reference.as_slice())).collect();
        Ok(Self::from_distances(d))
    }

    pub fn from_distances(d: Vec<f64>) -> Self {
        let max = d.iter().copied().fold(0.0, f64::max);
        Self { d, max }
    }

    pub fn distances(&self) -> &[f64] {
        &self.d
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    /// Indices sorted by ascending distance, ties by index.
    pub fn ascending_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.d.len()).collect();
        order.sort_by(|&a, &b| self.d[a].total_cmp(&self.d[b]).then(a.cmp(&b)));
        order
    }
}

/// Knot distances `0 = d_1 < … < d_q` of a piecewise-linear mass profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakpointGrid {
    knots: Vec<f64>,
}

impl BreakpointGrid {
    pub fn equally_spaced(max_distance: f64, q: usize) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidArgument(format!("grid size q must be at least 2, got {q}")));
        }
        if !(max_distance > 0.0) {
            return Err(Error::InvalidArgument("grid needs a positive maximum distance".into()));
        }
        let step = max_distance / (q - 1) as f64;
        let mut knots: Vec<f64> = (0..q).map(|k| k as f64 * step).collect();
        knots[q - 1] = max_distance;
        Ok(Self { knots })
    }

    pub fn from_knots(knots: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 || knots[0] != 0.0 {
            return Err(Error::InvalidArgument("knots must start at 0 and number at least 2".into()));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("knots must be strictly increasing".into()));
        }
        Ok(Self { knots })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn len(&self) -> usize {
        self.knots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.knots.is_empty()
    }

    /// Hat-function weights of distance `d`: at most two `(knot, weight)` pairs.
    pub fn hat_weights(&self, d: f64) -> [(usize, f64); 2] {
        let q = self.knots.len();
        if d <= 0.0 {
            return [(0, 1.0), (1, 0.0)];
        }
        if d >= self.knots[q - 1] {
            return [(q - 1, 1.0), (q - 2, 0.0)];
        }
        let k = self.knots.partition_point(|&x| x <= d);
        let (lo, hi) = (self.knots[k - 1], self.knots[k]);
        let t = (d - lo) / (hi - lo);
        [(k - 1, 1.0 - t), (k, t)]
    }

    /// Linear interpolation of knot values at distance `d`.
    pub fn interpolate(&self, values: &[f64], d: f64) -> f64 {
        self.hat_weights(d).iter().map(|&(k, w)| w * values[k]).sum()
    }
}

/// How a mass vector over `Ω` is expressed through LP variables.
#[derive(Debug, Clone, PartialEq)]
enum Parameterization {
    /// One variable per function.
    Direct,
    /// Functions are grouped by distance to the reference, nearest first.
    /// Variable `g` is the total mass spread uniformly over groups `0..=g`,
    /// so masses are non-increasing in distance by construction and equal
    /// within a group.
    Layers { group_of: Vec<usize>, cumulative: Vec<f64> },
    /// Masses at breakpoint distances, linearly interpolated.
    Breakpoints { grid: BreakpointGrid, hats: Vec<[(usize, f64); 2]> },
}

/// Which pairwise mass sums the statements compare.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparison {
    /// Sums over `U(a) > U(b)`.
    Strict,
    /// Sums over `U(a) ≥ U(b)`.
    Weak,
}

/// The linear system behind the LP-based inference methods, over a fixed
/// sample of functions and a fixed statement set.
#[derive(Debug, Clone)]
pub struct MassProblem {
    param: Parameterization,
    n_functions: usize,
    n_vars: usize,
    /// `row · x ≥ ε`.
    strict_rows: Vec<Vec<f64>>,
    /// `row · x = 0`.
    equal_rows: Vec<Vec<f64>>,
    /// `row · x ≤ 0`.
    monotone_rows: Vec<Vec<f64>>,
    /// `row · x = 1`.
    total_row: Vec<f64>,
}

/// Function-space coefficient rows of the uncertain statements.
fn statement_rows(
    omega: &OmegaSample,
    perf: &PerformanceMatrix,
    prefs: &PreferenceInfo,
    cmp: Comparison,
) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    prefs.validate(perf.num_alternatives())?;
    if omega.dim() != perf.num_criteria() {
        return Err(Error::DimensionMismatch { expected: perf.num_criteria(), actual: omega.dim() });
    }
    let utils: Vec<Vec<f64>> = omega.functions().iter().map(|w| perf.utilities(w)).collect();
    let above = |u: &[f64], a: usize, b: usize| -> bool {
        match cmp {
            Comparison::Strict => u[a] - u[b] > UTILITY_TIE_TOL,
            Comparison::Weak => u[a] - u[b] >= -UTILITY_TIE_TOL,
        }
    };
    let indicator = |a: usize, b: usize| -> Vec<f64> {
        utils.iter().map(|u| if above(u, a, b) { 1.0 } else { 0.0 }).collect()
    };
    let minus = |x: Vec<f64>, y: Vec<f64>| -> Vec<f64> { x.iter().zip(&y).map(|(p, q)| p - q).collect() };
    let mut strict = Vec::new();
    let mut equal = Vec::new();
    for &(a, b) in &prefs.uncertain_strict {
        strict.push(minus(indicator(a, b), indicator(b, a)));
    }
    for &((a, b), (c, d)) in &prefs.uncertain_intensity {
        strict.push(minus(indicator(a, b), indicator(c, d)));
    }
    for &(a, b) in &prefs.uncertain_indiff {
        equal.push(minus(indicator(a, b), indicator(b, a)));
    }
    Ok((strict, equal))
}

impl MassProblem {
    /// Masses free over the probability simplex; statement sums use strict
    /// utility comparisons.
    pub fn ssor(omega: &OmegaSample, perf: &PerformanceMatrix, prefs: &PreferenceInfo) -> Result<Self> {
        let (strict, equal) = statement_rows(omega, perf, prefs, Comparison::Strict)?;
        let n = omega.len();
        Ok(Self {
            param: Parameterization::Direct,
            n_functions: n,
            n_vars: n,
            strict_rows: strict,
            equal_rows: equal,
            monotone_rows: Vec::new(),
            total_row: vec![1.0; n],
        })
    }

    /// Masses non-increasing in distance to the reference, equal for equal
    /// distances.
    pub fn acg(
        omega: &OmegaSample,
        perf: &PerformanceMatrix,
        prefs: &PreferenceInfo,
        profile: &DistanceProfile,
    ) -> Result<Self> {
        check_profile(omega, profile)?;
        let (strict, equal) = statement_rows(omega, perf, prefs, Comparison::Weak)?;
        Ok(Self::layered(omega.len(), profile, strict, equal))
    }

    fn layered(n: usize, profile: &DistanceProfile, strict: Vec<Vec<f64>>, equal: Vec<Vec<f64>>) -> Self {
        let d = profile.distances();
        let order = profile.ascending_order();
        let mut group_of = vec![0; n];
        let mut sizes: Vec<usize> = Vec::new();
        let mut last = f64::NEG_INFINITY;
        for &t in &order {
            if sizes.is_empty() || d[t] - last > DISTANCE_TIE_TOL {
                sizes.push(0);
                last = d[t];
            }
            group_of[t] = sizes.len() - 1;
            *sizes.last_mut().unwrap() += 1;
        }
        let mut cumulative = Vec::with_capacity(sizes.len());
        let mut acc = 0usize;
        for s in &sizes {
            acc += s;
            cumulative.push(acc as f64);
        }
        let param = Parameterization::Layers { group_of, cumulative };
        let mut p = Self {
            param,
            n_functions: n,
            n_vars: sizes.len(),
            strict_rows: Vec::new(),
            equal_rows: Vec::new(),
            monotone_rows: Vec::new(),
            total_row: Vec::new(),
        };
        p.total_row = p.reduce_row(&vec![1.0; n]);
        p.strict_rows = strict.iter().map(|r| p.reduce_row(r)).collect();
        p.equal_rows = equal.iter().map(|r| p.reduce_row(r)).collect();
        p
    }

    /// Masses given by a non-increasing piecewise-linear function of the
    /// distance to the reference.
    pub fn acg_pl(
        omega: &OmegaSample,
        perf: &PerformanceMatrix,
        prefs: &PreferenceInfo,
        profile: &DistanceProfile,
        grid: Option<BreakpointGrid>,
        q: usize,
    ) -> Result<Self> {
        check_profile(omega, profile)?;
        if q < 2 {
            return Err(Error::InvalidArgument(format!("grid size q must be at least 2, got {q}")));
        }
        let (strict, equal) = statement_rows(omega, perf, prefs, Comparison::Weak)?;
        if profile.max() <= DISTANCE_TIE_TOL {
            // Every function sits on the reference: only the uniform profile remains.
            return Ok(Self::layered(omega.len(), profile, strict, equal));
        }
        let grid = match grid {
            Some(g) => g,
            None => BreakpointGrid::equally_spaced(profile.max(), q)?,
        };
        let hats: Vec<_> = profile.distances().iter().map(|&d| grid.hat_weights(d)).collect();
        let nv = grid.len();
        let monotone_rows = (1..nv)
            .map(|k| {
                let mut r = vec![0.0; nv];
                r[k] = 1.0;
                r[k - 1] = -1.0;
                r
            })
            .collect();
        let mut p = Self {
            param: Parameterization::Breakpoints { grid, hats },
            n_functions: omega.len(),
            n_vars: nv,
            strict_rows: Vec::new(),
            equal_rows: Vec::new(),
            monotone_rows,
            total_row: Vec::new(),
        };
        p.total_row = p.reduce_row(&vec![1.0; omega.len()]);
        p.strict_rows = strict.iter().map(|r| p.reduce_row(r)).collect();
        p.equal_rows = equal.iter().map(|r| p.reduce_row(r)).collect();
        Ok(p)
    }

    pub fn num_vars(&self) -> usize {
        self.n_vars
    }

    pub fn num_functions(&self) -> usize {
        self.n_functions
    }

    /// Knot grid, for piecewise-linear problems.
    pub fn grid(&self) -> Option<&BreakpointGrid> {
        match &self.param {
            Parameterization::Breakpoints { grid, .. } => Some(grid),
            _ => None,
        }
    }

    /// Maps a function-space row `c` to variable space: `c · expand(x) = reduce_row(c) · x`.
    pub fn reduce_row(&self, c: &[f64]) -> Vec<f64> {
        match &self.param {
            Parameterization::Direct => c.to_vec(),
            Parameterization::Layers { group_of, cumulative } => {
                let mut sums = vec![0.0; cumulative.len()];
                for (t, &g) in group_of.iter().enumerate() {
                    sums[g] += c[t];
                }
                let mut acc = 0.0;
                sums.iter()
                    .zip(cumulative)
                    .map(|(s, cnt)| {
                        acc += s;
                        acc / cnt
                    })
                    .collect()
            }
            Parameterization::Breakpoints { hats, .. } => {
                let mut r = vec![0.0; self.n_vars];
                for (t, h) in hats.iter().enumerate() {
                    for &(k, w) in h {
                        r[k] += w * c[t];
                    }
                }
                r
            }
        }
    }

    /// Masses over `Ω` for variable values `x`.
    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        match &self.param {
            Parameterization::Direct => x.to_vec(),
            Parameterization::Layers { group_of, cumulative } => {
                // Group g receives Σ_{h ≥ g} x_h / cumulative_h per function.
                let mut per = vec![0.0; cumulative.len()];
                let mut acc = 0.0;
                for g in (0..cumulative.len()).rev() {
                    acc += x[g] / cumulative[g];
                    per[g] = acc;
                }
                group_of.iter().map(|&g| per[g]).collect()
            }
            Parameterization::Breakpoints { hats, .. } => {
                hats.iter().map(|h| h.iter().map(|&(k, w)| w * x[k]).sum()).collect()
            }
        }
    }

    /// `max ε` over the variables followed by a free `ε ≤ 1`.
    pub fn program(&self) -> LinearProgram {
        let nv = self.n_vars;
        let mut obj = vec![0.0; nv + 1];
        obj[nv] = 1.0;
        let mut lp = LinearProgram::new(obj);
        lp.lower_bounds[nv] = None;
        let ext = |r: &[f64], e: f64| {
            let mut v = r.to_vec();
            v.push(e);
            v
        };
        for r in &self.strict_rows {
            lp.add_ge(ext(r, -1.0), 0.0);
        }
        for r in &self.equal_rows {
            lp.add_eq(ext(r, 0.0), 0.0);
        }
        for r in &self.monotone_rows {
            lp.add_le(ext(r, 0.0), 0.0);
        }
        lp.add_eq(ext(&self.total_row, 0.0), 1.0);
        let mut cap = vec![0.0; nv + 1];
        cap[nv] = 1.0;
        lp.add_le(cap, 1.0);
        lp
    }

    /// Feasible variable region with the strict-statement slack fixed at `epsilon`.
    pub fn polytope(&self, epsilon: f64) -> PolytopeSpec {
        let mut spec = PolytopeSpec::new(self.n_vars);
        spec.nonneg = vec![true; self.n_vars];
        for r in &self.strict_rows {
            spec.ineq_constraints.push((r.iter().map(|x| -x).collect(), -epsilon));
        }
        for r in &self.equal_rows {
            spec.eq_constraints.push((r.clone(), 0.0));
        }
        for r in &self.monotone_rows {
            spec.ineq_constraints.push((r.clone(), 0.0));
        }
        spec.eq_constraints.push((self.total_row.clone(), 1.0));
        spec
    }
}

/// Mass margins of every uncertain statement under `masses`: strict and
/// intensity statements first (must be positive when compatible), then
/// indifference residuals (must be zero).
pub fn statement_margins(
    omega: &OmegaSample,
    perf: &PerformanceMatrix,
    prefs: &PreferenceInfo,
    cmp: Comparison,
    masses: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let (strict, equal) = statement_rows(omega, perf, prefs, cmp)?;
    let dot = |r: &Vec<f64>| r.iter().zip(masses).map(|(a, b)| a * b).sum::<f64>();
    Ok((strict.iter().map(dot).collect(), equal.iter().map(dot).collect()))
}

fn check_profile(omega: &OmegaSample, profile: &DistanceProfile) -> Result<()> {
    if omega.len() != profile.len() {
        return Err(Error::DimensionMismatch { expected: omega.len(), actual: profile.len() });
    }
    Ok(())
}
