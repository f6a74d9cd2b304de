//! Inference of mass distributions over `Ω` from uncertain statements.

mod parametric;
mod problem;
mod reference;

pub use parametric::{
    acg_nl, agreement_set, family_masses, family_objective, AgreementSet, FamilyOptimum, NlConfig,
    NlOutcome, ParametricFamily,
};
pub use problem::{
    statement_margins, BreakpointGrid, Comparison, DistanceProfile, MassProblem, DISTANCE_TIE_TOL,
    UTILITY_TIE_TOL,
};
pub use reference::{resolve_reference, ReferenceKind, ReferenceModel};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{self, LpStatus, COMPATIBILITY_EPS};
use crate::model::{MassDistribution, OmegaSample, PerformanceMatrix, PreferenceInfo, WeightVector};
use crate::sampler::{self, SamplerConfig};

/// Settings shared by the LP-based methods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InferenceConfig {
    /// Number of distributions averaged into the barycenter.
    pub dist_samples: usize,
    /// Breakpoint count for the piecewise-linear method.
    pub grid_size: usize,
    pub sampler: SamplerConfig,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        Self { dist_samples: 1_000, grid_size: 3, sampler: SamplerConfig::default() }
    }
}

/// Structured outcome of one inference call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceResult {
    pub method: String,
    /// `None` when the LP is infeasible or the method has no LP.
    pub epsilon_star: Option<f64>,
    pub compatible: bool,
    pub reference: Option<ReferenceKind>,
    pub reference_weights: Option<WeightVector>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<ParametricFamily>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_at_boundary: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agreement_k: Option<usize>,
    pub masses: MassDistribution,
}

impl InferenceResult {
    fn linear(method: &str, epsilon_star: Option<f64>, compatible: bool, masses: MassDistribution) -> Self {
        Self {
            method: method.to_string(),
            epsilon_star,
            compatible,
            reference: None,
            reference_weights: None,
            family: None,
            lambda: None,
            lambda_at_boundary: None,
            objective: None,
            agreement_k: None,
            masses,
        }
    }

    /// Equal masses over `len` functions, with no LP behind them.
    pub fn uniform(len: usize) -> Self {
        Self::linear("uniform", None, true, MassDistribution::uniform(len))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("inference result serializes")
    }
}

fn solve_linear(method: &str, problem: &MassProblem, cfg: &InferenceConfig) -> Result<InferenceResult> {
    let out = lp::solve(&problem.program())?;
    match out.status {
        LpStatus::Optimal => {
            let x = out.solution.expect("optimal outcome has a solution");
            let nv = problem.num_vars();
            let eps = x[nv];
            if eps > COMPATIBILITY_EPS {
                let masses = match sampler::distribution_barycenter(problem, eps, cfg.dist_samples, &cfg.sampler) {
                    Ok(m) => m,
                    // A polytope pinned to a single point has that point as barycenter.
                    Err(Error::DegeneratePolytope { .. }) => {
                        MassDistribution::normalized(problem.expand(&x[..nv]))?
                    }
                    Err(e) => return Err(e),
                };
                Ok(InferenceResult::linear(method, Some(eps), true, masses))
            } else {
                let masses = MassDistribution::normalized(problem.expand(&x[..nv]))?;
                Ok(InferenceResult::linear(method, Some(eps), false, masses))
            }
        }
        LpStatus::Infeasible => Ok(InferenceResult::linear(
            method,
            None,
            false,
            MassDistribution::uniform(problem.num_functions()),
        )),
        LpStatus::Unbounded => Err(Error::Numerical(format!("{method} LP reported unbounded"))),
    }
}

fn require_nonempty(omega: &OmegaSample) -> Result<()> {
    if omega.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(())
}

/// Barycenter of the distributions compatible with the uncertain
/// statements, with no further structure imposed.
pub fn ssor(
    omega: &OmegaSample,
    perf: &PerformanceMatrix,
    prefs: &PreferenceInfo,
    cfg: &InferenceConfig,
) -> Result<InferenceResult> {
    require_nonempty(omega)?;
    let problem = MassProblem::ssor(omega, perf, prefs)?;
    solve_linear("ssor", &problem, cfg)
}

fn fixed_reference(reference: &ReferenceModel) -> Result<(ReferenceKind, &WeightVector)> {
    match reference {
        ReferenceModel::Fixed { kind, weights } => Ok((*kind, weights)),
        other => Err(Error::UnresolvedReference(other.kind().to_string())),
    }
}

/// Compatible distributions whose masses do not increase with the distance
/// to the reference model.
pub fn acg(
    omega: &OmegaSample,
    perf: &PerformanceMatrix,
    prefs: &PreferenceInfo,
    reference: &ReferenceModel,
    cfg: &InferenceConfig,
) -> Result<InferenceResult> {
    require_nonempty(omega)?;
    let (kind, weights) = fixed_reference(reference)?;
    let profile = DistanceProfile::new(omega, weights)?;
    let problem = MassProblem::acg(omega, perf, prefs, &profile)?;
    let mut res = solve_linear("acg", &problem, cfg)?;
    res.reference = Some(kind);
    res.reference_weights = Some(weights.clone());
    Ok(res)
}

/// Compatible distributions given by a non-increasing piecewise-linear
/// function of the distance to the reference model.
pub fn acg_pl(
    omega: &OmegaSample,
    perf: &PerformanceMatrix,
    prefs: &PreferenceInfo,
    reference: &ReferenceModel,
    cfg: &InferenceConfig,
) -> Result<InferenceResult> {
    require_nonempty(omega)?;
    let (kind, weights) = fixed_reference(reference)?;
    let profile = DistanceProfile::new(omega, weights)?;
    let problem = MassProblem::acg_pl(omega, perf, prefs, &profile, None, cfg.grid_size)?;
    let mut res = solve_linear("acg_pl", &problem, cfg)?;
    res.reference = Some(kind);
    res.reference_weights = Some(weights.clone());
    Ok(res)
}

/// [`acg_pl`] over explicit knot distances.
pub fn acg_pl_with_grid(
    omega: &OmegaSample,
    perf: &PerformanceMatrix,
    prefs: &PreferenceInfo,
    reference: &ReferenceModel,
    grid: BreakpointGrid,
    cfg: &InferenceConfig,
) -> Result<InferenceResult> {
    require_nonempty(omega)?;
    let (kind, weights) = fixed_reference(reference)?;
    let profile = DistanceProfile::new(omega, weights)?;
    let q = grid.len();
    let problem = MassProblem::acg_pl(omega, perf, prefs, &profile, Some(grid), q)?;
    let mut res = solve_linear("acg_pl", &problem, cfg)?;
    res.reference = Some(kind);
    res.reference_weights = Some(weights.clone());
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Provenance;

    fn omega(ws: &[&[f64]]) -> OmegaSample {
        OmegaSample::new(ws.iter().map(|w| WeightVector::new(w.to_vec()).unwrap()).collect(), Provenance::External)
            .unwrap()
    }

    fn fast() -> InferenceConfig {
        InferenceConfig { dist_samples: 2_000, grid_size: 3, sampler: SamplerConfig { burn_in: 200, thinning: 5, seed: 3 } }
    }

    // a = (1,0), b = (0,1): U1 = (1,0) prefers a, U2 = (0,1) prefers b.
    fn two_alts() -> PerformanceMatrix {
        PerformanceMatrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap()
    }

    #[test]
    fn ssor_two_point_instance() {
        let om = omega(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let prefs = PreferenceInfo { uncertain_strict: vec![(0, 1)], ..Default::default() };
        let problem = MassProblem::ssor(&om, &two_alts(), &prefs).unwrap();
        let out = lp::solve(&problem.program()).unwrap();
        let x = out.solution.unwrap();
        assert!((x[2] - 1.0).abs() < 1e-12);
        assert!((x[0] - 1.0).abs() < 1e-12 && x[1].abs() < 1e-12);
        let res = ssor(&om, &two_alts(), &prefs, &fast()).unwrap();
        assert!(res.compatible);
        assert_eq!(res.epsilon_star, Some(1.0));
        let p = res.masses.as_slice();
        assert!(p[0] > p[1]);
    }

    #[test]
    fn ssor_without_statements_is_near_uniform() {
        let om = omega(&[&[1.0, 0.0], &[0.0, 1.0], &[0.5, 0.5]]);
        let res = ssor(&om, &two_alts(), &PreferenceInfo::default(), &fast()).unwrap();
        for p in res.masses.as_slice() {
            assert!((p - 1.0 / 3.0).abs() < 0.03, "{p}");
        }
    }

    #[test]
    fn acg_equidistant_is_uniform() {
        let om = omega(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let r = ReferenceModel::fixed(ReferenceKind::Barycenter, WeightVector::uniform(2));
        let res = acg(&om, &two_alts(), &PreferenceInfo::default(), &r, &fast()).unwrap();
        assert_eq!(res.masses.as_slice(), &[0.5, 0.5]);
    }

    #[test]
    fn acg_monotone_in_distance() {
        let om = omega(&[&[0.5, 0.5], &[0.7, 0.3], &[1.0, 0.0]]);
        let r = ReferenceModel::fixed(ReferenceKind::Barycenter, WeightVector::uniform(2));
        let res = acg(&om, &two_alts(), &PreferenceInfo::default(), &r, &fast()).unwrap();
        let p = res.masses.as_slice();
        assert!(p[0] >= p[1] - 1e-12 && p[1] >= p[2] - 1e-12, "{p:?}");
    }

    #[test]
    fn interpolation_at_and_between_knots() {
        let grid = BreakpointGrid::equally_spaced(2.0, 3).unwrap();
        let v = [0.5, 0.3, 0.1];
        assert_eq!(grid.interpolate(&v, 1.0), 0.3);
        assert!((grid.interpolate(&v, 0.5) - 0.4).abs() < 1e-15);
        assert_eq!(grid.interpolate(&v, 2.0), 0.1);
        assert_eq!(grid.interpolate(&v, 0.0), 0.5);
    }

    #[test]
    fn incompatible_returns_lp_point_flagged() {
        // Only U1 prefers a; statements demand both a over b and b over a.
        let om = omega(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let prefs = PreferenceInfo { uncertain_strict: vec![(0, 1), (1, 0)], ..Default::default() };
        let res = ssor(&om, &two_alts(), &prefs, &fast()).unwrap();
        assert!(!res.compatible);
        assert!(res.epsilon_star.unwrap() <= 1e-9);
        let s: f64 = res.masses.as_slice().iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unresolved_reference_rejected() {
        let om = omega(&[&[1.0, 0.0]]);
        let r = ReferenceModel::Unknown { dim: 2 };
        let err = acg(&om, &two_alts(), &PreferenceInfo::default(), &r, &fast()).unwrap_err();
        assert!(matches!(err, Error::UnresolvedReference(_)));
    }

    #[test]
    fn result_serializes() {
        let r = InferenceResult::linear("ssor", Some(0.5), true, MassDistribution::uniform(2));
        let js = r.to_json();
        assert!(js.contains("\"method\":\"ssor\""));
        let back: InferenceResult = serde_json::from_str(&js).unwrap();
        assert_eq!(back, r);
    }
}
