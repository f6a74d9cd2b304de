//! Simulated decision makers: mass distributions decaying away from a
//! reference model, the preference relation they induce, and selection
//! of the most informative pairs to ask about.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indices;
use crate::inference::{family_masses, DistanceProfile, ParametricFamily};
use crate::model::{MassDistribution, OmegaSample, Pair, PerformanceMatrix, PreferenceInfo, WeightVector};

/// Mass sums closer than this make the DM indifferent.
pub const RELATION_TIE_TOL: f64 = 1e-12;
const ZERO_DISTANCE: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DmKind {
    Delta,
    Normal,
    Exponential,
    InverseDistance,
    Roc,
}

impl DmKind {
    pub const ALL: [DmKind; 5] =
        [DmKind::Delta, DmKind::Normal, DmKind::Exponential, DmKind::InverseDistance, DmKind::Roc];

    pub fn name(self) -> &'static str {
        match self {
            DmKind::Delta => "delta",
            DmKind::Normal => "normal",
            DmKind::Exponential => "exponential",
            DmKind::InverseDistance => "inverse_distance",
            DmKind::Roc => "roc",
        }
    }

    /// Draws λ from the kind's simulation range. Delta has no parameter and
    /// gets 0.
    pub fn draw_lambda<R: Rng + ?Sized>(self, rng: &mut R, omega_size: usize) -> f64 {
        match self {
            DmKind::Delta => 0.0,
            DmKind::Normal => rng.gen_range(0.01..=0.2),
            DmKind::Exponential => rng.gen_range(8..=13) as f64,
            DmKind::InverseDistance => rng.gen_range(2.5..=7.5),
            DmKind::Roc => rng.gen_range(10..=100usize.min(omega_size).max(10)) as f64,
        }
    }

    /// Checks λ against the simulation range of the kind.
    pub fn check_range(self, lambda: f64, omega_size: usize) -> Result<()> {
        let ok = match self {
            DmKind::Delta => true,
            DmKind::Normal => (0.01..=0.2).contains(&lambda),
            DmKind::Exponential => lambda.fract() == 0.0 && (8.0..=13.0).contains(&lambda),
            DmKind::InverseDistance => (2.5..=7.5).contains(&lambda),
            DmKind::Roc => {
                lambda.fract() == 0.0 && (10.0..=100.0).contains(&lambda) && lambda <= omega_size as f64
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidLambda { kind: self.name(), lambda })
        }
    }
}

impl fmt::Display for DmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DmKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        DmKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown DM kind `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmDistributionSpec {
    pub kind: DmKind,
    pub lambda: f64,
    pub reference: WeightVector,
}

impl DmDistributionSpec {
    pub fn new(kind: DmKind, lambda: f64, reference: WeightVector) -> Self {
        Self { kind, lambda, reference }
    }

    /// Omega the DM's masses live on: for Delta, `Ω` with the reference
    /// appended; otherwise `Ω` itself.
    pub fn support(&self, omega: &OmegaSample) -> Result<OmegaSample> {
        match self.kind {
            DmKind::Delta => omega.with_appended(self.reference.clone()),
            _ => Ok(omega.clone()),
        }
    }
}

fn invalid(kind: DmKind, lambda: f64) -> Error {
    Error::InvalidLambda { kind: kind.name(), lambda }
}

/// DM masses over `omega`. For Delta the reference must be an element of
/// `omega` (see [`DmDistributionSpec::support`]).
pub fn dm_masses(spec: &DmDistributionSpec, omega: &OmegaSample) -> Result<MassDistribution> {
    let profile = DistanceProfile::new(omega, &spec.reference)?;
    let d = profile.distances();
    let lambda = spec.lambda;
    if !lambda.is_finite() {
        return Err(invalid(spec.kind, lambda));
    }
    let masses = match spec.kind {
        DmKind::Delta => {
            let hits = d.iter().filter(|&&x| x <= ZERO_DISTANCE).count();
            if hits == 0 {
                return Err(Error::InvalidArgument("the delta reference is not an element of the sample".into()));
            }
            d.iter().map(|&x| if x <= ZERO_DISTANCE { 1.0 / hits as f64 } else { 0.0 }).collect()
        }
        DmKind::Normal => {
            if !(lambda > 0.0) {
                return Err(invalid(spec.kind, lambda));
            }
            family_masses(ParametricFamily::Normal, lambda, d)
        }
        DmKind::Exponential => {
            if !(lambda >= 0.0) {
                return Err(invalid(spec.kind, lambda));
            }
            family_masses(ParametricFamily::Exponential, lambda, d)
        }
        DmKind::InverseDistance => {
            if !(lambda >= 0.0) {
                return Err(invalid(spec.kind, lambda));
            }
            inverse_distance(d, lambda)
        }
        DmKind::Roc => {
            if !(lambda >= 1.0) || lambda.fract() != 0.0 || lambda > d.len() as f64 {
                return Err(invalid(spec.kind, lambda));
            }
            let k = lambda as usize;
            let centroid = roc_weights(k);
            let mut masses = vec![0.0; d.len()];
            for (h, t) in profile.ascending_order().into_iter().take(k).enumerate() {
                masses[t] = centroid[h];
            }
            masses
        }
    };
    MassDistribution::normalized(masses)
}

fn inverse_distance(d: &[f64], lambda: f64) -> Vec<f64> {
    let min_pos = d.iter().copied().filter(|&x| x > 0.0).fold(f64::INFINITY, f64::min);
    if !min_pos.is_finite() {
        return vec![1.0 / d.len() as f64; d.len()];
    }
    let floor = min_pos * 1e-6;
    let logs: Vec<f64> = d.iter().map(|&x| -lambda * x.max(floor).ln()).collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    logs.iter().map(|&l| (l - top).exp()).collect()
}

/// Rank-order-centroid weights of `k` items: `(1/k) Σ_{j=h}^{k} 1/j`.
pub fn roc_weights(k: usize) -> Vec<f64> {
    let mut out = vec![0.0; k];
    let mut acc = 0.0;
    for h in (1..=k).rev() {
        acc += 1.0 / h as f64;
        out[h - 1] = acc / k as f64;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    APreferred,
    BPreferred,
    Indifferent,
}

/// Compares the mass of models with `U(a) ≥ U(b)` against the mass of
/// models with `U(b) ≥ U(a)`.
pub fn dm_relation(
    masses: &MassDistribution,
    omega: &OmegaSample,
    perf: &PerformanceMatrix,
    (a, b): Pair,
) -> Result<Relation> {
    if masses.len() != omega.len() {
        return Err(Error::DimensionMismatch { expected: omega.len(), actual: masses.len() });
    }
    let mut ab = 0.0;
    let mut ba = 0.0;
    for (w, &p) in omega.functions().iter().zip(masses.as_slice()) {
        let diff = perf.utility(a, w) - perf.utility(b, w);
        if diff >= -indices::TIE_TOL {
            ab += p;
        }
        if diff <= indices::TIE_TOL {
            ba += p;
        }
    }
    Ok(if (ab - ba).abs() <= RELATION_TIE_TOL {
        Relation::Indifferent
    } else if ab > ba {
        Relation::APreferred
    } else {
        Relation::BPreferred
    })
}

/// The `z` unordered pairs whose uniform-mass winning indices are closest
/// to a coin flip, as `(min, max)` index pairs.
pub fn most_informative_pairs(perf: &PerformanceMatrix, omega: &OmegaSample, z: usize) -> Result<Vec<Pair>> {
    let m = perf.num_alternatives();
    let total = m * (m - 1) / 2;
    if z == 0 || z > total {
        return Err(Error::InvalidArgument(format!("z must be in 1..={total}, got {z}")));
    }
    let p = indices::pwi(omega, &MassDistribution::uniform(omega.len()), perf)?;
    let mut pairs: Vec<(f64, Pair)> = Vec::with_capacity(total);
    for a in 0..m {
        for b in a + 1..m {
            pairs.push(((p.get(a, b) - p.get(b, a)).abs(), (a, b)));
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    Ok(pairs.into_iter().take(z).map(|(_, pr)| pr).collect())
}

/// Asks the DM about the `z` most informative pairs and records the
/// answers as uncertain statements.
pub fn elicit_pairs(
    perf: &PerformanceMatrix,
    omega: &OmegaSample,
    dm_omega: &OmegaSample,
    dm_masses: &MassDistribution,
    z: usize,
) -> Result<PreferenceInfo> {
    let mut prefs = PreferenceInfo::default();
    for (a, b) in most_informative_pairs(perf, omega, z)? {
        match dm_relation(dm_masses, dm_omega, perf, (a, b))? {
            Relation::APreferred => prefs.uncertain_strict.push((a, b)),
            Relation::BPreferred => prefs.uncertain_strict.push((b, a)),
            Relation::Indifferent => prefs.uncertain_indiff.push((a, b)),
        }
    }
    Ok(prefs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Provenance;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn omega(ws: &[&[f64]]) -> OmegaSample {
        OmegaSample::new(ws.iter().map(|w| WeightVector::new(w.to_vec()).unwrap()).collect(), Provenance::External)
            .unwrap()
    }

    fn spec(kind: DmKind, lambda: f64, r: &[f64]) -> DmDistributionSpec {
        DmDistributionSpec::new(kind, lambda, WeightVector::new(r.to_vec()).unwrap())
    }

    #[test]
    fn roc_two_of_three() {
        let om = omega(&[&[0.9, 0.1], &[0.5, 0.5], &[0.6, 0.4]]);
        let p = dm_masses(&spec(DmKind::Roc, 2.0, &[0.5, 0.5]), &om).unwrap();
        // Sorted by distance: index 1, 2, 0.
        assert_eq!(p.as_slice(), &[0.0, 0.75, 0.25]);
    }

    #[test]
    fn normal_symmetric_halves() {
        let om = omega(&[&[0.7, 0.3], &[0.3, 0.7]]);
        let p = dm_masses(&spec(DmKind::Normal, 0.1, &[0.5, 0.5]), &om).unwrap();
        assert_eq!(p.as_slice(), &[0.5, 0.5]);
    }

    #[test]
    fn inverse_distance_one_and_three() {
        let w = inverse_distance(&[1.0, 3.0], 1.0);
        let s: f64 = w.iter().sum();
        assert!((w[0] / s - 0.75).abs() < 1e-15);
        assert!((w[1] / s - 0.25).abs() < 1e-15);
    }

    #[test]
    fn inverse_distance_clamps_zero() {
        let w = inverse_distance(&[0.0, 0.5], 2.0);
        assert!(w.iter().all(|x| x.is_finite()));
        assert!(w[0] > w[1] * 1e10);
    }

    #[test]
    fn delta_needs_support() {
        let om = omega(&[&[0.7, 0.3], &[0.3, 0.7]]);
        let s = spec(DmKind::Delta, 0.0, &[0.6, 0.4]);
        assert!(dm_masses(&s, &om).is_err());
        let sup = s.support(&om).unwrap();
        let p = dm_masses(&s, &sup).unwrap();
        assert_eq!(p.as_slice(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn lambda_validation() {
        let om = omega(&[&[0.7, 0.3]]);
        assert!(matches!(dm_masses(&spec(DmKind::Normal, 0.0, &[0.5, 0.5]), &om), Err(Error::InvalidLambda { .. })));
        assert!(dm_masses(&spec(DmKind::Roc, 2.0, &[0.5, 0.5]), &om).is_err());
        assert!(DmKind::Roc.check_range(50.0, 40).is_err());
        assert!(DmKind::Exponential.check_range(8.5, 1000).is_err());
        assert!(DmKind::InverseDistance.check_range(5.0, 1000).is_ok());
    }

    #[test]
    fn drawn_lambdas_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for kind in DmKind::ALL {
            for _ in 0..200 {
                let l = kind.draw_lambda(&mut rng, 1000);
                kind.check_range(l, 1000).unwrap();
            }
        }
    }

    #[test]
    fn roc_full_is_centroid() {
        let w = roc_weights(3);
        assert!((w[0] - 11.0 / 18.0).abs() < 1e-15);
        assert!((w[1] - 5.0 / 18.0).abs() < 1e-15);
        assert!((w[2] - 2.0 / 18.0).abs() < 1e-15);
    }

    #[test]
    fn relation_cases() {
        let perf = PerformanceMatrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let om = omega(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let uni = MassDistribution::uniform(2);
        assert_eq!(dm_relation(&uni, &om, &perf, (0, 1)).unwrap(), Relation::Indifferent);
        let delta = MassDistribution::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(dm_relation(&delta, &om, &perf, (0, 1)).unwrap(), Relation::APreferred);
        assert_eq!(dm_relation(&delta, &om, &perf, (1, 0)).unwrap(), Relation::BPreferred);
    }

    #[test]
    fn coin_flip_pair_first() {
        let perf = PerformanceMatrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.9, 0.05]]).unwrap();
        let om = omega(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let pairs = most_informative_pairs(&perf, &om, 3).unwrap();
        assert_eq!(pairs[0], (0, 1));
        assert_eq!(most_informative_pairs(&perf, &om, 1).unwrap().len(), 1);
        assert!(most_informative_pairs(&perf, &om, 4).is_err());
    }
}
