use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use super::parametric::agreement_set;
use crate::lp;
use crate::model::{barycenter_of, OmegaSample, PerformanceMatrix, PreferenceInfo, WeightVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceKind {
    Barycenter,
    ArithmeticMean,
    MostDiscriminant,
    ConvexCombination,
    Unknown,
    /// A caller-supplied weight vector.
    Custom,
}

impl fmt::Display for ReferenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ReferenceKind::Barycenter => "barycenter",
            ReferenceKind::ArithmeticMean => "arithmetic_mean",
            ReferenceKind::MostDiscriminant => "most_discriminant",
            ReferenceKind::ConvexCombination => "convex_combination",
            ReferenceKind::Unknown => "unknown",
            ReferenceKind::Custom => "custom",
        };
        f.write_str(s)
    }
}

/// The model that masses decay away from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ReferenceModel {
    Fixed { kind: ReferenceKind, weights: WeightVector },
    /// `α·bar + β·arme + γ·mdisc` with free simplex coefficients.
    ConvexCombination { barycenter: WeightVector, arithmetic_mean: WeightVector, most_discriminant: WeightVector },
    /// Any point of the weight simplex.
    Unknown { dim: usize },
}

impl ReferenceModel {
    pub fn fixed(kind: ReferenceKind, weights: WeightVector) -> Self {
        ReferenceModel::Fixed { kind, weights }
    }

    pub fn kind(&self) -> ReferenceKind {
        match self {
            ReferenceModel::Fixed { kind, .. } => *kind,
            ReferenceModel::ConvexCombination { .. } => ReferenceKind::ConvexCombination,
            ReferenceModel::Unknown { .. } => ReferenceKind::Unknown,
        }
    }
}

/// Mean of the sampled functions that reproduce the uncertain statements
/// (or the most of them any function reproduces). Without statements this
/// is the barycenter of the whole sample.
fn compatible_barycenter(omega: &OmegaSample, perf: &PerformanceMatrix, prefs: &PreferenceInfo) -> Result<WeightVector> {
    let set = agreement_set(omega, perf, prefs)?;
    let members: Vec<WeightVector> =
        omega.functions().iter().zip(&set.members).filter(|(_, &m)| m).map(|(w, _)| w.clone()).collect();
    barycenter_of(&members)
}

fn most_discriminant(perf: &PerformanceMatrix, prefs: &PreferenceInfo) -> Result<WeightVector> {
    // Without certain statements the uncertain comparisons stand in for them.
    let certain = if prefs.has_certain() { prefs.clone() } else { prefs.uncertain_as_certain() };
    Ok(lp::compatibility_check(perf, &certain)?.weights)
}

/// Resolves `kind` to a concrete weight vector or to the free carrier that
/// the parametric optimizer searches over.
pub fn resolve_reference(
    kind: ReferenceKind,
    omega: &OmegaSample,
    perf: &PerformanceMatrix,
    prefs: &PreferenceInfo,
) -> Result<ReferenceModel> {
    let n = perf.num_criteria();
    Ok(match kind {
        ReferenceKind::Barycenter => ReferenceModel::fixed(kind, compatible_barycenter(omega, perf, prefs)?),
        ReferenceKind::Custom => {
            return Err(Error::InvalidArgument("a custom reference needs explicit weights".into()))
        }
        ReferenceKind::ArithmeticMean => ReferenceModel::fixed(kind, WeightVector::uniform(n)),
        ReferenceKind::MostDiscriminant => ReferenceModel::fixed(kind, most_discriminant(perf, prefs)?),
        ReferenceKind::ConvexCombination => ReferenceModel::ConvexCombination {
            barycenter: compatible_barycenter(omega, perf, prefs)?,
            arithmetic_mean: WeightVector::uniform(n),
            most_discriminant: most_discriminant(perf, prefs)?,
        },
        ReferenceKind::Unknown => ReferenceModel::Unknown { dim: n },
    })
}
