//! Mass distributions over sampled weighted-sum preference models, induced
//! from uncertain pairwise statements, with rank-acceptability and
//! pairwise-winning indices and a reproducible simulation harness.

pub mod baselines;
pub mod dm;
pub mod error;
pub mod harness;
pub mod indices;
pub mod inference;
pub mod lp;
pub mod metrics;
pub mod model;
pub mod sampler;

pub use error::{Error, Result};
pub use model::{
    MassDistribution, OmegaSample, Pair, PerformanceMatrix, PreferenceInfo, WeightVector,
};
