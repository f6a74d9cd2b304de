//! Repeated simulation of an artificial decision maker, the configured
//! inference methods and their distances to the DM, plus the sensitivity
//! studies built on top.

mod config;
mod report;
mod run;
mod sensitivity;

pub use config::{DmConfig, ExperimentConfig, MethodKind, MethodSpec, RefSpec};
pub use report::{run_experiment, ExperimentReport, IncompatibleSummary, MetricSummary};
pub use run::{
    barycenter_neighbors, run_once, MethodRecord, RunRecord, NEIGHBOR_COUNT, NEIGHBOR_DRAWS, NEIGHBOR_RADIUS,
};
pub use sensitivity::{sensitivity_suite, SuiteKind, SuiteReport, CONFIGURATIONS, Z_VALUES};

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of run `run_id` under `master`.
pub fn run_seed(master: u64, run_id: u64) -> u64 {
    splitmix64(master ^ splitmix64(run_id))
}

/// Seed of the named stage inside a run.
pub fn stage_seed(run_seed: u64, label: &str) -> u64 {
    let h = label.bytes().fold(FNV_OFFSET, |h, b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME));
    splitmix64(run_seed ^ h)
}
