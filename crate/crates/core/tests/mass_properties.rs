mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use smaa_induce::dm::{dm_masses, DmDistributionSpec, DmKind};
use smaa_induce::inference::{family_masses, InferenceConfig, ParametricFamily};
use smaa_induce::model::random_simplex_point;
use smaa_induce::sampler::{sample_weight_space, SamplerConfig};
use smaa_induce::PerformanceMatrix;

fn small_cfg(seed: u64) -> InferenceConfig {
    InferenceConfig { dist_samples: 200, sampler: SamplerConfig { burn_in: 500, thinning: 5, seed }, ..Default::default() }
}

#[test]
fn every_method_keeps_its_guarantees() {
    for seed in 0..12 {
        let inst = common::instance(seed, 6, 3, 200, 3 + (seed as usize % 4));
        if let Err(msg) = common::audit_methods(&inst, &small_cfg(seed)) {
            panic!("seed {seed}: {msg}");
        }
    }
}

#[test]
fn larger_statement_sets_stay_valid() {
    for seed in 100..104 {
        let inst = common::instance(seed, 6, 3, 150, 12);
        if let Err(msg) = common::audit_methods(&inst, &small_cfg(seed)) {
            panic!("seed {seed}: {msg}");
        }
    }
}

fn unit_matrix() -> PerformanceMatrix {
    PerformanceMatrix::from_rows(vec![vec![0.9, 0.1, 0.4], vec![0.2, 0.8, 0.5], vec![0.5, 0.5, 0.1]]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dm_masses_are_distributions(seed in any::<u64>(), kind_idx in 0usize..5, unit in 0.0f64..1.0) {
        let kind = DmKind::ALL[kind_idx];
        let perf = unit_matrix();
        let omega = sample_weight_space(&perf, None, 60, &SamplerConfig { burn_in: 50, thinning: 2, seed }).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let reference = random_simplex_point(3, &mut rng);
        let lambda = match kind {
            DmKind::Delta => 0.0,
            DmKind::Normal => 0.01 + 0.19 * unit,
            DmKind::Exponential => 8.0 + 5.0 * unit,
            DmKind::InverseDistance => 2.5 + 5.0 * unit,
            DmKind::Roc => (10.0 + 50.0 * unit).floor(),
        };
        let spec = DmDistributionSpec::new(kind, lambda, reference);
        let support = spec.support(&omega).unwrap();
        let p = dm_masses(&spec, &support).unwrap();
        prop_assert_eq!(p.len(), support.len());
        prop_assert!(p.as_slice().iter().all(|&x| x >= 0.0));
        prop_assert!((p.as_slice().iter().sum::<f64>() - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn family_masses_decay_with_distance(
        d in proptest::collection::vec(0.0f64..1.5, 1..40),
        lambda in 0.0f64..1e3,
        normal in any::<bool>(),
    ) {
        let family = if normal { ParametricFamily::Normal } else { ParametricFamily::Exponential };
        let p = family_masses(family, lambda, &d);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        for i in 0..d.len() {
            prop_assert!(p[i] >= 0.0);
            for j in 0..d.len() {
                if d[i] < d[j] {
                    prop_assert!(p[i] >= p[j]);
                }
            }
        }
    }
}
