mod common;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use smaa_induce::indices::{pwi, rai, PwiMatrix, RaiMatrix};
use smaa_induce::metrics::{correct_percentage, pwi_distance, rai_distance};
use smaa_induce::model::{random_nondominated_matrix, random_simplex_point};
use smaa_induce::model::Provenance;
use smaa_induce::{MassDistribution, OmegaSample};

fn random_case(seed: u64) -> (smaa_induce::PerformanceMatrix, OmegaSample, MassDistribution) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.gen_range(2..=5);
    let n = rng.gen_range(2..=4);
    let size = rng.gen_range(1..=50);
    let perf = random_nondominated_matrix(m, n, &mut rng).unwrap();
    let omega = OmegaSample::new((0..size).map(|_| random_simplex_point(n, &mut rng)).collect(), Provenance::External)
        .unwrap();
    let p = if rng.gen_bool(0.2) { MassDistribution::uniform(size) } else { common::random_masses(size, &mut rng) };
    (perf, omega, p)
}

#[test]
fn indices_match_enumeration() {
    for seed in 0..100 {
        let (perf, omega, p) = random_case(seed);
        let r = rai(&omega, &p, &perf).unwrap();
        let q = pwi(&omega, &p, &perf).unwrap();
        let br = common::brute_rai(&perf, &omega, &p);
        let bq = common::brute_pwi(&perf, &omega, &p);
        let m = perf.num_alternatives();
        for x in 0..m {
            for y in 0..m {
                assert!((r.get(x, y) - br[x][y]).abs() <= 1e-12, "seed {seed}: rai[{x}][{y}]");
                if x != y {
                    assert!((q.get(x, y) - bq[x][y]).abs() <= 1e-12, "seed {seed}: pwi[{x}][{y}]");
                }
            }
        }
    }
}

#[test]
fn distances_match_direct_sums() {
    for seed in 0..100 {
        let (perf, omega, p) = random_case(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
        let other = common::random_masses(omega.len(), &mut rng);
        let (r1, r2) = (rai(&omega, &p, &perf).unwrap(), rai(&omega, &other, &perf).unwrap());
        let (p1, p2) = (pwi(&omega, &p, &perf).unwrap(), pwi(&omega, &other, &perf).unwrap());
        let m = perf.num_alternatives();
        for s in 1..=m {
            assert_eq!(rai_distance(&r1, &r2, s).unwrap(), common::rai_distance_oracle(&r1, &r2, s));
        }
        assert_eq!(pwi_distance(&p1, &p2).unwrap(), common::pwi_distance_oracle(&p1, &p2));
        let mut pairs: Vec<(usize, usize)> = (0..m).flat_map(|a| (a + 1..m).map(move |b| (a, b))).collect();
        pairs.shuffle(&mut rng);
        let z = rng.gen_range(0..pairs.len());
        let excluded: Vec<(usize, usize)> =
            pairs[..z].iter().map(|&(a, b)| if rng.gen_bool(0.5) { (b, a) } else { (a, b) }).collect();
        assert_eq!(correct_percentage(&p1, &p2, &excluded).unwrap(), common::correct_oracle(&p1, &p2, &excluded));
    }
}

#[test]
fn binary_distance_is_normalized_kendall_tau() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let m = 6;
    for _ in 0..100 {
        let mut x: Vec<usize> = (0..m).collect();
        let mut y = x.clone();
        x.shuffle(&mut rng);
        y.shuffle(&mut rng);
        let d = pwi_distance(&PwiMatrix::from_ranking(&x), &PwiMatrix::from_ranking(&y)).unwrap();
        let tau = common::inversions(&x, &y) as f64 / (m * (m - 1) / 2) as f64;
        assert_eq!(d, tau);
    }
}

fn pwi_strategy(m: usize) -> impl Strategy<Value = PwiMatrix> {
    proptest::collection::vec(0.0f64..=1.0, m * (m - 1) / 2).prop_map(move |v| {
        let mut p = PwiMatrix::zeros(m);
        let mut k = 0;
        for a in 0..m {
            for b in a + 1..m {
                p.set(a, b, v[k]);
                p.set(b, a, 1.0 - v[k]);
                k += 1;
            }
        }
        p
    })
}

fn rai_strategy(m: usize) -> impl Strategy<Value = RaiMatrix> {
    proptest::collection::vec(0.0f64..=1.0, m * m)
        .prop_map(move |v| RaiMatrix::from_rows(v.chunks(m).map(|c| c.to_vec()).collect()).unwrap())
}

proptest! {
    #[test]
    fn pwi_distance_is_a_metric(a in pwi_strategy(5), b in pwi_strategy(5), c in pwi_strategy(5)) {
        let d = |x: &PwiMatrix, y: &PwiMatrix| pwi_distance(x, y).unwrap();
        prop_assert_eq!(d(&a, &a), 0.0);
        prop_assert!((d(&a, &b) - d(&b, &a)).abs() <= 1e-15);
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-12);
    }

    #[test]
    fn rai_distance_is_a_pseudometric(a in rai_strategy(4), b in rai_strategy(4), c in rai_strategy(4), s in 1usize..=4) {
        let d = |x: &RaiMatrix, y: &RaiMatrix| rai_distance(x, y, s).unwrap();
        prop_assert!(d(&a, &b) >= 0.0);
        prop_assert!((d(&a, &b) - d(&b, &a)).abs() <= 1e-15);
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-12);
    }

    #[test]
    fn correct_share_ignores_relabeling(a in pwi_strategy(5), b in pwi_strategy(5), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut perm: Vec<usize> = (0..5).collect();
        perm.shuffle(&mut rng);
        let relabel = |p: &PwiMatrix| {
            let mut q = PwiMatrix::zeros(5);
            for x in 0..5 {
                for y in 0..5 {
                    if x != y {
                        q.set(perm[x], perm[y], p.get(x, y));
                    }
                }
            }
            q
        };
        let excluded = vec![(0, 3), (4, 1)];
        let moved: Vec<(usize, usize)> = excluded.iter().map(|&(x, y)| (perm[x], perm[y])).collect();
        prop_assert_eq!(
            correct_percentage(&a, &b, &excluded).unwrap(),
            correct_percentage(&relabel(&a), &relabel(&b), &moved).unwrap()
        );
    }

    #[test]
    fn indices_are_stochastic(seed in any::<u64>()) {
        let (perf, omega, p) = random_case(seed);
        let m = perf.num_alternatives();
        let r = rai(&omega, &p, &perf).unwrap();
        let q = pwi(&omega, &p, &perf).unwrap();
        for x in 0..m {
            let row: f64 = (0..m).map(|a| r.get(x, a)).sum();
            let col: f64 = (0..m).map(|k| r.get(k, x)).sum();
            prop_assert!((row - 1.0).abs() <= 1e-9);
            prop_assert!((col - 1.0).abs() <= 1e-9);
            for y in 0..m {
                if x != y {
                    prop_assert!((q.get(x, y) + q.get(y, x) - 1.0).abs() <= 1e-9);
                }
            }
        }
    }
}
