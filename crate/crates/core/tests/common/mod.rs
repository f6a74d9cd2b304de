#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use smaa_induce::dm::{dm_masses, elicit_pairs, DmDistributionSpec, DmKind};
use smaa_induce::indices::{PwiMatrix, RaiMatrix};
use smaa_induce::model::{random_nondominated_matrix, random_simplex_point};
use smaa_induce::sampler::{sample_weight_space, SamplerConfig};
use smaa_induce::{MassDistribution, OmegaSample, PerformanceMatrix, PreferenceInfo, WeightVector};

pub const TOL: f64 = 1e-12;

pub struct Instance {
    pub perf: PerformanceMatrix,
    pub omega: OmegaSample,
    pub prefs: PreferenceInfo,
    pub truth: WeightVector,
}

/// Random matrix, simplex sample, and `z` statements answered by a single
/// hidden weight vector. Odd seeds add one intensity statement whose first
/// pair the hidden vector confirms.
pub fn instance(seed: u64, m: usize, n: usize, omega_size: usize, z: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let perf = random_nondominated_matrix(m, n, &mut rng).unwrap();
    let truth = random_simplex_point(n, &mut rng);
    let omega = sample_weight_space(&perf, None, omega_size, &SamplerConfig::with_seed(rng.gen())).unwrap();
    let spec = DmDistributionSpec::new(DmKind::Delta, 0.0, truth.clone());
    let support = spec.support(&omega).unwrap();
    let masses = dm_masses(&spec, &support).unwrap();
    let mut prefs = elicit_pairs(&perf, &omega, &support, &masses, z).unwrap();
    if seed % 2 == 1 {
        let u = perf.utilities(&truth);
        let mut alts: Vec<usize> = (0..m).collect();
        alts.shuffle(&mut rng);
        let (a, b, c, d) = (alts[0], alts[1], alts[2], alts[3]);
        let first = if u[a] >= u[b] { (a, b) } else { (b, a) };
        prefs.uncertain_intensity.push((first, (c, d)));
    }
    Instance { perf, omega, prefs, truth }
}

pub fn random_masses(len: usize, rng: &mut impl Rng) -> MassDistribution {
    let raw: Vec<f64> = (0..len).map(|_| rng.gen::<f64>()).collect();
    MassDistribution::normalized(raw).unwrap()
}

fn utilities(perf: &PerformanceMatrix, w: &WeightVector) -> Vec<f64> {
    (0..perf.num_alternatives())
        .map(|a| perf.row(a).iter().zip(w.as_slice()).map(|(g, x)| g * x).sum())
        .collect()
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    if m == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(m - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, m - 1);
            out.push(q);
        }
    }
    out
}

/// Each function contributes its mass to the unique ordering of the
/// alternatives that lists them by decreasing utility, ties by index.
pub fn brute_rai(perf: &PerformanceMatrix, omega: &OmegaSample, p: &MassDistribution) -> Vec<Vec<f64>> {
    let m = perf.num_alternatives();
    let perms = permutations(m);
    let mut out = vec![vec![0.0; m]; m];
    for (w, &mass) in omega.functions().iter().zip(p.as_slice()) {
        let u = utilities(perf, w);
        let fits = |order: &Vec<usize>| {
            order.windows(2).all(|pair| {
                let (x, y) = (pair[0], pair[1]);
                u[x] - u[y] > TOL || ((u[x] - u[y]).abs() <= TOL && x < y)
            })
        };
        let matching: Vec<&Vec<usize>> = perms.iter().filter(|o| fits(o)).collect();
        assert_eq!(matching.len(), 1, "ambiguous ranking under tolerance");
        if mass == 0.0 {
            continue;
        }
        for (r, &a) in matching[0].iter().enumerate() {
            out[r][a] += mass;
        }
    }
    out
}

pub fn brute_pwi(perf: &PerformanceMatrix, omega: &OmegaSample, p: &MassDistribution) -> Vec<Vec<f64>> {
    let m = perf.num_alternatives();
    let mut out = vec![vec![0.0; m]; m];
    for (w, &mass) in omega.functions().iter().zip(p.as_slice()) {
        if mass == 0.0 {
            continue;
        }
        let u = utilities(perf, w);
        for a in 0..m {
            for b in 0..m {
                if a == b {
                    continue;
                }
                if u[a] - u[b] > TOL {
                    out[a][b] += mass;
                } else if (u[a] - u[b]).abs() <= TOL {
                    out[a][b] += 0.5 * mass;
                }
            }
        }
    }
    out
}

pub fn rai_distance_oracle(a: &RaiMatrix, b: &RaiMatrix, s: usize) -> f64 {
    let mut sum = 0.0;
    for r in 0..s {
        for x in 0..a.size() {
            sum += (a.get(r, x) - b.get(r, x)).abs();
        }
    }
    sum / s as f64
}

pub fn pwi_distance_oracle(a: &PwiMatrix, b: &PwiMatrix) -> f64 {
    let m = a.size();
    let mut sum = 0.0;
    for x in 0..m {
        for y in 0..m {
            if x != y {
                sum += (a.get(x, y) - b.get(x, y)).abs();
            }
        }
    }
    sum / (m * (m - 1)) as f64
}

pub fn correct_oracle(dm: &PwiMatrix, method: &PwiMatrix, excluded: &[(usize, usize)]) -> f64 {
    let m = dm.size();
    let mut good = 0;
    let mut total = 0;
    for a in 0..m {
        for b in a + 1..m {
            if excluded.iter().any(|&(x, y)| (x, y) == (a, b) || (x, y) == (b, a)) {
                continue;
            }
            total += 1;
            let agree = (dm.get(a, b) > 0.5 && method.get(a, b) > 0.5)
                || (dm.get(a, b) < 0.5 && method.get(a, b) < 0.5)
                || dm.get(a, b) == 0.5
                || method.get(a, b) == 0.5;
            if agree {
                good += 1;
            }
        }
    }
    good as f64 / total as f64
}

/// Discordant pairs between two rankings given best-first.
pub fn inversions(x: &[usize], y: &[usize]) -> usize {
    let pos = |order: &[usize]| {
        let mut p = vec![0; order.len()];
        for (i, &a) in order.iter().enumerate() {
            p[a] = i;
        }
        p
    };
    let (px, py) = (pos(x), pos(y));
    let m = x.len();
    let mut count = 0;
    for a in 0..m {
        for b in a + 1..m {
            if (px[a] < px[b]) != (py[a] < py[b]) {
                count += 1;
            }
        }
    }
    count
}

/// Mass margins recomputed from scratch: for every strict or intensity
/// statement the preferred side's mass minus the other side's, and for
/// every indifference the absolute imbalance.
pub fn margins(inst: &Instance, masses: &[f64], weak: bool) -> (Vec<f64>, Vec<f64>) {
    let us: Vec<Vec<f64>> = inst.omega.functions().iter().map(|w| utilities(&inst.perf, w)).collect();
    let holds = |x: f64| if weak { x >= -TOL } else { x > TOL };
    let mass_where = |f: &dyn Fn(&[f64]) -> f64| -> f64 {
        us.iter().zip(masses).filter(|(u, _)| holds(f(u))).map(|(_, &p)| p).sum()
    };
    let mut strict = Vec::new();
    for &(a, b) in &inst.prefs.uncertain_strict {
        strict.push(mass_where(&|u| u[a] - u[b]) - mass_where(&|u| u[b] - u[a]));
    }
    for &((a, b), (c, d)) in &inst.prefs.uncertain_intensity {
        strict.push(mass_where(&|u| u[a] - u[b]) - mass_where(&|u| u[c] - u[d]));
    }
    let indiff = inst
        .prefs
        .uncertain_indiff
        .iter()
        .map(|&(a, b)| (mass_where(&|u| u[a] - u[b]) - mass_where(&|u| u[b] - u[a])).abs())
        .collect();
    (strict, indiff)
}

pub fn euclid(a: &WeightVector, b: &WeightVector) -> f64 {
    a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Masses sorted by distance to `reference` never increase.
pub fn monotone_in_distance(omega: &OmegaSample, masses: &[f64], reference: &WeightVector, tol: f64) -> bool {
    let mut pts: Vec<(f64, f64)> =
        omega.functions().iter().zip(masses).map(|(w, &p)| (euclid(w, reference), p)).collect();
    pts.sort_by(|x, y| x.0.total_cmp(&y.0));
    pts.windows(2).all(|w| w[1].1 <= w[0].1 + tol)
}

/// Runs every inference method on `inst` and checks the structural
/// guarantees of the returned masses. Returns the first violation.
pub fn audit_methods(inst: &Instance, cfg: &smaa_induce::inference::InferenceConfig) -> Result<(), String> {
    use smaa_induce::inference::{acg, acg_nl, acg_pl, resolve_reference, ssor, NlConfig, ReferenceKind};

    let check_sum = |name: &str, p: &[f64]| -> Result<(), String> {
        let s: f64 = p.iter().sum();
        if (s - 1.0).abs() > 1e-8 {
            return Err(format!("{name}: masses sum to {s}"));
        }
        if let Some(x) = p.iter().find(|&&x| x < 0.0) {
            return Err(format!("{name}: negative mass {x}"));
        }
        Ok(())
    };
    let check_statements = |name: &str, p: &[f64], eps: Option<f64>, weak: bool| -> Result<(), String> {
        if !eps.is_some_and(|e| e > 0.0) {
            return Ok(());
        }
        let (strict, indiff) = margins(inst, p, weak);
        if let Some(x) = strict.iter().find(|&&x| x <= 0.0) {
            return Err(format!("{name}: compatible but a statement margin is {x}"));
        }
        if let Some(x) = indiff.iter().find(|&&x| x > 1e-8) {
            return Err(format!("{name}: compatible but an indifference is off by {x}"));
        }
        Ok(())
    };

    let r = ssor(&inst.omega, &inst.perf, &inst.prefs, cfg).map_err(|e| format!("ssor: {e}"))?;
    check_sum("ssor", r.masses.as_slice())?;
    check_statements("ssor", r.masses.as_slice(), r.epsilon_star, false)?;

    for kind in [ReferenceKind::Barycenter, ReferenceKind::ArithmeticMean, ReferenceKind::MostDiscriminant] {
        let reference = match resolve_reference(kind, &inst.omega, &inst.perf, &inst.prefs) {
            Ok(r) => r,
            // An incompatible promoted statement set has no discriminant model.
            Err(_) if kind == ReferenceKind::MostDiscriminant => continue,
            Err(e) => return Err(format!("{kind}: {e}")),
        };
        let smaa_induce::inference::ReferenceModel::Fixed { weights, .. } = &reference else {
            return Err(format!("{kind} did not resolve to fixed weights"));
        };
        for (name, res) in [
            ("acg", acg(&inst.omega, &inst.perf, &inst.prefs, &reference, cfg)),
            ("acg_pl", acg_pl(&inst.omega, &inst.perf, &inst.prefs, &reference, cfg)),
        ] {
            let res = res.map_err(|e| format!("{name}@{kind}: {e}"))?;
            let p = res.masses.as_slice();
            check_sum(name, p)?;
            if !monotone_in_distance(&inst.omega, p, weights, 1e-9) {
                return Err(format!("{name}@{kind}: masses increase with distance"));
            }
            check_statements(name, p, res.epsilon_star, true)?;
        }
        let nl = acg_nl(&inst.omega, &inst.perf, &inst.prefs, &reference, &NlConfig::default())
            .map_err(|e| format!("acg_nl@{kind}: {e}"))?;
        check_sum("acg_nl", nl.result.masses.as_slice())?;
        if !monotone_in_distance(&inst.omega, nl.result.masses.as_slice(), weights, 1e-12) {
            return Err(format!("acg_nl@{kind}: masses increase with distance"));
        }
    }
    Ok(())
}
