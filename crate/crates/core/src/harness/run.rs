use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, MethodKind, MethodSpec, RefSpec};
use super::stage_seed;
use crate::baselines::{fit_logistic, logistic_pwi, training_pairs, uniform_masses};
use crate::dm::{dm_masses, elicit_pairs, DmDistributionSpec, DmKind};
use crate::error::{Error, Result};
use crate::indices::{pwi, rai, PwiMatrix, RaiMatrix};
use crate::inference::{
    self, acg_nl, resolve_reference, InferenceConfig, InferenceResult, ParametricFamily, ReferenceKind,
    ReferenceModel,
};
use crate::metrics::{correct_percentage, pwi_distance, rai_distance, DistanceRecord};
use crate::model::{
    random_nondominated_matrix, random_simplex_point, OmegaSample, Pair, PerformanceMatrix,
    PreferenceInfo, WeightVector,
};
use crate::sampler::{har_sample, sample_weight_space, PolytopeSpec, SamplerConfig};

/// Half-width of the box around the barycenter.
pub const NEIGHBOR_RADIUS: f64 = 0.05;
pub const NEIGHBOR_DRAWS: usize = 100;
pub const NEIGHBOR_COUNT: usize = 9;

/// Outcome of one method in one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRecord {
    pub method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distances: Option<DistanceRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_star: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compatible: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_weights: Option<WeightVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<ParametricFamily>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_at_boundary: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agreement_k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub masses: Option<Vec<f64>>,
}

impl MethodRecord {
    fn empty(method: String) -> Self {
        Self {
            method,
            distances: None,
            epsilon_star: None,
            compatible: None,
            reference_weights: None,
            family: None,
            lambda: None,
            lambda_at_boundary: None,
            agreement_k: None,
            error: None,
            masses: None,
        }
    }

    fn failed(method: String, e: &Error) -> Self {
        Self { error: Some(e.to_string()), ..Self::empty(method) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: u64,
    pub seed: u64,
    pub dm_kind: DmKind,
    pub dm_lambda: f64,
    pub statements: PreferenceInfo,
    pub methods: Vec<MethodRecord>,
}

impl RunRecord {
    pub fn method(&self, name: &str) -> Option<&MethodRecord> {
        self.methods.iter().find(|m| m.method == name)
    }
}

/// Draws up to `NEIGHBOR_DRAWS` points of the simplex within
/// `±NEIGHBOR_RADIUS` of `bar` coordinate-wise and keeps the
/// `NEIGHBOR_COUNT` closest to it, nearest first.
pub fn barycenter_neighbors(bar: &WeightVector, cfg: &SamplerConfig) -> Result<Vec<WeightVector>> {
    let n = bar.dim();
    let mut spec = PolytopeSpec::simplex(n);
    for (i, &b) in bar.as_slice().iter().enumerate() {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        spec.ineq_constraints.push((e.clone(), b + NEIGHBOR_RADIUS));
        if b - NEIGHBOR_RADIUS > 0.0 {
            e[i] = -1.0;
            spec.ineq_constraints.push((e, NEIGHBOR_RADIUS - b));
        }
    }
    let mut draws: Vec<(f64, WeightVector)> = har_sample(&spec, NEIGHBOR_DRAWS, cfg)?
        .into_iter()
        .map(|p| {
            let w = WeightVector::from_sampled(p);
            (crate::model::distance(&w, bar).expect("same dimension"), w)
        })
        .collect();
    draws.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(draws.into_iter().take(NEIGHBOR_COUNT).map(|(_, w)| w).collect())
}

struct RunContext<'a> {
    cfg: &'a ExperimentConfig,
    seed: u64,
    perf: PerformanceMatrix,
    omega: OmegaSample,
    prefs: PreferenceInfo,
    asked: Vec<Pair>,
    rai_dm: RaiMatrix,
    pwi_dm: PwiMatrix,
    references: BTreeMap<RefSpec, Result<ReferenceModel>>,
    neighbors: Option<Result<Vec<WeightVector>>>,
}

impl RunContext<'_> {
    fn reference(&mut self, r: RefSpec) -> Result<ReferenceModel> {
        if let Some(hit) = self.references.get(&r) {
            return hit.clone();
        }
        let resolved = match r {
            RefSpec::Neighbor(k) => self.neighbor(k),
            _ => resolve_reference(r.kind(), &self.omega, &self.perf, &self.prefs),
        };
        self.references.insert(r, resolved.clone());
        resolved
    }

    fn neighbor(&mut self, k: u8) -> Result<ReferenceModel> {
        if self.neighbors.is_none() {
            let sampler = self.cfg.sampler(stage_seed(self.seed, "neighbors"));
            let bar = match self.reference(RefSpec::Barycenter) {
                Ok(ReferenceModel::Fixed { weights, .. }) => Ok(weights),
                Ok(_) => unreachable!("the barycenter resolves to fixed weights"),
                Err(e) => Err(e),
            };
            self.neighbors = Some(bar.and_then(|bar| barycenter_neighbors(&bar, &sampler)));
        }
        let list = self.neighbors.as_ref().expect("just filled").as_ref().map_err(Clone::clone)?;
        list.get(usize::from(k) - 1)
            .map(|w| ReferenceModel::fixed(ReferenceKind::Custom, w.clone()))
            .ok_or_else(|| Error::Numerical(format!("only {} barycenter neighbours available", list.len())))
    }

    fn inference_config(&self, label: &str) -> InferenceConfig {
        InferenceConfig {
            dist_samples: self.cfg.dist_samples,
            grid_size: self.cfg.grid_size,
            sampler: self.cfg.sampler(stage_seed(self.seed, label)),
        }
    }

    fn distances(&self, name: &str, rai_m: Option<&RaiMatrix>, pwi_m: &PwiMatrix) -> Result<DistanceRecord> {
        Ok(DistanceRecord {
            method: name.to_string(),
            run_id: 0,
            rai_distance: rai_m.map(|r| rai_distance(&self.rai_dm, r, self.cfg.s)).transpose()?,
            pwi_distance: pwi_distance(&self.pwi_dm, pwi_m)?,
            correct_pct: correct_percentage(&self.pwi_dm, pwi_m, &self.asked)?,
        })
    }

    fn with_masses(&self, name: &str, res: InferenceResult) -> Result<MethodRecord> {
        let r = rai(&self.omega, &res.masses, &self.perf)?;
        let p = pwi(&self.omega, &res.masses, &self.perf)?;
        Ok(MethodRecord {
            distances: Some(self.distances(name, Some(&r), &p)?),
            epsilon_star: res.epsilon_star,
            compatible: Some(res.compatible),
            reference_weights: res.reference_weights,
            family: res.family,
            lambda: res.lambda,
            lambda_at_boundary: res.lambda_at_boundary,
            agreement_k: res.agreement_k,
            masses: self.cfg.log_masses.then(|| res.masses.as_slice().to_vec()),
            ..MethodRecord::empty(name.to_string())
        })
    }

    fn evaluate(&mut self, spec: &MethodSpec) -> Result<MethodRecord> {
        let name = spec.to_string();
        let icfg = self.inference_config(&name);
        let res = match spec.kind {
            MethodKind::Uniform => {
                let masses = uniform_masses(&self.omega);
                let mut rec = self.with_masses(&name, linear_free(&name, masses))?;
                rec.compatible = None;
                return Ok(rec);
            }
            MethodKind::Logistic => {
                let model = fit_logistic(&self.perf, &training_pairs(&self.prefs), self.cfg.logistic_ridge)?;
                let p = logistic_pwi(&model, &self.perf);
                return Ok(MethodRecord {
                    distances: Some(self.distances(&name, None, &p)?),
                    ..MethodRecord::empty(name)
                });
            }
            MethodKind::Ssor => inference::ssor(&self.omega, &self.perf, &self.prefs, &icfg)?,
            MethodKind::Acg | MethodKind::AcgPl | MethodKind::AcgNl => {
                let reference = self.reference(spec.effective_reference().expect("distance-based method"))?;
                match spec.kind {
                    MethodKind::Acg => inference::acg(&self.omega, &self.perf, &self.prefs, &reference, &icfg)?,
                    MethodKind::AcgPl => {
                        inference::acg_pl(&self.omega, &self.perf, &self.prefs, &reference, &icfg)?
                    }
                    _ => acg_nl(&self.omega, &self.perf, &self.prefs, &reference, &self.cfg.nl)?.result,
                }
            }
        };
        self.with_masses(&name, res)
    }
}

fn linear_free(name: &str, masses: crate::model::MassDistribution) -> InferenceResult {
    InferenceResult {
        method: name.to_string(),
        epsilon_star: None,
        compatible: true,
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

/// One replication: matrix, DM, elicitation, every configured method and
/// its distances to the DM. Method failures are recorded, not raised.
pub fn run_once(cfg: &ExperimentConfig, run_id: u64, seed: u64) -> Result<RunRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(stage_seed(seed, "matrix"));
    let perf = random_nondominated_matrix(cfg.m, cfg.n, &mut rng)?;
    let mut rng = ChaCha8Rng::seed_from_u64(stage_seed(seed, "dm-reference"));
    let u_ref = random_simplex_point(cfg.n, &mut rng);
    let omega = sample_weight_space(&perf, None, cfg.omega_size, &cfg.sampler(stage_seed(seed, "omega")))?;

    let mut rng = ChaCha8Rng::seed_from_u64(stage_seed(seed, "dm-lambda"));
    let lambda = cfg.dm.lambda.unwrap_or_else(|| cfg.dm.kind.draw_lambda(&mut rng, cfg.omega_size));
    let dm = DmDistributionSpec::new(cfg.dm.kind, lambda, u_ref);
    let dm_omega = dm.support(&omega)?;
    let dm_p = dm_masses(&dm, &dm_omega)?;
    let rai_dm = rai(&dm_omega, &dm_p, &perf)?;
    let pwi_dm = pwi(&dm_omega, &dm_p, &perf)?;
    let prefs = elicit_pairs(&perf, &omega, &dm_omega, &dm_p, cfg.z)?;
    let asked = prefs.uncertain_strict.iter().chain(&prefs.uncertain_indiff).copied().collect();

    let mut ctx = RunContext {
        cfg,
        seed,
        perf,
        omega,
        prefs,
        asked,
        rai_dm,
        pwi_dm,
        references: BTreeMap::new(),
        neighbors: None,
    };
    let methods = cfg
        .methods
        .iter()
        .map(|spec| {
            let mut rec = ctx.evaluate(spec).unwrap_or_else(|e| MethodRecord::failed(spec.to_string(), &e));
            if let Some(d) = rec.distances.as_mut() {
                d.run_id = run_id;
            }
            rec
        })
        .collect();
    Ok(RunRecord { run_id, seed, dm_kind: cfg.dm.kind, dm_lambda: lambda, statements: ctx.prefs, methods })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::run_seed;

    fn tiny(kind: DmKind, methods: &[&str]) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::standard(kind, 3);
        cfg.m = 4;
        cfg.n = 2;
        cfg.z = 2;
        cfg.runs = 1;
        cfg.omega_size = 50;
        cfg.dist_samples = 50;
        cfg.burn_in = 100;
        cfg.thinning = 2;
        cfg.log_masses = true;
        cfg.methods = methods.iter().map(|m| m.parse().unwrap()).collect();
        cfg
    }

    #[test]
    fn uniform_only() {
        let cfg = tiny(DmKind::Delta, &["uniform"]);
        let rec = run_once(&cfg, 0, run_seed(3, 0)).unwrap();
        let d = rec.methods[0].distances.as_ref().unwrap();
        assert!(d.pwi_distance >= 0.0);
        assert!((0.0..=1.0).contains(&d.correct_pct));
        assert_eq!(rec.statements.uncertain_strict.len() + rec.statements.uncertain_indiff.len(), 2);
    }

    #[test]
    fn deterministic_per_seed() {
        let cfg = tiny(DmKind::Delta, &["acg_nl"]);
        let a = run_once(&cfg, 4, run_seed(3, 4)).unwrap();
        let b = run_once(&cfg, 4, run_seed(3, 4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn all_methods_produce_valid_masses() {
        let cfg = tiny(
            DmKind::Normal,
            &["uniform", "logistic", "ssor", "acg", "acg_pl", "acg_nl", "acg_nl@conv", "acg_nl@unkn", "acg_pl@nbr9"],
        );
        for run in 0..3 {
            let rec = run_once(&cfg, run, run_seed(11, run)).unwrap();
            for m in &rec.methods {
                assert!(m.error.is_none(), "{}: {:?}", m.method, m.error);
                if let Some(p) = &m.masses {
                    assert_eq!(p.len(), 50);
                    assert!(p.iter().all(|&x| x >= 0.0));
                    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-8);
                }
                let d = m.distances.as_ref().unwrap();
                assert_eq!(d.rai_distance.is_some(), m.method != "logistic");
            }
        }
    }

    #[test]
    fn neighbours_stay_in_box() {
        let bar = WeightVector::new(vec![0.4, 0.3, 0.2, 0.1]).unwrap();
        let ns = barycenter_neighbors(&bar, &SamplerConfig::with_seed(2)).unwrap();
        assert_eq!(ns.len(), NEIGHBOR_COUNT);
        let mut last = 0.0;
        for w in &ns {
            let s: f64 = w.as_slice().iter().sum();
            assert!((s - 1.0).abs() < 1e-9);
            for (x, b) in w.as_slice().iter().zip(bar.as_slice()) {
                assert!(*x >= -1e-12 && (x - b).abs() <= NEIGHBOR_RADIUS + 1e-8);
            }
            let d = crate::model::distance(w, &bar).unwrap();
            assert!(d >= last);
            last = d;
        }
    }
}
