use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::DEFAULT_RIDGE;
use crate::dm::DmKind;
use crate::error::{Error, Result};
use crate::inference::{self, InferenceConfig, InferenceResult, NlConfig, ReferenceKind};
use crate::model::{OmegaSample, PerformanceMatrix, PreferenceInfo};
use crate::sampler::SamplerConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MethodKind {
    Uniform,
    Ssor,
    Logistic,
    Acg,
    AcgPl,
    AcgNl,
}

impl MethodKind {
    pub fn name(self) -> &'static str {
        match self {
            MethodKind::Uniform => "uniform",
            MethodKind::Ssor => "ssor",
            MethodKind::Logistic => "logistic",
            MethodKind::Acg => "acg",
            MethodKind::AcgPl => "acg_pl",
            MethodKind::AcgNl => "acg_nl",
        }
    }

    fn uses_reference(self) -> bool {
        matches!(self, MethodKind::Acg | MethodKind::AcgPl | MethodKind::AcgNl)
    }
}

/// Reference model selector of a method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RefSpec {
    Barycenter,
    ArithmeticMean,
    MostDiscriminant,
    ConvexCombination,
    Unknown,
    /// The k-th nearest (1-based) sampled neighbour of the barycenter.
    Neighbor(u8),
}

impl RefSpec {
    pub fn tag(self) -> String {
        match self {
            RefSpec::Barycenter => "bar".into(),
            RefSpec::ArithmeticMean => "arme".into(),
            RefSpec::MostDiscriminant => "mdisc".into(),
            RefSpec::ConvexCombination => "conv".into(),
            RefSpec::Unknown => "unkn".into(),
            RefSpec::Neighbor(k) => format!("nbr{k}"),
        }
    }

    pub fn kind(self) -> ReferenceKind {
        match self {
            RefSpec::Barycenter => ReferenceKind::Barycenter,
            RefSpec::ArithmeticMean => ReferenceKind::ArithmeticMean,
            RefSpec::MostDiscriminant => ReferenceKind::MostDiscriminant,
            RefSpec::ConvexCombination => ReferenceKind::ConvexCombination,
            RefSpec::Unknown => ReferenceKind::Unknown,
            RefSpec::Neighbor(_) => ReferenceKind::Custom,
        }
    }
}

impl FromStr for RefSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "bar" => RefSpec::Barycenter,
            "arme" => RefSpec::ArithmeticMean,
            "mdisc" => RefSpec::MostDiscriminant,
            "conv" => RefSpec::ConvexCombination,
            "unkn" => RefSpec::Unknown,
            _ => match s.strip_prefix("nbr").and_then(|k| k.parse::<u8>().ok()) {
                Some(k) if (1..=9).contains(&k) => RefSpec::Neighbor(k),
                _ => return Err(Error::Config(format!("unknown reference `{s}`"))),
            },
        })
    }
}

/// A method and, for distance-based methods, its reference model.
/// Written `kind` or `kind@ref`, e.g. `acg_nl@mdisc`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct MethodSpec {
    pub kind: MethodKind,
    pub reference: Option<RefSpec>,
}

impl MethodSpec {
    pub const fn new(kind: MethodKind) -> Self {
        Self { kind, reference: None }
    }

    pub const fn with_ref(kind: MethodKind, reference: RefSpec) -> Self {
        Self { kind, reference: Some(reference) }
    }

    /// Reference actually used; distance-based methods default to the barycenter.
    pub fn effective_reference(&self) -> Option<RefSpec> {
        if self.kind.uses_reference() {
            Some(self.reference.unwrap_or(RefSpec::Barycenter))
        } else {
            None
        }
    }

    /// Masses over `omega` for one problem. Logistic yields no masses and
    /// neighbour references exist only inside a simulation run.
    pub fn infer(
        &self,
        omega: &OmegaSample,
        perf: &PerformanceMatrix,
        prefs: &PreferenceInfo,
        cfg: &InferenceConfig,
        nl: &NlConfig,
    ) -> Result<InferenceResult> {
        let reference = match self.effective_reference() {
            Some(RefSpec::Neighbor(_)) => {
                return Err(Error::InvalidArgument("neighbour references are only available in simulations".into()))
            }
            Some(r) => Some(inference::resolve_reference(r.kind(), omega, perf, prefs)?),
            None => None,
        };
        let reference = reference.as_ref();
        match self.kind {
            MethodKind::Uniform => {
                if omega.is_empty() {
                    return Err(Error::EmptySample);
                }
                Ok(InferenceResult::uniform(omega.len()))
            }
            MethodKind::Logistic => {
                Err(Error::InvalidArgument("logistic yields pairwise probabilities, not masses".into()))
            }
            MethodKind::Ssor => inference::ssor(omega, perf, prefs, cfg),
            MethodKind::Acg => inference::acg(omega, perf, prefs, reference.expect("acg has a reference"), cfg),
            MethodKind::AcgPl => inference::acg_pl(omega, perf, prefs, reference.expect("acg_pl has a reference"), cfg),
            MethodKind::AcgNl => {
                Ok(inference::acg_nl(omega, perf, prefs, reference.expect("acg_nl has a reference"), nl)?.result)
            }
        }
    }

    pub fn has_rai(&self) -> bool {
        self.kind != MethodKind::Logistic
    }

    pub fn standard_set() -> Vec<MethodSpec> {
        [MethodKind::Uniform, MethodKind::Logistic, MethodKind::Ssor, MethodKind::Acg, MethodKind::AcgPl, MethodKind::AcgNl]
            .into_iter()
            .map(MethodSpec::new)
            .collect()
    }

    fn validate(&self) -> Result<()> {
        match (self.kind, self.reference) {
            (k, Some(_)) if !k.uses_reference() => {
                Err(Error::Config(format!("method `{}` takes no reference model", k.name())))
            }
            (MethodKind::Acg | MethodKind::AcgPl, Some(RefSpec::ConvexCombination | RefSpec::Unknown)) => {
                Err(Error::Config(format!("`{self}`: free reference models need the parametric method")))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.reference {
            None | Some(RefSpec::Barycenter) => f.write_str(self.kind.name()),
            Some(r) => write!(f, "{}@{}", self.kind.name(), r.tag()),
        }
    }
}

impl FromStr for MethodSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (k, r) = match s.split_once('@') {
            Some((k, r)) => (k, Some(r.parse::<RefSpec>()?)),
            None => (s, None),
        };
        let kind = match k {
            "uniform" => MethodKind::Uniform,
            "ssor" => MethodKind::Ssor,
            "logistic" => MethodKind::Logistic,
            "acg" => MethodKind::Acg,
            "acg_pl" => MethodKind::AcgPl,
            "acg_nl" => MethodKind::AcgNl,
            _ => return Err(Error::Config(format!("unknown method `{k}`"))),
        };
        let spec = MethodSpec { kind, reference: r };
        spec.validate()?;
        Ok(spec)
    }
}

impl TryFrom<String> for MethodSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<MethodSpec> for String {
    fn from(m: MethodSpec) -> Self {
        match m.reference {
            None => m.kind.name().to_string(),
            Some(r) => format!("{}@{}", m.kind.name(), r.tag()),
        }
    }
}

/// The simulated DM: its kind and either a fixed λ or a fresh draw per run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DmConfig {
    pub kind: DmKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

fn default_runs() -> usize {
    200
}
fn default_omega() -> usize {
    1_000
}
fn default_dist() -> usize {
    1_000
}
fn default_s() -> usize {
    3
}
fn default_grid() -> usize {
    3
}
fn default_ridge() -> f64 {
    DEFAULT_RIDGE
}
fn default_burn() -> usize {
    SamplerConfig::default().burn_in
}
fn default_thin() -> usize {
    SamplerConfig::default().thinning
}
fn default_methods() -> Vec<MethodSpec> {
    MethodSpec::standard_set()
}
fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub m: usize,
    pub n: usize,
    pub z: usize,
    pub seed: u64,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default = "default_omega")]
    pub omega_size: usize,
    #[serde(default = "default_dist")]
    pub dist_samples: usize,
    #[serde(default = "default_s")]
    pub s: usize,
    #[serde(default = "default_grid")]
    pub grid_size: usize,
    #[serde(default = "default_ridge")]
    pub logistic_ridge: f64,
    #[serde(default = "default_burn")]
    pub burn_in: usize,
    #[serde(default = "default_thin")]
    pub thinning: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub log_masses: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_methods")]
    pub methods: Vec<MethodSpec>,
    pub dm: DmConfig,
    #[serde(default)]
    pub nl: NlConfig,
}

impl ExperimentConfig {
    /// 8 alternatives, 4 criteria, 4 statements, every method.
    pub fn standard(kind: DmKind, seed: u64) -> Self {
        Self {
            m: 8,
            n: 4,
            z: 4,
            seed,
            runs: default_runs(),
            omega_size: default_omega(),
            dist_samples: default_dist(),
            s: default_s(),
            grid_size: default_grid(),
            logistic_ridge: DEFAULT_RIDGE,
            burn_in: default_burn(),
            thinning: default_thin(),
            workers: None,
            log_masses: false,
            output_dir: None,
            methods: MethodSpec::standard_set(),
            dm: DmConfig { kind, lambda: None },
            nl: NlConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.m < 2 || self.n < 2 {
            return bad(format!("need m >= 2 and n >= 2, got ({}, {})", self.m, self.n));
        }
        let pairs = self.m * (self.m - 1) / 2;
        if self.z == 0 || self.z > pairs {
            return bad(format!("z must be in 1..={pairs}, got {}", self.z));
        }
        if self.runs == 0 {
            return bad("runs must be positive".into());
        }
        if self.omega_size == 0 || self.dist_samples == 0 {
            return bad("omega_size and dist_samples must be positive".into());
        }
        if self.s == 0 || self.s > self.m {
            return bad(format!("s must be in 1..={}, got {}", self.m, self.s));
        }
        if self.grid_size < 2 {
            return bad("grid_size must be at least 2".into());
        }
        if !(self.logistic_ridge > 0.0) {
            return bad("logistic_ridge must be positive".into());
        }
        if self.thinning == 0 {
            return bad("thinning must be at least 1".into());
        }
        if self.workers == Some(0) {
            return bad("workers must be positive".into());
        }
        if self.methods.is_empty() {
            return bad("methods must not be empty".into());
        }
        for m in &self.methods {
            m.validate()?;
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].iter().any(|x| x.to_string() == m.to_string()) {
                return bad(format!("method `{m}` listed twice"));
            }
        }
        if self.dm.kind == DmKind::Roc && self.omega_size < 10 {
            return bad("the roc DM needs omega_size >= 10".into());
        }
        if let Some(l) = self.dm.lambda {
            self.dm.kind.check_range(l, self.omega_size).map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(())
    }

    pub fn sampler(&self, seed: u64) -> SamplerConfig {
        SamplerConfig { burn_in: self.burn_in, thinning: self.thinning, seed }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }
}
