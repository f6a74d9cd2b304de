use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use super::config::{DmConfig, ExperimentConfig, MethodKind, MethodSpec, RefSpec};
use super::report::{run_experiment, ExperimentReport};
use crate::dm::DmKind;
use crate::error::{Error, Result};

/// `(m, n)` pairs of the configurations suite.
pub const CONFIGURATIONS: [(usize, usize); 3] = [(5, 3), (8, 4), (12, 6)];
/// Statement counts of the z-sweep.
pub const Z_VALUES: [usize; 5] = [4, 9, 14, 19, 25];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteKind {
    /// Every reference model under every DM distribution.
    ReferenceModels,
    /// The barycenter against nine sampled neighbours of it.
    BarycenterNeighborhood,
    /// Problem sizes from `CONFIGURATIONS`.
    Configurations,
    /// Statement counts from `Z_VALUES`.
    ZSweep,
}

impl SuiteKind {
    pub const ALL: [SuiteKind; 4] =
        [SuiteKind::ReferenceModels, SuiteKind::BarycenterNeighborhood, SuiteKind::Configurations, SuiteKind::ZSweep];

    pub fn name(self) -> &'static str {
        match self {
            SuiteKind::ReferenceModels => "reference-models",
            SuiteKind::BarycenterNeighborhood => "barycenter-neighborhood",
            SuiteKind::Configurations => "configurations",
            SuiteKind::ZSweep => "z-sweep",
        }
    }
}

impl fmt::Display for SuiteKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SuiteKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown sensitivity suite `{s}`")))
    }
}

/// One experiment per cell of the suite, labelled.
#[derive(Debug)]
pub struct SuiteReport {
    pub kind: SuiteKind,
    pub parts: Vec<(String, Result<ExperimentReport>)>,
}

impl SuiteReport {
    pub fn part(&self, label: &str) -> Option<&ExperimentReport> {
        self.parts.iter().find(|(l, _)| l == label).and_then(|(_, r)| r.as_ref().ok())
    }

    fn method_names(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for rep in self.parts.iter().filter_map(|(_, r)| r.as_ref().ok()) {
            for m in &rep.config.methods {
                let s = m.to_string();
                if !out.contains(&s) {
                    out.push(s);
                }
            }
        }
        out
    }

    /// Methods as rows, `<label>_mean` / `<label>_std` column pairs per cell.
    pub fn write_metric_table<W: Write>(&self, metric: &str, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["method".to_string()];
        for (label, _) in &self.parts {
            header.push(format!("{label}_mean"));
            header.push(format!("{label}_std"));
        }
        w.write_record(&header)?;
        for name in self.method_names() {
            let mut row = vec![name.clone()];
            for (_, rep) in &self.parts {
                let cell = rep.as_ref().ok().and_then(|r| r.summary(metric).iter().find(|s| s.method == name));
                match cell {
                    Some(s) if s.n > 0 => {
                        row.push(s.mean.to_string());
                        row.push(s.std.to_string());
                    }
                    _ => row.extend([String::new(), String::new()]),
                }
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Methods as rows, the incompatibility percentage per cell.
    pub fn write_incompatible_table<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["method".to_string()];
        header.extend(self.parts.iter().map(|(l, _)| l.clone()));
        w.write_record(&header)?;
        for name in self.method_names() {
            let mut row = vec![name.clone()];
            for (_, rep) in &self.parts {
                let pct = rep.as_ref().ok().and_then(|r| r.incompatible_pct(&name));
                row.push(pct.map(|p| p.to_string()).unwrap_or_default());
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Each cell's full report in its own subdirectory, plus the combined
    /// tables. Failed cells leave an `error.txt`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        for (label, rep) in &self.parts {
            let sub = dir.join(label);
            match rep {
                Ok(r) => r.write_to(&sub)?,
                Err(e) => {
                    fs::create_dir_all(&sub)?;
                    fs::write(sub.join("error.txt"), format!("{e}\n"))?;
                }
            }
        }
        for metric in ["rai", "pwi", "correct"] {
            self.write_metric_table(metric, fs::File::create(dir.join(format!("{}_{metric}.csv", self.kind)))?)?;
        }
        self.write_incompatible_table(fs::File::create(dir.join(format!("{}_incompatible.csv", self.kind)))?)?;
        Ok(())
    }
}

fn reference_methods() -> Vec<MethodSpec> {
    let mut v: Vec<MethodSpec> = [RefSpec::Barycenter, RefSpec::ArithmeticMean, RefSpec::MostDiscriminant]
        .into_iter()
        .map(|r| MethodSpec::with_ref(MethodKind::AcgPl, r))
        .collect();
    v.extend(
        [
            RefSpec::Barycenter,
            RefSpec::ArithmeticMean,
            RefSpec::MostDiscriminant,
            RefSpec::ConvexCombination,
            RefSpec::Unknown,
        ]
        .into_iter()
        .map(|r| MethodSpec::with_ref(MethodKind::AcgNl, r)),
    );
    v
}

fn neighbourhood_methods() -> Vec<MethodSpec> {
    [MethodKind::AcgPl, MethodKind::AcgNl]
        .into_iter()
        .flat_map(|k| {
            std::iter::once(MethodSpec::with_ref(k, RefSpec::Barycenter))
                .chain((1..=9).map(move |i| MethodSpec::with_ref(k, RefSpec::Neighbor(i))))
        })
        .collect()
}

/// The cells of a suite as labelled configurations derived from `base`.
pub fn suite_configs(kind: SuiteKind, base: &ExperimentConfig) -> Vec<(String, ExperimentConfig)> {
    match kind {
        SuiteKind::ReferenceModels => DmKind::ALL
            .into_iter()
            .map(|dm| {
                let mut cfg = base.clone();
                cfg.dm = DmConfig { kind: dm, lambda: None };
                cfg.methods = reference_methods();
                (dm.name().to_string(), cfg)
            })
            .collect(),
        SuiteKind::BarycenterNeighborhood => {
            let mut cfg = base.clone();
            cfg.methods = neighbourhood_methods();
            vec![(base.dm.kind.name().to_string(), cfg)]
        }
        SuiteKind::Configurations => CONFIGURATIONS
            .into_iter()
            .map(|(m, n)| {
                let mut cfg = base.clone();
                cfg.m = m;
                cfg.n = n;
                (format!("m{m}_n{n}"), cfg)
            })
            .collect(),
        SuiteKind::ZSweep => Z_VALUES
            .into_iter()
            .map(|z| {
                let mut cfg = base.clone();
                cfg.z = z;
                (format!("z{z}"), cfg)
            })
            .collect(),
    }
}

/// Runs every cell of the suite; a failing cell does not stop the others.
pub fn sensitivity_suite(kind: SuiteKind, base: &ExperimentConfig) -> Result<SuiteReport> {
    base.validate()?;
    let parts = suite_configs(kind, base).into_iter().map(|(label, cfg)| (label, run_experiment(&cfg))).collect();
    Ok(SuiteReport { kind, parts })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::standard(DmKind::Exponential, 5);
        cfg.runs = 2;
        cfg.omega_size = 40;
        cfg.dist_samples = 20;
        cfg.burn_in = 50;
        cfg.thinning = 2;
        cfg.methods = vec!["uniform".parse().unwrap(), "acg_pl".parse().unwrap()];
        cfg
    }

    #[test]
    fn suite_names_parse() {
        for k in SuiteKind::ALL {
            assert_eq!(k.name().parse::<SuiteKind>().unwrap(), k);
        }
        assert!("nope".parse::<SuiteKind>().is_err());
    }

    #[test]
    fn cell_layouts() {
        let b = base();
        assert_eq!(suite_configs(SuiteKind::Configurations, &b).len(), 3);
        assert_eq!(suite_configs(SuiteKind::ZSweep, &b).len(), 5);
        let refs = suite_configs(SuiteKind::ReferenceModels, &b);
        assert_eq!(refs.len(), 5);
        assert_eq!(refs[0].1.methods.len(), 8);
        let nb = suite_configs(SuiteKind::BarycenterNeighborhood, &b);
        assert_eq!(nb[0].1.methods.len(), 20);
        for (_, cfg) in refs.iter().chain(&nb) {
            cfg.validate().unwrap();
        }
    }

    #[test]
    fn configurations_emit_three_tables() {
        let rep = sensitivity_suite(SuiteKind::Configurations, &base()).unwrap();
        assert_eq!(rep.parts.len(), 3);
        assert!(rep.parts.iter().all(|(_, r)| r.is_ok()));
        let dir = tempfile::tempdir().unwrap();
        rep.write_to(dir.path()).unwrap();
        let t = fs::read_to_string(dir.path().join("configurations_pwi.csv")).unwrap();
        assert!(t.starts_with("method,m5_n3_mean,m5_n3_std,m8_n4_mean"));
        assert!(dir.path().join("m12_n6/summary_pwi.csv").exists());
    }
}
