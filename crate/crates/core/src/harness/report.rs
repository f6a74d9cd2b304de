use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::run::{run_once, RunRecord};
use super::run_seed;
use crate::error::{Error, Result};
use crate::metrics::{sequential_ks, KsTable, DEFAULT_ALPHA};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub method: String,
    pub mean: f64,
    /// Sample standard deviation; 0 with fewer than two values.
    pub std: f64,
    pub n: usize,
    /// Runs in which the method produced no value.
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncompatibleSummary {
    pub method: String,
    pub incompatible: usize,
    pub runs: usize,
}

impl IncompatibleSummary {
    pub fn percentage(&self) -> f64 {
        if self.runs == 0 {
            0.0
        } else {
            100.0 * self.incompatible as f64 / self.runs as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    /// Sorted by run id.
    pub records: Vec<RunRecord>,
    pub rai: Vec<MetricSummary>,
    pub pwi: Vec<MetricSummary>,
    pub correct: Vec<MetricSummary>,
    pub incompatible: Vec<IncompatibleSummary>,
    pub ks_rai: Option<KsTable>,
    pub ks_pwi: Option<KsTable>,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

impl ExperimentReport {
    /// Aggregates records; their order does not matter.
    pub fn from_records(config: ExperimentConfig, mut records: Vec<RunRecord>) -> Result<Self> {
        records.sort_by_key(|r| r.run_id);
        let names: Vec<String> = config.methods.iter().map(|m| m.to_string()).collect();
        let samples = |pick: &dyn Fn(&crate::metrics::DistanceRecord) -> Option<f64>| -> Vec<(String, Vec<f64>)> {
            names
                .iter()
                .map(|name| {
                    let xs = records
                        .iter()
                        .filter_map(|r| r.method(name).and_then(|m| m.distances.as_ref()).and_then(pick))
                        .collect();
                    (name.clone(), xs)
                })
                .collect()
        };
        let rai_s = samples(&|d| d.rai_distance);
        let pwi_s = samples(&|d| Some(d.pwi_distance));
        let cor_s = samples(&|d| Some(d.correct_pct));
        let runs = records.len();
        let summarize = |s: &[(String, Vec<f64>)], skip_empty: bool| -> Vec<MetricSummary> {
            s.iter()
                .filter(|(_, xs)| !(skip_empty && xs.is_empty()))
                .map(|(name, xs)| {
                    let (mean, std) = mean_std(xs);
                    MetricSummary { method: name.clone(), mean, std, n: xs.len(), failures: runs - xs.len() }
                })
                .collect()
        };
        let rai_rows: Vec<(String, Vec<f64>)> = rai_s
            .into_iter()
            .zip(&config.methods)
            .filter(|(_, m)| m.has_rai())
            .map(|(s, _)| s)
            .collect();
        let incompatible = names
            .iter()
            .filter_map(|name| {
                let flags: Vec<bool> =
                    records.iter().filter_map(|r| r.method(name).and_then(|m| m.compatible)).collect();
                (!flags.is_empty()).then(|| IncompatibleSummary {
                    method: name.clone(),
                    incompatible: flags.iter().filter(|&&c| !c).count(),
                    runs: flags.len(),
                })
            })
            .collect();
        let ks = |s: &[(String, Vec<f64>)]| -> Result<Option<KsTable>> {
            let usable: Vec<(String, Vec<f64>)> = s.iter().filter(|(_, xs)| !xs.is_empty()).cloned().collect();
            if usable.len() < 2 {
                return Ok(None);
            }
            sequential_ks(&usable, DEFAULT_ALPHA).map(Some)
        };
        Ok(Self {
            rai: summarize(&rai_rows, false),
            pwi: summarize(&pwi_s, false),
            correct: summarize(&cor_s, false),
            incompatible,
            ks_rai: ks(&rai_rows)?,
            ks_pwi: ks(&pwi_s)?,
            config,
            records,
        })
    }

    pub fn summary(&self, metric: &str) -> &[MetricSummary] {
        match metric {
            "rai" => &self.rai,
            "pwi" => &self.pwi,
            "correct" => &self.correct,
            _ => &[],
        }
    }

    /// Mean of `metric` for `method`, if it has one.
    pub fn mean(&self, metric: &str, method: &str) -> Option<f64> {
        self.summary(metric).iter().find(|s| s.method == method).map(|s| s.mean)
    }

    pub fn incompatible_pct(&self, method: &str) -> Option<f64> {
        self.incompatible.iter().find(|s| s.method == method).map(IncompatibleSummary::percentage)
    }

    /// Distance samples of `metric` per method, in run order.
    pub fn samples(&self, metric: &str) -> Vec<(String, Vec<f64>)> {
        self.config
            .methods
            .iter()
            .map(|m| {
                let name = m.to_string();
                let xs = self
                    .records
                    .iter()
                    .filter_map(|r| r.method(&name).and_then(|x| x.distances.as_ref()))
                    .filter_map(|d| match metric {
                        "rai" => d.rai_distance,
                        "pwi" => Some(d.pwi_distance),
                        _ => Some(d.correct_pct),
                    })
                    .collect();
                (name, xs)
            })
            .collect()
    }

    pub fn write_summary_csv<W: Write>(rows: &[MetricSummary], writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["method", "mean", "std", "n", "failures"])?;
        for s in rows {
            w.write_record([s.method.clone(), fmt(s.mean), fmt(s.std), s.n.to_string(), s.failures.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_incompatible_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["method", "incompatible_pct", "incompatible", "runs"])?;
        for s in &self.incompatible {
            w.write_record([s.method.clone(), fmt(s.percentage()), s.incompatible.to_string(), s.runs.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes every table, `runs.jsonl` and the echoed config into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let create = |name: &str| -> Result<BufWriter<File>> { Ok(BufWriter::new(File::create(dir.join(name))?)) };
        Self::write_summary_csv(&self.rai, create("summary_rai.csv")?)?;
        Self::write_summary_csv(&self.pwi, create("summary_pwi.csv")?)?;
        Self::write_summary_csv(&self.correct, create("summary_correct.csv")?)?;
        self.write_incompatible_csv(create("summary_incompatible.csv")?)?;
        for (metric, table) in [("rai", &self.ks_rai), ("pwi", &self.ks_pwi)] {
            if let Some(t) = table {
                t.write_equal_csv(create(&format!("ks_{metric}_equal.csv"))?)?;
                t.write_greater_csv(create(&format!("ks_{metric}_greater.csv"))?)?;
            }
        }
        let mut runs = create("runs.jsonl")?;
        for r in &self.records {
            let line = serde_json::to_string(r).map_err(|e| Error::Parse(e.to_string()))?;
            writeln!(runs, "{line}")?;
        }
        runs.flush()?;
        fs::write(dir.join("config.toml"), self.config.to_toml())?;
        Ok(())
    }
}

fn fmt(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        x.to_string()
    }
}

/// Runs every replication of `cfg`, in parallel when `workers` allows, and
/// aggregates the results.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let job = || -> Result<Vec<RunRecord>> {
        (0..cfg.runs as u64).into_par_iter().map(|id| run_once(cfg, id, run_seed(cfg.seed, id))).collect()
    };
    let records = match cfg.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(job)?,
        None => job()?,
    };
    ExperimentReport::from_records(cfg.clone(), records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dm::DmKind;

    fn small() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::standard(DmKind::Exponential, 21);
        cfg.m = 5;
        cfg.n = 3;
        cfg.z = 3;
        cfg.runs = 4;
        cfg.omega_size = 60;
        cfg.dist_samples = 40;
        cfg.burn_in = 100;
        cfg.thinning = 2;
        cfg
    }

    #[test]
    fn sample_std_uses_n_minus_one() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_std(&[7.0]), (7.0, 0.0));
    }

    #[test]
    fn single_run_aggregate_is_the_run() {
        let mut cfg = small();
        cfg.runs = 1;
        let rep = run_experiment(&cfg).unwrap();
        for m in &cfg.methods {
            let name = m.to_string();
            let d = rep.records[0].method(&name).unwrap().distances.clone().unwrap();
            assert_eq!(rep.mean("pwi", &name), Some(d.pwi_distance));
            assert_eq!(rep.mean("correct", &name), Some(d.correct_pct));
            assert_eq!(rep.mean("rai", &name), d.rai_distance);
        }
    }

    #[test]
    fn order_and_workers_do_not_matter() {
        let cfg = small();
        let a = run_experiment(&cfg).unwrap();
        let mut shuffled = a.records.clone();
        shuffled.reverse();
        let b = ExperimentReport::from_records(cfg.clone(), shuffled).unwrap();
        assert_eq!(a, b);
        let mut one = cfg.clone();
        one.workers = Some(1);
        assert_eq!(run_experiment(&one).unwrap().records, a.records);
    }

    #[test]
    fn outputs_are_byte_identical_across_executions() {
        let cfg = small();
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        run_experiment(&cfg).unwrap().write_to(d1.path()).unwrap();
        run_experiment(&cfg).unwrap().write_to(d2.path()).unwrap();
        for f in ["summary_rai.csv", "summary_pwi.csv", "summary_correct.csv", "ks_pwi_equal.csv", "runs.jsonl", "config.toml"] {
            let a = fs::read(d1.path().join(f)).unwrap();
            let b = fs::read(d2.path().join(f)).unwrap();
            assert!(!a.is_empty(), "{f}");
            assert_eq!(a, b, "{f}");
        }
        let text = fs::read_to_string(d1.path().join("summary_pwi.csv")).unwrap();
        assert!(text.starts_with("method,mean,std,n,failures\n"));
        assert!(!text.contains("\nlogistic") || !fs::read_to_string(d1.path().join("summary_rai.csv")).unwrap().contains("logistic"));
    }
}
