use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use smaa_induce::baselines::{fit_logistic, logistic_pwi, training_pairs};
use smaa_induce::harness::{run_experiment, sensitivity_suite, ExperimentConfig, MethodKind, MethodSpec, SuiteKind};
use smaa_induce::indices::{pwi, rai};
use smaa_induce::inference::{InferenceConfig, NlConfig};
use smaa_induce::metrics::{ks_equal, ks_greater, read_sample_csv, DEFAULT_ALPHA};
use smaa_induce::sampler::{sample_weight_space, SamplerConfig};
use smaa_induce::{Error, MassDistribution, OmegaSample, PerformanceMatrix, PreferenceInfo, Result};

#[derive(Parser)]
#[command(name = "smaa-induce", version, about = "Induce mass distributions over sampled preference models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the simulation described by a config file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run one of the sensitivity suites on top of a base config.
    Sensitivity {
        #[arg(long)]
        kind: String,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        runs: Option<usize>,
    },
    /// Infer masses for one problem.
    Infer {
        /// Performance matrix CSV (first column labels, header with criteria).
        #[arg(long)]
        performance: PathBuf,
        /// Preference statements as JSON or TOML.
        #[arg(long)]
        preferences: PathBuf,
        /// Method tag, e.g. `ssor`, `acg_pl@arme`, `acg_nl@unkn`.
        #[arg(long, default_value = "acg_nl")]
        method: String,
        /// Weight sample CSV; sampled from the preferences when absent.
        #[arg(long)]
        omega: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        omega_size: usize,
        #[arg(long, default_value_t = 1000)]
        dist_samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Rank acceptability and pairwise winning indices of given masses.
    Indices {
        #[arg(long)]
        performance: PathBuf,
        #[arg(long)]
        omega: PathBuf,
        /// CSV with a `mass` column; uniform when absent.
        #[arg(long)]
        masses: Option<PathBuf>,
        #[arg(long)]
        output: PathBuf,
    },
    /// Two-sample Kolmogorov-Smirnov test on two distance samples.
    Kstest {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        column: Option<String>,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t = Variant::Equal)]
        variant: Variant,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Equal,
    Greater,
}

fn config_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Config(format!("{}: {e}", path.display()))
}

fn load_config(path: &Path, runs: Option<usize>) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(r) = runs {
        cfg.runs = r;
        cfg.validate()?;
    }
    Ok(cfg)
}

fn output_dir(cli: Option<PathBuf>, cfg: &ExperimentConfig) -> Result<PathBuf> {
    cli.or_else(|| cfg.output_dir.clone()).ok_or_else(|| Error::Config("no output directory given".into()))
}

fn load_preferences(path: &Path) -> Result<PreferenceInfo> {
    let text = fs::read_to_string(path).map_err(|e| config_err(path, e))?;
    let prefs: PreferenceInfo = if path.extension().is_some_and(|e| e == "toml") {
        toml::from_str(&text).map_err(|e| config_err(path, e))?
    } else {
        serde_json::from_str(&text).map_err(|e| config_err(path, e))?
    };
    Ok(prefs)
}

fn read_masses(path: &Path) -> Result<MassDistribution> {
    let xs = read_sample_csv(File::open(path)?, Some("mass"))?;
    MassDistribution::new(xs)
}

fn write_masses(path: &Path, masses: &MassDistribution) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["mass"])?;
    for m in masses.as_slice() {
        w.write_record([m.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn create(path: PathBuf) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn simulate(config: &Path, output: Option<PathBuf>, runs: Option<usize>, workers: Option<usize>) -> Result<()> {
    let mut cfg = load_config(config, runs)?;
    if workers.is_some() {
        cfg.workers = workers;
        cfg.validate()?;
    }
    let dir = output_dir(output, &cfg)?;
    let report = run_experiment(&cfg)?;
    report.write_to(&dir)?;
    let mut out = io::stdout().lock();
    writeln!(out, "method,pwi_mean,correct_mean")?;
    for (p, c) in report.pwi.iter().zip(&report.correct) {
        writeln!(out, "{},{:.4},{:.4}", p.method, p.mean, c.mean)?;
    }
    Ok(())
}

fn sensitivity(kind: &str, config: &Path, output: Option<PathBuf>, runs: Option<usize>) -> Result<()> {
    let kind: SuiteKind = kind.parse()?;
    let cfg = load_config(config, runs)?;
    let dir = output_dir(output, &cfg)?;
    let report = sensitivity_suite(kind, &cfg)?;
    report.write_to(&dir)?;
    let failed: Vec<&str> = report.parts.iter().filter(|(_, r)| r.is_err()).map(|(l, _)| l.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Error::Numerical(format!("suite cells failed: {}", failed.join(", "))))
    }
}

#[allow(clippy::too_many_arguments)]
fn infer(
    performance: &Path,
    preferences: &Path,
    method: &str,
    omega: Option<PathBuf>,
    omega_size: usize,
    dist_samples: usize,
    seed: u64,
    output: &Path,
) -> Result<()> {
    let spec: MethodSpec = method.parse()?;
    let perf = PerformanceMatrix::load(performance)?;
    let prefs = load_preferences(preferences)?;
    prefs.validate(perf.num_alternatives())?;
    let omega = match omega {
        Some(p) => OmegaSample::read_csv(File::open(&p)?)?,
        None => sample_weight_space(&perf, Some(&prefs), omega_size, &SamplerConfig::with_seed(seed))?,
    };
    fs::create_dir_all(output)?;
    fs::write(output.join("omega.csv"), {
        let mut buf = Vec::new();
        omega.write_csv(&mut buf)?;
        buf
    })?;
    let labels = perf.alternative_labels().to_vec();
    let icfg = InferenceConfig {
        dist_samples,
        sampler: SamplerConfig::with_seed(seed.wrapping_add(1)),
        ..InferenceConfig::default()
    };
    if spec.kind == MethodKind::Logistic {
        let model = fit_logistic(&perf, &training_pairs(&prefs), smaa_induce::baselines::DEFAULT_RIDGE)?;
        logistic_pwi(&model, &perf).write_csv(create(output.join("pwi.csv"))?, &labels)?;
        fs::write(output.join("result.json"), model.to_json())?;
        return Ok(());
    }
    let result = spec.infer(&omega, &perf, &prefs, &icfg, &NlConfig::default())?;
    write_masses(&output.join("masses.csv"), &result.masses)?;
    rai(&omega, &result.masses, &perf)?.write_csv(create(output.join("rai.csv"))?, &labels)?;
    pwi(&omega, &result.masses, &perf)?.write_csv(create(output.join("pwi.csv"))?, &labels)?;
    fs::write(output.join("result.json"), result.to_json())?;
    if !result.compatible {
        eprintln!("warning: statements are not fully compatible with {method}");
    }
    Ok(())
}

fn indices(performance: &Path, omega: &Path, masses: Option<PathBuf>, output: &Path) -> Result<()> {
    let perf = PerformanceMatrix::load(performance)?;
    let omega = OmegaSample::read_csv(File::open(omega)?)?;
    let masses = match masses {
        Some(p) => read_masses(&p)?,
        None => MassDistribution::uniform(omega.len()),
    };
    fs::create_dir_all(output)?;
    let labels = perf.alternative_labels().to_vec();
    rai(&omega, &masses, &perf)?.write_csv(create(output.join("rai.csv"))?, &labels)?;
    pwi(&omega, &masses, &perf)?.write_csv(create(output.join("pwi.csv"))?, &labels)?;
    Ok(())
}

fn kstest(a: &Path, b: &Path, column: Option<&str>, alpha: f64, variant: Variant) -> Result<()> {
    let s1 = read_sample_csv(File::open(a)?, column)?;
    let s2 = read_sample_csv(File::open(b)?, column)?;
    let res = match variant {
        Variant::Equal => ks_equal(&s1, &s2, alpha)?,
        Variant::Greater => ks_greater(&s1, &s2, alpha)?,
    };
    println!("{}", serde_json::to_string(&res).map_err(|e| Error::Parse(e.to_string()))?);
    Ok(())
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Simulate { config, output, runs, workers } => simulate(&config, output, runs, workers),
        Command::Sensitivity { kind, config, output, runs } => sensitivity(&kind, &config, output, runs),
        Command::Infer { performance, preferences, method, omega, omega_size, dist_samples, seed, output } => {
            infer(&performance, &preferences, &method, omega, omega_size, dist_samples, seed, &output)
        }
        Command::Indices { performance, omega, masses, output } => indices(&performance, &omega, masses, &output),
        Command::Kstest { a, b, column, alpha, variant } => kstest(&a, &b, column.as_deref(), alpha, variant),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if matches!(e, Error::Config(_)) { 1 } else { 2 })
        }
    }
}
