//! Command-line harness: dataset generation, experiment dispatch, and
//! artifact persistence (JSON results, CSV aggregates, SVG figures).
//!
//! Exit codes: 0 success, 1 experiment-level failure, 2 usage/config error.

mod plot;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use gssl::experiments::{
    run_bandwidth_experiment, run_cut_convergence, run_esd_experiment,
    run_reconstruction_experiment, ExperimentConfig, ExperimentResult, RateParams,
};
use gssl::models::{
    BoundarySpec, Dataset, ModelSpec, NonseparableModelSpec, SeedRecord, SeparableModelSpec,
};

const VALID_PRESETS: &str = "gmm-paper, nonsep-paper";
const VALID_EXPERIMENTS: &[&str] = &["bandwidth", "bandwidth-sweep", "reconstruction", "cut", "esd"];

#[derive(Parser)]
#[command(name = "gssl", version, about = "Graph-based semi-supervised learning harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a dataset from a configured model and write it as CSV
    Generate {
        #[arg(long)]
        config: PathBuf,
        /// output directory
        #[arg(long)]
        out: PathBuf,
        /// override the config's base_seed
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run an experiment: bandwidth, bandwidth-sweep, reconstruction, cut, esd
    Run {
        experiment: String,
        #[arg(long)]
        config: PathBuf,
        /// output directory
        #[arg(long)]
        out: PathBuf,
        /// override the config's base_seed
        #[arg(long)]
        seed: Option<u64>,
        /// override the config's repetition count
        #[arg(long)]
        reps: Option<usize>,
        /// cap the worker thread count
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Summarize a dataset CSV or a results JSON file
    Inspect { path: PathBuf },
}

/// Errors carrying the process exit code: 1 = experiment failure,
/// 2 = usage/config error.
struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    fn experiment(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }
}

impl From<gssl::Error> for CliError {
    fn from(e: gssl::Error) -> Self {
        match e {
            gssl::Error::Config(_) | gssl::Error::InvalidParameter(_) => {
                CliError::usage(e.to_string())
            }
            _ => CliError::experiment(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::experiment(format!("i/o error: {e}"))
    }
}

/// On-disk config: either a named preset or a full model spec, plus the
/// experiment parameters (all optional, defaulting to the reference setup:
/// n=2500, sigma=0.1, tol=1e-4, 20 repetitions).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    /// `gmm-paper` or `nonsep-paper`; alternative to a full `model` spec
    #[serde(default, skip_serializing_if = "Option::is_none")]
    preset: Option<String>,
    /// boundary name S1..S5 for the gmm preset (default S1)
    #[serde(default, skip_serializing_if = "Option::is_none")]
    boundary: Option<String>,
    #[serde(flatten, default, skip_serializing_if = "Option::is_none")]
    model: Option<ModelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sigma_power: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    m: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    repetitions: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    energy_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label_fractions: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    base_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rate_params: Option<RateParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n_sweep: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    t_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    signals: Option<Vec<String>>,
}

impl RawConfig {
    fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::usage(format!("invalid config {}: {e}", path.display())))
    }

    fn resolve_model(&self) -> Result<ModelSpec, CliError> {
        match (&self.preset, &self.model) {
            (Some(_), Some(_)) => Err(CliError::usage(
                "config sets both `preset` and a full `model` spec; pick one",
            )),
            (Some(name), None) => match name.as_str() {
                "gmm-paper" => {
                    let bname = self.boundary.as_deref().unwrap_or("S1");
                    let boundary = BoundarySpec::preset(bname).ok_or_else(|| {
                        CliError::usage(format!(
                            "unknown boundary {bname:?}; valid names are S1, S2, S3, S4, S5"
                        ))
                    })?;
                    Ok(ModelSpec::Separable(SeparableModelSpec::paper_gmm(boundary)))
                }
                "nonsep-paper" => Ok(ModelSpec::Nonseparable(NonseparableModelSpec::paper())),
                other => Err(CliError::usage(format!(
                    "unknown preset {other:?}; valid presets: {VALID_PRESETS}"
                ))),
            },
            (None, Some(m)) => Ok(m.clone()),
            (None, None) => Err(CliError::usage(format!(
                "config must set `preset` ({VALID_PRESETS}) or a full `model` spec"
            ))),
        }
    }

    fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let cfg = ExperimentConfig {
            model: self.resolve_model()?,
            n: self.n.unwrap_or(2500),
            sigma: self.sigma.unwrap_or(0.1),
            sigma_power: self.sigma_power.unwrap_or(0.0),
            m: self.m,
            repetitions: self.repetitions.unwrap_or(20),
            energy_tol: self.energy_tol.unwrap_or(1e-4),
            label_fractions: self.label_fractions.clone().unwrap_or_default(),
            base_seed: self.base_seed.unwrap_or(0),
            rate_params: self.rate_params,
            n_sweep: self.n_sweep.clone().unwrap_or_default(),
            t_grid: self.t_grid.clone().unwrap_or_default(),
            signals: self.signals.clone().unwrap_or_default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Run manifest written next to every artifact set.
#[derive(Debug, Serialize, Deserialize)]
struct RunManifest {
    tool_version: String,
    config: RawConfig,
    artifacts: Vec<String>,
    wall_clock_seconds: f64,
}

fn write_manifest(
    dir: &Path,
    config: &RawConfig,
    artifacts: &[String],
    started: Instant,
) -> Result<(), CliError> {
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        artifacts: artifacts.to_vec(),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    let path = dir.join("manifest.json");
    std::fs::write(&path, serde_json::to_string_pretty(&manifest).map_err(gssl::Error::from)?)?;
    Ok(())
}

fn cmd_generate(config: &Path, out: &Path, seed: Option<u64>) -> Result<(), CliError> {
    let started = Instant::now();
    let mut raw = RawConfig::load(config)?;
    if let Some(s) = seed {
        raw.base_seed = Some(s);
    }
    let cfg = raw.resolve()?;
    let dataset = cfg.model.sample(cfg.n, SeedRecord::new(cfg.base_seed))?;
    std::fs::create_dir_all(out)?;
    let csv_path = out.join("dataset.csv");
    std::fs::write(&csv_path, dataset.to_csv())?;
    write_manifest(out, &raw, &["dataset.csv".into()], started)?;
    println!(
        "wrote {} ({} points, seed {})",
        csv_path.display(),
        dataset.n(),
        cfg.base_seed
    );
    Ok(())
}

/// CSV with the reconstruction-specific schema.
fn reconstruction_csv(res: &ExperimentResult) -> String {
    let mut out = String::from("fraction,mean_error,std_error,reference_mass\n");
    for a in &res.aggregates {
        let (Some(x), Some(r)) = (a.x, a.reference) else { continue };
        out.push_str(&format!("{},{},{},{}\n", x, a.mean, a.std, r));
    }
    out
}

fn cmd_run(
    experiment: &str,
    config: &Path,
    out: &Path,
    seed: Option<u64>,
    reps: Option<usize>,
    threads: Option<usize>,
) -> Result<(), CliError> {
    let started = Instant::now();
    if let Some(k) = threads {
        // ignore the error if a global pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
    let mut raw = RawConfig::load(config)?;
    if let Some(s) = seed {
        raw.base_seed = Some(s);
    }
    if let Some(r) = reps {
        raw.repetitions = Some(r);
    }
    if experiment == "bandwidth-sweep" && raw.n_sweep.is_none() {
        raw.n_sweep = Some(vec![500, 1000, 2000]);
    }
    let cfg = raw.resolve()?;
    let result = match experiment {
        "bandwidth" | "bandwidth-sweep" => run_bandwidth_experiment(&cfg)?,
        "reconstruction" => run_reconstruction_experiment(&cfg)?,
        "cut" => run_cut_convergence(&cfg)?,
        "esd" => run_esd_experiment(&cfg)?,
        other => {
            return Err(CliError::usage(format!(
                "unknown experiment {other:?}; valid experiments: {}",
                VALID_EXPERIMENTS.join(", ")
            )))
        }
    };

    std::fs::create_dir_all(out)?;
    let json_path = out.join("results.json");
    std::fs::write(&json_path, serde_json::to_string_pretty(&result).map_err(gssl::Error::from)?)?;
    let csv = if result.experiment == "reconstruction" {
        reconstruction_csv(&result)
    } else {
        result.aggregates_csv()
    };
    std::fs::write(out.join("results.csv"), csv)?;
    std::fs::write(out.join("fig.svg"), plot::render(&result))?;
    write_manifest(
        out,
        &raw,
        &["results.json".into(), "results.csv".into(), "fig.svg".into()],
        started,
    )?;

    // partial artifacts are already on disk if the failure budget tripped
    result.check_failures()?;
    println!(
        "{}: {} repetitions, {} aggregates -> {}",
        result.experiment,
        result.records.len(),
        result.aggregates.len(),
        out.display()
    );
    Ok(())
}

fn cmd_inspect(path: &Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    if path.extension().is_some_and(|e| e == "json") || text.trim_start().starts_with('{') {
        let res: ExperimentResult = serde_json::from_str(&text)
            .map_err(|e| CliError::usage(format!("not a results file: {e}")))?;
        println!("experiment: {} (schema v{})", res.experiment, res.schema_version);
        println!(
            "repetitions: {} ({} failed)",
            res.records.len(),
            res.failed_repetitions()
        );
        println!("{:<24} {:>14} {:>14} {:>14}", "key", "mean", "std", "reference");
        for a in &res.aggregates {
            let r = a.reference.map_or("-".into(), |v| format!("{v:.6}"));
            println!("{:<24} {:>14.6} {:>14.6} {:>14}", a.key, a.mean, a.std, r);
        }
    } else {
        let ds = Dataset::from_csv(&text)
            .map_err(|e| CliError::usage(format!("not a dataset file: {e}")))?;
        let ones: usize = ds.indicator.iter().map(|&b| usize::from(b)).sum();
        println!("dataset: n={} d={}", ds.n(), ds.dim());
        println!(
            "class balance: {} in class ({:.1}%), {} out",
            ones,
            100.0 * ones as f64 / ds.n() as f64,
            ds.n() - ones
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("GSSL_LOG")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Generate { config, out, seed } => cmd_generate(config, out, *seed),
        Command::Run { experiment, config, out, seed, reps, threads } => {
            cmd_run(experiment, config, out, *seed, *reps, *threads)
        }
        Command::Inspect { path } => cmd_inspect(path),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
