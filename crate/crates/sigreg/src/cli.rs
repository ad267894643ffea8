//! Argument parsing and dispatch.

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sigreg_core::datagen::{PathModel, ResponseKind, SimSpec};
use sigreg_core::selection::DEFAULT_RHO;

use crate::commands::{
    cmd_experiment, cmd_fit, cmd_ingest_check, cmd_signature, cmd_simulate, resolve_budget,
    FitArgs, BUDGET_ENV,
};
use crate::error::{CliError, Result};
use crate::experiment::{ExperimentConfig, ExperimentKind};

#[derive(Debug, Parser)]
#[command(
    name = "sigreg",
    version,
    about = "Linear regression on truncated path signatures"
)]
pub struct Cli {
    /// Base seed of every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Largest number of signature coefficients allowed per path.
    #[arg(long, global = true, env = BUDGET_ENV)]
    pub budget: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset.
    Simulate(SimulateCmd),
    /// Compute truncated signatures of the paths in a CSV file.
    Signature(SignatureCmd),
    /// Select the truncation order and fit the ridge model.
    Fit(FitCmd),
    /// Repeat a simulation study and compare with the Fourier baseline.
    Experiment(ExperimentCmd),
    /// Validate input files and print a summary.
    IngestCheck(IngestCmd),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModelArg {
    Polysinus,
    GaussianProcess,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ResponseArg {
    Signature,
    MeanNextStep,
    TrendNorm,
}

#[derive(Debug, Args)]
pub struct SimulateCmd {
    #[arg(long, value_enum, default_value = "polysinus")]
    pub model: ModelArg,
    /// Defaults to `signature` for polysinus paths and `trend-norm` otherwise.
    #[arg(long, value_enum)]
    pub response: Option<ResponseArg>,
    #[arg(long, default_value_t = 5)]
    pub m_star: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub d: usize,
    #[arg(long, default_value_t = 100)]
    pub p: usize,
    /// Directory receiving paths.csv, targets.csv and manifest.json.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct SignatureCmd {
    /// Long-format paths file.
    #[arg(long)]
    pub input: PathBuf,
    /// Truncation order.
    #[arg(long)]
    pub m: usize,
    /// Append time as an extra last coordinate.
    #[arg(long)]
    pub augment: bool,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitCmd {
    #[arg(long)]
    pub paths: PathBuf,
    #[arg(long)]
    pub targets: PathBuf,
    /// Penalty constant.
    #[arg(long, conflicts_with = "kpen_auto")]
    pub kpen: Option<f64>,
    /// Calibrate the penalty constant by the dimension jump.
    #[arg(long)]
    pub kpen_auto: bool,
    #[arg(long, default_value_t = DEFAULT_RHO)]
    pub rho: f64,
    /// Largest order considered (default: from the sample size).
    #[arg(long)]
    pub m_max: Option<usize>,
    /// Ridge strength (default: cross-validated on order-one features).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Rescale features to unit variance before the ridge fit.
    #[arg(long)]
    pub standardize: bool,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// JSON report.
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    ToyConvergence,
    DimensionStudyPolysinus,
    DimensionStudyGp,
    CsvRegression,
}

impl From<KindArg> for ExperimentKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::ToyConvergence => ExperimentKind::ToyConvergence,
            KindArg::DimensionStudyPolysinus => ExperimentKind::DimensionStudyPolysinus,
            KindArg::DimensionStudyGp => ExperimentKind::DimensionStudyGp,
            KindArg::CsvRegression => ExperimentKind::CsvRegression,
        }
    }
}

#[derive(Debug, Args)]
pub struct ExperimentCmd {
    #[arg(long, value_enum, required_unless_present = "config")]
    pub kind: Option<KindArg>,
    /// JSON experiment configuration; replaces the other experiment flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
    /// Comma-separated dimensions.
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    #[arg(long)]
    pub m_star: Option<usize>,
    #[arg(long)]
    pub kpen: Option<f64>,
    #[arg(long)]
    pub kpen_auto: bool,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub m_max: Option<usize>,
    #[arg(long)]
    pub train_fraction: Option<f64>,
    #[arg(long)]
    pub folds: Option<usize>,
    /// Plain least squares for the Fourier baseline.
    #[arg(long)]
    pub fourier_ols: bool,
    #[arg(long)]
    pub paths: Option<PathBuf>,
    #[arg(long)]
    pub targets: Option<PathBuf>,
    /// JSON report.
    #[arg(long)]
    pub report: PathBuf,
    /// Tidy CSV (repetition, method, d, metric, value).
    #[arg(long)]
    pub tidy: PathBuf,
}

#[derive(Debug, Args)]
pub struct IngestCmd {
    #[arg(long)]
    pub paths: PathBuf,
    #[arg(long)]
    pub targets: Option<PathBuf>,
}

fn sim_spec(c: &SimulateCmd, seed: u64) -> SimSpec {
    let model = match c.model {
        ModelArg::Polysinus => PathModel::Polysinus,
        ModelArg::GaussianProcess => PathModel::GaussianProcess,
    };
    let response = match (c.response, model) {
        (Some(ResponseArg::Signature), _) | (None, PathModel::Polysinus) => {
            ResponseKind::Signature { m_star: c.m_star }
        }
        (Some(ResponseArg::MeanNextStep), _) => ResponseKind::MeanNextStep,
        (Some(ResponseArg::TrendNorm), _) | (None, PathModel::GaussianProcess) => {
            ResponseKind::TrendNorm
        }
    };
    SimSpec {
        n: c.n,
        d: c.d,
        p: c.p,
        seed,
        model,
        response,
    }
}

fn experiment_config(c: &ExperimentCmd, seed: u64, budget: usize) -> Result<ExperimentConfig> {
    if let Some(path) = &c.config {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.seed = seed;
        cfg.budget = budget;
        return Ok(cfg);
    }
    let kind: ExperimentKind = c.kind.expect("required without --config").into();
    let mut cfg = ExperimentConfig::defaults(kind);
    cfg.seed = seed;
    cfg.budget = budget;
    cfg.repetitions = c.reps.unwrap_or(cfg.repetitions);
    cfg.n = c.n.unwrap_or(cfg.n);
    cfg.p = c.p.unwrap_or(cfg.p);
    if let Some(d) = &c.dims {
        cfg.dims = d.clone();
    }
    cfg.m_star = c.m_star.unwrap_or(cfg.m_star);
    if let Some(k) = c.kpen {
        cfg.k_pen = k;
        cfg.kpen_auto = false;
    }
    cfg.kpen_auto |= c.kpen_auto;
    cfg.rho = c.rho.unwrap_or(cfg.rho);
    cfg.m_max = c.m_max.or(cfg.m_max);
    cfg.train_fraction = c.train_fraction.unwrap_or(cfg.train_fraction);
    cfg.cv_folds = c.folds.unwrap_or(cfg.cv_folds);
    cfg.fourier_ols |= c.fourier_ols;
    cfg.paths_file = c.paths.clone().or(cfg.paths_file);
    cfg.targets_file = c.targets.clone().or(cfg.targets_file);
    Ok(cfg)
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Data(format!("JSON encoding: {e}")))?;
    println!("{text}");
    Ok(())
}

/// Executes a parsed command line inside a pool of the requested size.
pub fn run(cli: Cli) -> Result<()> {
    let budget = resolve_budget(cli.budget)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(t);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    pool.install(|| dispatch(&cli, budget))
}

fn dispatch(cli: &Cli, budget: usize) -> Result<()> {
    match &cli.command {
        Command::Simulate(c) => {
            let manifest = cmd_simulate(&sim_spec(c, cli.seed), &c.out_dir)?;
            print_json(&manifest)
        }
        Command::Signature(c) => {
            let shape = cmd_signature(&c.input, c.m, c.augment, budget, &c.output)?;
            eprintln!(
                "wrote {} ({} columns per sample)",
                c.output.display(),
                shape.len()
            );
            Ok(())
        }
        Command::Fit(c) => {
            let report = cmd_fit(&FitArgs {
                paths: c.paths.clone(),
                targets: c.targets.clone(),
                k_pen: c.kpen,
                kpen_auto: c.kpen_auto,
                rho: c.rho,
                m_max: c.m_max,
                lambda: c.lambda,
                standardize: c.standardize,
                folds: c.folds,
                seed: cli.seed,
                budget,
                output: c.output.clone(),
            })?;
            eprintln!(
                "m_hat = {}, K_pen = {}, lambda = {}, train MSE = {}",
                report.m_hat, report.k_pen, report.lambda, report.train_mse
            );
            Ok(())
        }
        Command::Experiment(c) => {
            let cfg = experiment_config(c, cli.seed, budget)?;
            let report = cmd_experiment(&cfg, &c.report, &c.tidy)?;
            eprintln!(
                "{} repetitions in {:.1} s",
                report.repetitions.len(),
                report.elapsed_seconds
            );
            Ok(())
        }
        Command::IngestCheck(c) => print_json(&cmd_ingest_check(&c.paths, c.targets.as_deref())?),
    }
}
