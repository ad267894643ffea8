//! The work behind each subcommand. Every command stages its files and
//! commits them together, so a failure leaves no partial output behind.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sigreg_core::datagen::{simulate, PathModel, ResponseKind, SimSpec};
use sigreg_core::ridge::{empirical_risk, RidgeOptions};
use sigreg_core::selection::{
    augment_all, cv_lambda_order_one, default_kpen_grid, default_m_max, dimension_jump_from_risks,
    fit_from_features, risk_curve_from_features, FitOptions,
};
use sigreg_core::{SampledPath, SigShape, DEFAULT_BUDGET};

use crate::csvio::{
    ingest_csv, load_paths, word_label, write_paths, write_signatures, write_targets,
};
use crate::error::{CliError, Result};
use crate::experiment::{run_experiment, tidy_csv, ExperimentConfig, ExperimentReport};
use crate::output::{json_bytes, Outputs};
use crate::parallel::par_batch_signatures;

/// Name of the environment variable that sets the coefficient budget.
pub const BUDGET_ENV: &str = "SIGREG_BUDGET";

/// Budget from the flag, else from the environment, else the default.
pub fn resolve_budget(flag: Option<usize>) -> Result<usize> {
    if let Some(b) = flag {
        return Ok(b);
    }
    match std::env::var(BUDGET_ENV) {
        Ok(raw) => raw.trim().parse().map_err(|_| {
            CliError::Config(format!("{BUDGET_ENV}={raw:?} is not a positive integer"))
        }),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

fn to_bytes(f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(|e| CliError::Data(format!("CSV encoding: {e}")))?;
    Ok(buf)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecEcho {
    pub n: usize,
    pub d: usize,
    pub p: usize,
    pub model: String,
    pub response: String,
    pub m_star: Option<usize>,
}

impl From<&SimSpec> for SpecEcho {
    fn from(s: &SimSpec) -> Self {
        let (response, m_star) = match s.response {
            ResponseKind::Signature { m_star } => ("signature", Some(m_star)),
            ResponseKind::MeanNextStep => ("mean_next_step", None),
            ResponseKind::TrendNorm => ("trend_norm", None),
        };
        Self {
            n: s.n,
            d: s.d,
            p: s.p,
            model: match s.model {
                PathModel::Polysinus => "polysinus",
                PathModel::GaussianProcess => "gaussian_process",
            }
            .into(),
            response: response.into(),
            m_star,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateManifest {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub spec: SpecEcho,
    pub paths_file: String,
    pub targets_file: String,
    pub rows: usize,
}

/// File names used by `simulate` inside its output directory.
pub const PATHS_CSV: &str = "paths.csv";
pub const TARGETS_CSV: &str = "targets.csv";
pub const MANIFEST_JSON: &str = "manifest.json";

fn sample_ids(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

/// Simulates a dataset and writes `paths.csv`, `targets.csv` and
/// `manifest.json` into `out_dir`.
pub fn cmd_simulate(spec: &SimSpec, out_dir: &Path) -> Result<SimulateManifest> {
    let data = simulate(spec)?;
    let ids = sample_ids(spec.n);
    let manifest = SimulateManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed: spec.seed,
        spec: spec.into(),
        paths_file: PATHS_CSV.into(),
        targets_file: TARGETS_CSV.into(),
        rows: data.paths.iter().map(SampledPath::len).sum(),
    };
    let mut out = Outputs::new();
    out.stage(
        out_dir.join(PATHS_CSV),
        to_bytes(|b| write_paths(b, &ids, &data.paths))?,
    );
    out.stage(
        out_dir.join(TARGETS_CSV),
        to_bytes(|b| write_targets(b, &ids, &data.targets))?,
    );
    out.stage(out_dir.join(MANIFEST_JSON), json_bytes(&manifest)?);
    out.commit()?;
    Ok(manifest)
}

/// Writes the signature of every path in `input` (optionally time-augmented).
pub fn cmd_signature(
    input: &Path,
    m: usize,
    augment: bool,
    budget: usize,
    output: &Path,
) -> Result<SigShape> {
    let table = load_paths(input)?;
    let paths = if augment {
        augment_all(&table.paths)?
    } else {
        table.paths
    };
    let shape = SigShape::with_budget(paths[0].dim(), m, budget)?;
    let features = par_batch_signatures(&paths, shape)?;
    let mut buf = Vec::new();
    write_signatures(&mut buf, &table.ids, &shape, &features)?;
    let mut out = Outputs::new();
    out.stage(output, buf);
    out.commit()?;
    Ok(shape)
}

/// Settings of `fit`.
#[derive(Debug, Clone, PartialEq)]
pub struct FitArgs {
    pub paths: PathBuf,
    pub targets: PathBuf,
    /// Required unless `kpen_auto`.
    pub k_pen: Option<f64>,
    pub kpen_auto: bool,
    pub rho: f64,
    pub m_max: Option<usize>,
    pub lambda: Option<f64>,
    pub standardize: bool,
    pub folds: usize,
    pub seed: u64,
    pub budget: usize,
    pub output: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpEcho {
    pub kpen_grid: Vec<f64>,
    pub m_hats: Vec<usize>,
    pub jump_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub paths_file: String,
    pub targets_file: String,
    pub n: usize,
    pub d: usize,
    pub augmented_dim: usize,
    pub m_max: usize,
    pub rho: f64,
    pub k_pen: f64,
    pub dimension_jump: Option<JumpEcho>,
    pub lambda: f64,
    pub standardize: bool,
    pub m_hat: usize,
    pub risks: Vec<f64>,
    pub penalties: Vec<f64>,
    pub words: Vec<String>,
    pub coefficients: Vec<f64>,
    pub train_mse: f64,
    pub elapsed_seconds: f64,
}

/// Order selection and final fit on a CSV dataset, reported as JSON.
pub fn cmd_fit(args: &FitArgs) -> Result<FitReport> {
    let start = Instant::now();
    if args.k_pen.is_none() && !args.kpen_auto {
        return Err(CliError::Config(
            "give a penalty constant with --kpen or calibrate it with --kpen-auto".into(),
        ));
    }
    let data = ingest_csv(&args.paths, &args.targets)?;
    let d = data.paths[0].dim();
    let n = data.paths.len();
    let m_max = args
        .m_max
        .unwrap_or_else(|| default_m_max(d + 1, n, args.budget));
    let augmented = augment_all(&data.paths)?;
    let shape = SigShape::with_budget(d + 1, m_max, args.budget)?;
    let features = par_batch_signatures(&augmented, shape)?;
    let mut opts = FitOptions {
        cv_folds: args.folds,
        seed: args.seed,
        budget: args.budget,
        ridge: RidgeOptions {
            standardize: args.standardize,
        },
        lambda: args.lambda,
        ..FitOptions::default()
    };
    let lambda = match args.lambda {
        Some(l) => l,
        None => cv_lambda_order_one(&features, &shape, &data.targets, &opts)?,
    };
    opts.lambda = Some(lambda);
    let (k_pen, jump) = if args.kpen_auto {
        let grid = default_kpen_grid();
        let risks = risk_curve_from_features(&features, &shape, &data.targets, lambda, opts.ridge)?;
        let jump = dimension_jump_from_risks(&risks, n, shape.dim(), &grid, args.rho)?;
        (
            jump.k_pen,
            Some(JumpEcho {
                kpen_grid: grid,
                m_hats: jump.m_hats,
                jump_index: jump.jump_index,
            }),
        )
    } else {
        (args.k_pen.expect("checked above"), None)
    };
    let (result, model) =
        fit_from_features(&features, &shape, &data.targets, k_pen, args.rho, &opts)?;
    let final_shape = shape.truncated(result.m_hat);
    let block = features.columns(0, final_shape.len()).into_owned();
    let train_mse = empirical_risk(&model, &block, &data.targets)?;
    let words = (0..final_shape.len())
        .map(|o| final_shape.word_of(o).map(|w| word_label(&w)))
        .collect::<std::result::Result<_, _>>()?;
    let report = FitReport {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed: args.seed,
        paths_file: args.paths.display().to_string(),
        targets_file: args.targets.display().to_string(),
        n,
        d,
        augmented_dim: d + 1,
        m_max,
        rho: args.rho,
        k_pen,
        dimension_jump: jump,
        lambda,
        standardize: args.standardize,
        m_hat: result.m_hat,
        risks: result.risks,
        penalties: result.penalties,
        words,
        coefficients: model.into_coeffs(),
        train_mse,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    };
    let mut out = Outputs::new();
    out.stage(&args.output, json_bytes(&report)?);
    out.commit()?;
    Ok(report)
}

/// Runs an experiment and writes the JSON report and the tidy CSV.
pub fn cmd_experiment(
    cfg: &ExperimentConfig,
    report_path: &Path,
    tidy_path: &Path,
) -> Result<ExperimentReport> {
    let report = run_experiment(cfg)?;
    let mut out = Outputs::new();
    out.stage(report_path, json_bytes(&report)?);
    out.stage(tidy_path, tidy_csv(&report.tidy_rows()));
    out.commit()?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub samples: usize,
    pub d: usize,
    pub min_points: usize,
    pub max_points: usize,
    pub targets: Option<usize>,
}

/// Validates input files and summarizes them.
pub fn cmd_ingest_check(paths: &Path, targets: Option<&Path>) -> Result<IngestSummary> {
    let (ps, n_targets) = match targets {
        Some(t) => {
            let data = ingest_csv(paths, t)?;
            let k = data.targets.len();
            (data.paths, Some(k))
        }
        None => (load_paths(paths)?.paths, None),
    };
    Ok(IngestSummary {
        samples: ps.len(),
        d: ps[0].dim(),
        min_points: ps.iter().map(SampledPath::len).min().unwrap_or(0),
        max_points: ps.iter().map(SampledPath::len).max().unwrap_or(0),
        targets: n_targets,
    })
}
