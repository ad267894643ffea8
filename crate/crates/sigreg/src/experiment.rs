//! Repeated simulation studies comparing the signature method with the
//! Fourier baseline.
//!
//! Every repetition draws its own seed from the run seed, its dimension and its
//! index, so repetitions run in any order (or in parallel) with identical
//! results. The tidy CSV holds only deterministic values; wall-clock timings go
//! to the JSON report.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sigreg_core::datagen::{simulate, Dataset, PathModel, ResponseKind, SimSpec};
use sigreg_core::fourier::{fit_fourier_model, FourierOptions};
use sigreg_core::ridge::train_test_split;
use sigreg_core::rng::derive_seed;
use sigreg_core::selection::{
    default_kpen_grid, default_m_max, fit_signature_cv, fit_signature_model,
    fit_signature_model_auto, predict_paths, FitOptions, PenaltyConfig,
};
use sigreg_core::{SampledPath, DEFAULT_BUDGET};

use crate::csvio::{fmt_f64, ingest_csv};
use crate::error::{CliError, Result};

const STREAM_REPETITION: u64 = 0x5245_5045;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    ToyConvergence,
    DimensionStudyPolysinus,
    DimensionStudyGp,
    CsvRegression,
}

/// Dimensions visited by the dimension studies unless overridden.
pub const DEFAULT_DIMS: [usize; 7] = [1, 2, 3, 5, 7, 9, 11];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub repetitions: usize,
    pub seed: u64,
    /// Samples per repetition, before the train/test split.
    pub n: usize,
    /// Points per path.
    pub p: usize,
    pub dims: Vec<usize>,
    /// Order of the signature response in the toy study.
    pub m_star: usize,
    pub k_pen: f64,
    /// Calibrate `K_pen` by the dimension jump instead of using `k_pen`.
    pub kpen_auto: bool,
    pub rho: f64,
    /// Largest order considered; chosen from the sample size when absent.
    pub m_max: Option<usize>,
    pub train_fraction: f64,
    pub cv_folds: usize,
    pub fourier_ols: bool,
    pub budget: usize,
    pub paths_file: Option<PathBuf>,
    pub targets_file: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn defaults(kind: ExperimentKind) -> Self {
        let base = Self {
            kind,
            repetitions: 20,
            seed: 0,
            n: 300,
            p: 100,
            dims: DEFAULT_DIMS.to_vec(),
            m_star: 5,
            k_pen: 20.0,
            kpen_auto: false,
            rho: 0.4,
            m_max: None,
            train_fraction: 0.7,
            cv_folds: 5,
            fourier_ols: false,
            budget: DEFAULT_BUDGET,
            paths_file: None,
            targets_file: None,
        };
        match kind {
            ExperimentKind::ToyConvergence => Self {
                n: 500,
                dims: vec![2],
                ..base
            },
            ExperimentKind::CsvRegression => Self {
                kpen_auto: true,
                dims: vec![],
                ..base
            },
            _ => base,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1".into());
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad(format!(
                "train fraction must lie in (0, 1), got {}",
                self.train_fraction
            ));
        }
        if self.cv_folds < 2 {
            return bad(format!("need at least 2 folds, got {}", self.cv_folds));
        }
        if !(self.rho > 0.0 && self.rho < 0.5) {
            return bad(format!("rho must lie in (0, 0.5), got {}", self.rho));
        }
        if !self.kpen_auto && !(self.k_pen > 0.0 && self.k_pen.is_finite()) {
            return bad(format!("K_pen must be positive, got {}", self.k_pen));
        }
        match self.kind {
            ExperimentKind::CsvRegression => {
                for (name, file) in [("paths", &self.paths_file), ("targets", &self.targets_file)] {
                    match file {
                        None => return bad(format!("csv_regression needs a {name} file")),
                        Some(f) if !f.exists() => {
                            return bad(format!("{name} file {} does not exist", f.display()))
                        }
                        _ => {}
                    }
                }
            }
            _ => {
                if self.dims.is_empty() || self.dims.contains(&0) {
                    return bad("dimensions must be a non-empty list of positive integers".into());
                }
                if self.n < 2 || self.p < 2 {
                    return bad("n and p must be at least 2".into());
                }
            }
        }
        Ok(())
    }
}

/// One line of the tidy output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TidyRow {
    pub repetition: usize,
    pub method: String,
    pub d: usize,
    pub metric: String,
    pub value: f64,
}

/// Metrics and timings of one repetition at one dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepetitionRecord {
    pub repetition: usize,
    pub d: usize,
    pub seed: u64,
    /// `method -> metric -> value`.
    pub metrics: BTreeMap<String, BTreeMap<String, f64>>,
    /// Wall-clock seconds per method.
    pub timings: BTreeMap<String, f64>,
}

/// Quartiles of one metric over the repetitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub d: usize,
    pub method: String,
    pub metric: String,
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub repetitions: Vec<RepetitionRecord>,
    pub summaries: Vec<Summary>,
    /// `d -> selected order -> count`.
    pub m_hat_histogram: BTreeMap<usize, BTreeMap<usize, usize>>,
    pub elapsed_seconds: f64,
}

impl ExperimentReport {
    /// Flattened metrics, sorted by dimension, repetition, method and metric.
    pub fn tidy_rows(&self) -> Vec<TidyRow> {
        let mut rows = Vec::new();
        for rec in &self.repetitions {
            for (method, metrics) in &rec.metrics {
                for (metric, value) in metrics {
                    rows.push(TidyRow {
                        repetition: rec.repetition,
                        method: method.clone(),
                        d: rec.d,
                        metric: metric.clone(),
                        value: *value,
                    });
                }
            }
        }
        rows
    }

    /// Selected orders of the signature method, in repetition order, at `d`.
    pub fn m_hats(&self, d: usize) -> Vec<usize> {
        self.repetitions
            .iter()
            .filter(|r| r.d == d)
            .filter_map(|r| r.metrics.get("signature")?.get("m_hat"))
            .map(|v| *v as usize)
            .collect()
    }

    pub fn summary(&self, d: usize, method: &str, metric: &str) -> Option<&Summary> {
        self.summaries
            .iter()
            .find(|s| s.d == d && s.method == method && s.metric == metric)
    }
}

/// Tidy CSV with columns `repetition,method,d,metric,value`.
pub fn tidy_csv(rows: &[TidyRow]) -> Vec<u8> {
    let mut out = String::from("repetition,method,d,metric,value\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.repetition,
            r.method,
            r.d,
            r.metric,
            fmt_f64(r.value)
        ));
    }
    out.into_bytes()
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn summarize(records: &[RepetitionRecord]) -> Vec<Summary> {
    let mut groups: BTreeMap<(usize, String, String), Vec<f64>> = BTreeMap::new();
    for rec in records {
        for (method, metrics) in &rec.metrics {
            for (metric, v) in metrics {
                groups
                    .entry((rec.d, method.clone(), metric.clone()))
                    .or_default()
                    .push(*v);
            }
        }
    }
    groups
        .into_iter()
        .map(|((d, method, metric), mut vals)| {
            vals.sort_by(f64::total_cmp);
            Summary {
                d,
                method,
                metric,
                count: vals.len(),
                min: vals[0],
                q1: quantile(&vals, 0.25),
                median: quantile(&vals, 0.5),
                q3: quantile(&vals, 0.75),
                max: vals[vals.len() - 1],
                mean: vals.iter().sum::<f64>() / vals.len() as f64,
            }
        })
        .collect()
}

fn subset(data: &Dataset, idx: &[usize]) -> (Vec<SampledPath>, Vec<f64>) {
    (
        idx.iter().map(|&i| data.paths[i].clone()).collect(),
        idx.iter().map(|&i| data.targets[i]).collect(),
    )
}

fn mse(pred: &[f64], truth: &[f64]) -> f64 {
    pred.iter()
        .zip(truth)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / truth.len() as f64
}

struct Rep<'a> {
    cfg: &'a ExperimentConfig,
    d: usize,
    repetition: usize,
    seed: u64,
    metrics: BTreeMap<String, BTreeMap<String, f64>>,
    timings: BTreeMap<String, f64>,
}

impl Rep<'_> {
    fn record(&mut self, method: &str, metric: &str, value: f64) {
        self.metrics
            .entry(method.to_string())
            .or_default()
            .insert(metric.to_string(), value);
    }

    fn fit_options(&self) -> FitOptions {
        FitOptions {
            cv_folds: self.cfg.cv_folds,
            seed: self.seed,
            budget: self.cfg.budget,
            ..FitOptions::default()
        }
    }

    fn m_max(&self, d: usize, n: usize) -> usize {
        self.cfg
            .m_max
            .unwrap_or_else(|| default_m_max(d + 1, n, self.cfg.budget))
    }

    /// Penalized selection on `paths`; returns the fitted model.
    fn penalized(
        &mut self,
        paths: &[SampledPath],
        targets: &[f64],
    ) -> Result<sigreg_core::ridge::RidgeModel> {
        let m_max = self.m_max(paths[0].dim(), paths.len());
        let opts = self.fit_options();
        let (result, model) = if self.cfg.kpen_auto {
            let (jump, result, model) = fit_signature_model_auto(
                paths,
                targets,
                m_max,
                self.cfg.rho,
                &default_kpen_grid(),
                &opts,
            )?;
            self.record("signature", "k_pen", jump.k_pen);
            (result, model)
        } else {
            let cfg = PenaltyConfig::new(self.cfg.k_pen, self.cfg.rho, m_max)?;
            let (result, model) = fit_signature_model(paths, targets, &cfg, &opts)?;
            self.record("signature", "k_pen", self.cfg.k_pen);
            (result, model)
        };
        self.record("signature", "m_hat", result.m_hat as f64);
        self.record("signature", "lambda", result.lambda);
        self.record("signature", "m_max", m_max as f64);
        Ok(model)
    }

    fn compare(&mut self, data: &Dataset, penalized: bool) -> Result<()> {
        let split_seed = derive_seed(self.seed, STREAM_REPETITION, 1, 0);
        let (train, test) =
            train_test_split(data.paths.len(), self.cfg.train_fraction, split_seed)?;
        let (train_x, train_y) = subset(data, &train);
        let (test_x, test_y) = subset(data, &test);

        let start = Instant::now();
        let model = if penalized {
            self.penalized(&train_x, &train_y)?
        } else {
            let m_max = self.m_max(train_x[0].dim(), train_x.len());
            let (res, model) = fit_signature_cv(&train_x, &train_y, m_max, &self.fit_options())?;
            self.record("signature", "m_hat", res.m_hat as f64);
            self.record("signature", "lambda", res.lambda);
            self.record("signature", "m_max", m_max as f64);
            model
        };
        let sig_pred = predict_paths(&model, &test_x)?;
        self.record("signature", "test_mse", mse(&sig_pred, &test_y));
        self.timings
            .insert("signature".into(), start.elapsed().as_secs_f64());

        let start = Instant::now();
        let opts = FourierOptions {
            folds: self.cfg.cv_folds,
            seed: self.seed,
            ols: self.cfg.fourier_ols,
            ..FourierOptions::default()
        };
        let fourier = fit_fourier_model(&train_x, &train_y, &opts)?;
        let fourier_pred = fourier.predict(&test_x)?;
        self.record("fourier", "test_mse", mse(&fourier_pred, &test_y));
        self.record("fourier", "n_basis", fourier.n_basis as f64);
        self.timings
            .insert("fourier".into(), start.elapsed().as_secs_f64());
        Ok(())
    }

    fn run(mut self, shared: Option<&Dataset>) -> Result<RepetitionRecord> {
        let cfg = self.cfg;
        let spec = |model, response| SimSpec {
            n: cfg.n,
            d: self.d,
            p: cfg.p,
            seed: self.seed,
            model,
            response,
        };
        match cfg.kind {
            ExperimentKind::ToyConvergence => {
                let data = simulate(&spec(
                    PathModel::Polysinus,
                    ResponseKind::Signature { m_star: cfg.m_star },
                ))?;
                let start = Instant::now();
                let model = self.penalized(&data.paths, &data.targets)?;
                let fitted = predict_paths(&model, &data.paths)?;
                self.record("signature", "train_mse", mse(&fitted, &data.targets));
                self.timings
                    .insert("signature".into(), start.elapsed().as_secs_f64());
            }
            ExperimentKind::DimensionStudyPolysinus => {
                let data = simulate(&spec(PathModel::Polysinus, ResponseKind::MeanNextStep))?;
                self.compare(&data, false)?;
            }
            ExperimentKind::DimensionStudyGp => {
                let data = simulate(&spec(PathModel::GaussianProcess, ResponseKind::TrendNorm))?;
                self.compare(&data, false)?;
            }
            ExperimentKind::CsvRegression => {
                let data = shared.expect("csv data loaded before the repetitions");
                self.compare(data, true)?;
            }
        }
        Ok(RepetitionRecord {
            repetition: self.repetition,
            d: self.d,
            seed: self.seed,
            metrics: self.metrics,
            timings: self.timings,
        })
    }
}

/// Runs every repetition at every dimension and assembles the report.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let start = Instant::now();
    let shared = match cfg.kind {
        ExperimentKind::CsvRegression => {
            let paths = cfg.paths_file.as_ref().expect("validated");
            let targets = cfg.targets_file.as_ref().expect("validated");
            let data = ingest_csv(paths, targets)?;
            Some(Dataset {
                paths: data.paths,
                targets: data.targets,
            })
        }
        _ => None,
    };
    let dims = match &shared {
        Some(data) => vec![data.paths[0].dim()],
        None => cfg.dims.clone(),
    };
    let jobs: Vec<(usize, usize)> = dims
        .iter()
        .flat_map(|&d| (0..cfg.repetitions).map(move |r| (d, r)))
        .collect();
    let repetitions: Vec<RepetitionRecord> = jobs
        .par_iter()
        .map(|&(d, repetition)| {
            Rep {
                cfg,
                d,
                repetition,
                seed: derive_seed(cfg.seed, STREAM_REPETITION, d as u64, repetition as u64),
                metrics: BTreeMap::new(),
                timings: BTreeMap::new(),
            }
            .run(shared.as_ref())
        })
        .collect::<Result<_>>()?;

    let mut m_hat_histogram: BTreeMap<usize, BTreeMap<usize, usize>> = BTreeMap::new();
    for rec in &repetitions {
        if let Some(m) = rec.metrics.get("signature").and_then(|m| m.get("m_hat")) {
            *m_hat_histogram
                .entry(rec.d)
                .or_default()
                .entry(*m as usize)
                .or_default() += 1;
        }
    }
    Ok(ExperimentReport {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed: cfg.seed,
        config: cfg.clone(),
        summaries: summarize(&repetitions),
        repetitions,
        m_hat_histogram,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    })
}
