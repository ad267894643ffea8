//! Penalized selection of the signature truncation order.
//!
//! For every order `m` up to `m_max` a ridge regression on the signatures of the
//! time-augmented paths gives a training risk `L(m)`; the selected order is the
//! smallest minimizer of `L(m) + K_pen n^-rho sqrt(s(m))`, where `s(m)` counts
//! the signature coefficients up to order `m` (constant term included).

use alloc::format;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::paths::SampledPath;
use crate::ridge::{
    argmin_prefer_last, cv_errors, cv_select_lambda_with, default_lambda_grid, empirical_risk,
    log_grid, predict, ridge_fit_with, RidgeModel, RidgeOptions,
};
use crate::signature::{batch_signatures_in, sig_len, SigShape, DEFAULT_BUDGET};

pub const DEFAULT_RHO: f64 = 0.4;
/// Upper bound on the automatic choice of `m_max`.
pub const DEFAULT_MAX_ORDER: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyConfig {
    pub k_pen: f64,
    pub rho: f64,
    pub m_max: usize,
}

impl PenaltyConfig {
    pub fn new(k_pen: f64, rho: f64, m_max: usize) -> Result<Self> {
        let cfg = Self { k_pen, rho, m_max };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k_pen > 0.0) || !self.k_pen.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "K_pen must be positive, got {}",
                self.k_pen
            )));
        }
        if !(self.rho > 0.0 && self.rho < 0.5) {
            return Err(Error::InvalidConfig(format!(
                "rho must lie in (0, 1/2), got {}",
                self.rho
            )));
        }
        if self.m_max == 0 {
            return Err(Error::InvalidConfig("m_max must be at least 1".into()));
        }
        Ok(())
    }
}

/// `K_pen * n^-rho * sqrt(s_d(m))`.
pub fn penalty(n: usize, m: usize, d: usize, cfg: &PenaltyConfig) -> Result<f64> {
    cfg.validate()?;
    penalty_value(n, m, d, cfg.k_pen, cfg.rho)
}

fn penalty_value(n: usize, m: usize, d: usize, k_pen: f64, rho: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Empty("samples"));
    }
    let size = sig_len(d, m)? as f64;
    Ok(k_pen * libm::pow(n as f64, -rho) * libm::sqrt(size))
}

/// Penalties for `m = 0..=m_max`.
pub fn penalty_curve(n: usize, d: usize, cfg: &PenaltyConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    (0..=cfg.m_max)
        .map(|m| penalty_value(n, m, d, cfg.k_pen, cfg.rho))
        .collect()
}

/// Smallest index minimizing `risks[m] + penalties[m]`.
pub fn select_order(risks: &[f64], penalties: &[f64]) -> Result<usize> {
    if risks.is_empty() {
        return Err(Error::Empty("risk curve"));
    }
    if risks.len() != penalties.len() {
        return Err(Error::LengthMismatch {
            expected: risks.len(),
            found: penalties.len(),
        });
    }
    let mut best = 0;
    let mut best_val = f64::INFINITY;
    for (m, (r, p)) in risks.iter().zip(penalties).enumerate() {
        let v = r + p;
        if v < best_val {
            best = m;
            best_val = v;
        }
    }
    Ok(best)
}

fn check_targets(n: usize, targets: &[f64]) -> Result<()> {
    if n == 0 {
        return Err(Error::Empty("paths"));
    }
    if targets.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: targets.len(),
        });
    }
    Ok(())
}

/// Training risks for `m = 0..=shape.order()`, given the signature features at
/// the top order (`n x shape.len()`). Lower orders use column prefixes.
pub fn risk_curve_from_features(
    features: &DMatrix<f64>,
    shape: &SigShape,
    targets: &[f64],
    lambda: f64,
    opts: RidgeOptions,
) -> Result<Vec<f64>> {
    check_targets(features.nrows(), targets)?;
    if features.ncols() != shape.len() {
        return Err(Error::LengthMismatch {
            expected: shape.len(),
            found: features.ncols(),
        });
    }
    (0..=shape.order())
        .map(|m| {
            let q = shape.truncated(m).len();
            let block = features.columns(0, q).into_owned();
            let model = ridge_fit_with(&block, targets, lambda, opts)?;
            empirical_risk(&model, &block, targets)
        })
        .collect()
}

/// Training risk of the ridge fit at every order `0..=m_max`.
///
/// The paths are used as given; callers wanting time augmentation apply it first.
pub fn risk_curve(
    paths: &[SampledPath],
    targets: &[f64],
    m_max: usize,
    lambda: f64,
) -> Result<Vec<f64>> {
    check_targets(paths.len(), targets)?;
    let shape = SigShape::new(paths[0].dim(), m_max)?;
    let features = batch_signatures_in(paths, shape)?;
    risk_curve_from_features(&features, &shape, targets, lambda, RidgeOptions::default())
}

/// Selected order for every `K_pen` of a grid, for a fixed risk curve.
pub fn m_hat_profile(
    risks: &[f64],
    n: usize,
    d: usize,
    kpen_grid: &[f64],
    rho: f64,
) -> Result<Vec<usize>> {
    if risks.is_empty() {
        return Err(Error::Empty("risk curve"));
    }
    let m_max = risks.len() - 1;
    kpen_grid
        .iter()
        .map(|&k_pen| {
            let cfg = PenaltyConfig::new(k_pen, rho, m_max.max(1))?;
            let pens: Vec<f64> = (0..=m_max)
                .map(|m| penalty_value(n, m, d, cfg.k_pen, cfg.rho))
                .collect::<Result<_>>()?;
            select_order(risks, &pens)
        })
        .collect()
}

/// Index `j >= 1` of the earliest largest drop `m_hats[j-1] - m_hats[j]`.
pub fn first_big_jump(m_hats: &[usize]) -> Result<usize> {
    let mut best: Option<(usize, usize)> = None;
    for j in 1..m_hats.len() {
        let drop = m_hats[j - 1].saturating_sub(m_hats[j]);
        if drop > 0 && best.map_or(true, |(_, b)| drop > b) {
            best = Some((j, drop));
        }
    }
    best.map(|(j, _)| j).ok_or(Error::DegenerateGrid)
}

/// Outcome of the dimension-jump calibration.
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionJump {
    /// Twice the grid value at the jump.
    pub k_pen: f64,
    pub jump_index: usize,
    pub m_hats: Vec<usize>,
}

/// Dimension-jump calibration on a precomputed risk curve.
pub fn dimension_jump_from_risks(
    risks: &[f64],
    n: usize,
    d: usize,
    kpen_grid: &[f64],
    rho: f64,
) -> Result<DimensionJump> {
    if kpen_grid.len() < 2 {
        return Err(Error::InvalidConfig(
            "the K_pen grid needs at least two values".into(),
        ));
    }
    if kpen_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidConfig(
            "the K_pen grid must be strictly increasing".into(),
        ));
    }
    let m_hats = m_hat_profile(risks, n, d, kpen_grid, rho)?;
    let jump_index = first_big_jump(&m_hats)?;
    Ok(DimensionJump {
        k_pen: 2.0 * kpen_grid[jump_index],
        jump_index,
        m_hats,
    })
}

/// Slope-heuristic `K_pen`: twice the grid value at the first big jump of the
/// selected order. The paths are used as given (augment them first).
pub fn dimension_jump(
    paths: &[SampledPath],
    targets: &[f64],
    m_max: usize,
    lambda: f64,
    kpen_grid: &[f64],
    rho: f64,
) -> Result<f64> {
    let risks = risk_curve(paths, targets, m_max, lambda)?;
    dimension_jump_from_risks(&risks, paths.len(), paths[0].dim(), kpen_grid, rho).map(|j| j.k_pen)
}

/// Default `K_pen` grid: `1e-3 ..= 1e4`, fifteen points per decade.
pub fn default_kpen_grid() -> Vec<f64> {
    log_grid(1e-3, 1e4, 15)
}

/// Automatic `m_max` for `n` samples of (augmented) dimension `d`: the largest
/// order whose signature has at most `n` coefficients, so that every candidate
/// model is identified by the sample. Bounded by [`DEFAULT_MAX_ORDER`] and by
/// the coefficient budget, never below 1.
pub fn default_m_max(d: usize, n: usize, budget: usize) -> usize {
    let mut m_max = 1;
    for m in 2..=DEFAULT_MAX_ORDER {
        match sig_len(d, m) {
            Ok(len) if len <= budget && len <= n => m_max = m,
            _ => break,
        }
    }
    m_max
}

/// Settings of the end-to-end fit that are not part of the penalty.
#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub lambda_grid: Vec<f64>,
    pub cv_folds: usize,
    pub seed: u64,
    pub budget: usize,
    pub ridge: RidgeOptions,
    /// Skip cross-validation and use this ridge strength.
    pub lambda: Option<f64>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            lambda_grid: default_lambda_grid(),
            cv_folds: 5,
            seed: 0,
            budget: DEFAULT_BUDGET,
            ridge: RidgeOptions::default(),
            lambda: None,
        }
    }
}

/// Diagnostics of an order selection.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderSelectionResult {
    pub m_hat: usize,
    /// Training risk for `m = 0..=m_max`.
    pub risks: Vec<f64>,
    pub penalties: Vec<f64>,
    pub lambda: f64,
    pub k_pen_used: f64,
}

/// Time-augmented copies of `paths`, checking that dimensions agree.
pub fn augment_all(paths: &[SampledPath]) -> Result<Vec<SampledPath>> {
    let d = paths.first().ok_or(Error::Empty("paths"))?.dim();
    paths
        .iter()
        .map(|p| {
            if p.dim() != d {
                Err(Error::LengthMismatch {
                    expected: d,
                    found: p.dim(),
                })
            } else {
                Ok(p.time_augment())
            }
        })
        .collect()
}

/// Ridge strength chosen by cross-validation on order-1 signature features.
pub fn cv_lambda_order_one(
    features: &DMatrix<f64>,
    shape: &SigShape,
    targets: &[f64],
    opts: &FitOptions,
) -> Result<f64> {
    let q = shape.truncated(1).len();
    let block = features.columns(0, q).into_owned();
    cv_select_lambda_with(
        &block,
        targets,
        &opts.lambda_grid,
        opts.cv_folds,
        opts.seed,
        opts.ridge,
    )
}

/// Signature features of the augmented paths at order `m_max`.
pub fn augmented_features(
    paths: &[SampledPath],
    m_max: usize,
    budget: usize,
) -> Result<(DMatrix<f64>, SigShape)> {
    let augmented = augment_all(paths)?;
    let shape = SigShape::with_budget(augmented[0].dim(), m_max, budget)?;
    Ok((batch_signatures_in(&augmented, shape)?, shape))
}

/// Selection and final fit from precomputed top-order features.
pub fn fit_from_features(
    features: &DMatrix<f64>,
    shape: &SigShape,
    targets: &[f64],
    k_pen: f64,
    rho: f64,
    opts: &FitOptions,
) -> Result<(OrderSelectionResult, RidgeModel)> {
    let cfg = PenaltyConfig::new(k_pen, rho, shape.order())?;
    check_targets(features.nrows(), targets)?;
    let lambda = match opts.lambda {
        Some(l) => l,
        None => cv_lambda_order_one(features, shape, targets, opts)?,
    };
    let risks = risk_curve_from_features(features, shape, targets, lambda, opts.ridge)?;
    let penalties = penalty_curve(features.nrows(), shape.dim(), &cfg)?;
    let m_hat = select_order(&risks, &penalties)?;
    let final_shape = shape.truncated(m_hat);
    let block = features.columns(0, final_shape.len()).into_owned();
    let model = ridge_fit_with(&block, targets, lambda, opts.ridge)?.with_shape(final_shape)?;
    Ok((
        OrderSelectionResult {
            m_hat,
            risks,
            penalties,
            lambda,
            k_pen_used: k_pen,
        },
        model,
    ))
}

/// The full procedure on raw paths: time augmentation, cross-validated ridge
/// strength on order-1 features, risk and penalty curves for `m = 0..=m_max`,
/// order selection and the final ridge fit at the selected order.
pub fn fit_signature_model(
    paths: &[SampledPath],
    targets: &[f64],
    cfg: &PenaltyConfig,
    opts: &FitOptions,
) -> Result<(OrderSelectionResult, RidgeModel)> {
    cfg.validate()?;
    check_targets(paths.len(), targets)?;
    let (features, shape) = augmented_features(paths, cfg.m_max, opts.budget)?;
    fit_from_features(&features, &shape, targets, cfg.k_pen, cfg.rho, opts)
}

/// The full procedure with `K_pen` calibrated by the dimension jump on the same
/// risk curve.
pub fn fit_signature_model_auto(
    paths: &[SampledPath],
    targets: &[f64],
    m_max: usize,
    rho: f64,
    kpen_grid: &[f64],
    opts: &FitOptions,
) -> Result<(DimensionJump, OrderSelectionResult, RidgeModel)> {
    check_targets(paths.len(), targets)?;
    let (features, shape) = augmented_features(paths, m_max, opts.budget)?;
    let lambda = match opts.lambda {
        Some(l) => l,
        None => cv_lambda_order_one(&features, &shape, targets, opts)?,
    };
    let risks = risk_curve_from_features(&features, &shape, targets, lambda, opts.ridge)?;
    let jump = dimension_jump_from_risks(&risks, paths.len(), shape.dim(), kpen_grid, rho)?;
    let fixed = FitOptions {
        lambda: Some(lambda),
        ..opts.clone()
    };
    let (result, model) = fit_from_features(&features, &shape, targets, jump.k_pen, rho, &fixed)?;
    Ok((jump, result, model))
}

/// Outcome of choosing the order and the ridge strength by cross-validation.
#[derive(Debug, Clone, PartialEq)]
pub struct CvOrderResult {
    pub m_hat: usize,
    pub lambda: f64,
    /// Best out-of-fold error at each order `0..=m_max`.
    pub errors: Vec<f64>,
}

/// Joint cross-validation over the order `0..=shape.order()` and the ridge grid
/// on precomputed top-order features, then a refit at the best pair. Ties go to
/// the lower order.
pub fn fit_cv_from_features(
    features: &DMatrix<f64>,
    shape: &SigShape,
    targets: &[f64],
    opts: &FitOptions,
) -> Result<(CvOrderResult, RidgeModel)> {
    check_targets(features.nrows(), targets)?;
    let mut errors = Vec::with_capacity(shape.order() + 1);
    let mut best: Option<(usize, f64, f64)> = None;
    for m in 0..=shape.order() {
        let q = shape.truncated(m).len();
        let block = features.columns(0, q).into_owned();
        let curve = cv_errors(
            &block,
            targets,
            &opts.lambda_grid,
            opts.cv_folds,
            opts.seed,
            opts.ridge,
        )?;
        let Some(i) = argmin_prefer_last(&curve) else {
            errors.push(f64::NAN);
            continue;
        };
        errors.push(curve[i]);
        if best.map_or(true, |b| curve[i] < b.2) {
            best = Some((m, opts.lambda_grid[i], curve[i]));
        }
    }
    let (m_hat, lambda, _) =
        best.ok_or_else(|| Error::IllConditioned("every cross-validation error is NaN".into()))?;
    let final_shape = shape.truncated(m_hat);
    let block = features.columns(0, final_shape.len()).into_owned();
    let model = ridge_fit_with(&block, targets, lambda, opts.ridge)?.with_shape(final_shape)?;
    Ok((
        CvOrderResult {
            m_hat,
            lambda,
            errors,
        },
        model,
    ))
}

/// Cross-validated order and ridge strength on raw paths (time augmentation
/// included), for `m = 0..=m_max`.
pub fn fit_signature_cv(
    paths: &[SampledPath],
    targets: &[f64],
    m_max: usize,
    opts: &FitOptions,
) -> Result<(CvOrderResult, RidgeModel)> {
    check_targets(paths.len(), targets)?;
    let (features, shape) = augmented_features(paths, m_max, opts.budget)?;
    fit_cv_from_features(&features, &shape, targets, opts)
}

/// Predictions of a model fit by [`fit_signature_model`] on new raw paths.
pub fn predict_paths(model: &RidgeModel, paths: &[SampledPath]) -> Result<Vec<f64>> {
    let shape = *model
        .shape()
        .ok_or_else(|| Error::InvalidConfig("model carries no signature shape".into()))?;
    let augmented = augment_all(paths)?;
    if augmented[0].dim() != shape.dim() {
        return Err(Error::LengthMismatch {
            expected: shape.dim(),
            found: augmented[0].dim(),
        });
    }
    predict(model, &batch_signatures_in(&augmented, shape)?)
}
