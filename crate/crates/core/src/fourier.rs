//! Fourier-basis functional regression, used as a baseline.
//!
//! Each coordinate of a path is projected by least squares onto
//! `{1, sin(2 pi j t), cos(2 pi j t)}` for `j = 1..=(K-1)/2`, with the time
//! grid rescaled to `[0, 1]`. The concatenated coefficients are then regressed
//! on the targets, either by ridge with a cross-validated strength or by plain
//! least squares.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use core::f64::consts::TAU;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::paths::SampledPath;
use crate::ridge::{
    argmin_prefer_last, cv_errors, kfold_indices, predict, ridge_fit_with, RidgeModel, RidgeOptions,
};

/// Basis sizes searched by default.
pub const DEFAULT_K_GRID: [usize; 5] = [5, 7, 9, 11, 13];

const MIN_PROJECTION_RCOND: f64 = 1e-12;

/// Basis matrix (`times.len()` x `k`) with columns `1, sin, cos, sin, cos, ...`.
/// Times are mapped linearly onto `[0, 1]`.
pub fn fourier_basis(times: &[f64], k: usize) -> Result<DMatrix<f64>> {
    check_k(k)?;
    let p = times.len();
    if p == 0 {
        return Err(Error::Empty("times"));
    }
    let t0 = times[0];
    let span = times[p - 1] - t0;
    let mut basis = DMatrix::zeros(p, k);
    for (i, &t) in times.iter().enumerate() {
        let u = if span > 0.0 { (t - t0) / span } else { 0.0 };
        basis[(i, 0)] = 1.0;
        for j in 1..=(k - 1) / 2 {
            let arg = TAU * j as f64 * u;
            basis[(i, 2 * j - 1)] = libm::sin(arg);
            basis[(i, 2 * j)] = libm::cos(arg);
        }
    }
    Ok(basis)
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 || k % 2 == 0 {
        return Err(Error::InvalidConfig(format!(
            "Fourier basis size must be odd and >= 1, got {k}"
        )));
    }
    Ok(())
}

/// Least-squares projector `(B^T B)^{-1} B^T` for one time grid.
fn projector(times: &[f64], k: usize) -> Result<DMatrix<f64>> {
    if times.len() < k {
        return Err(Error::IllConditioned(format!(
            "{} sample points cannot determine {k} Fourier coefficients",
            times.len()
        )));
    }
    let basis = fourier_basis(times, k)?;
    let gram = basis.tr_mul(&basis);
    let chol = gram.cholesky().ok_or_else(|| {
        Error::IllConditioned("Fourier projection is singular on this grid".into())
    })?;
    let l = chol.l_dirty();
    let (lo, hi) = (0..k).fold((f64::INFINITY, 0.0f64), |(lo, hi), i| {
        let v = l[(i, i)] * l[(i, i)];
        (lo.min(v), hi.max(v))
    });
    if lo / hi < MIN_PROJECTION_RCOND {
        return Err(Error::IllConditioned(format!(
            "Fourier projection pivot ratio {:.3e} on this grid",
            lo / hi
        )));
    }
    Ok(chol.solve(&basis.transpose()))
}

/// Per-coordinate Fourier coefficients, one row per path: `d * k` columns,
/// coordinate-major.
pub fn fourier_design(paths: &[SampledPath], k: usize) -> Result<DMatrix<f64>> {
    check_k(k)?;
    let first = paths.first().ok_or(Error::Empty("paths"))?;
    let d = first.dim();
    let mut design = DMatrix::zeros(paths.len(), d * k);
    let mut cached: Option<(&[f64], DMatrix<f64>)> = None;
    for (row, path) in paths.iter().enumerate() {
        if path.dim() != d {
            return Err(Error::LengthMismatch {
                expected: d,
                found: path.dim(),
            });
        }
        let reuse = matches!(&cached, Some((t, _)) if *t == path.times());
        if !reuse {
            cached = Some((path.times(), projector(path.times(), k)?));
        }
        let proj = &cached.as_ref().expect("projector cached").1;
        let values = DMatrix::from_row_slice(path.len(), d, path.values());
        let coeffs = proj * values;
        for c in 0..d {
            for j in 0..k {
                design[(row, c * k + j)] = coeffs[(j, c)];
            }
        }
    }
    Ok(design)
}

fn with_intercept(design: &DMatrix<f64>) -> DMatrix<f64> {
    design.clone().insert_column(0, 1.0)
}

/// Settings of the baseline fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierOptions {
    pub k_grid: Vec<usize>,
    /// Ignored when `ols` is set.
    pub lambda_grid: Vec<f64>,
    pub folds: usize,
    pub seed: u64,
    /// Plain least squares, cross-validating the basis size only.
    pub ols: bool,
}

impl Default for FourierOptions {
    fn default() -> Self {
        Self {
            k_grid: DEFAULT_K_GRID.to_vec(),
            lambda_grid: crate::ridge::default_lambda_grid(),
            folds: 5,
            seed: 0,
            ols: false,
        }
    }
}

/// Fitted baseline: basis size and the regression on `[1, coefficients]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierModel {
    pub n_basis: usize,
    pub ridge: RidgeModel,
    /// Out-of-fold error of the chosen pair.
    pub cv_error: f64,
}

impl FourierModel {
    pub fn predict(&self, paths: &[SampledPath]) -> Result<Vec<f64>> {
        predict(
            &self.ridge,
            &with_intercept(&fourier_design(paths, self.n_basis)?),
        )
    }
}

fn ols_cv_error(features: &DMatrix<f64>, targets: &[f64], folds: usize, seed: u64) -> Result<f64> {
    let n = features.nrows();
    let mut sse = 0.0;
    for held in kfold_indices(n, folds, seed)? {
        let mut is_held = vec![false; n];
        for &i in &held {
            is_held[i] = true;
        }
        let train: Vec<usize> = (0..n).filter(|&i| !is_held[i]).collect();
        let train_y: Vec<f64> = train.iter().map(|&i| targets[i]).collect();
        let model = match ridge_fit_with(
            &features.select_rows(train.iter()),
            &train_y,
            0.0,
            RidgeOptions::default(),
        ) {
            Ok(m) => m,
            Err(Error::IllConditioned(_)) => return Ok(f64::INFINITY),
            Err(e) => return Err(e),
        };
        let fitted = predict(&model, &features.select_rows(held.iter()))?;
        sse += fitted
            .iter()
            .zip(&held)
            .map(|(f, &i)| (targets[i] - f) * (targets[i] - f))
            .sum::<f64>();
    }
    Ok(sse / n as f64)
}

/// Joint cross-validation over basis size and ridge strength, then a refit at
/// the best pair. Ties go to the smaller basis and the larger strength.
pub fn fit_fourier_model(
    paths: &[SampledPath],
    targets: &[f64],
    opts: &FourierOptions,
) -> Result<FourierModel> {
    if opts.k_grid.is_empty() {
        return Err(Error::Empty("basis size grid"));
    }
    if !opts.ols && opts.lambda_grid.is_empty() {
        return Err(Error::Empty("lambda grid"));
    }
    if paths.len() != targets.len() {
        return Err(Error::LengthMismatch {
            expected: paths.len(),
            found: targets.len(),
        });
    }
    let mut best: Option<(usize, f64, f64, DMatrix<f64>)> = None;
    for &k in &opts.k_grid {
        let features = with_intercept(&fourier_design(paths, k)?);
        let (lambda, err) = if opts.ols {
            (
                0.0,
                ols_cv_error(&features, targets, opts.folds, opts.seed)?,
            )
        } else {
            let errors = cv_errors(
                &features,
                targets,
                &opts.lambda_grid,
                opts.folds,
                opts.seed,
                RidgeOptions::default(),
            )?;
            match argmin_prefer_last(&errors) {
                Some(i) => (opts.lambda_grid[i], errors[i]),
                None => continue,
            }
        };
        if best.as_ref().map_or(true, |b| err < b.2) {
            best = Some((k, lambda, err, features));
        }
    }
    let (n_basis, lambda, cv_error, features) = best.ok_or_else(|| {
        Error::IllConditioned("no basis size gave a finite cross-validation error".into())
    })?;
    let ridge = ridge_fit_with(&features, targets, lambda, RidgeOptions::default())?;
    Ok(FourierModel {
        n_basis,
        ridge,
        cv_error,
    })
}
