//! Ridge regression on feature matrices.
//!
//! The objective is `(1/n) ||y - F b||^2 + lambda ||b_pen||^2`. When the first
//! column of `F` is identically one it acts as an unpenalized intercept: the
//! remaining columns are centered, the penalized part is solved on the centered
//! problem and the intercept is recovered from the means. That is the exact
//! minimizer of the objective above, not an approximation.
//!
//! Systems are solved through the smaller of the two Gram matrices: `F^T F / n`
//! when there are at most `n` penalized columns, `F F^T / n` otherwise.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng::{stream_rng, STREAM_FOLDS, STREAM_SPLIT};
use crate::signature::SigShape;

/// Reciprocal condition number below which an unregularized system is rejected.
const MIN_RCOND: f64 = 1e-13;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RidgeOptions {
    /// Rescale penalized columns to unit variance before fitting.
    pub standardize: bool,
}

/// Fitted ridge coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeModel {
    coeffs: Vec<f64>,
    lambda: f64,
    intercept: bool,
    shape: Option<SigShape>,
}

impl RidgeModel {
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Whether the first coefficient is an unpenalized intercept.
    pub fn has_intercept(&self) -> bool {
        self.intercept
    }

    /// Signature shape of the features, when the model was fit on signatures.
    pub fn shape(&self) -> Option<&SigShape> {
        self.shape.as_ref()
    }

    pub fn with_shape(mut self, shape: SigShape) -> Result<Self> {
        if shape.len() != self.coeffs.len() {
            return Err(Error::LengthMismatch {
                expected: shape.len(),
                found: self.coeffs.len(),
            });
        }
        self.shape = Some(shape);
        Ok(self)
    }

    /// Prediction for one feature row.
    pub fn predict_row(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.coeffs.len() {
            return Err(Error::LengthMismatch {
                expected: self.coeffs.len(),
                found: row.len(),
            });
        }
        Ok(row.iter().zip(&self.coeffs).map(|(x, b)| x * b).sum())
    }
}

/// `F * coeffs`.
pub fn predict(model: &RidgeModel, features: &DMatrix<f64>) -> Result<Vec<f64>> {
    if features.ncols() != model.coeffs.len() {
        return Err(Error::LengthMismatch {
            expected: model.coeffs.len(),
            found: features.ncols(),
        });
    }
    let beta = DVector::from_column_slice(&model.coeffs);
    Ok((features * beta).iter().copied().collect())
}

/// Mean squared residual `(1/n) ||y - F b||^2`, without the penalty.
pub fn empirical_risk(model: &RidgeModel, features: &DMatrix<f64>, targets: &[f64]) -> Result<f64> {
    if features.nrows() != targets.len() {
        return Err(Error::LengthMismatch {
            expected: features.nrows(),
            found: targets.len(),
        });
    }
    if targets.is_empty() {
        return Err(Error::Empty("targets"));
    }
    let fitted = predict(model, features)?;
    let sse: f64 = fitted
        .iter()
        .zip(targets)
        .map(|(f, y)| (y - f) * (y - f))
        .sum();
    Ok(sse / targets.len() as f64)
}

/// Ridge fit with default options (raw features).
pub fn ridge_fit(features: &DMatrix<f64>, targets: &[f64], lambda: f64) -> Result<RidgeModel> {
    ridge_fit_with(features, targets, lambda, RidgeOptions::default())
}

pub fn ridge_fit_with(
    features: &DMatrix<f64>,
    targets: &[f64],
    lambda: f64,
    opts: RidgeOptions,
) -> Result<RidgeModel> {
    check_lambda(lambda)?;
    let prep = Prepared::new(features, targets, opts)?;
    let gamma = prep.solve(lambda)?;
    Ok(prep.into_model(gamma, lambda))
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "ridge strength must be finite and >= 0, got {lambda}"
        )));
    }
    Ok(())
}

/// Centered (and optionally rescaled) penalized block of a regression problem.
struct Prepared {
    n: usize,
    intercept: bool,
    /// Penalized columns, centered when an intercept is present, then scaled.
    a: DMatrix<f64>,
    b: DVector<f64>,
    col_means: Vec<f64>,
    col_scales: Vec<f64>,
    y_mean: f64,
}

impl Prepared {
    fn new(features: &DMatrix<f64>, targets: &[f64], opts: RidgeOptions) -> Result<Self> {
        let (n, q) = features.shape();
        if n == 0 {
            return Err(Error::Empty("samples"));
        }
        if q == 0 {
            return Err(Error::Empty("features"));
        }
        if targets.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: targets.len(),
            });
        }
        if let Some(idx) = features.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                row: idx % n,
                col: idx / n,
            });
        }
        if let Some(row) = targets.iter().position(|y| !y.is_finite()) {
            return Err(Error::NonFinite { row, col: q });
        }
        let intercept = features.column(0).iter().all(|&x| x == 1.0);
        let first = usize::from(intercept);
        let mut a = features.columns(first, q - first).into_owned();
        let mut b = DVector::from_column_slice(targets);
        let nf = n as f64;
        let mut col_means = vec![0.0; a.ncols()];
        let mut y_mean = 0.0;
        if intercept {
            y_mean = b.sum() / nf;
            b.add_scalar_mut(-y_mean);
            for (j, mut col) in a.column_iter_mut().enumerate() {
                let mean = col.sum() / nf;
                col.add_scalar_mut(-mean);
                col_means[j] = mean;
            }
        }
        let mut col_scales = vec![1.0; a.ncols()];
        if opts.standardize {
            for (j, mut col) in a.column_iter_mut().enumerate() {
                let mean = if intercept { 0.0 } else { col.sum() / nf };
                let var = col.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / nf;
                let sd = libm::sqrt(var);
                if sd > 0.0 {
                    col /= sd;
                    col_scales[j] = sd;
                }
            }
        }
        Ok(Self {
            n,
            intercept,
            a,
            b,
            col_means,
            col_scales,
            y_mean,
        })
    }

    fn penalized(&self) -> usize {
        self.a.ncols()
    }

    /// Penalized coefficients in the scaled coordinates.
    fn solve(&self, lambda: f64) -> Result<DVector<f64>> {
        let r = self.penalized();
        if r == 0 {
            return Ok(DVector::zeros(0));
        }
        let nf = self.n as f64;
        if r <= self.n {
            let gram = self.a.tr_mul(&self.a) / nf;
            let rhs = self.a.tr_mul(&self.b) / nf;
            solve_shifted(gram, rhs, lambda)
        } else {
            if lambda == 0.0 {
                return Err(Error::IllConditioned(format!(
                    "{r} penalized columns but only {} samples and no regularization",
                    self.n
                )));
            }
            let kernel = &self.a * self.a.transpose() / nf;
            let rhs = &self.b / nf;
            let w = solve_shifted(kernel, rhs, lambda)?;
            Ok(self.a.tr_mul(&w))
        }
    }

    fn into_model(self, gamma: DVector<f64>, lambda: f64) -> RidgeModel {
        let mut coeffs = Vec::with_capacity(gamma.len() + usize::from(self.intercept));
        let unscaled: Vec<f64> = gamma
            .iter()
            .zip(&self.col_scales)
            .map(|(g, s)| g / s)
            .collect();
        if self.intercept {
            let shift: f64 = unscaled
                .iter()
                .zip(&self.col_means)
                .map(|(g, m)| g * m)
                .sum();
            coeffs.push(self.y_mean - shift);
        }
        coeffs.extend(unscaled);
        RidgeModel {
            coeffs,
            lambda,
            intercept: self.intercept,
            shape: None,
        }
    }
}

/// Solves `(gram + lambda I) x = rhs` for a symmetric positive semidefinite `gram`.
///
/// Uses a Cholesky factorization of the Jacobi-rescaled system and falls back to
/// a clamped eigendecomposition when the factorization breaks down at
/// `lambda > 0`.
fn solve_shifted(mut gram: DMatrix<f64>, rhs: DVector<f64>, lambda: f64) -> Result<DVector<f64>> {
    let r = gram.nrows();
    for i in 0..r {
        gram[(i, i)] += lambda;
    }
    let diag: Vec<f64> = (0..r).map(|i| gram[(i, i)]).collect();
    if let Some(i) = diag.iter().position(|&x| !(x > 0.0)) {
        return Err(Error::IllConditioned(format!(
            "column {i} is identically zero and unregularized"
        )));
    }
    let inv_sqrt: Vec<f64> = diag.iter().map(|&x| 1.0 / libm::sqrt(x)).collect();
    for j in 0..r {
        for i in 0..r {
            gram[(i, j)] *= inv_sqrt[i] * inv_sqrt[j];
        }
    }
    let scaled_rhs = DVector::from_iterator(r, rhs.iter().zip(&inv_sqrt).map(|(v, s)| v * s));
    let solved = match gram.clone().cholesky() {
        Some(chol) => {
            let l = chol.l_dirty();
            let (lo, hi) = (0..r).fold((f64::INFINITY, 0.0f64), |(lo, hi), i| {
                let v = l[(i, i)] * l[(i, i)];
                (lo.min(v), hi.max(v))
            });
            let rcond = lo / hi;
            if rcond >= MIN_RCOND {
                chol.solve(&scaled_rhs)
            } else if lambda == 0.0 {
                return Err(Error::IllConditioned(format!(
                    "pivot ratio {rcond:.3e} below {MIN_RCOND:e}"
                )));
            } else {
                truncated_eigen_solve(gram, &scaled_rhs, lambda, &inv_sqrt)
            }
        }
        None if lambda == 0.0 => {
            return Err(Error::IllConditioned(
                "normal equations are not positive definite".into(),
            ))
        }
        None => truncated_eigen_solve(gram, &scaled_rhs, lambda, &inv_sqrt),
    };
    Ok(DVector::from_iterator(
        r,
        solved.iter().zip(&inv_sqrt).map(|(v, s)| v * s),
    ))
}

/// Eigen-solve of the rescaled system `S (G + lambda I) S`, for when Cholesky is
/// unreliable. The shift `lambda S^2` is split back out so that directions whose
/// eigenvalue is lost in rounding are dropped instead of amplified.
fn truncated_eigen_solve(
    mut scaled: DMatrix<f64>,
    rhs: &DVector<f64>,
    lambda: f64,
    inv_sqrt: &[f64],
) -> DVector<f64> {
    let r = scaled.nrows();
    for i in 0..r {
        scaled[(i, i)] -= lambda * inv_sqrt[i] * inv_sqrt[i];
    }
    let eig = SymmetricEigen::new(scaled);
    let top = eig.eigenvalues.iter().fold(0.0f64, |a, &e| a.max(e));
    let noise = top * r as f64 * f64::EPSILON;
    let shift = lambda * inv_sqrt.iter().fold(f64::INFINITY, |a, &s| a.min(s * s));
    let proj = eig.eigenvectors.tr_mul(rhs);
    let weighted = DVector::from_iterator(
        r,
        proj.iter().zip(eig.eigenvalues.iter()).map(|(p, &e)| {
            let e = if e > noise { e } else { 0.0 };
            let denom = e + shift;
            if denom > noise {
                p / denom
            } else {
                0.0
            }
        }),
    );
    &eig.eigenvectors * weighted
}

/// Spectral form of a prepared problem: solves for many `lambda` at once.
struct SpectralPath {
    prep: Prepared,
    dual: bool,
    vectors: DMatrix<f64>,
    values: DVector<f64>,
    /// Right-hand side projected on the eigenvectors.
    proj: DVector<f64>,
}

impl SpectralPath {
    fn new(prep: Prepared) -> Self {
        let nf = prep.n as f64;
        let dual = prep.penalized() > prep.n;
        let (gram, rhs) = if dual {
            (&prep.a * prep.a.transpose() / nf, &prep.b / nf)
        } else {
            (prep.a.tr_mul(&prep.a) / nf, prep.a.tr_mul(&prep.b) / nf)
        };
        if gram.is_empty() {
            return Self {
                prep,
                dual,
                vectors: DMatrix::zeros(0, 0),
                values: DVector::zeros(0),
                proj: DVector::zeros(0),
            };
        }
        let eig = SymmetricEigen::new(gram);
        let proj = eig.eigenvectors.tr_mul(&rhs);
        let values = eig.eigenvalues.map(|e| e.max(0.0));
        Self {
            prep,
            dual,
            vectors: eig.eigenvectors,
            values,
            proj,
        }
    }

    fn model(&self, lambda: f64) -> RidgeModel {
        let weighted = DVector::from_iterator(
            self.values.len(),
            self.proj
                .iter()
                .zip(self.values.iter())
                .map(|(p, e)| p / (e + lambda)),
        );
        let mut gamma = &self.vectors * weighted;
        if self.dual {
            gamma = self.prep.a.tr_mul(&gamma);
        }
        let prep = Prepared {
            n: self.prep.n,
            intercept: self.prep.intercept,
            a: DMatrix::zeros(0, 0),
            b: DVector::zeros(0),
            col_means: self.prep.col_means.clone(),
            col_scales: self.prep.col_scales.clone(),
            y_mean: self.prep.y_mean,
        };
        prep.into_model(gamma, lambda)
    }
}

/// `count` points per decade from `lo` to `hi`, both included.
pub fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let (a, b) = (libm::log10(lo), libm::log10(hi));
    let steps = libm::round((b - a) * per_decade as f64) as usize;
    if steps == 0 {
        return vec![lo];
    }
    (0..=steps)
        .map(|i| libm::pow(10.0, a + (b - a) * i as f64 / steps as f64))
        .collect()
}

/// Default ridge grid: `1e-6 ..= 1e3`, ten points per decade.
pub fn default_lambda_grid() -> Vec<f64> {
    log_grid(1e-6, 1e3, 10)
}

/// Deterministic k-fold split: a seeded shuffle cut into contiguous folds whose
/// sizes differ by at most one.
pub fn kfold_indices(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::InvalidConfig(format!(
            "need at least 2 folds, got {k}"
        )));
    }
    if n < k {
        return Err(Error::TooFewForFolds { n, k });
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut stream_rng(seed, STREAM_FOLDS, n as u64, k as u64));
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        folds.push(perm[start..start + size].to_vec());
        start += size;
    }
    Ok(folds)
}

/// Seeded shuffle of `0..n` cut into a training part of `round(n * fraction)`
/// indices (at least one on each side) and a test part, both sorted.
pub fn train_test_split(n: usize, fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "train fraction must lie in (0, 1), got {fraction}"
        )));
    }
    if n < 2 {
        return Err(Error::TooFewSamples(n));
    }
    let n_train = (libm::round(n as f64 * fraction) as usize).clamp(1, n - 1);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut stream_rng(seed, STREAM_SPLIT, n as u64, 0));
    let mut train = perm[..n_train].to_vec();
    let mut test = perm[n_train..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

fn take_rows(features: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    features.select_rows(rows.iter())
}

/// Mean out-of-fold squared error for every value of `grid`.
pub fn cv_errors(
    features: &DMatrix<f64>,
    targets: &[f64],
    grid: &[f64],
    k: usize,
    seed: u64,
    opts: RidgeOptions,
) -> Result<Vec<f64>> {
    if grid.is_empty() {
        return Err(Error::Empty("lambda grid"));
    }
    for &l in grid {
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "grid values must be positive, got {l}"
            )));
        }
    }
    let n = features.nrows();
    if targets.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: targets.len(),
        });
    }
    let folds = kfold_indices(n, k, seed)?;
    let mut sse = vec![0.0; grid.len()];
    for held in &folds {
        let mut is_held = vec![false; n];
        for &i in held {
            is_held[i] = true;
        }
        let train: Vec<usize> = (0..n).filter(|&i| !is_held[i]).collect();
        let train_y: Vec<f64> = train.iter().map(|&i| targets[i]).collect();
        let test_x = take_rows(features, held);
        let path = SpectralPath::new(Prepared::new(&take_rows(features, &train), &train_y, opts)?);
        for (slot, &lambda) in sse.iter_mut().zip(grid) {
            let fitted = predict(&path.model(lambda), &test_x)?;
            *slot += fitted
                .iter()
                .zip(held)
                .map(|(f, &i)| (targets[i] - f) * (targets[i] - f))
                .sum::<f64>();
        }
    }
    Ok(sse.into_iter().map(|s| s / n as f64).collect())
}

/// Index of the smallest error; ties go to the later (larger) grid value.
pub(crate) fn argmin_prefer_last(errors: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &e) in errors.iter().enumerate() {
        match best {
            Some(b) if !(e <= errors[b]) => {}
            _ if e.is_nan() => {}
            _ => best = Some(i),
        }
    }
    best
}

/// k-fold cross-validated ridge strength. `grid` is expected in ascending order;
/// ties favour the larger value.
pub fn cv_select_lambda(
    features: &DMatrix<f64>,
    targets: &[f64],
    grid: &[f64],
    k: usize,
    seed: u64,
) -> Result<f64> {
    cv_select_lambda_with(features, targets, grid, k, seed, RidgeOptions::default())
}

pub fn cv_select_lambda_with(
    features: &DMatrix<f64>,
    targets: &[f64],
    grid: &[f64],
    k: usize,
    seed: u64,
    opts: RidgeOptions,
) -> Result<f64> {
    let errors = cv_errors(features, targets, grid, k, seed, opts)?;
    let best = argmin_prefer_last(&errors)
        .ok_or_else(|| Error::IllConditioned("every cross-validation error is NaN".into()))?;
    Ok(grid[best])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ones_and(cols: &[&[f64]]) -> DMatrix<f64> {
        let n = cols[0].len();
        let mut m = DMatrix::from_element(n, cols.len() + 1, 1.0);
        for (j, c) in cols.iter().enumerate() {
            for i in 0..n {
                m[(i, j + 1)] = c[i];
            }
        }
        m
    }

    #[test]
    fn intercept_only_is_mean() {
        let f = DMatrix::from_element(4, 1, 1.0);
        let y = [1.0, 2.0, 3.0, 10.0];
        for lambda in [0.0, 1.0, 1e6] {
            let m = ridge_fit(&f, &y, lambda).unwrap();
            assert_eq!(m.coeffs(), &[4.0]);
            assert!(m.has_intercept());
        }
    }

    #[test]
    fn exact_linear_recovery() {
        let x = [0.5, -1.0, 2.0, 3.5, 0.25];
        let f = DMatrix::from_column_slice(5, 1, &x);
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let m = ridge_fit(&f, &y, 0.0).unwrap();
        assert!(!m.has_intercept());
        assert!((m.coeffs()[0] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn heavy_penalty_limit() {
        let x1 = [0.1, 0.4, -0.3, 0.9, 1.2, -0.8];
        let x2 = [1.0, 0.0, 2.0, -1.0, 0.5, 0.3];
        let f = ones_and(&[&x1, &x2]);
        let y = [1.0, 3.0, -2.0, 4.0, 0.5, 2.0];
        let mean = y.iter().sum::<f64>() / 6.0;
        let m = ridge_fit(&f, &y, 1e8).unwrap();
        assert!((m.coeffs()[0] - mean).abs() < 1e-6);
        assert!(m.coeffs()[1].abs() < 1e-7 && m.coeffs()[2].abs() < 1e-7);
    }

    #[test]
    fn singular_unregularized_system_is_rejected() {
        let x = [1.0, 2.0, 3.0];
        let f = ones_and(&[&x, &x]);
        let err = ridge_fit(&f, &[1.0, 2.0, 3.0], 0.0).unwrap_err();
        assert!(matches!(err, Error::IllConditioned(_)));
        assert!(ridge_fit(&f, &[1.0, 2.0, 3.0], 1e-3).is_ok());
        let wide = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 2.0, 0.0, 1.0, 5.0]);
        assert!(matches!(
            ridge_fit(&wide, &[1.0, 2.0], 0.0),
            Err(Error::IllConditioned(_))
        ));
    }

    #[test]
    fn rejects_bad_inputs() {
        let f = DMatrix::from_element(3, 1, 1.0);
        assert!(ridge_fit(&f, &[1.0, 2.0], 0.1).is_err());
        assert!(ridge_fit(&f, &[1.0, f64::NAN, 2.0], 0.1).is_err());
        assert!(ridge_fit(&f, &[1.0, 2.0, 3.0], -1.0).is_err());
    }

    #[test]
    fn dual_route_matches_primal() {
        // 4 samples, 6 penalized columns on the dual side; compare against the
        // primal normal equations solved directly.
        let f = DMatrix::from_row_slice(
            4,
            7,
            &[
                1.0, 0.3, -1.0, 2.0, 0.5, 0.1, 0.0, //
                1.0, 1.3, 0.4, -0.2, 0.7, 2.1, 1.0, //
                1.0, -0.6, 0.9, 1.1, -1.5, 0.4, 0.3, //
                1.0, 0.2, 0.2, 0.8, 0.9, -0.9, 2.2,
            ],
        );
        let y = [1.0, -0.5, 2.0, 0.7];
        let lambda = 0.05;
        let m = ridge_fit(&f, &y, lambda).unwrap();
        let n = 4.0;
        let mut lhs = f.tr_mul(&f) / n;
        for i in 1..7 {
            lhs[(i, i)] += lambda;
        }
        let rhs = f.tr_mul(&DVector::from_column_slice(&y)) / n;
        let resid = lhs * DVector::from_column_slice(m.coeffs()) - &rhs;
        assert!(resid.amax() < 1e-10, "{resid}");
    }

    #[test]
    fn standardize_changes_penalty_only() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let big: Vec<f64> = x.iter().map(|v| v * 1000.0).collect();
        let y = [2.0, 4.1, 5.9, 8.2, 9.9];
        let plain = ridge_fit_with(
            &ones_and(&[&x]),
            &y,
            0.5,
            RidgeOptions { standardize: true },
        )
        .unwrap();
        let scaled = ridge_fit_with(
            &ones_and(&[&big]),
            &y,
            0.5,
            RidgeOptions { standardize: true },
        )
        .unwrap();
        assert!((plain.coeffs()[1] - scaled.coeffs()[1] * 1000.0).abs() < 1e-9);
        assert!((plain.coeffs()[0] - scaled.coeffs()[0]).abs() < 1e-9);
    }

    #[test]
    fn risk_and_prediction_agree() {
        let x = [0.1, 0.4, -0.3, 0.9, 1.2];
        let f = ones_and(&[&x]);
        let y = [1.0, 2.0, 0.0, 3.0, 3.5];
        let m = ridge_fit(&f, &y, 0.01).unwrap();
        let pred = predict(&m, &f).unwrap();
        let manual = pred
            .iter()
            .zip(&y)
            .map(|(p, t)| (t - p) * (t - p))
            .sum::<f64>()
            / 5.0;
        assert!((empirical_risk(&m, &f, &y).unwrap() - manual).abs() < 1e-15);
        let zero = RidgeModel {
            coeffs: vec![0.0, 0.0],
            lambda: 0.0,
            intercept: true,
            shape: None,
        };
        assert!(predict(&zero, &f).unwrap().iter().all(|&p| p == 0.0));
        let msq = y.iter().map(|v| v * v).sum::<f64>() / 5.0;
        assert_eq!(empirical_risk(&zero, &f, &y).unwrap(), msq);
        let eye = DMatrix::<f64>::identity(2, 2);
        assert_eq!(predict(&m, &eye).unwrap(), m.coeffs().to_vec());
        assert!(predict(&m, &DMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn folds_partition_samples() {
        let folds = kfold_indices(23, 5, 9).unwrap();
        let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![5, 5, 5, 4, 4]);
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..23).collect::<Vec<_>>());
        assert_eq!(folds, kfold_indices(23, 5, 9).unwrap());
        assert_eq!(
            kfold_indices(3, 5, 0),
            Err(Error::TooFewForFolds { n: 3, k: 5 })
        );
        assert!(kfold_indices(10, 1, 0).is_err());
    }

    #[test]
    fn spectral_path_matches_direct_fit() {
        let x1 = [0.1, 0.4, -0.3, 0.9, 1.2, -0.8, 0.0];
        let x2 = [1.0, 0.0, 2.0, -1.0, 0.5, 0.3, 0.2];
        let f = ones_and(&[&x1, &x2]);
        let y = [1.0, 3.0, -2.0, 4.0, 0.5, 2.0, 1.0];
        let path = SpectralPath::new(Prepared::new(&f, &y, RidgeOptions::default()).unwrap());
        for lambda in [1e-4, 0.1, 10.0] {
            let a = path.model(lambda);
            let b = ridge_fit(&f, &y, lambda).unwrap();
            for (u, v) in a.coeffs().iter().zip(b.coeffs()) {
                assert!((u - v).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn argmin_ties_go_last() {
        assert_eq!(argmin_prefer_last(&[3.0, 1.0, 1.0, 2.0]), Some(2));
        assert_eq!(argmin_prefer_last(&[f64::NAN, 1.0]), Some(1));
        assert_eq!(argmin_prefer_last(&[]), None);
    }

    #[test]
    fn grids() {
        let g = default_lambda_grid();
        assert_eq!(g.len(), 91);
        assert!((g[0] - 1e-6).abs() < 1e-18 && (g[90] - 1e3).abs() < 1e-9);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn split_sizes_and_determinism() {
        let (a, b) = train_test_split(10, 0.7, 3).unwrap();
        assert_eq!((a.len(), b.len()), (7, 3));
        let mut all: Vec<usize> = a.iter().chain(&b).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
        assert_eq!(train_test_split(10, 0.7, 3).unwrap(), (a, b));
        assert_eq!(train_test_split(3, 0.01, 0).unwrap().0.len(), 1);
        assert!(train_test_split(10, 1.0, 0).is_err());
    }
}
