//! Truncated signatures of piecewise-linear paths.
//!
//! Coefficients are stored flat and level-major: the constant term first, then
//! the `d` order-1 terms, then the `d^2` order-2 terms, and so on. Inside a level
//! words `(i_1, ..., i_k)` are ordered lexicographically, so the word with
//! 1-based digits `i_j` sits at
//! `len(k - 1) + sum_j (i_j - 1) * d^(k - j)`.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::paths::SampledPath;

/// Default cap on the number of coefficients in a single truncated signature.
pub const DEFAULT_BUDGET: usize = 10_000_000;

fn checked_len(d: usize, m: usize) -> Option<usize> {
    let mut total: usize = 1;
    let mut level: usize = 1;
    for _ in 0..m {
        level = level.checked_mul(d)?;
        total = total.checked_add(level)?;
    }
    Some(total)
}

/// Number of signature coefficients of orders `1..=m` of a `d`-dimensional path.
///
/// This is the feature count without the constant term, i.e. `sig_len(d, m) - 1`.
pub fn sig_dim(d: usize, m: usize) -> Result<usize> {
    sig_len(d, m).map(|len| len - 1)
}

/// Storage length of a truncated signature, constant term included:
/// `sum_{k=0..m} d^k`.
pub fn sig_len(d: usize, m: usize) -> Result<usize> {
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    checked_len(d, m).ok_or(Error::Capacity {
        d,
        m,
        limit: usize::MAX,
    })
}

/// Dimension, truncation order and flat length of a truncated signature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SigShape {
    d: usize,
    m: usize,
    len: usize,
}

impl SigShape {
    /// Shape under the default coefficient budget.
    pub fn new(d: usize, m: usize) -> Result<Self> {
        Self::with_budget(d, m, DEFAULT_BUDGET)
    }

    pub fn with_budget(d: usize, m: usize, budget: usize) -> Result<Self> {
        let len = sig_len(d, m)?;
        if len > budget {
            return Err(Error::Capacity {
                d,
                m,
                limit: budget,
            });
        }
        Ok(Self { d, m, len })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn order(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of coefficients at level `k`, i.e. `d^k`.
    pub fn level_len(&self, k: usize) -> usize {
        self.d.pow(k as u32)
    }

    /// Flat offset of the first coefficient at level `k`.
    pub fn level_offset(&self, k: usize) -> usize {
        if k == 0 {
            0
        } else {
            // cannot overflow: bounded by self.len
            checked_len(self.d, k - 1).unwrap_or(usize::MAX)
        }
    }

    pub fn level_range(&self, k: usize) -> Range<usize> {
        let start = self.level_offset(k);
        start..start + self.level_len(k)
    }

    /// The same dimension truncated at a lower order.
    pub fn truncated(&self, m: usize) -> SigShape {
        let m = m.min(self.m);
        SigShape {
            d: self.d,
            m,
            len: checked_len(self.d, m).unwrap_or(usize::MAX),
        }
    }

    /// The word (1-based digits) stored at a flat offset.
    pub fn word_of(&self, offset: usize) -> Result<Vec<usize>> {
        if offset >= self.len {
            return Err(Error::LengthMismatch {
                expected: self.len,
                found: offset,
            });
        }
        let mut k = 0;
        while offset >= self.level_offset(k) + self.level_len(k) {
            k += 1;
        }
        let mut rest = offset - self.level_offset(k);
        let mut word = vec![0; k];
        for slot in word.iter_mut().rev() {
            *slot = rest % self.d + 1;
            rest /= self.d;
        }
        Ok(word)
    }
}

/// Flat offset of a word with 1-based digits.
pub fn index_of(shape: &SigShape, word: &[usize]) -> Result<usize> {
    if word.len() > shape.m {
        return Err(Error::WordTooLong {
            len: word.len(),
            m: shape.m,
        });
    }
    let mut within = 0usize;
    for &digit in word {
        if digit == 0 || digit > shape.d {
            return Err(Error::DigitOutOfRange { digit, d: shape.d });
        }
        within = within * shape.d + (digit - 1);
    }
    Ok(shape.level_offset(word.len()) + within)
}

/// Coefficients of a truncated signature in level-major lexicographic layout.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSignature {
    shape: SigShape,
    coeffs: Vec<f64>,
}

/// Work buffers for [`TruncatedSignature::extend_by_segment`].
#[derive(Debug, Clone, Default)]
pub struct SegmentScratch {
    front: Vec<f64>,
    back: Vec<f64>,
}

impl SegmentScratch {
    pub fn for_shape(shape: &SigShape) -> Self {
        let size = if shape.m == 0 {
            0
        } else {
            shape.level_len(shape.m - 1)
        };
        Self {
            front: vec![0.0; size],
            back: vec![0.0; size],
        }
    }
}

impl TruncatedSignature {
    /// The signature of a constant path: `(1, 0, 0, ...)`.
    pub fn identity(shape: SigShape) -> Self {
        let mut coeffs = vec![0.0; shape.len];
        coeffs[0] = 1.0;
        Self { shape, coeffs }
    }

    pub fn from_coeffs(shape: SigShape, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != shape.len {
            return Err(Error::LengthMismatch {
                expected: shape.len,
                found: coeffs.len(),
            });
        }
        Ok(Self { shape, coeffs })
    }

    pub fn shape(&self) -> &SigShape {
        &self.shape
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn level(&self, k: usize) -> &[f64] {
        &self.coeffs[self.shape.level_range(k)]
    }

    pub fn get(&self, word: &[usize]) -> Result<f64> {
        index_of(&self.shape, word).map(|i| self.coeffs[i])
    }

    /// Euclidean norm of the whole coefficient vector.
    pub fn norm(&self) -> f64 {
        l2(&self.coeffs)
    }

    pub fn level_norm(&self, k: usize) -> f64 {
        l2(self.level(k))
    }

    /// Drops every level above `m`.
    pub fn truncate(&self, m: usize) -> TruncatedSignature {
        let shape = self.shape.truncated(m);
        TruncatedSignature {
            shape,
            coeffs: self.coeffs[..shape.len].to_vec(),
        }
    }

    /// In-place truncated tensor product `self <- self (x) other`.
    ///
    /// Levels are rewritten from the highest down, so every level read is still
    /// the original one.
    pub fn chen_mul_assign(&mut self, other: &TruncatedSignature) -> Result<()> {
        check_same_shape(&self.shape, &other.shape)?;
        let shape = self.shape;
        let b0 = other.coeffs[0];
        for k in (0..=shape.m).rev() {
            let out = shape.level_range(k);
            for x in &mut self.coeffs[out.clone()] {
                *x *= b0;
            }
            for l in 0..k {
                let right_len = shape.level_len(k - l);
                let left = shape.level_range(l);
                let right = shape.level_range(k - l);
                for (i, li) in left.enumerate() {
                    let a = self.coeffs[li];
                    if a == 0.0 {
                        continue;
                    }
                    let base = out.start + i * right_len;
                    for (j, rj) in right.clone().enumerate() {
                        self.coeffs[base + j] += a * other.coeffs[rj];
                    }
                }
            }
        }
        Ok(())
    }

    /// Appends a straight segment with displacement `inc`:
    /// `self <- self (x) exp(inc)`, computed level by level with a Horner scheme
    /// so that each level costs `O(d^k)`.
    pub fn extend_by_segment(&mut self, inc: &[f64], scratch: &mut SegmentScratch) -> Result<()> {
        let shape = self.shape;
        if inc.len() != shape.d {
            return Err(Error::LengthMismatch {
                expected: shape.d,
                found: inc.len(),
            });
        }
        if shape.m == 0 || inc.iter().all(|&x| x == 0.0) {
            return Ok(());
        }
        let d = shape.d;
        let need = shape.level_len(shape.m - 1);
        if scratch.front.len() < need {
            scratch.front.resize(need, 0.0);
            scratch.back.resize(need, 0.0);
        }
        let s0 = self.coeffs[0];
        for k in (1..=shape.m).rev() {
            if k == 1 {
                let out = shape.level_range(1);
                for (x, &b) in self.coeffs[out].iter_mut().zip(inc) {
                    *x += s0 * b;
                }
                continue;
            }
            // acc <- s0 * inc / k (level 1)
            let scale = s0 / k as f64;
            for (a, &b) in scratch.front[..d].iter_mut().zip(inc) {
                *a = scale * b;
            }
            // acc <- (acc + S_j) (x) inc / (k - j), for j = 1..k-2
            for j in 1..k - 1 {
                let inv = 1.0 / (k - j) as f64;
                let lvl = shape.level_range(j);
                let width = lvl.len();
                let (src, dst) = (&scratch.front, &mut scratch.back);
                for i in 0..width {
                    let base = (src[i] + self.coeffs[lvl.start + i]) * inv;
                    let row = &mut dst[i * d..(i + 1) * d];
                    for (o, &b) in row.iter_mut().zip(inc) {
                        *o = base * b;
                    }
                }
                core::mem::swap(&mut scratch.front, &mut scratch.back);
            }
            // S_k += (acc + S_{k-1}) (x) inc
            let prev = shape.level_range(k - 1);
            let out_start = shape.level_offset(k);
            for i in 0..prev.len() {
                let base = scratch.front[i] + self.coeffs[prev.start + i];
                if base == 0.0 {
                    continue;
                }
                let row = &mut self.coeffs[out_start + i * d..out_start + (i + 1) * d];
                for (o, &b) in row.iter_mut().zip(inc) {
                    *o += base * b;
                }
            }
        }
        Ok(())
    }
}

fn l2(xs: &[f64]) -> f64 {
    libm::sqrt(xs.iter().map(|x| x * x).sum())
}

fn check_same_shape(a: &SigShape, b: &SigShape) -> Result<()> {
    if a != b {
        return Err(Error::ShapeMismatch {
            d1: a.d,
            m1: a.m,
            d2: b.d,
            m2: b.m,
        });
    }
    Ok(())
}

/// Signature of the straight path with displacement `b`: word `(i_1..i_k)` maps to
/// `b_{i_1} ... b_{i_k} / k!`.
pub fn linear_segment_signature(b: &[f64], m: usize) -> Result<TruncatedSignature> {
    let shape = SigShape::new(b.len(), m)?;
    linear_segment_signature_in(b, shape)
}

/// [`linear_segment_signature`] for a prebuilt shape.
pub fn linear_segment_signature_in(b: &[f64], shape: SigShape) -> Result<TruncatedSignature> {
    if b.len() != shape.d {
        return Err(Error::LengthMismatch {
            expected: shape.d,
            found: b.len(),
        });
    }
    if let Some(col) = b.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { row: 0, col });
    }
    let mut sig = TruncatedSignature::identity(shape);
    for k in 1..=shape.m {
        let inv = 1.0 / k as f64;
        let prev = shape.level_range(k - 1);
        let out = shape.level_offset(k);
        for i in 0..prev.len() {
            let base = sig.coeffs[prev.start + i] * inv;
            for (c, &bc) in b.iter().enumerate() {
                sig.coeffs[out + i * shape.d + c] = base * bc;
            }
        }
    }
    Ok(sig)
}

/// Signature of the concatenation of two paths (Chen's identity).
pub fn chen_concat(a: &TruncatedSignature, b: &TruncatedSignature) -> Result<TruncatedSignature> {
    let mut out = a.clone();
    out.chen_mul_assign(b)?;
    Ok(out)
}

/// Exact truncated signature of the polyline through the samples of `path`.
pub fn signature(path: &SampledPath, m: usize) -> Result<TruncatedSignature> {
    let shape = SigShape::new(path.dim(), m)?;
    signature_in(path, shape)
}

/// [`signature`] for a prebuilt shape; the shape must match the path dimension.
pub fn signature_in(path: &SampledPath, shape: SigShape) -> Result<TruncatedSignature> {
    let mut scratch = SegmentScratch::for_shape(&shape);
    let mut inc = vec![0.0; path.dim()];
    signature_with(path, shape, &mut scratch, &mut inc)
}

fn signature_with(
    path: &SampledPath,
    shape: SigShape,
    scratch: &mut SegmentScratch,
    inc: &mut [f64],
) -> Result<TruncatedSignature> {
    if path.dim() != shape.d {
        return Err(Error::LengthMismatch {
            expected: shape.d,
            found: path.dim(),
        });
    }
    let mut sig: Option<TruncatedSignature> = None;
    for segment in path.increments() {
        for (slot, x) in inc.iter_mut().zip(segment) {
            *slot = x;
        }
        if inc.iter().all(|&x| x == 0.0) {
            continue;
        }
        match sig.as_mut() {
            None => sig = Some(linear_segment_signature_in(inc, shape)?),
            Some(s) => s.extend_by_segment(inc, scratch)?,
        }
    }
    Ok(sig.unwrap_or_else(|| TruncatedSignature::identity(shape)))
}

/// Signatures of many paths, one per row of an `n x sig_len(d, m)` matrix.
pub fn batch_signatures(paths: &[SampledPath], m: usize) -> Result<DMatrix<f64>> {
    let d = paths.first().ok_or(Error::Empty("paths"))?.dim();
    batch_signatures_in(paths, SigShape::new(d, m)?)
}

/// [`batch_signatures`] for a prebuilt shape.
pub fn batch_signatures_in(paths: &[SampledPath], shape: SigShape) -> Result<DMatrix<f64>> {
    if paths.is_empty() {
        return Err(Error::Empty("paths"));
    }
    let mut out = DMatrix::zeros(paths.len(), shape.len);
    let mut scratch = SegmentScratch::for_shape(&shape);
    let mut inc = vec![0.0; shape.d];
    for (i, path) in paths.iter().enumerate() {
        let sig = signature_with(path, shape, &mut scratch, &mut inc)?;
        for (j, &c) in sig.coeffs.iter().enumerate() {
            out[(i, j)] = c;
        }
    }
    Ok(out)
}
