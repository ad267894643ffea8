//! Seeded simulation protocols.
//!
//! * polysinus paths `a1 + 10 a2 sin(2 pi t / a3) + 10 (t - a4)^3`, one draw of
//!   `a1..a4` per sample and coordinate;
//! * a signature-linear response `<beta, S^m(x)> + eps` on the raw paths;
//! * the mean of the coordinates one step past the observed window;
//! * Gaussian processes with exponential covariance plus a random linear
//!   trend, whose response is the norm of the trend slope.
//!
//! Every draw comes from its own `(seed, stream, sample, coordinate)` generator,
//! so outputs do not depend on generation order.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::distr::{Distribution, Open01, Uniform};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::paths::{uniform_grid, SampledPath};
use crate::rng::{stream_rng, STREAM_BETA, STREAM_GP, STREAM_NOISE, STREAM_POLYSINUS};
use crate::signature::{signature_in, SigShape};

/// Half-width of the uniform noise added to the signature response.
pub const SIGNATURE_NOISE: f64 = 100.0;
/// Scale of the signature-response coefficients: `beta_j = u_j / 1000`.
pub const BETA_SCALE: f64 = 1e-3;
/// Half-width of the uniform trend slopes of the Gaussian-process model.
pub const TREND_RANGE: f64 = 3.0;
/// Length-scale of the exponential covariance.
pub const GP_LENGTH_SCALE: f64 = 1.0;

const JITTER_START: f64 = 1e-10;
const JITTER_MAX: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathModel {
    Polysinus,
    GaussianProcess,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResponseKind {
    /// `<beta, S^{m_star}(x)> + eps`.
    Signature { m_star: usize },
    /// Mean of the coordinates at the next time step.
    MeanNextStep,
    /// Norm of the Gaussian-process trend slope.
    TrendNorm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimSpec {
    pub n: usize,
    pub d: usize,
    pub p: usize,
    pub seed: u64,
    pub model: PathModel,
    pub response: ResponseKind,
}

impl SimSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("n must be at least 1".into()));
        }
        if self.d == 0 {
            return Err(Error::InvalidConfig("d must be at least 1".into()));
        }
        if self.p < 2 {
            return Err(Error::InvalidConfig("p must be at least 2".into()));
        }
        match (self.model, self.response) {
            (PathModel::Polysinus, ResponseKind::TrendNorm) => Err(Error::InvalidConfig(
                "trend_norm requires the gaussian_process model".into(),
            )),
            (PathModel::GaussianProcess, r) if r != ResponseKind::TrendNorm => {
                Err(Error::InvalidConfig(format!(
                    "the gaussian_process model only supports trend_norm, got {r:?}"
                )))
            }
            _ => Ok(()),
        }
    }
}

/// Paths with their responses.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub paths: Vec<SampledPath>,
    pub targets: Vec<f64>,
}

/// Polysinus paths, plus the values one step past the window when requested.
#[derive(Debug, Clone, PartialEq)]
pub struct PolysinusPaths {
    pub paths: Vec<SampledPath>,
    pub next_step: Option<Vec<Vec<f64>>>,
}

/// `a1 + 10 a2 sin(2 pi t / a3) + 10 (t - a4)^3`.
pub fn polysinus_value(alpha: &[f64; 4], t: f64) -> f64 {
    let shift = t - alpha[3];
    alpha[0] + 10.0 * alpha[1] * libm::sin(2.0 * PI * t / alpha[2]) + 10.0 * shift * shift * shift
}

/// Parameters `a1..a4` of sample `i`, coordinate `k`. `a3` is drawn from `(0, 1)`
/// so the sine period never vanishes.
pub fn polysinus_params(seed: u64, i: usize, k: usize) -> [f64; 4] {
    let mut rng = stream_rng(seed, STREAM_POLYSINUS, i as u64, k as u64);
    let a1: f64 = rng.random();
    let a2: f64 = rng.random();
    let a3: f64 = Open01.sample(&mut rng);
    let a4: f64 = rng.random();
    [a1, a2, a3, a4]
}

pub fn gen_polysinus(spec: &SimSpec) -> Result<PolysinusPaths> {
    spec.validate()?;
    if spec.model != PathModel::Polysinus {
        return Err(Error::InvalidConfig("spec model is not polysinus".into()));
    }
    let with_next = spec.response == ResponseKind::MeanNextStep;
    let grid = if with_next {
        uniform_grid(spec.p + 1)
    } else {
        uniform_grid(spec.p)
    };
    let times = grid[..spec.p].to_vec();
    let mut paths = Vec::with_capacity(spec.n);
    let mut next = Vec::new();
    for i in 0..spec.n {
        let params: Vec<[f64; 4]> = (0..spec.d)
            .map(|k| polysinus_params(spec.seed, i, k))
            .collect();
        let mut values = Vec::with_capacity(spec.p * spec.d);
        for &t in &times {
            values.extend(params.iter().map(|a| polysinus_value(a, t)));
        }
        paths.push(SampledPath::new(times.clone(), values, spec.d)?);
        if with_next {
            let t = grid[spec.p];
            next.push(params.iter().map(|a| polysinus_value(a, t)).collect());
        }
    }
    Ok(PolysinusPaths {
        paths,
        next_step: with_next.then_some(next),
    })
}

/// The pieces of a signature-linear response.
#[derive(Debug, Clone, PartialEq)]
pub struct SignatureResponse {
    pub beta: Vec<f64>,
    pub noise: Vec<f64>,
    pub targets: Vec<f64>,
}

/// Draws one `beta` (`u_j / 1000`, `u_j ~ U[0,1]`) for the whole dataset and
/// returns `<beta, S^{m_star}(x_i)> + eps_i` with `eps_i ~ U[-100, 100]`.
///
/// Signatures are taken on the paths exactly as given.
pub fn signature_response(
    paths: &[SampledPath],
    m_star: usize,
    seed: u64,
) -> Result<SignatureResponse> {
    let d = paths.first().ok_or(Error::Empty("paths"))?.dim();
    let shape = SigShape::new(d, m_star)?;
    let mut rng = stream_rng(seed, STREAM_BETA, 0, 0);
    let beta: Vec<f64> = (0..shape.len())
        .map(|_| BETA_SCALE * rng.random::<f64>())
        .collect();
    let noise_dist = Uniform::new_inclusive(-SIGNATURE_NOISE, SIGNATURE_NOISE)
        .map_err(|e| Error::InvalidConfig(format!("{e}")))?;
    let mut noise = Vec::with_capacity(paths.len());
    let mut targets = Vec::with_capacity(paths.len());
    for (i, path) in paths.iter().enumerate() {
        let sig = signature_in(path, shape)?;
        let signal: f64 = sig.coeffs().iter().zip(&beta).map(|(s, b)| s * b).sum();
        let eps = noise_dist.sample(&mut stream_rng(seed, STREAM_NOISE, i as u64, 0));
        noise.push(eps);
        targets.push(signal + eps);
    }
    Ok(SignatureResponse {
        beta,
        noise,
        targets,
    })
}

pub fn gen_signature_response(paths: &[SampledPath], m_star: usize, seed: u64) -> Result<Vec<f64>> {
    signature_response(paths, m_star, seed).map(|r| r.targets)
}

/// Average of the coordinates at the step following each path.
pub fn gen_mean_next_step(next_step: Option<&[Vec<f64>]>) -> Result<Vec<f64>> {
    let next = next_step.ok_or(Error::MissingNextStep)?;
    next.iter()
        .map(|v| {
            if v.is_empty() {
                Err(Error::MissingNextStep)
            } else {
                Ok(v.iter().sum::<f64>() / v.len() as f64)
            }
        })
        .collect()
}

/// `C[a, b] = exp(-|t_a - t_b| / l)` with `l = 1`.
pub fn exponential_covariance(times: &[f64]) -> DMatrix<f64> {
    let p = times.len();
    DMatrix::from_fn(p, p, |a, b| {
        libm::exp(-libm::fabs(times[a] - times[b]) / GP_LENGTH_SCALE)
    })
}

/// Lower Cholesky factor of `cov + jitter I`, escalating the jitter tenfold from
/// `1e-10` up to `1e-6`. Returns the factor and the jitter that worked.
pub fn cholesky_with_jitter(cov: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    let mut jitter = JITTER_START;
    loop {
        let mut shifted = cov.clone();
        for i in 0..shifted.nrows() {
            shifted[(i, i)] += jitter;
        }
        if let Some(chol) = shifted.cholesky() {
            return Ok((chol.unpack(), jitter));
        }
        if jitter >= JITTER_MAX {
            return Err(Error::Factorization(jitter));
        }
        jitter *= 10.0;
    }
}

/// Gaussian-process sample with its trend slopes.
#[derive(Debug, Clone, PartialEq)]
pub struct GpSample {
    pub paths: Vec<SampledPath>,
    pub targets: Vec<f64>,
    pub slopes: Vec<Vec<f64>>,
}

/// Builds `alpha t + xi` from given slopes and noise draws; `Y = ||alpha||`.
pub fn gp_paths_from_parts(
    times: &[f64],
    slopes: &[Vec<f64>],
    noise: &[Vec<Vec<f64>>],
) -> Result<(Vec<SampledPath>, Vec<f64>)> {
    let mut paths = Vec::with_capacity(slopes.len());
    let mut targets = Vec::with_capacity(slopes.len());
    for (alpha, xi) in slopes.iter().zip(noise) {
        let d = alpha.len();
        let mut values = Vec::with_capacity(times.len() * d);
        for (j, &t) in times.iter().enumerate() {
            values.extend((0..d).map(|k| alpha[k] * t + xi[k][j]));
        }
        paths.push(SampledPath::new(times.to_vec(), values, d)?);
        targets.push(libm::sqrt(alpha.iter().map(|a| a * a).sum()));
    }
    Ok((paths, targets))
}

/// Draws the zero-mean process `xi = L z` for one sample and coordinate.
pub fn gp_noise<R: Rng>(factor: &DMatrix<f64>, rng: &mut R) -> Vec<f64> {
    let p = factor.nrows();
    let z = DVector::from_iterator(p, (0..p).map(|_| StandardNormal.sample(rng)));
    (factor * z).iter().copied().collect()
}

pub fn gen_gaussian_process(spec: &SimSpec) -> Result<GpSample> {
    spec.validate()?;
    if spec.model != PathModel::GaussianProcess {
        return Err(Error::InvalidConfig(
            "spec model is not gaussian_process".into(),
        ));
    }
    let times = uniform_grid(spec.p);
    let (factor, _) = cholesky_with_jitter(&exponential_covariance(&times))?;
    let slope = Uniform::new_inclusive(-TREND_RANGE, TREND_RANGE)
        .map_err(|e| Error::InvalidConfig(format!("{e}")))?;
    let mut slopes = Vec::with_capacity(spec.n);
    let mut noise = Vec::with_capacity(spec.n);
    for i in 0..spec.n {
        let mut alpha = Vec::with_capacity(spec.d);
        let mut xi = Vec::with_capacity(spec.d);
        for k in 0..spec.d {
            let mut rng = stream_rng(spec.seed, STREAM_GP, i as u64, k as u64);
            alpha.push(slope.sample(&mut rng));
            xi.push(gp_noise(&factor, &mut rng));
        }
        slopes.push(alpha);
        noise.push(xi);
    }
    let (paths, targets) = gp_paths_from_parts(&times, &slopes, &noise)?;
    Ok(GpSample {
        paths,
        targets,
        slopes,
    })
}

/// Runs the protocol described by `spec`.
pub fn simulate(spec: &SimSpec) -> Result<Dataset> {
    spec.validate()?;
    match spec.model {
        PathModel::GaussianProcess => {
            let s = gen_gaussian_process(spec)?;
            Ok(Dataset {
                paths: s.paths,
                targets: s.targets,
            })
        }
        PathModel::Polysinus => {
            let generated = gen_polysinus(spec)?;
            let targets = match spec.response {
                ResponseKind::Signature { m_star } => {
                    gen_signature_response(&generated.paths, m_star, spec.seed)?
                }
                ResponseKind::MeanNextStep => gen_mean_next_step(generated.next_step.as_deref())?,
                ResponseKind::TrendNorm => unreachable!("rejected by validate"),
            };
            Ok(Dataset {
                paths: generated.paths,
                targets,
            })
        }
    }
}
