//! Data-parallel signature batches.

use nalgebra::DMatrix;
use rayon::prelude::*;
use sigreg_core::{signature_in, Error, SampledPath, SigShape};

/// Row `i` is the signature of `paths[i]`. Rows are computed independently, so
/// the result does not depend on the thread count.
pub fn par_batch_signatures(paths: &[SampledPath], shape: SigShape) -> Result<DMatrix<f64>, Error> {
    for p in paths {
        if p.dim() != shape.dim() {
            return Err(Error::LengthMismatch {
                expected: shape.dim(),
                found: p.dim(),
            });
        }
    }
    let rows: Vec<Vec<f64>> = paths
        .par_iter()
        .map(|p| signature_in(p, shape).map(|s| s.into_coeffs()))
        .collect::<Result<_, _>>()?;
    let mut out = DMatrix::zeros(paths.len(), shape.len());
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            out[(i, j)] = *v;
        }
    }
    Ok(out)
}
