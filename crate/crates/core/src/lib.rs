//! Functional linear regression on truncated path signatures.
//!
//! The crate is `no_std` and only needs an allocator. It covers exact
//! signatures of piecewise-linear paths, ridge regression on signature
//! features, penalized selection of the truncation order, the simulation
//! generators used to benchmark the method and a Fourier-basis baseline.
#![no_std]

extern crate alloc;

pub mod datagen;
pub mod error;
pub mod fourier;
pub mod paths;
pub mod ridge;
pub mod rng;
pub mod selection;
pub mod signature;

pub use error::{Error, Result};
pub use fourier::{fit_fourier_model, fourier_basis, fourier_design, FourierModel, FourierOptions};
pub use paths::{uniform_grid, SampledPath};
pub use signature::{
    batch_signatures, batch_signatures_in, chen_concat, index_of, linear_segment_signature,
    linear_segment_signature_in, sig_dim, sig_len, signature, signature_in, SegmentScratch,
    SigShape, TruncatedSignature, DEFAULT_BUDGET,
};
