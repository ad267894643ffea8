//! File formats, experiments and the command-line front end for
//! signature-based functional regression.
//!
//! The numerical work lives in `sigreg_core`; this crate adds CSV and JSON
//! input/output, thread-parallel signature batches, the repeated simulation
//! studies and the `sigreg` binary.

pub mod cli;
pub mod commands;
pub mod csvio;
pub mod error;
pub mod experiment;
pub mod output;
pub mod parallel;

pub use error::{CliError, IngestError, Result};
