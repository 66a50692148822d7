//! File formats, command-line drivers and the synthetic experiment harness
//! around `lipreg-core`.

pub mod cli;
pub mod error;
pub mod experiment;
pub mod io;
pub mod model;

pub use error::{AppError, AppResult};
