//! File formats, the COMPAS experiment and the command-line interface for
//! `ruvfair-core`.

pub mod cli;
pub mod compas_data;
pub mod error;
pub mod experiment;
pub mod io;
pub mod report;
pub mod verify;

pub use error::{AppError, AppResult};
