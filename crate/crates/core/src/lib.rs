//! Numerical core for removing protected-attribute variation from tabular
//! representations.
//!
//! The representation matrix `Y` (n×d) is modelled as
//! `Y = X Aᵀ + Z Bᵀ + E`, with protected attributes `X` (n×k), permissible
//! attributes `Z` (n×l) and idiosyncratic noise `E`. Given homogeneous
//! subgroups of rows whose permissible attributes are (nearly) equal,
//! within-group centering removes `Z` and leaves a regression (observed `X`)
//! or a factor model (latent `X`) from which the protected contribution can
//! be estimated and removed.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the COMPAS
//! experiment runner and the command line live in the `ruvfair` crate.

#![no_std]

extern crate alloc;

pub mod compas;
mod error;
pub mod latent;
pub mod linalg;
mod matrix;
pub mod metrics;
pub mod model;
pub mod observed;
pub mod rng;
pub mod synthetic;
mod warning;

pub use error::{Error, Result};
pub use latent::{debias_latent, estimate_subspace, rank_diagnostic, SubspaceEstimate};
pub use matrix::Matrix;
pub use model::{
    center_group, pinv_psd, project_out, stack_centered, GroupPartition, ModelParams,
    PermissibleMatrix, ProtectedMatrix, RepresentationMatrix, SubspaceBasis, DEFAULT_PINV_RTOL,
};
pub use observed::{debias, estimate_a, Adjustment, DebiasOutput, Method, ObservedFit};
pub use warning::Warning;
