//! Debiasing when the protected attributes are observed.
//!
//! `A` is estimated by pooled least squares on the group-centered blocks,
//! `Âᵀ = T · Σ_g X_gᵀ Y_g` with `T = (Σ_g X_gᵀ X_g)^†`, and the fitted
//! protected contribution `X Âᵀ` is subtracted from the representations.
//! Estimation and subtraction are separate steps so that a fit made on one
//! set of rows can be applied to any other rows.

use alloc::vec::Vec;

use crate::model::{pinv_psd_with_rank, stack_centered, DEFAULT_PINV_RTOL};
use crate::{
    Error, GroupPartition, Matrix, ProtectedMatrix, RepresentationMatrix, Result, SubspaceBasis,
    Warning,
};

/// Result of the pooled group-centered regression.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ObservedFit {
    /// d×k estimate of the protected loading.
    pub a_hat: Matrix,
    /// k×k pseudo-inverse of the pooled Gram matrix.
    pub t: Matrix,
    /// `‖Σ_g X_gᵀ(Y_g − X_g Âᵀ)‖_F`, zero up to rounding.
    pub residual_norm: f64,
    pub effective_rank: usize,
    /// Sizes of the groups the fit was computed from.
    pub group_sizes: Vec<usize>,
    pub warnings: Vec<Warning>,
}

impl ObservedFit {
    pub fn d(&self) -> usize {
        self.a_hat.nrows()
    }

    pub fn k(&self) -> usize {
        self.a_hat.ncols()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Method {
    Observed,
    Latent,
}

/// The fitted adjustment that produced a debiased matrix.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "method", rename_all = "snake_case"))]
pub enum Adjustment {
    Observed(ObservedFit),
    Latent { basis: SubspaceBasis },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DebiasOutput {
    pub y_db: Matrix,
    pub adjustment: Adjustment,
}

impl DebiasOutput {
    pub fn method(&self) -> Method {
        match self.adjustment {
            Adjustment::Observed(_) => Method::Observed,
            Adjustment::Latent { .. } => Method::Latent,
        }
    }
}

/// Estimates `A` from the rows covered by `partition`.
///
/// Rank-deficient pooled Gram matrices get the minimum-norm solution; when
/// `X` is constant within every group this is `Â = 0`, flagged with a
/// [`Warning::RankDeficient`].
pub fn estimate_a(
    y: &RepresentationMatrix,
    x: &ProtectedMatrix,
    partition: &GroupPartition,
) -> Result<ObservedFit> {
    let (y, x) = (y.matrix(), x.matrix());
    if y.nrows() != x.nrows() {
        return Err(Error::len("estimate_a rows of X", y.nrows(), x.nrows()));
    }
    if partition.is_empty() || partition.covered_rows() == 0 {
        return Err(Error::NoData("the partition covers no rows"));
    }
    let xs = stack_centered(x, partition)?;
    let ys = stack_centered(y, partition)?;
    let k = x.ncols();

    let mut gram = xs.tr_matmul(&xs);
    gram.symmetrize();
    let cross = xs.tr_matmul(&ys);
    let (t, rank) = pinv_psd_with_rank(&gram, DEFAULT_PINV_RTOL)?;
    let a_hat_t = t.matmul(&cross);
    let residual_norm = cross.sub(&gram.matmul(&a_hat_t)).frobenius_norm();

    let mut warnings: Vec<Warning> = partition
        .singletons()
        .map(|group| Warning::SingletonGroup { group })
        .collect();
    if rank < k {
        warnings.push(Warning::RankDeficient { rank, k });
    }

    Ok(ObservedFit {
        a_hat: a_hat_t.transpose(),
        t,
        residual_norm,
        effective_rank: rank,
        group_sizes: partition.sizes(),
        warnings,
    })
}

/// `Y_db = Y − X Âᵀ` for any rows of `Y` and the matching rows of `X`.
pub fn debias(
    y: &RepresentationMatrix,
    x: &ProtectedMatrix,
    fit: &ObservedFit,
) -> Result<DebiasOutput> {
    let (ym, xm) = (y.matrix(), x.matrix());
    if xm.nrows() != ym.nrows() {
        return Err(Error::len("debias rows of X", ym.nrows(), xm.nrows()));
    }
    if xm.ncols() != fit.k() {
        return Err(Error::len("debias columns of X", fit.k(), xm.ncols()));
    }
    if ym.ncols() != fit.d() {
        return Err(Error::len("debias columns of Y", fit.d(), ym.ncols()));
    }
    let y_db = ym.sub(&xm.matmul_tr(&fit.a_hat));
    Ok(DebiasOutput {
        y_db,
        adjustment: Adjustment::Observed(fit.clone()),
    })
}
