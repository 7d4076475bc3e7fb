//! Matrix types of the factor model `Y = X Aᵀ + Z Bᵀ + E`, `Z = X Γᵀ + W`,
//! and the centering, pseudo-inverse and projection primitives the debiasing
//! procedures are built from.
//!
//! Stacking convention: `stack_centered(M, partition)` vertically
//! concatenates the group-centered blocks `H_g M_{I_g}` in group order. With
//! `X̃`, `Z̃` built this way, the pooled regression of the observed method has
//! Gram matrix `X̃ᵀX̃ = Σ_g X_gᵀX_g` and its conditional bias involves
//! `Σ_g X_gᵀZ_g = X̃ᵀZ̃`. The covariance correction for a debiased row is
//! therefore written with the l×k product `Z̃ᵀX̃`; this is the only
//! dimensionally consistent reading of the tilde product and is the one the
//! Monte Carlo verifiers in [`crate::synthetic`] check.

use alloc::format;
use alloc::vec::Vec;

use crate::linalg::{is_psd, right_svd, symmetric_eigen};
use crate::{Error, Matrix, Result};

/// Eigenvalues at or below `DEFAULT_PINV_RTOL · λ_max` are treated as zero.
pub const DEFAULT_PINV_RTOL: f64 = 1e-12;

/// Symmetric inputs may deviate from symmetry by this relative amount.
const SYMMETRY_RTOL: f64 = 1e-10;

/// Orthonormality tolerance for subspace bases.
const ORTHONORMAL_TOL: f64 = 1e-10;

macro_rules! matrix_newtype {
    ($(#[$doc:meta])* $name:ident, $what:literal) => {
        $(#[$doc])*
        #[derive(Debug, Clone, PartialEq)]
        #[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
        #[cfg_attr(feature = "serde", serde(transparent))]
        pub struct $name(Matrix);

        impl $name {
            /// Wraps a matrix after checking it is non-empty and finite.
            pub fn new(m: Matrix) -> Result<Self> {
                if m.nrows() == 0 || m.ncols() == 0 {
                    return Err(Error::EmptyInput($what));
                }
                if !m.is_finite() {
                    return Err(Error::ContractViolation(format!(
                        "{} contains non-finite entries",
                        $what
                    )));
                }
                Ok($name(m))
            }

            pub fn matrix(&self) -> &Matrix {
                &self.0
            }

            pub fn into_inner(self) -> Matrix {
                self.0
            }

            pub fn nrows(&self) -> usize {
                self.0.nrows()
            }

            pub fn ncols(&self) -> usize {
                self.0.ncols()
            }
        }

        impl AsRef<Matrix> for $name {
            fn as_ref(&self) -> &Matrix {
                &self.0
            }
        }
    };
}

matrix_newtype!(
    /// Observed representations `Y` (n×d), one sample per row.
    RepresentationMatrix,
    "representation matrix"
);
matrix_newtype!(
    /// Protected attributes `X` (n×k).
    ProtectedMatrix,
    "protected matrix"
);
matrix_newtype!(
    /// Permissible attributes `Z` (n×l); only available for synthetic data.
    PermissibleMatrix,
    "permissible matrix"
);

/// Disjoint, non-empty groups of row indices that share permissible attributes.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(
    feature = "serde",
    serde(try_from = "Vec<Vec<usize>>", into = "Vec<Vec<usize>>")
)]
pub struct GroupPartition {
    groups: Vec<Vec<usize>>,
}

impl GroupPartition {
    /// Checks that every group is non-empty and no index appears twice.
    /// Range checks against a matrix happen in [`GroupPartition::validate_for`].
    pub fn new(groups: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen: Vec<usize> = groups.iter().flatten().copied().collect();
        for (g, group) in groups.iter().enumerate() {
            if group.is_empty() {
                return Err(Error::InvalidPartition(format!("group {g} is empty")));
            }
        }
        seen.sort_unstable();
        if let Some(w) = seen.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidPartition(format!(
                "row {} belongs to more than one group",
                w[0]
            )));
        }
        Ok(GroupPartition { groups })
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// Total number of rows covered, `m = Σ|I_g|`.
    pub fn covered_rows(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.groups.iter().map(Vec::len).collect()
    }

    pub fn singletons(&self) -> impl Iterator<Item = usize> + '_ {
        self.groups
            .iter()
            .enumerate()
            .filter(|(_, g)| g.len() == 1)
            .map(|(i, _)| i)
    }

    pub fn validate_for(&self, n_rows: usize) -> Result<()> {
        for (g, group) in self.groups.iter().enumerate() {
            if let Some(&bad) = group.iter().find(|&&i| i >= n_rows) {
                return Err(Error::InvalidPartition(format!(
                    "group {g} references row {bad} but the matrix has {n_rows} rows"
                )));
            }
        }
        Ok(())
    }
}

impl TryFrom<Matrix> for SubspaceBasis {
    type Error = Error;

    fn try_from(u: Matrix) -> Result<Self> {
        SubspaceBasis::new(u)
    }
}

impl From<SubspaceBasis> for Matrix {
    fn from(b: SubspaceBasis) -> Self {
        b.u
    }
}

impl TryFrom<Vec<Vec<usize>>> for GroupPartition {
    type Error = Error;

    fn try_from(groups: Vec<Vec<usize>>) -> Result<Self> {
        GroupPartition::new(groups)
    }
}

impl From<GroupPartition> for Vec<Vec<usize>> {
    fn from(p: GroupPartition) -> Self {
        p.groups
    }
}

/// Generative parameters of the factor model.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelParams {
    /// d×k loading of the protected attributes.
    pub a: Matrix,
    /// d×l loading of the permissible attributes.
    pub b: Matrix,
    /// l×k confounding of the permissible attributes by the protected ones.
    pub gamma: Matrix,
    pub sigma_x: Matrix,
    pub sigma_eps: Matrix,
    pub sigma_w: Matrix,
}

impl ModelParams {
    /// Returns `(d, k, l)` after checking dimensions and PSD covariances.
    pub fn validate(&self) -> Result<(usize, usize, usize)> {
        let (d, k) = self.a.shape();
        let l = self.b.ncols();
        let checks: [(&'static str, &Matrix, (usize, usize)); 6] = [
            ("B", &self.b, (d, l)),
            ("Gamma", &self.gamma, (l, k)),
            ("Sigma_x", &self.sigma_x, (k, k)),
            ("Sigma_eps", &self.sigma_eps, (d, d)),
            ("Sigma_w", &self.sigma_w, (l, l)),
            ("A", &self.a, (d, k)),
        ];
        for (name, m, want) in checks {
            if m.shape() != want {
                return Err(Error::shape(name, want, m.shape()));
            }
            if !m.is_finite() {
                return Err(Error::ContractViolation(format!("{name} is not finite")));
            }
        }
        for (name, m) in [
            ("Sigma_x", &self.sigma_x),
            ("Sigma_eps", &self.sigma_eps),
            ("Sigma_w", &self.sigma_w),
        ] {
            if !is_psd(m) {
                return Err(Error::ContractViolation(format!(
                    "{name} is not symmetric positive semidefinite"
                )));
            }
        }
        Ok((d, k, l))
    }
}

/// Orthonormal basis (columns of a d×k matrix) of a subspace of ℝ^d.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "Matrix", into = "Matrix"))]
pub struct SubspaceBasis {
    dim: usize,
    u: Matrix,
}

impl SubspaceBasis {
    pub fn new(u: Matrix) -> Result<Self> {
        let gram = u.tr_matmul(&u);
        let err = gram.sub(&Matrix::identity(u.ncols())).frobenius_norm();
        if err > ORTHONORMAL_TOL {
            return Err(Error::ContractViolation(format!(
                "basis columns are not orthonormal (‖UᵀU − I‖ = {err:e})"
            )));
        }
        Ok(SubspaceBasis { dim: u.nrows(), u })
    }

    /// The zero-dimensional subspace of ℝ^d.
    pub fn empty(dim: usize) -> Self {
        SubspaceBasis {
            dim,
            u: Matrix::zeros(dim, 0),
        }
    }

    /// Orthonormal basis of the column space of `m`, with columns whose
    /// singular value is at or below `rtol · σ_max` discarded.
    pub fn column_span(m: &Matrix, rtol: f64) -> Self {
        let svd = right_svd(&m.transpose());
        let top = svd.singular_values.first().copied().unwrap_or(0.0);
        let rank = svd
            .singular_values
            .iter()
            .filter(|&&s| top > 0.0 && s > rtol * top)
            .count();
        let keep: Vec<usize> = (0..rank).collect();
        SubspaceBasis {
            dim: m.nrows(),
            u: svd.v.select_columns(&keep),
        }
    }

    pub fn basis(&self) -> &Matrix {
        &self.u
    }

    /// Ambient dimension d.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Subspace dimension k.
    pub fn rank(&self) -> usize {
        self.u.ncols()
    }
}

/// Rows `idx` of `m` with their within-group column means removed, i.e.
/// `H_g M_{I_g}` with `H_g = I − 11ᵀ/|I_g|`.
pub fn center_group(m: &Matrix, idx: &[usize]) -> Result<Matrix> {
    if let Some(&bad) = idx.iter().find(|&&i| i >= m.nrows()) {
        return Err(Error::InvalidPartition(format!(
            "row {bad} out of range for a matrix with {} rows",
            m.nrows()
        )));
    }
    let mut block = m.select_rows(idx);
    if idx.is_empty() {
        return Ok(block);
    }
    // the second pass removes the rounding residue left by the first
    for _ in 0..2 {
        let means = block.column_means();
        for i in 0..block.nrows() {
            for (v, mu) in block.row_mut(i).iter_mut().zip(&means) {
                *v -= mu;
            }
        }
    }
    Ok(block)
}

/// Group-centered blocks of `m` stacked in group order, original row order
/// within each group.
pub fn stack_centered(m: &Matrix, partition: &GroupPartition) -> Result<Matrix> {
    partition.validate_for(m.nrows())?;
    let blocks = partition
        .groups()
        .iter()
        .map(|g| center_group(m, g))
        .collect::<Result<Vec<_>>>()?;
    Ok(Matrix::vstack(&blocks, m.ncols()))
}

/// Moore–Penrose pseudo-inverse of a symmetric PSD matrix through its
/// eigendecomposition. Returns the pseudo-inverse and the number of
/// eigenvalues kept.
pub fn pinv_psd_with_rank(s: &Matrix, rtol: f64) -> Result<(Matrix, usize)> {
    if s.nrows() != s.ncols() {
        return Err(Error::shape("pinv_psd", (s.nrows(), s.nrows()), s.shape()));
    }
    let asym = s.asymmetry();
    if asym > SYMMETRY_RTOL {
        return Err(Error::ContractViolation(format!(
            "pinv_psd input is not symmetric (relative asymmetry {asym:e})"
        )));
    }
    let n = s.nrows();
    let eig = symmetric_eigen(s);
    let top = eig.values.first().copied().unwrap_or(0.0);
    let mut out = Matrix::zeros(n, n);
    let mut rank = 0;
    if top <= 0.0 {
        return Ok((out, 0));
    }
    for (j, &lam) in eig.values.iter().enumerate() {
        if lam <= rtol * top {
            continue;
        }
        rank += 1;
        let inv = 1.0 / lam;
        for r in 0..n {
            let vr = eig.vectors[(r, j)] * inv;
            for c in 0..n {
                out[(r, c)] += vr * eig.vectors[(c, j)];
            }
        }
    }
    out.symmetrize();
    Ok((out, rank))
}

/// Moore–Penrose pseudo-inverse of a symmetric PSD matrix.
pub fn pinv_psd(s: &Matrix, rtol: f64) -> Result<Matrix> {
    pinv_psd_with_rank(s, rtol).map(|(p, _)| p)
}

/// `Y (I − U Uᵀ)`: removes the component of every row lying in span(U).
pub fn project_out(y: &Matrix, basis: &SubspaceBasis) -> Result<Matrix> {
    if basis.dim() != y.ncols() {
        return Err(Error::len("project_out", y.ncols(), basis.dim()));
    }
    if basis.rank() == 0 {
        return Ok(y.clone());
    }
    let u = basis.basis();
    let coords = y.matmul(u);
    Ok(y.sub(&coords.matmul_tr(u)))
}
