//! Debiasing when the protected attributes are not observed.
//!
//! After within-group centering the permissible attributes drop out and the
//! stacked data follow a factor model whose loading spans `𝓡(A)`. The best
//! rank-k fit of the stacked centered matrix (Eckart–Young) gives that span as
//! the top-k right singular vectors; the representations are then projected
//! onto its orthogonal complement.

use alloc::vec::Vec;

use crate::linalg::{right_svd, symmetric_eigen};
use crate::model::{project_out, stack_centered};
use crate::observed::{Adjustment, DebiasOutput};
use crate::{Error, GroupPartition, Matrix, RepresentationMatrix, Result, SubspaceBasis, Warning};

/// Relative gap below which the k-th and (k+1)-th singular values are tied.
const TIE_RTOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SubspaceEstimate {
    pub basis: SubspaceBasis,
    /// Full singular-value profile of the stacked centered matrix.
    pub singular_values: Vec<f64>,
    pub warnings: Vec<Warning>,
}

fn numerical_rank(singular_values: &[f64], rows: usize, cols: usize) -> usize {
    let top = singular_values.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    let tol = (rows.max(cols) as f64) * f64::EPSILON * top;
    singular_values.iter().filter(|&&s| s > tol).count()
}

/// Top-k right singular vectors of the stacked group-centered `Y`.
///
/// Columns are ordered by decreasing singular value and signed so that the
/// largest-magnitude entry of each column is positive.
pub fn estimate_subspace(
    y: &RepresentationMatrix,
    partition: &GroupPartition,
    k: usize,
) -> Result<SubspaceEstimate> {
    let stacked = stack_centered(y.matrix(), partition)?;
    let (m, d) = stacked.shape();
    if k == 0 || k > m.min(d) {
        return Err(Error::InvalidRank {
            requested: k,
            available: m.min(d),
        });
    }
    let svd = right_svd(&stacked);
    let rank = numerical_rank(&svd.singular_values, m, d);
    if k > rank {
        return Err(Error::InvalidRank {
            requested: k,
            available: rank,
        });
    }

    let mut warnings: Vec<Warning> = partition
        .singletons()
        .map(|group| Warning::SingletonGroup { group })
        .collect();
    if let Some(&next) = svd.singular_values.get(k) {
        let kth = svd.singular_values[k - 1];
        if kth - next <= TIE_RTOL * svd.singular_values[0] {
            warnings.push(Warning::SingularValueTie { k });
        }
    }

    let keep: Vec<usize> = (0..k).collect();
    let mut u = svd.v.select_columns(&keep);
    fix_signs(&mut u);
    Ok(SubspaceEstimate {
        basis: SubspaceBasis::new(u)?,
        singular_values: svd.singular_values,
        warnings,
    })
}

/// Flips each column so its largest-magnitude entry (first on ties) is positive.
fn fix_signs(u: &mut Matrix) {
    for j in 0..u.ncols() {
        let mut pivot = 0;
        for i in 1..u.nrows() {
            if libm::fabs(u[(i, j)]) > libm::fabs(u[(pivot, j)]) {
                pivot = i;
            }
        }
        if u.nrows() > 0 && u[(pivot, j)] < 0.0 {
            for i in 0..u.nrows() {
                u[(i, j)] = -u[(i, j)];
            }
        }
    }
}

/// `Y_db = Y (I − U Uᵀ)`.
pub fn debias_latent(y: &RepresentationMatrix, basis: &SubspaceBasis) -> Result<DebiasOutput> {
    Ok(DebiasOutput {
        y_db: project_out(y.matrix(), basis)?,
        adjustment: Adjustment::Latent {
            basis: basis.clone(),
        },
    })
}

/// Leading `k_max` singular values of the stacked group-centered `Y`, for
/// choosing the subspace dimension.
pub fn rank_diagnostic(
    y: &RepresentationMatrix,
    partition: &GroupPartition,
    k_max: usize,
) -> Result<Vec<f64>> {
    let stacked = stack_centered(y.matrix(), partition)?;
    let mut values = right_svd(&stacked).singular_values;
    values.truncate(k_max);
    Ok(values)
}

/// Largest principal angle (radians) between two subspaces of equal
/// dimension, computed from `‖(I − U₁U₁ᵀ) U₂‖₂` so that tiny angles keep
/// their relative accuracy.
pub fn principal_angle(a: &SubspaceBasis, b: &SubspaceBasis) -> Result<f64> {
    if a.dim() != b.dim() || a.rank() != b.rank() {
        return Err(Error::shape(
            "principal_angle",
            (a.dim(), a.rank()),
            (b.dim(), b.rank()),
        ));
    }
    if a.rank() == 0 {
        return Ok(0.0);
    }
    let residual = project_out(&b.basis().transpose(), a)?;
    let gram = residual.matmul_tr(&residual);
    let top = symmetric_eigen(&gram).values[0].max(0.0);
    Ok(libm::asin(libm::sqrt(top).min(1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn rep(m: Matrix) -> RepresentationMatrix {
        RepresentationMatrix::new(m).unwrap()
    }

    #[test]
    fn exact_rank_one_recovers_direction() {
        let a = [0.6, 0.0, -0.8];
        let xs = [1.0, -2.0, 0.5, 3.0, -1.0, 2.5];
        let offsets = [[1.0, 2.0, 3.0], [-4.0, 0.0, 1.0]];
        let y = Matrix::from_fn(6, 3, |i, j| xs[i] * a[j] + offsets[i / 3][j]);
        let p = GroupPartition::new(vec![vec![0, 1, 2], vec![3, 4, 5]]).unwrap();
        let est = estimate_subspace(&rep(y), &p, 1).unwrap();
        let u = est.basis.basis();
        // sign convention: largest-magnitude entry (−0.8) becomes positive
        for (j, want) in [-0.6, 0.0, 0.8].iter().enumerate() {
            assert!((u[(j, 0)] - want).abs() < 1e-14, "{:?}", u);
        }
        assert!(est.singular_values[1] < 1e-13);
    }

    #[test]
    fn constant_groups_have_no_rank() {
        let y = Matrix::from_rows(&[[1.0, 2.0], [1.0, 2.0], [3.0, 0.0], [3.0, 0.0]]).unwrap();
        let p = GroupPartition::new(vec![vec![0, 1], vec![2, 3]]).unwrap();
        assert!(matches!(
            estimate_subspace(&rep(y), &p, 1),
            Err(Error::InvalidRank {
                requested: 1,
                available: 0
            })
        ));
    }

    #[test]
    fn rank_bound_enforced() {
        let y = Matrix::from_rows(&[[1.0, 2.0, 0.0], [0.0, 1.0, 3.0]]).unwrap();
        let p = GroupPartition::new(vec![vec![0, 1]]).unwrap();
        // two centered rows span one direction
        assert!(estimate_subspace(&rep(y.clone()), &p, 2).is_err());
        assert!(estimate_subspace(&rep(y), &p, 0).is_err());
    }

    #[test]
    fn tie_is_warned() {
        let y = Matrix::from_rows(&[[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]]).unwrap();
        let p = GroupPartition::new(vec![vec![0, 1], vec![2, 3]]).unwrap();
        let est = estimate_subspace(&rep(y), &p, 1).unwrap();
        assert!(est.warnings.contains(&Warning::SingularValueTie { k: 1 }));
    }

    #[test]
    fn debias_latent_examples() {
        let y = rep(Matrix::from_rows(&[[1.0, 2.0], [3.0, -1.0]]).unwrap());
        let full = SubspaceBasis::new(Matrix::identity(2)).unwrap();
        assert!(debias_latent(&y, &full).unwrap().y_db.max_abs() < 1e-15);
        assert_eq!(
            debias_latent(&y, &SubspaceBasis::empty(2)).unwrap().y_db,
            *y.matrix()
        );
        // rows orthogonal to the basis are untouched
        let e1 = SubspaceBasis::new(Matrix::from_rows(&[[1.0], [0.0]]).unwrap()).unwrap();
        let z = rep(Matrix::from_rows(&[[0.0, 2.0], [0.0, -3.0]]).unwrap());
        assert_eq!(debias_latent(&z, &e1).unwrap().y_db, *z.matrix());
    }

    #[test]
    fn rank_diagnostic_examples() {
        let y = Matrix::from_fn(4, 3, |i, j| (i as f64) * (j as f64 + 1.0));
        let p = GroupPartition::new(vec![vec![0, 1, 2, 3]]).unwrap();
        let sv = rank_diagnostic(&rep(y), &p, 3).unwrap();
        assert!(sv[0] > 0.0 && sv[1] < 1e-13 && sv[2] < 1e-13);

        let z = Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        let p = GroupPartition::new(vec![vec![0, 1]]).unwrap();
        assert_eq!(rank_diagnostic(&rep(z), &p, 5).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn principal_angle_of_rotated_line() {
        let t = 1e-9_f64;
        let a = SubspaceBasis::new(Matrix::from_rows(&[[1.0], [0.0]]).unwrap()).unwrap();
        let b = SubspaceBasis::new(Matrix::from_rows(&[[t.cos()], [t.sin()]]).unwrap()).unwrap();
        let angle = principal_angle(&a, &b).unwrap();
        assert!((angle - t).abs() < 1e-20);
    }
}
