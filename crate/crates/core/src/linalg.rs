//! Small dense kernels: Jacobi eigendecomposition, one-sided Jacobi SVD and
//! Cholesky. Dimensions here are desk scale (d up to a few hundred), where
//! Jacobi methods are simple and accurate to working precision.

use alloc::vec;
use alloc::vec::Vec;

use crate::matrix::dot;
use crate::Matrix;

const MAX_SWEEPS: usize = 80;

/// Eigendecomposition of a symmetric matrix, eigenvalues in decreasing order
/// and eigenvectors stored as the columns of `vectors`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

/// Cyclic Jacobi eigendecomposition. Only the upper triangle is trusted to be
/// meaningful if the input is slightly asymmetric; callers symmetrize first.
pub fn symmetric_eigen(s: &Matrix) -> SymmetricEigen {
    assert_eq!(
        s.nrows(),
        s.ncols(),
        "symmetric_eigen needs a square matrix"
    );
    let n = s.nrows();
    let mut a = s.clone();
    a.symmetrize();
    let mut v = Matrix::identity(n);
    let scale = a.frobenius_norm();

    for sweep in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if scale == 0.0 || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let g = 100.0 * libm::fabs(apq);
                // negligible against both diagonal entries: drop it
                if (sweep > 3
                    && libm::fabs(a[(p, p)]) + g == libm::fabs(a[(p, p)])
                    && libm::fabs(a[(q, q)]) + g == libm::fabs(a[(q, q)]))
                    || libm::fabs(apq) < 1e-300
                {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if libm::fabs(theta) > 1e150 {
                    0.5 / theta
                } else {
                    let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                    sign / (libm::fabs(theta) + libm::sqrt(theta * theta + 1.0))
                };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let sn = t * c;

                a[(p, p)] -= t * apq;
                a[(q, q)] += t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = a[(r, p)];
                    let arq = a[(r, q)];
                    let new_rp = c * arp - sn * arq;
                    let new_rq = sn * arp + c * arq;
                    a[(r, p)] = new_rp;
                    a[(p, r)] = new_rp;
                    a[(r, q)] = new_rq;
                    a[(q, r)] = new_rq;
                }
                for r in 0..n {
                    let vrp = v[(r, p)];
                    let vrq = v[(r, q)];
                    v[(r, p)] = c * vrp - sn * vrq;
                    v[(r, q)] = sn * vrp + c * vrq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    SymmetricEigen {
        values: order.iter().map(|&i| a[(i, i)]).collect(),
        vectors: v.select_columns(&order),
    }
}

/// Singular values (decreasing) and right singular vectors (columns of `v`).
#[derive(Debug, Clone)]
pub struct RightSvd {
    pub singular_values: Vec<f64>,
    pub v: Matrix,
}

/// One-sided Jacobi (Hestenes) SVD of an m×n matrix, returning all n right
/// singular vectors. Works directly on the columns of the input, so small
/// singular values keep full relative accuracy instead of being squared away
/// as they would be by an eigendecomposition of `AᵀA`.
pub fn right_svd(a: &Matrix) -> RightSvd {
    let (m, n) = a.shape();
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v = Matrix::identity(n);
    let tol = f64::EPSILON * (m.max(1) as f64);

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if gamma == 0.0 || libm::fabs(gamma) <= tol * libm::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if libm::fabs(zeta) > 1e150 {
                    0.5 / zeta
                } else {
                    let sign = if zeta >= 0.0 { 1.0 } else { -1.0 };
                    sign / (libm::fabs(zeta) + libm::sqrt(1.0 + zeta * zeta))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                let (left, right) = cols.split_at_mut(q);
                for (x, y) in left[p].iter_mut().zip(right[0].iter_mut()) {
                    let (xp, yq) = (*x, *y);
                    *x = c * xp - s * yq;
                    *y = s * xp + c * yq;
                }
                for r in 0..n {
                    let vrp = v[(r, p)];
                    let vrq = v[(r, q)];
                    v[(r, p)] = c * vrp - s * vrq;
                    v[(r, q)] = s * vrp + c * vrq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = cols.iter().map(|c| libm::sqrt(dot(c, c))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    RightSvd {
        singular_values: order.iter().map(|&i| norms[i]).collect(),
        v: v.select_columns(&order),
    }
}

/// Lower Cholesky factor `L` with `L Lᵀ = S`, or `None` when a pivot is not
/// strictly positive.
pub fn cholesky(s: &Matrix) -> Option<Matrix> {
    let n = s.nrows();
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = s[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d.is_nan() || d <= 0.0 {
            return None;
        }
        let ljj = libm::sqrt(d);
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            let mut v = s[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = v / ljj;
        }
    }
    Some(l)
}

/// Solves `L Lᵀ x = b` given the lower Cholesky factor.
pub fn cholesky_solve(l: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = l.nrows();
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut v = b[i];
        for k in 0..i {
            v -= l[(i, k)] * y[k];
        }
        y[i] = v / l[(i, i)];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut v = y[i];
        for k in (i + 1)..n {
            v -= l[(k, i)] * x[k];
        }
        x[i] = v / l[(i, i)];
    }
    x
}

/// True when the smallest eigenvalue is at least `-1e-10·‖S‖_F`.
pub fn is_psd(s: &Matrix) -> bool {
    if s.nrows() != s.ncols() || s.asymmetry() > 1e-10 {
        return false;
    }
    let eig = symmetric_eigen(s);
    let floor = -1e-10 * s.frobenius_norm();
    eig.values.last().is_none_or(|&min| min >= floor)
}

/// A factor `L` with `L Lᵀ = S` for symmetric PSD `S`: Cholesky when it
/// succeeds, otherwise the eigen square root `V diag(√λ₊)`.
pub fn psd_factor(s: &Matrix) -> Matrix {
    if let Some(l) = cholesky(s) {
        return l;
    }
    let eig = symmetric_eigen(s);
    let n = s.nrows();
    Matrix::from_fn(n, n, |i, j| {
        eig.vectors[(i, j)] * libm::sqrt(eig.values[j].max(0.0))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_sym() -> Matrix {
        Matrix::from_rows(&[
            [4.0, 1.0, -2.0, 0.5],
            [1.0, 3.0, 0.0, 1.5],
            [-2.0, 0.0, 5.0, -1.0],
            [0.5, 1.5, -1.0, 2.0],
        ])
        .unwrap()
    }

    #[test]
    fn eigen_reconstructs() {
        let s = sample_sym();
        let e = symmetric_eigen(&s);
        let lam = Matrix::from_diag(&e.values);
        let rec = e.vectors.matmul(&lam).matmul_tr(&e.vectors);
        assert!(rec.sub(&s).frobenius_norm() < 1e-12);
        let vtv = e.vectors.tr_matmul(&e.vectors);
        assert!(vtv.sub(&Matrix::identity(4)).frobenius_norm() < 1e-13);
        assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn svd_matches_eigen_of_gram() {
        let a = Matrix::from_rows(&[
            [1.0, 2.0, 0.0],
            [0.0, 1.0, -1.0],
            [3.0, 0.0, 1.0],
            [1.0, 1.0, 1.0],
            [-2.0, 0.5, 0.0],
        ])
        .unwrap();
        let svd = right_svd(&a);
        let e = symmetric_eigen(&a.tr_matmul(&a));
        for (s, l) in svd.singular_values.iter().zip(&e.values) {
            assert!((s * s - l).abs() < 1e-11);
        }
        // A V has orthogonal columns with norms equal to the singular values
        let av = a.matmul(&svd.v);
        let g = av.tr_matmul(&av);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j {
                    svd.singular_values[i].powi(2)
                } else {
                    0.0
                };
                assert!((g[(i, j)] - want).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn svd_of_wide_and_zero_matrices() {
        let wide = Matrix::from_rows(&[[1.0, 0.0, 0.0, 2.0]]).unwrap();
        let svd = right_svd(&wide);
        assert!((svd.singular_values[0] - 5f64.sqrt()).abs() < 1e-14);
        assert!(svd.singular_values[1..].iter().all(|&s| s == 0.0));

        let zero = Matrix::zeros(3, 2);
        let svd = right_svd(&zero);
        assert_eq!(svd.singular_values, alloc::vec![0.0, 0.0]);
    }

    #[test]
    fn cholesky_solves_and_rejects_semidefinite() {
        let s = sample_sym();
        let l = cholesky(&s).unwrap();
        assert!(l.matmul_tr(&l).sub(&s).frobenius_norm() < 1e-12);
        let x = cholesky_solve(&l, &[1.0, 2.0, 3.0, 4.0]);
        let b = s.matvec(&x);
        for (bi, want) in b.iter().zip([1.0, 2.0, 3.0, 4.0]) {
            assert!((bi - want).abs() < 1e-12);
        }
        assert!(cholesky(&Matrix::from_diag(&[1.0, 0.0])).is_none());
    }

    #[test]
    fn psd_factor_falls_back_for_semidefinite() {
        let s = Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        let l = psd_factor(&s);
        assert!(l.matmul_tr(&l).sub(&s).frobenius_norm() < 1e-14);
        assert!(is_psd(&s));
        assert!(!is_psd(&Matrix::from_diag(&[1.0, -1.0])));
    }
}
