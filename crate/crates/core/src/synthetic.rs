//! Synthetic data from the factor model and Monte Carlo checks of the
//! estimator's conditional bias and of the conditional decorrelation of the
//! debiased representations.
//!
//! Conditioning on the permissible attributes is realized by holding the
//! whole `Z` matrix fixed across replicates; each replicate redraws the
//! remaining randomness (`E`, and `X` where the statement is not conditional
//! on it). Replicate `r` draws from [`rng::stream`]`(seed, r)`, so reports do
//! not depend on the order in which replicates are evaluated.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{is_psd, psd_factor};
use crate::model::{pinv_psd_with_rank, stack_centered, DEFAULT_PINV_RTOL};
use crate::observed::estimate_a;
use crate::rng;
use crate::{
    debias_latent, Error, GroupPartition, Matrix, ModelParams, ProtectedMatrix,
    RepresentationMatrix, Result, SubspaceBasis,
};

/// Matrix-variate normal `MN(M, Σ_r, Σ_c)`: `M + L_r N L_cᵀ` with `N` standard normal.
#[derive(Debug, Clone)]
pub struct MatrixNormal {
    mean: Matrix,
    /// `None` stands for the identity row covariance.
    row_factor: Option<Matrix>,
    col_factor: Matrix,
}

fn check_cov(name: &str, s: &Matrix, dim: usize) -> Result<()> {
    if s.shape() != (dim, dim) {
        return Err(Error::ContractViolation(format!(
            "{name} must be {dim}x{dim}, got {}x{}",
            s.nrows(),
            s.ncols()
        )));
    }
    if !is_psd(s) {
        return Err(Error::ContractViolation(format!(
            "{name} is not symmetric positive semidefinite"
        )));
    }
    Ok(())
}

impl MatrixNormal {
    pub fn new(mean: Matrix, sigma_r: &Matrix, sigma_c: &Matrix) -> Result<Self> {
        check_cov("row covariance", sigma_r, mean.nrows())?;
        check_cov("column covariance", sigma_c, mean.ncols())?;
        Ok(MatrixNormal {
            row_factor: Some(psd_factor(sigma_r)),
            col_factor: psd_factor(sigma_c),
            mean,
        })
    }

    /// Independent rows: `MN(M, I, Σ_c)`.
    pub fn iid_rows(mean: Matrix, sigma_c: &Matrix) -> Result<Self> {
        check_cov("column covariance", sigma_c, mean.ncols())?;
        Ok(MatrixNormal {
            row_factor: None,
            col_factor: psd_factor(sigma_c),
            mean,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        self.mean.shape()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Matrix {
        let (n, d) = self.mean.shape();
        let noise = Matrix::from_fn(n, d, |_, _| rng.sample(StandardNormal));
        let mut draw = noise.matmul_tr(&self.col_factor);
        if let Some(lr) = &self.row_factor {
            draw = lr.matmul(&draw);
        }
        self.mean.add(&draw)
    }
}

/// One seeded draw from `MN(M, Σ_r, Σ_c)`.
pub fn sample_matrix_normal(
    mean: &Matrix,
    sigma_r: &Matrix,
    sigma_c: &Matrix,
    seed: u64,
) -> Result<Matrix> {
    let dist = MatrixNormal::new(mean.clone(), sigma_r, sigma_c)?;
    Ok(dist.sample(&mut rng::stream(seed, 0)))
}

/// Groups of the synthetic sample, optionally with a shared permissible
/// vector `z_g` per group (`Z_{I_g} = 1 z_gᵀ`).
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionSpec {
    pub partition: GroupPartition,
    pub group_z: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub y: Matrix,
    pub x: Matrix,
    pub z: Matrix,
    pub e: Matrix,
    pub w: Matrix,
}

/// Draws `X ~ MN(0, I, Σ_x)`, `W ~ MN(0, I, Σ_w)`, `Z = X Γᵀ + W` (or the
/// shared group vectors in homogeneous mode), `E ~ MN(0, I, Σ_ε)` and
/// assembles `Y = X Aᵀ + Z Bᵀ + E`.
pub fn generate(
    params: &ModelParams,
    n: usize,
    spec: &PartitionSpec,
    seed: u64,
) -> Result<SyntheticData> {
    let (d, k, l) = params.validate()?;
    spec.partition.validate_for(n)?;
    if let Some(group_z) = &spec.group_z {
        if group_z.len() != spec.partition.len() {
            return Err(Error::len(
                "generate group_z",
                spec.partition.len(),
                group_z.len(),
            ));
        }
        if let Some(bad) = group_z.iter().find(|z| z.len() != l) {
            return Err(Error::len("generate z_g", l, bad.len()));
        }
    }
    let mut rng = rng::stream(seed, 0);
    let x = MatrixNormal::iid_rows(Matrix::zeros(n, k), &params.sigma_x)?.sample(&mut rng);
    let w = MatrixNormal::iid_rows(Matrix::zeros(n, l), &params.sigma_w)?.sample(&mut rng);
    let e = MatrixNormal::iid_rows(Matrix::zeros(n, d), &params.sigma_eps)?.sample(&mut rng);

    let mut z = x.matmul_tr(&params.gamma).add(&w);
    if let Some(group_z) = &spec.group_z {
        for (group, zg) in spec.partition.groups().iter().zip(group_z) {
            for &i in group {
                z.row_mut(i).copy_from_slice(zg);
            }
        }
    }
    let y = x.matmul_tr(&params.a).add(&z.matmul_tr(&params.b)).add(&e);
    Ok(SyntheticData { y, x, z, e, w })
}

/// Replaces every grouped row of `z` by its group mean, so the centered
/// permissible attributes vanish.
pub fn homogenize(z: &Matrix, partition: &GroupPartition) -> Result<Matrix> {
    partition.validate_for(z.nrows())?;
    let mut out = z.clone();
    for group in partition.groups() {
        let means = z.select_rows(group).column_means();
        for &i in group {
            out.row_mut(i).copy_from_slice(&means);
        }
    }
    Ok(out)
}

/// A Monte Carlo experiment split into independent replicates and a
/// deterministic reduction, so callers can evaluate replicates in any order
/// or in parallel.
pub trait MonteCarlo: Sync {
    type Sample: Send;
    type Report;

    fn min_reps(&self) -> usize;

    fn replicate(&self, seed: u64, r: usize) -> Result<Self::Sample>;

    /// Reduces samples given in replicate order.
    fn summarize(&self, samples: &[Self::Sample]) -> Result<Self::Report>;

    fn check_reps(&self, reps: usize) -> Result<()> {
        if reps < self.min_reps() {
            return Err(Error::TooFewReplicates {
                got: reps,
                min: self.min_reps(),
            });
        }
        Ok(())
    }
}

/// Runs replicates `0..reps` in order and summarizes them.
pub fn run_sequential<M: MonteCarlo>(mc: &M, reps: usize, seed: u64) -> Result<M::Report> {
    mc.check_reps(reps)?;
    let samples = (0..reps)
        .map(|r| mc.replicate(seed, r))
        .collect::<Result<Vec<_>>>()?;
    mc.summarize(&samples)
}

/// Relative Frobenius error `‖est − truth‖ / ‖truth‖` (absolute when the
/// truth is zero).
pub fn rel_frobenius(est: &Matrix, truth: &Matrix) -> f64 {
    let diff = est.sub(truth).frobenius_norm();
    let norm = truth.frobenius_norm();
    if norm == 0.0 {
        diff
    } else {
        diff / norm
    }
}

/// Quotient of an estimate by its standard error. The error is floored at
/// `1e-12 · scale` so estimates that are zero up to rounding stay near zero.
fn z_score(estimate: f64, se: f64, scale: f64) -> f64 {
    let denom = se.max(1e-12 * scale);
    if denom == 0.0 {
        if estimate == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        estimate / denom
    }
}

fn mean_vec(samples: &[&[f64]]) -> Vec<f64> {
    let dim = samples.first().map_or(0, |s| s.len());
    let mut m = vec![0.0; dim];
    for s in samples {
        for (acc, v) in m.iter_mut().zip(s.iter()) {
            *acc += v;
        }
    }
    let r = samples.len() as f64;
    m.iter_mut().for_each(|v| *v /= r);
    m
}

/// Sample cross-covariance of paired vectors with per-entry standard errors
/// from the spread of the centered products.
struct CrossCov {
    cov: Matrix,
    z: Matrix,
}

fn cross_cov(a: &[Vec<f64>], b: &[Vec<f64>]) -> CrossCov {
    cross_cov_scaled(a, b, 0.0)
}

/// As [`cross_cov`], with `a_scale` a lower bound on the rms magnitude the
/// `a` vectors were computed from (for quantities that are differences of
/// much larger terms).
fn cross_cov_scaled(a: &[Vec<f64>], b: &[Vec<f64>], a_scale: f64) -> CrossCov {
    let r = a.len();
    let p = a[0].len();
    let q = b[0].len();
    let a_refs: Vec<&[f64]> = a.iter().map(Vec::as_slice).collect();
    let b_refs: Vec<&[f64]> = b.iter().map(Vec::as_slice).collect();
    let ma = mean_vec(&a_refs);
    let mb = mean_vec(&b_refs);
    let mut cov = Matrix::zeros(p, q);
    let mut z = Matrix::zeros(p, q);
    let rf = r as f64;
    for i in 0..p {
        for j in 0..q {
            let prods: Vec<f64> = (0..r)
                .map(|s| (a[s][i] - ma[i]) * (b[s][j] - mb[j]))
                .collect();
            let sum: f64 = prods.iter().sum();
            let c = sum / (rf - 1.0);
            let mean_prod = sum / rf;
            let var = prods
                .iter()
                .map(|v| (v - mean_prod) * (v - mean_prod))
                .sum::<f64>()
                / (rf - 1.0);
            let se = libm::sqrt(var / rf);
            let a_rms = libm::sqrt(a.iter().map(|v| v[i] * v[i]).sum::<f64>() / rf);
            let b_rms = libm::sqrt(b.iter().map(|v| v[j] * v[j]).sum::<f64>() / rf);
            let scale = a_rms.max(a_scale) * b_rms;
            cov[(i, j)] = c;
            z[(i, j)] = z_score(c, se, scale);
        }
    }
    CrossCov { cov, z }
}

/// Report of the conditional-bias check of the observed-attribute estimator.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Prop1Report {
    /// k×d predicted mean of `Âᵀ − Aᵀ`: `T Σ_g X_gᵀ Z_g Bᵀ`.
    pub predicted_bias: Matrix,
    pub empirical_bias: Matrix,
    pub bias_z_scores: Matrix,
    pub max_abs_z: f64,
    /// k×k pooled pseudo-inverse `T`, the predicted row covariance.
    pub t: Matrix,
    pub row_cov: Matrix,
    pub col_cov: Matrix,
    /// `None` when `Σ_ε` has zero trace and the row factor is unidentified.
    pub row_cov_rel_err: Option<f64>,
    pub col_cov_rel_err: f64,
    /// Error of the full covariance of `vec(Âᵀ − Aᵀ)` against `T ⊗ Σ_ε`.
    pub kron_cov_rel_err: f64,
    pub reps: usize,
}

/// Fixed `X`, `Z`; replicates redraw `E` and refit `Â`.
#[derive(Debug, Clone)]
pub struct Prop1Experiment {
    params: ModelParams,
    x: ProtectedMatrix,
    partition: GroupPartition,
    signal: Matrix,
    noise: MatrixNormal,
    t: Matrix,
    predicted_bias: Matrix,
}

impl Prop1Experiment {
    pub fn new(
        params: &ModelParams,
        x_fixed: &Matrix,
        z_fixed: &Matrix,
        partition: &GroupPartition,
    ) -> Result<Self> {
        let (d, k, l) = params.validate()?;
        let n = x_fixed.nrows();
        if x_fixed.shape() != (n, k) {
            return Err(Error::shape("fixed X", (n, k), x_fixed.shape()));
        }
        if z_fixed.shape() != (n, l) {
            return Err(Error::shape("fixed Z", (n, l), z_fixed.shape()));
        }
        let xs = stack_centered(x_fixed, partition)?;
        let zs = stack_centered(z_fixed, partition)?;
        let mut gram = xs.tr_matmul(&xs);
        gram.symmetrize();
        let (t, rank) = pinv_psd_with_rank(&gram, DEFAULT_PINV_RTOL)?;
        if rank == 0 {
            return Err(Error::Degenerate(
                "pooled Gram matrix of the centered protected attributes is zero",
            ));
        }
        let predicted_bias = t.matmul(&xs.tr_matmul(&zs)).matmul_tr(&params.b);
        let signal = x_fixed
            .matmul_tr(&params.a)
            .add(&z_fixed.matmul_tr(&params.b));
        Ok(Prop1Experiment {
            params: params.clone(),
            x: ProtectedMatrix::new(x_fixed.clone())?,
            partition: partition.clone(),
            noise: MatrixNormal::iid_rows(Matrix::zeros(n, d), &params.sigma_eps)?,
            signal,
            t,
            predicted_bias,
        })
    }

    pub fn predicted_bias(&self) -> &Matrix {
        &self.predicted_bias
    }

    pub fn t(&self) -> &Matrix {
        &self.t
    }
}

impl MonteCarlo for Prop1Experiment {
    /// `Âᵀ − Aᵀ` (k×d).
    type Sample = Matrix;
    type Report = Prop1Report;

    fn min_reps(&self) -> usize {
        100
    }

    fn replicate(&self, seed: u64, r: usize) -> Result<Matrix> {
        let mut rng = rng::stream(seed, r as u64);
        let y = self.signal.add(&self.noise.sample(&mut rng));
        let fit = estimate_a(&RepresentationMatrix::new(y)?, &self.x, &self.partition)?;
        Ok(fit.a_hat.sub(&self.params.a).transpose())
    }

    fn summarize(&self, samples: &[Matrix]) -> Result<Prop1Report> {
        self.check_reps(samples.len())?;
        let (k, d) = self.predicted_bias.shape();
        let reps = samples.len();
        let rf = reps as f64;

        let vecs: Vec<&[f64]> = samples.iter().map(Matrix::as_slice).collect();
        let mean = mean_vec(&vecs);
        let empirical_bias = Matrix::from_vec(k, d, mean.clone())?;

        let kd = k * d;
        let mut cov = Matrix::zeros(kd, kd);
        for s in &vecs {
            for a in 0..kd {
                let da = s[a] - mean[a];
                for b in 0..kd {
                    cov[(a, b)] += da * (s[b] - mean[b]);
                }
            }
        }
        let cov = cov.scale(1.0 / (rf - 1.0));

        let mut bias_z_scores = Matrix::zeros(k, d);
        let mut max_abs_z = 0.0_f64;
        for i in 0..k {
            for j in 0..d {
                let idx = i * d + j;
                let se = libm::sqrt(cov[(idx, idx)].max(0.0) / rf);
                let pred = self.predicted_bias[(i, j)];
                let scale = libm::sqrt(cov[(idx, idx)].max(0.0)) + libm::fabs(pred);
                let z = z_score(empirical_bias[(i, j)] - pred, se, scale);
                bias_z_scores[(i, j)] = z;
                max_abs_z = max_abs_z.max(libm::fabs(z));
            }
        }

        // MN(M, U, V): E[(D−M)ᵀ(D−M)] = tr(U) V and E[(D−M)(D−M)ᵀ] = tr(V) U
        let centered: Vec<Matrix> = samples.iter().map(|s| s.sub(&empirical_bias)).collect();
        let mut col_sum = Matrix::zeros(d, d);
        let mut row_sum = Matrix::zeros(k, k);
        for c in &centered {
            col_sum.add_assign(&c.tr_matmul(c));
            row_sum.add_assign(&c.matmul_tr(c));
        }
        let sigma_eps = &self.params.sigma_eps;
        let col_cov = col_sum.scale(1.0 / ((rf - 1.0) * self.t.trace()));
        let col_cov_rel_err = rel_frobenius(&col_cov, sigma_eps);
        let tr_eps = sigma_eps.trace();
        let (row_cov, row_cov_rel_err) = if tr_eps > 0.0 {
            let row_cov = row_sum.scale(1.0 / ((rf - 1.0) * tr_eps));
            let err = rel_frobenius(&row_cov, &self.t);
            (row_cov, Some(err))
        } else {
            (Matrix::zeros(k, k), None)
        };
        let kron_cov_rel_err = rel_frobenius(&cov, &self.t.kron(sigma_eps));

        Ok(Prop1Report {
            predicted_bias: self.predicted_bias.clone(),
            empirical_bias,
            bias_z_scores,
            max_abs_z,
            t: self.t.clone(),
            row_cov,
            col_cov,
            row_cov_rel_err,
            col_cov_rel_err,
            kron_cov_rel_err,
            reps,
        })
    }
}

/// Monte Carlo check of the conditional bias and covariance of `Âᵀ − Aᵀ`
/// given fixed `X` and `Z`.
pub fn verify_prop1(
    params: &ModelParams,
    x_fixed: &Matrix,
    z_fixed: &Matrix,
    partition: &GroupPartition,
    reps: usize,
    seed: u64,
) -> Result<Prop1Report> {
    let exp = Prop1Experiment::new(params, x_fixed, z_fixed, partition)?;
    run_sequential(&exp, reps, seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Scenario {
    /// Fitted `Â`, the given `Z`.
    General,
    /// `Â` replaced by the true `A`.
    OracleA,
    /// `Z` replaced by its group means, so `Z̃ = 0`.
    HomogeneousZ,
}

/// Report of the conditional covariance between a debiased row and its
/// protected attributes.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Prop2Report {
    pub scenario: Scenario,
    pub target_row: usize,
    /// d×k empirical `Cov[y_i − Â x_i, x_i]`.
    pub lhs_cov: Matrix,
    /// d×k empirical `−B Cov[Z̃ᵀ X̃ T x_i, x_i]`.
    pub rhs_cov: Matrix,
    /// z-scores of `lhs_cov` against zero.
    pub lhs_z: Matrix,
    /// z-scores of `lhs_cov − rhs_cov` against zero.
    pub diff_z: Matrix,
    /// d×k empirical `Cov[(Â − A) x_i, x_i]`.
    pub bias_route_cov: Matrix,
    /// z-scores of `−bias_route_cov − rhs_cov` against zero.
    pub bias_route_z: Matrix,
    /// `max |diff_z|` for the general scenario, `max |lhs_z|` otherwise.
    pub max_abs_z: f64,
    pub reps: usize,
}

/// Per-replicate vectors for [`Prop2Experiment`].
#[derive(Debug, Clone)]
pub struct Prop2Sample {
    /// `y_i − Â x_i`
    pub residual: Vec<f64>,
    /// `Z̃ᵀ X̃ T x_i`
    pub correction: Vec<f64>,
    /// `(Â − A) x_i`
    pub bias: Vec<f64>,
    pub x: Vec<f64>,
}

/// Fixed `Z`; replicates redraw `X` and `E`.
#[derive(Debug, Clone)]
pub struct Prop2Experiment {
    params: ModelParams,
    scenario: Scenario,
    partition: GroupPartition,
    target_row: usize,
    z_tilde: Matrix,
    zb: Matrix,
    x_dist: MatrixNormal,
    e_dist: MatrixNormal,
}

impl Prop2Experiment {
    pub fn new(
        params: &ModelParams,
        z_fixed: &Matrix,
        partition: &GroupPartition,
        target_row: usize,
        scenario: Scenario,
    ) -> Result<Self> {
        let (d, k, l) = params.validate()?;
        let n = z_fixed.nrows();
        if z_fixed.ncols() != l {
            return Err(Error::shape("fixed Z", (n, l), z_fixed.shape()));
        }
        if target_row >= n {
            return Err(Error::InvalidConfig(format!(
                "target row {target_row} out of range for {n} rows"
            )));
        }
        let z = match scenario {
            Scenario::HomogeneousZ => homogenize(z_fixed, partition)?,
            _ => z_fixed.clone(),
        };
        let z_tilde = stack_centered(&z, partition)?;
        Ok(Prop2Experiment {
            params: params.clone(),
            scenario,
            partition: partition.clone(),
            target_row,
            z_tilde,
            zb: z.matmul_tr(&params.b),
            x_dist: MatrixNormal::iid_rows(Matrix::zeros(n, k), &params.sigma_x)?,
            e_dist: MatrixNormal::iid_rows(Matrix::zeros(n, d), &params.sigma_eps)?,
        })
    }
}

impl MonteCarlo for Prop2Experiment {
    type Sample = Prop2Sample;
    type Report = Prop2Report;

    fn min_reps(&self) -> usize {
        1000
    }

    fn replicate(&self, seed: u64, r: usize) -> Result<Prop2Sample> {
        let mut rng = rng::stream(seed, r as u64);
        let x = self.x_dist.sample(&mut rng);
        let e = self.e_dist.sample(&mut rng);
        let y = x.matmul_tr(&self.params.a).add(&self.zb).add(&e);

        let xs = stack_centered(&x, &self.partition)?;
        let (a_hat, t) = match self.scenario {
            Scenario::OracleA => {
                let mut gram = xs.tr_matmul(&xs);
                gram.symmetrize();
                (
                    self.params.a.clone(),
                    pinv_psd_with_rank(&gram, DEFAULT_PINV_RTOL)?.0,
                )
            }
            _ => {
                let fit = estimate_a(
                    &RepresentationMatrix::new(y.clone())?,
                    &ProtectedMatrix::new(x.clone())?,
                    &self.partition,
                )?;
                (fit.a_hat, fit.t)
            }
        };

        let i = self.target_row;
        let xi = x.row(i).to_vec();
        let fitted = a_hat.matvec(&xi);
        let residual: Vec<f64> = y.row(i).iter().zip(&fitted).map(|(a, b)| a - b).collect();
        let bias = a_hat.sub(&self.params.a).matvec(&xi);
        let t_x = t.matvec(&xi);
        let correction = self.z_tilde.tr_matmul(&xs).matvec(&t_x);
        Ok(Prop2Sample {
            residual,
            correction,
            bias,
            x: xi,
        })
    }

    fn summarize(&self, samples: &[Prop2Sample]) -> Result<Prop2Report> {
        self.check_reps(samples.len())?;
        let b = &self.params.b;
        let xs: Vec<Vec<f64>> = samples.iter().map(|s| s.x.clone()).collect();
        let residuals: Vec<Vec<f64>> = samples.iter().map(|s| s.residual.clone()).collect();
        let corrections: Vec<Vec<f64>> = samples.iter().map(|s| s.correction.clone()).collect();
        let biases: Vec<Vec<f64>> = samples.iter().map(|s| s.bias.clone()).collect();
        let b_corr: Vec<Vec<f64>> = corrections.iter().map(|u| b.matvec(u)).collect();

        let lhs = cross_cov(&residuals, &xs);
        let rhs_cov = b.matmul(&cross_cov(&corrections, &xs).cov).scale(-1.0);
        // LHS − RHS = Cov[y_i − Â x_i + B u, x_i]
        let diff_samples: Vec<Vec<f64>> = residuals
            .iter()
            .zip(&b_corr)
            .map(|(v, bu)| v.iter().zip(bu).map(|(a, c)| a + c).collect())
            .collect();
        let diff = cross_cov(&diff_samples, &xs);
        let bias_route = cross_cov(&biases, &xs);
        // −Cov[(Â−A)x_i, x_i] − RHS = Cov[B u − (Â−A) x_i, x_i]
        let route_samples: Vec<Vec<f64>> = b_corr
            .iter()
            .zip(&biases)
            .map(|(bu, bi)| bu.iter().zip(bi).map(|(a, c)| a - c).collect())
            .collect();
        let route = cross_cov(&route_samples, &xs);

        let max_abs = |m: &Matrix| m.max_abs();
        let max_abs_z = match self.scenario {
            Scenario::General => max_abs(&diff.z),
            _ => max_abs(&lhs.z),
        };
        Ok(Prop2Report {
            scenario: self.scenario,
            target_row: self.target_row,
            lhs_cov: lhs.cov,
            rhs_cov,
            lhs_z: lhs.z,
            diff_z: diff.z,
            bias_route_cov: bias_route.cov,
            bias_route_z: route.z,
            max_abs_z,
            reps: samples.len(),
        })
    }
}

/// Monte Carlo check of `Cov[y_i − Â x_i, x_i | z_i] = −B Cov[Z̃ᵀX̃T x_i, x_i | z_i]`.
pub fn verify_prop2(
    params: &ModelParams,
    z_fixed: &Matrix,
    partition: &GroupPartition,
    target_row: usize,
    reps: usize,
    seed: u64,
    scenario: Scenario,
) -> Result<Prop2Report> {
    let exp = Prop2Experiment::new(params, z_fixed, partition, target_row, scenario)?;
    run_sequential(&exp, reps, seed)
}

/// Report of the conditional covariance between a row projected off the
/// true protected subspace and its protected attributes.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LatentParityReport {
    pub target_row: usize,
    pub subspace_rank: usize,
    /// d×k empirical `Cov[[Y_db]_i, x_i]`.
    pub cov: Matrix,
    pub z: Matrix,
    pub max_abs_z: f64,
    pub reps: usize,
}

/// Fixed `Z`; replicates redraw `X` and `E` and project with the true `𝓡(A)`.
#[derive(Debug, Clone)]
pub struct LatentParityExperiment {
    params: ModelParams,
    basis: SubspaceBasis,
    target_row: usize,
    zb: Matrix,
    x_dist: MatrixNormal,
    e_dist: MatrixNormal,
}

impl LatentParityExperiment {
    pub fn new(params: &ModelParams, z_fixed: &Matrix, target_row: usize) -> Result<Self> {
        let (d, k, l) = params.validate()?;
        let n = z_fixed.nrows();
        if z_fixed.ncols() != l {
            return Err(Error::shape("fixed Z", (n, l), z_fixed.shape()));
        }
        if target_row >= n {
            return Err(Error::InvalidConfig(format!(
                "target row {target_row} out of range for {n} rows"
            )));
        }
        Ok(LatentParityExperiment {
            params: params.clone(),
            basis: SubspaceBasis::column_span(&params.a, 1e-12),
            target_row,
            zb: z_fixed.matmul_tr(&params.b),
            x_dist: MatrixNormal::iid_rows(Matrix::zeros(n, k), &params.sigma_x)?,
            e_dist: MatrixNormal::iid_rows(Matrix::zeros(n, d), &params.sigma_eps)?,
        })
    }

    pub fn basis(&self) -> &SubspaceBasis {
        &self.basis
    }
}

/// Per-replicate vectors for [`LatentParityExperiment`].
#[derive(Debug, Clone)]
pub struct LatentSample {
    /// `[Y_db]_i`
    pub projected: Vec<f64>,
    pub x: Vec<f64>,
    /// `‖y_i‖²` before projection.
    pub raw_sq_norm: f64,
}

impl MonteCarlo for LatentParityExperiment {
    type Sample = LatentSample;
    type Report = LatentParityReport;

    fn min_reps(&self) -> usize {
        100
    }

    fn replicate(&self, seed: u64, r: usize) -> Result<Self::Sample> {
        let mut rng = rng::stream(seed, r as u64);
        let x = self.x_dist.sample(&mut rng);
        let e = self.e_dist.sample(&mut rng);
        let y = RepresentationMatrix::new(x.matmul_tr(&self.params.a).add(&self.zb).add(&e))?;
        let out = debias_latent(&y, &self.basis)?;
        let y = y.matrix();
        let i = self.target_row;
        Ok(LatentSample {
            projected: out.y_db.row(i).to_vec(),
            x: x.row(i).to_vec(),
            raw_sq_norm: y.row(i).iter().map(|v| v * v).sum(),
        })
    }

    fn summarize(&self, samples: &[Self::Sample]) -> Result<LatentParityReport> {
        self.check_reps(samples.len())?;
        let rows: Vec<Vec<f64>> = samples.iter().map(|s| s.projected.clone()).collect();
        let xs: Vec<Vec<f64>> = samples.iter().map(|s| s.x.clone()).collect();
        let raw_rms =
            libm::sqrt(samples.iter().map(|s| s.raw_sq_norm).sum::<f64>() / samples.len() as f64);
        let cc = cross_cov_scaled(&rows, &xs, raw_rms);
        Ok(LatentParityReport {
            target_row: self.target_row,
            subspace_rank: self.basis.rank(),
            max_abs_z: cc.z.max_abs(),
            cov: cc.cov,
            z: cc.z,
            reps: samples.len(),
        })
    }
}

/// Monte Carlo check that projecting off the true `𝓡(A)` leaves rows
/// conditionally uncorrelated with their protected attributes.
pub fn verify_latent_parity(
    params: &ModelParams,
    z_fixed: &Matrix,
    target_row: usize,
    reps: usize,
    seed: u64,
) -> Result<LatentParityReport> {
    let exp = LatentParityExperiment::new(params, z_fixed, target_row)?;
    run_sequential(&exp, reps, seed)
}
