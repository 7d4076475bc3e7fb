//! Synthetic verification runs driven by a JSON config.

use std::path::Path;

use rayon::prelude::*;
use ruvfair_core::latent::principal_angle;
use ruvfair_core::synthetic::{
    generate, homogenize, LatentParityExperiment, LatentParityReport, MonteCarlo, PartitionSpec,
    Prop1Experiment, Prop1Report, Prop2Experiment, Prop2Report, Scenario,
};
use ruvfair_core::{
    estimate_subspace, GroupPartition, Matrix, ModelParams, RepresentationMatrix, SubspaceBasis,
};
use serde::{Deserialize, Serialize};

use crate::error::{AppError, AppResult};
use crate::io::read_json;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Prop1,
    Prop2,
    Latent,
}

fn default_z_threshold() -> f64 {
    4.0
}

fn default_cov_rel_tol() -> f64 {
    0.15
}

fn default_angle_tol() -> f64 {
    1e-8
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub n: usize,
    pub params: ModelParams,
    /// Explicit groups; otherwise `n_groups` contiguous blocks of equal size.
    #[serde(default)]
    pub groups: Option<Vec<Vec<usize>>>,
    #[serde(default)]
    pub n_groups: Option<usize>,
    /// Replace each group's permissible rows by their group mean.
    #[serde(default)]
    pub homogeneous: bool,
    pub reps: usize,
    pub seed: u64,
    #[serde(default)]
    pub target_row: usize,
    /// Scenarios run by the `prop2` check; all three by default.
    #[serde(default)]
    pub scenarios: Option<Vec<Scenario>>,
    #[serde(default = "default_z_threshold")]
    pub z_threshold: f64,
    #[serde(default = "default_cov_rel_tol")]
    pub cov_rel_tol: f64,
    #[serde(default = "default_angle_tol")]
    pub angle_tol: f64,
}

impl VerifyConfig {
    pub fn from_file(path: &Path) -> AppResult<Self> {
        let cfg: VerifyConfig = read_json(path)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> AppResult<()> {
        self.params.validate()?;
        if self.groups.is_some() == self.n_groups.is_some() {
            return Err(AppError::Config(
                "give exactly one of `groups` and `n_groups`".into(),
            ));
        }
        if self.target_row >= self.n {
            return Err(AppError::Config(format!(
                "target_row {} out of range for n = {}",
                self.target_row, self.n
            )));
        }
        self.partition()?;
        Ok(())
    }

    pub fn partition(&self) -> AppResult<GroupPartition> {
        let groups = match (&self.groups, self.n_groups) {
            (Some(g), _) => g.clone(),
            (None, Some(g)) if g >= 1 && g <= self.n => {
                let bounds: Vec<usize> = (0..=g).map(|i| i * self.n / g).collect();
                bounds.windows(2).map(|w| (w[0]..w[1]).collect()).collect()
            }
            _ => {
                return Err(AppError::Config(format!(
                    "n_groups must be between 1 and n = {}",
                    self.n
                )))
            }
        };
        let p = GroupPartition::new(groups)?;
        p.validate_for(self.n)?;
        Ok(p)
    }

    /// The fixed `X` and `Z` conditioned on, drawn once from the model.
    pub fn fixed_design(&self) -> AppResult<(Matrix, Matrix)> {
        let partition = self.partition()?;
        let spec = PartitionSpec {
            partition: partition.clone(),
            group_z: None,
        };
        let data = generate(&self.params, self.n, &spec, self.seed)?;
        let z = if self.homogeneous {
            homogenize(&data.z, &partition)?
        } else {
            data.z
        };
        Ok((data.x, z))
    }

    /// Seed for the replicates, distinct from the one for the fixed design.
    pub fn mc_seed(&self) -> u64 {
        self.seed.wrapping_add(1)
    }
}

/// Evaluates replicates `0..reps` on the rayon pool. Samples are collected
/// in replicate order, so the report equals the sequential one.
pub fn run_parallel<M: MonteCarlo>(mc: &M, reps: usize, seed: u64) -> AppResult<M::Report> {
    mc.check_reps(reps)?;
    let samples = (0..reps)
        .into_par_iter()
        .map(|r| mc.replicate(seed, r))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(mc.summarize(&samples)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct Prop1Outcome {
    pub passed: bool,
    pub report: Prop1Report,
}

#[derive(Debug, Clone, Serialize)]
pub struct Prop2Outcome {
    pub passed: bool,
    pub scenarios: Vec<Prop2Report>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LatentOutcome {
    pub passed: bool,
    pub parity: LatentParityReport,
    /// Principal angle between the true span of `A` and the subspace
    /// estimated from noiseless, exactly homogeneous data.
    pub noiseless_angle: f64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum VerifyOutcome {
    Prop1(Prop1Outcome),
    Prop2(Prop2Outcome),
    Latent(LatentOutcome),
}

impl VerifyOutcome {
    pub fn passed(&self) -> bool {
        match self {
            VerifyOutcome::Prop1(o) => o.passed,
            VerifyOutcome::Prop2(o) => o.passed,
            VerifyOutcome::Latent(o) => o.passed,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub passed: bool,
    pub outcome: VerifyOutcome,
}

pub fn run_prop1(cfg: &VerifyConfig) -> AppResult<Prop1Outcome> {
    let (x, z) = cfg.fixed_design()?;
    let exp = Prop1Experiment::new(&cfg.params, &x, &z, &cfg.partition()?)?;
    let report = run_parallel(&exp, cfg.reps, cfg.mc_seed())?;
    let passed = report.max_abs_z <= cfg.z_threshold && report.col_cov_rel_err <= cfg.cov_rel_tol;
    Ok(Prop1Outcome { passed, report })
}

pub fn run_prop2(cfg: &VerifyConfig) -> AppResult<Prop2Outcome> {
    let (_, z) = cfg.fixed_design()?;
    let partition = cfg.partition()?;
    let scenarios = cfg
        .scenarios
        .clone()
        .unwrap_or_else(|| vec![Scenario::General, Scenario::OracleA, Scenario::HomogeneousZ]);
    let mut reports = Vec::with_capacity(scenarios.len());
    let mut passed = true;
    for scenario in scenarios {
        let exp = Prop2Experiment::new(&cfg.params, &z, &partition, cfg.target_row, scenario)?;
        let report = run_parallel(&exp, cfg.reps, cfg.mc_seed())?;
        passed &= report.max_abs_z <= cfg.z_threshold;
        if scenario == Scenario::General {
            passed &= report.bias_route_z.max_abs() <= cfg.z_threshold;
        }
        reports.push(report);
    }
    Ok(Prop2Outcome {
        passed,
        scenarios: reports,
    })
}

pub fn run_latent(cfg: &VerifyConfig) -> AppResult<LatentOutcome> {
    let (_, z) = cfg.fixed_design()?;
    let exp = LatentParityExperiment::new(&cfg.params, &z, cfg.target_row)?;
    let parity = run_parallel(&exp, cfg.reps, cfg.mc_seed())?;
    let noiseless_angle = noiseless_recovery_angle(cfg)?;
    let passed = parity.max_abs_z <= cfg.z_threshold && noiseless_angle <= cfg.angle_tol;
    Ok(LatentOutcome {
        passed,
        parity,
        noiseless_angle,
    })
}

/// Subspace recovery with `Σ_ε = 0` and homogeneous groups, where the
/// centered data lie exactly in the span of `A`.
pub fn noiseless_recovery_angle(cfg: &VerifyConfig) -> AppResult<f64> {
    let (d, k, _) = cfg.params.validate()?;
    let params = ModelParams {
        sigma_eps: Matrix::zeros(d, d),
        ..cfg.params.clone()
    };
    let partition = cfg.partition()?;
    let spec = PartitionSpec {
        partition: partition.clone(),
        group_z: None,
    };
    let data = generate(&params, cfg.n, &spec, cfg.seed)?;
    let z = homogenize(&data.z, &partition)?;
    let y = data.x.matmul_tr(&params.a).add(&z.matmul_tr(&params.b));
    let truth = SubspaceBasis::column_span(&params.a, 1e-12);
    if truth.rank() != k {
        return Err(AppError::Config(format!(
            "A has rank {} but k = {k}; the noiseless check needs full column rank",
            truth.rank()
        )));
    }
    let est = estimate_subspace(&RepresentationMatrix::new(y)?, &partition, k)?;
    Ok(principal_angle(&est.basis, &truth)?)
}

pub fn run_check(cfg: &VerifyConfig, check: Check) -> AppResult<VerifyReport> {
    let outcome = match check {
        Check::Prop1 => VerifyOutcome::Prop1(run_prop1(cfg)?),
        Check::Prop2 => VerifyOutcome::Prop2(run_prop2(cfg)?),
        Check::Latent => VerifyOutcome::Latent(run_latent(cfg)?),
    };
    Ok(VerifyReport {
        config: cfg.clone(),
        passed: outcome.passed(),
        outcome,
    })
}
