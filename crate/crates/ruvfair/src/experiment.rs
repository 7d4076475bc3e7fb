//! The COMPAS experiment: repeated estimation/train/test splits comparing a
//! logistic scorer on raw features with one on debiased features and with
//! the COMPAS decile score.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use ruvfair_core::compas::{
    build_groups, featurize, split_records, CompasRecord, Features, Race, SplitFractions, Splits,
};
use ruvfair_core::metrics::{
    aggregate_splits, fit_logistic, group_rates, histogram, predict_prob, quantile_threshold, roc,
    summarize, HistogramBin, LogisticModel, LogisticOptions, RateTable, RocCurve, SplitRates,
    Summary,
};
use ruvfair_core::rng::stream;
use ruvfair_core::{debias, estimate_a, Matrix, ProtectedMatrix, RepresentationMatrix, Warning};
use serde::{Deserialize, Serialize};

use crate::compas_data::{load_compas, FilterCounts};
use crate::error::{AppError, AppResult};
use crate::io::read_json;

/// Which scores the quantile threshold is taken from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdSource {
    #[default]
    Test,
    Train,
    Pooled,
}

fn default_n_splits() -> usize {
    30
}

fn default_quantiles() -> Vec<f64> {
    vec![0.5, 0.8]
}

fn default_bins() -> usize {
    20
}

fn default_tail_cutoff() -> f64 {
    0.8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Relative paths are resolved against the config file's directory.
    pub data_path: PathBuf,
    #[serde(default)]
    pub split_fractions: SplitFractions,
    #[serde(default = "default_n_splits")]
    pub n_splits: usize,
    pub seed: u64,
    #[serde(default = "default_quantiles")]
    pub quantiles: Vec<f64>,
    #[serde(default)]
    pub threshold_source: ThresholdSource,
    #[serde(default)]
    pub logistic: LogisticOptions,
    /// Split whose ROC curves and histograms are reported.
    #[serde(default)]
    pub designated_split: usize,
    #[serde(default = "default_bins")]
    pub histogram_bins: usize,
    /// Score above which African-American test rows count as right-tail mass.
    #[serde(default = "default_tail_cutoff")]
    pub tail_cutoff: f64,
}

impl ExperimentConfig {
    /// Reads a config and resolves `data_path` against its directory.
    pub fn from_file(path: &Path) -> AppResult<(ExperimentConfig, PathBuf)> {
        let cfg: ExperimentConfig = read_json(path)?;
        cfg.validate()?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        let data = base.join(&cfg.data_path);
        Ok((cfg, data))
    }

    pub fn validate(&self) -> AppResult<()> {
        self.split_fractions.validate()?;
        if self.n_splits == 0 {
            return Err(AppError::Config("n_splits must be at least 1".into()));
        }
        if self.designated_split >= self.n_splits {
            return Err(AppError::Config(format!(
                "designated_split {} out of range for {} splits",
                self.designated_split, self.n_splits
            )));
        }
        if self.quantiles.is_empty() || self.quantiles.iter().any(|q| !(*q > 0.0 && *q < 1.0)) {
            return Err(AppError::Config(format!(
                "quantiles must lie in (0, 1), got {:?}",
                self.quantiles
            )));
        }
        if self.histogram_bins == 0 {
            return Err(AppError::Config("histogram_bins must be positive".into()));
        }
        Ok(())
    }
}

/// COMPAS deciles above this value are flagged at quantile `q`: 5 (Medium or
/// High) at the median, 8 (High) at the 80th percentile.
pub fn compas_cutoff(q: f64) -> u8 {
    (10.0 * q).round() as u8
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantileSplit {
    pub quantile: f64,
    pub raw_threshold: f64,
    pub debiased_threshold: f64,
    pub compas_cutoff: u8,
    pub rates: SplitRates,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AucTriple {
    pub lr_raw: f64,
    pub lr_debiased: f64,
    pub compas: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitResult {
    pub index: usize,
    pub estimation_size: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub group_sizes: Vec<usize>,
    pub warnings: Vec<Warning>,
    /// d×1 loading of race fitted on the estimation split.
    pub a_hat: Matrix,
    pub raw_model: LogisticModel,
    pub debiased_model: LogisticModel,
    pub quantiles: Vec<QuantileSplit>,
    pub auc: AucTriple,
    /// Share of African-American test rows scoring above the tail cutoff.
    pub aa_tail_mass_raw: Option<f64>,
    pub aa_tail_mass_debiased: Option<f64>,
}

/// Test-set scores of one split, kept for the designated split's curves.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitScores {
    pub test: Vec<usize>,
    pub raw: Vec<f64>,
    pub debiased: Vec<f64>,
}

fn tail_mass(scores: &[f64], races: &[Race], cutoff: f64) -> Option<f64> {
    let aa: Vec<f64> = scores
        .iter()
        .zip(races)
        .filter(|(_, r)| **r == Race::AfricanAmerican)
        .map(|(s, _)| *s)
        .collect();
    (!aa.is_empty()).then(|| aa.iter().filter(|&&s| s > cutoff).count() as f64 / aa.len() as f64)
}

/// Runs one split. `Â` sees only estimation rows and each scorer only train
/// rows; test rows enter through scoring and metrics alone.
pub fn run_split(
    records: &[CompasRecord],
    features: &Features,
    splits: &Splits,
    cfg: &ExperimentConfig,
    index: usize,
) -> Result<(SplitResult, SplitScores), ruvfair_core::Error> {
    let (partition, warnings) = build_groups(records, &splits.estimation)?;
    let fit = estimate_a(&features.y, &features.x, &partition)?;
    let mut warnings = warnings;
    warnings.extend(fit.warnings.iter().cloned());

    let y = features.y.matrix();
    let x = features.x.matrix();
    let rows = |idx: &[usize]| -> Result<(RepresentationMatrix, Matrix), ruvfair_core::Error> {
        let yr = RepresentationMatrix::new(y.select_rows(idx))?;
        let xr = ProtectedMatrix::new(x.select_rows(idx))?;
        let db = debias(&yr, &xr, &fit)?.y_db;
        Ok((yr, db))
    };
    let (train_raw, train_db) = rows(&splits.train)?;
    let (test_raw, test_db) = rows(&splits.test)?;

    let train_labels: Vec<bool> = splits.train.iter().map(|&i| features.labels[i]).collect();
    let test_labels: Vec<bool> = splits.test.iter().map(|&i| features.labels[i]).collect();
    let test_races: Vec<Race> = splits.test.iter().map(|&i| features.races[i]).collect();

    let raw_model = fit_logistic(train_raw.matrix(), &train_labels, &cfg.logistic)?;
    let debiased_model = fit_logistic(&train_db, &train_labels, &cfg.logistic)?;
    for (name, m) in [("raw", &raw_model), ("debiased", &debiased_model)] {
        if !m.converged {
            log::warn!("split {index}: {name} logistic fit stopped before converging");
        }
    }

    let raw = predict_prob(&raw_model, test_raw.matrix())?;
    let deb = predict_prob(&debiased_model, &test_db)?;
    let compas: Vec<f64> = splits
        .test
        .iter()
        .map(|&i| f64::from(features.deciles[i]))
        .collect();

    let reference = |model: &LogisticModel, train: &Matrix, test: &[f64]| {
        let train_scores = || predict_prob(model, train);
        match cfg.threshold_source {
            ThresholdSource::Test => Ok(test.to_vec()),
            ThresholdSource::Train => train_scores(),
            ThresholdSource::Pooled => {
                let mut all = train_scores()?;
                all.extend_from_slice(test);
                Ok(all)
            }
        }
    };
    let raw_ref: Vec<f64> = reference(&raw_model, train_raw.matrix(), &raw)?;
    let deb_ref: Vec<f64> = reference(&debiased_model, &train_db, &deb)?;

    let mut quantiles = Vec::with_capacity(cfg.quantiles.len());
    for &q in &cfg.quantiles {
        let raw_threshold = quantile_threshold(&raw_ref, q)?;
        let debiased_threshold = quantile_threshold(&deb_ref, q)?;
        let cutoff = compas_cutoff(q);
        quantiles.push(QuantileSplit {
            quantile: q,
            raw_threshold,
            debiased_threshold,
            compas_cutoff: cutoff,
            rates: SplitRates {
                raw: group_rates(&raw, &test_labels, &test_races, raw_threshold)?,
                debiased: group_rates(&deb, &test_labels, &test_races, debiased_threshold)?,
                compas: group_rates(&compas, &test_labels, &test_races, f64::from(cutoff))?,
            },
        });
    }

    let auc = AucTriple {
        lr_raw: roc(&raw, &test_labels)?.auc,
        lr_debiased: roc(&deb, &test_labels)?.auc,
        compas: roc(&compas, &test_labels)?.auc,
    };

    let result = SplitResult {
        index,
        estimation_size: splits.estimation.len(),
        train_size: splits.train.len(),
        test_size: splits.test.len(),
        group_sizes: partition.sizes(),
        warnings,
        a_hat: fit.a_hat.clone(),
        raw_model,
        debiased_model,
        quantiles,
        auc,
        aa_tail_mass_raw: tail_mass(&raw, &test_races, cfg.tail_cutoff),
        aa_tail_mass_debiased: tail_mass(&deb, &test_races, cfg.tail_cutoff),
    };
    let scores = SplitScores {
        test: splits.test.clone(),
        raw,
        debiased: deb,
    };
    Ok((result, scores))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantileTable {
    pub quantile: f64,
    pub compas_cutoff: u8,
    pub table: RateTable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RocSet {
    pub split: usize,
    pub lr_raw: RocCurve,
    pub lr_debiased: RocCurve,
    pub compas: RocCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramSet {
    pub split: usize,
    /// Scores of African-American test rows.
    pub raw: Vec<HistogramBin>,
    pub debiased: Vec<HistogramBin>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailMass {
    pub cutoff: f64,
    pub raw: Summary,
    pub debiased: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub records: usize,
    pub filter_counts: FilterCounts,
    pub tables: Vec<QuantileTable>,
    pub auc: AucSummary,
    pub roc: RocSet,
    pub histograms: HistogramSet,
    pub aa_tail_mass: TailMass,
    pub splits: Vec<SplitResult>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AucSummary {
    pub lr_raw: Summary,
    pub lr_debiased: Summary,
    pub compas: Summary,
}

/// Splits are seeded by `(seed, index)`, so each is reproducible on its own
/// and the result does not depend on scheduling.
pub fn make_splits(n: usize, cfg: &ExperimentConfig, index: usize) -> AppResult<Splits> {
    split_records(n, &cfg.split_fractions, &mut stream(cfg.seed, index as u64)).map_err(|source| {
        AppError::Split {
            split: index,
            source,
        }
    })
}

pub fn run_experiment(
    cfg: &ExperimentConfig,
    records: &[CompasRecord],
    filter_counts: FilterCounts,
) -> AppResult<ExperimentReport> {
    cfg.validate()?;
    let features = featurize(records)?;
    let n = records.len();
    let outcomes = (0..cfg.n_splits)
        .into_par_iter()
        .map(|s| {
            let splits = make_splits(n, cfg, s)?;
            run_split(records, &features, &splits, cfg, s)
                .map_err(|source| AppError::Split { split: s, source })
        })
        .collect::<AppResult<Vec<_>>>()?;

    let (splits, mut scores): (Vec<SplitResult>, Vec<SplitScores>) = outcomes.into_iter().unzip();
    let designated = scores.swap_remove(cfg.designated_split);
    drop(scores);

    let tables = cfg
        .quantiles
        .iter()
        .enumerate()
        .map(|(qi, &q)| {
            let per_split: Vec<SplitRates> = splits.iter().map(|s| s.quantiles[qi].rates).collect();
            Ok(QuantileTable {
                quantile: q,
                compas_cutoff: compas_cutoff(q),
                table: aggregate_splits(&per_split)?,
            })
        })
        .collect::<AppResult<Vec<_>>>()?;

    let d = cfg.designated_split;
    let labels: Vec<bool> = designated
        .test
        .iter()
        .map(|&i| features.labels[i])
        .collect();
    let races: Vec<Race> = designated.test.iter().map(|&i| features.races[i]).collect();
    let deciles: Vec<f64> = designated
        .test
        .iter()
        .map(|&i| f64::from(features.deciles[i]))
        .collect();
    let roc_set = RocSet {
        split: d,
        lr_raw: roc(&designated.raw, &labels)?,
        lr_debiased: roc(&designated.debiased, &labels)?,
        compas: roc(&deciles, &labels)?,
    };
    let aa = |scores: &[f64]| -> Vec<f64> {
        scores
            .iter()
            .zip(&races)
            .filter(|(_, r)| **r == Race::AfricanAmerican)
            .map(|(s, _)| *s)
            .collect()
    };
    let histograms = HistogramSet {
        split: d,
        raw: histogram(&aa(&designated.raw), cfg.histogram_bins, 0.0, 1.0)?,
        debiased: histogram(&aa(&designated.debiased), cfg.histogram_bins, 0.0, 1.0)?,
    };

    Ok(ExperimentReport {
        config: cfg.clone(),
        records: n,
        filter_counts,
        tables,
        auc: AucSummary {
            lr_raw: summarize(splits.iter().map(|s| Some(s.auc.lr_raw))),
            lr_debiased: summarize(splits.iter().map(|s| Some(s.auc.lr_debiased))),
            compas: summarize(splits.iter().map(|s| Some(s.auc.compas))),
        },
        roc: roc_set,
        histograms,
        aa_tail_mass: TailMass {
            cutoff: cfg.tail_cutoff,
            raw: summarize(splits.iter().map(|s| s.aa_tail_mass_raw)),
            debiased: summarize(splits.iter().map(|s| s.aa_tail_mass_debiased)),
        },
        splits,
    })
}

/// Loads the data named by the config file and runs the experiment.
pub fn run_from_config_file(path: &Path) -> AppResult<ExperimentReport> {
    let (cfg, data) = ExperimentConfig::from_file(path)?;
    let loaded = load_compas(&data)?;
    run_experiment(&cfg, &loaded.records, loaded.counts)
}
