//! COMPAS recidivism data model: records, the feature/protected split,
//! homogeneous groups and the three-way random split. Reading the CSV file
//! lives in the `ruvfair` crate.

use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::{
    Error, GroupPartition, Matrix, ProtectedMatrix, RepresentationMatrix, Result, Warning,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Race {
    AfricanAmerican,
    Caucasian,
}

impl Race {
    /// Parses the dataset spelling; other races return `None`.
    pub fn from_label(s: &str) -> Option<Race> {
        match s.trim() {
            "African-American" => Some(Race::AfricanAmerican),
            "Caucasian" => Some(Race::Caucasian),
            _ => None,
        }
    }
}

/// Degree of the charge for a recidivism event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ChargeDegree {
    Felony,
    Misdemeanor,
}

impl ChargeDegree {
    /// Reads codes such as `(F3)`, `(M1)` or `(MO3)` by their leading letter.
    /// Anything not starting with `F` or `M` (blank, `(CO3)`) is `None`.
    pub fn from_code(s: &str) -> Option<ChargeDegree> {
        let code = s.trim().trim_start_matches('(');
        match code.chars().next() {
            Some('F') => Some(ChargeDegree::Felony),
            Some('M') => Some(ChargeDegree::Misdemeanor),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CompasRecord {
    pub age: f64,
    pub juv_fel_count: f64,
    pub juv_misd_count: f64,
    pub juv_other_count: f64,
    pub priors_count: f64,
    /// Current charge is a felony (`c_charge_degree == "F"`).
    pub charge_is_felony: bool,
    pub race: Race,
    pub two_year_recid: bool,
    pub compas_decile: u8,
    pub recid_charge_degree: Option<ChargeDegree>,
}

impl CompasRecord {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            self.age,
            self.juv_fel_count,
            self.juv_misd_count,
            self.juv_other_count,
            self.priors_count,
        ];
        if counts.iter().any(|&c| !c.is_finite() || c < 0.0) {
            return Err(Error::ContractViolation(format!(
                "record has a negative or non-finite count: {counts:?}"
            )));
        }
        if !(1..=10).contains(&self.compas_decile) {
            return Err(Error::ContractViolation(format!(
                "decile {} outside 1..=10",
                self.compas_decile
            )));
        }
        Ok(())
    }
}

/// Column names of the representation matrix, in order.
pub const FEATURE_NAMES: [&str; 6] = [
    "age",
    "juv_fel_count",
    "juv_misd_count",
    "juv_other_count",
    "priors_count",
    "charge_is_felony",
];

#[derive(Debug, Clone)]
pub struct Features {
    /// n×6, columns as in [`FEATURE_NAMES`].
    pub y: RepresentationMatrix,
    /// n×1 indicator of African-American race.
    pub x: ProtectedMatrix,
    pub labels: Vec<bool>,
    pub deciles: Vec<u8>,
    pub races: Vec<Race>,
}

pub fn featurize(records: &[CompasRecord]) -> Result<Features> {
    if records.is_empty() {
        return Err(Error::EmptyInput("no COMPAS records"));
    }
    let y = Matrix::from_fn(records.len(), FEATURE_NAMES.len(), |i, j| {
        let r = &records[i];
        match j {
            0 => r.age,
            1 => r.juv_fel_count,
            2 => r.juv_misd_count,
            3 => r.juv_other_count,
            4 => r.priors_count,
            _ => f64::from(u8::from(r.charge_is_felony)),
        }
    });
    let x = Matrix::from_fn(records.len(), 1, |i, _| match records[i].race {
        Race::AfricanAmerican => 1.0,
        Race::Caucasian => 0.0,
    });
    Ok(Features {
        y: RepresentationMatrix::new(y)?,
        x: ProtectedMatrix::new(x)?,
        labels: records.iter().map(|r| r.two_year_recid).collect(),
        deciles: records.iter().map(|r| r.compas_decile).collect(),
        races: records.iter().map(|r| r.race).collect(),
    })
}

/// Homogeneous groups among the `subset` rows: non-recidivists, felony
/// recidivists and misdemeanor recidivists. Recidivists without a usable
/// recidivism charge degree are left out. Empty groups are dropped with a
/// warning; indices refer to positions in `records`.
pub fn build_groups(
    records: &[CompasRecord],
    subset: &[usize],
) -> Result<(GroupPartition, Vec<Warning>)> {
    let mut groups: [Vec<usize>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for &i in subset {
        let r = records.get(i).ok_or_else(|| {
            Error::InvalidPartition(format!(
                "row {i} out of range for {} records",
                records.len()
            ))
        })?;
        let slot = match (r.two_year_recid, r.recid_charge_degree) {
            (false, _) => 0,
            (true, Some(ChargeDegree::Felony)) => 1,
            (true, Some(ChargeDegree::Misdemeanor)) => 2,
            (true, None) => continue,
        };
        groups[slot].push(i);
    }
    let mut warnings = Vec::new();
    let mut kept = Vec::new();
    for (g, members) in groups.into_iter().enumerate() {
        if members.is_empty() {
            warnings.push(Warning::EmptyGroup { group: g });
        } else {
            kept.push(members);
        }
    }
    Ok((GroupPartition::new(kept)?, warnings))
}

/// Fractions of the records assigned to the estimation, train and test splits.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SplitFractions {
    pub estimation: f64,
    pub train: f64,
    pub test: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        SplitFractions {
            estimation: 0.4,
            train: 0.3,
            test: 0.3,
        }
    }
}

impl SplitFractions {
    pub fn validate(&self) -> Result<()> {
        let parts = [self.estimation, self.train, self.test];
        if parts.iter().any(|&f| !f.is_finite() || f <= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "split fractions must all be positive, got {parts:?}"
            )));
        }
        let sum: f64 = parts.iter().sum();
        if libm::fabs(sum - 1.0) > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "split fractions must sum to 1, got {sum}"
            )));
        }
        Ok(())
    }
}

/// Row indices of the three splits, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Splits {
    pub estimation: Vec<usize>,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Uniform random three-way split of `0..n`. The first two sizes are
/// `⌊f·n⌋`; the test split takes the remainder.
pub fn split_records<R: Rng + ?Sized>(
    n: usize,
    fractions: &SplitFractions,
    rng: &mut R,
) -> Result<Splits> {
    fractions.validate()?;
    // the epsilon keeps exact products such as 0.3·10 from flooring down
    let size = |f: f64| libm::floor(f * n as f64 + 1e-9) as usize;
    let n_est = size(fractions.estimation).min(n);
    let n_train = size(fractions.train).min(n - n_est);
    if n_est == 0 || n_train == 0 || n_est + n_train >= n {
        return Err(Error::InvalidConfig(format!(
            "{n} records cannot fill three non-empty splits with {fractions:?}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut estimation = order[..n_est].to_vec();
    let mut train = order[n_est..n_est + n_train].to_vec();
    let mut test = order[n_est + n_train..].to_vec();
    estimation.sort_unstable();
    train.sort_unstable();
    test.sort_unstable();
    Ok(Splits {
        estimation,
        train,
        test,
    })
}

/// [`split_records`] with a generator seeded from `seed`.
pub fn split_records_seeded(n: usize, fractions: &SplitFractions, seed: u64) -> Result<Splits> {
    split_records(n, fractions, &mut crate::rng::stream(seed, 0))
}
