//! Reader for the ProPublica `compas-scores-two-years.csv` file.
//!
//! Rows are kept when race is African-American or Caucasian, the screening
//! happened within 30 days of arrest, `is_recid != -1`, the current charge
//! degree is not `O`, and a decile score is present. The file repeats the
//! `decile_score` and `priors_count` columns; the first occurrence is used.

use std::fs::File;
use std::path::{Path, PathBuf};

use ruvfair_core::compas::{ChargeDegree, CompasRecord, Race};
use serde::Serialize;

use crate::error::{AppError, AppResult};

pub const REQUIRED_COLUMNS: [&str; 12] = [
    "age",
    "juv_fel_count",
    "juv_misd_count",
    "juv_other_count",
    "priors_count",
    "c_charge_degree",
    "r_charge_degree",
    "race",
    "two_year_recid",
    "is_recid",
    "days_b_screening_arrest",
    "decile_score",
];

/// Rows dropped by each filter, applied in the order of the fields.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FilterCounts {
    pub rows: usize,
    pub dropped_race: usize,
    pub dropped_screening_window: usize,
    pub dropped_is_recid: usize,
    pub dropped_charge_degree: usize,
    pub dropped_missing_decile: usize,
    pub skipped_unparseable: usize,
    pub kept: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkippedRow {
    /// 1-based line number in the file, header included.
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct LoadedCompas {
    pub path: PathBuf,
    pub records: Vec<CompasRecord>,
    pub counts: FilterCounts,
    pub skipped: Vec<SkippedRow>,
}

struct Columns([usize; 12]);

impl Columns {
    fn locate(path: &Path, header: &csv::StringRecord) -> AppResult<Columns> {
        let mut idx = [0; 12];
        let mut missing = Vec::new();
        for (slot, name) in idx.iter_mut().zip(REQUIRED_COLUMNS) {
            match header.iter().position(|h| h.trim() == name) {
                Some(i) => *slot = i,
                None => missing.push(name.to_string()),
            }
        }
        if missing.is_empty() {
            Ok(Columns(idx))
        } else {
            Err(AppError::MissingColumns {
                path: path.to_path_buf(),
                missing,
            })
        }
    }

    fn get<'r>(&self, record: &'r csv::StringRecord, name: &str) -> &'r str {
        let pos = REQUIRED_COLUMNS.iter().position(|c| *c == name).unwrap();
        record.get(self.0[pos]).unwrap_or("").trim()
    }
}

enum RowOutcome {
    Keep(CompasRecord),
    Drop(fn(&mut FilterCounts) -> &mut usize),
}

fn number(field: &str, name: &str) -> Result<f64, String> {
    field
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format!("{name} is not a number: {field:?}"))
}

fn flag(field: &str, name: &str) -> Result<bool, String> {
    match number(field, name)? {
        0.0 => Ok(false),
        1.0 => Ok(true),
        v => Err(format!("{name} is not 0 or 1: {v}")),
    }
}

fn parse_row(cols: &Columns, r: &csv::StringRecord) -> Result<RowOutcome, String> {
    let race = match Race::from_label(cols.get(r, "race")) {
        Some(race) => race,
        None => return Ok(RowOutcome::Drop(|c| &mut c.dropped_race)),
    };
    let screening = cols.get(r, "days_b_screening_arrest");
    if screening.is_empty() {
        return Ok(RowOutcome::Drop(|c| &mut c.dropped_screening_window));
    }
    let days = number(screening, "days_b_screening_arrest")?;
    if !(-30.0..=30.0).contains(&days) {
        return Ok(RowOutcome::Drop(|c| &mut c.dropped_screening_window));
    }
    if number(cols.get(r, "is_recid"), "is_recid")? == -1.0 {
        return Ok(RowOutcome::Drop(|c| &mut c.dropped_is_recid));
    }
    let charge = cols.get(r, "c_charge_degree");
    if charge == "O" {
        return Ok(RowOutcome::Drop(|c| &mut c.dropped_charge_degree));
    }
    let decile = cols.get(r, "decile_score");
    if decile.is_empty() {
        return Ok(RowOutcome::Drop(|c| &mut c.dropped_missing_decile));
    }
    let decile = number(decile, "decile_score")?;
    if decile.fract() != 0.0 || !(1.0..=10.0).contains(&decile) {
        return Err(format!("decile_score outside 1..=10: {decile}"));
    }
    let two_year_recid = flag(cols.get(r, "two_year_recid"), "two_year_recid")?;
    let record = CompasRecord {
        age: number(cols.get(r, "age"), "age")?,
        juv_fel_count: number(cols.get(r, "juv_fel_count"), "juv_fel_count")?,
        juv_misd_count: number(cols.get(r, "juv_misd_count"), "juv_misd_count")?,
        juv_other_count: number(cols.get(r, "juv_other_count"), "juv_other_count")?,
        priors_count: number(cols.get(r, "priors_count"), "priors_count")?,
        charge_is_felony: charge == "F",
        race,
        two_year_recid,
        compas_decile: decile as u8,
        recid_charge_degree: ChargeDegree::from_code(cols.get(r, "r_charge_degree")),
    };
    record.validate().map_err(|e| e.to_string())?;
    Ok(RowOutcome::Keep(record))
}

pub fn load_compas(path: &Path) -> AppResult<LoadedCompas> {
    let file = File::open(path).map_err(|e| AppError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(file);
    let header = reader
        .headers()
        .map_err(|e| AppError::parse(path, e))?
        .clone();
    let cols = Columns::locate(path, &header)?;

    let mut counts = FilterCounts::default();
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let line = i + 2;
        counts.rows += 1;
        let outcome = row
            .map_err(|e| e.to_string())
            .and_then(|r| parse_row(&cols, &r));
        match outcome {
            Ok(RowOutcome::Keep(rec)) => records.push(rec),
            Ok(RowOutcome::Drop(slot)) => *slot(&mut counts) += 1,
            Err(reason) => {
                log::warn!("{}: skipping line {line}: {reason}", path.display());
                counts.skipped_unparseable += 1;
                skipped.push(SkippedRow { line, reason });
            }
        }
    }
    counts.kept = records.len();
    log::info!(
        "{}: kept {} of {} rows ({:?})",
        path.display(),
        counts.kept,
        counts.rows,
        counts
    );
    Ok(LoadedCompas {
        path: path.to_path_buf(),
        records,
        counts,
        skipped,
    })
}
