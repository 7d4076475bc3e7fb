//! Matrix CSV and group JSON files.
//!
//! Matrices are comma-separated with one header row. Values are written with
//! Rust's shortest round-trip formatting, so a write/read cycle is lossless
//! and identical inputs give identical bytes.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ruvfair_core::{GroupPartition, Matrix};
use serde::Serialize;

use crate::error::{AppError, AppResult};

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledMatrix {
    pub header: Vec<String>,
    pub matrix: Matrix,
}

pub fn read_matrix_csv(path: &Path) -> AppResult<LabeledMatrix> {
    let file = File::open(path).map_err(|e| AppError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(file);
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| AppError::parse(path, e))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(AppError::parse(path, "missing header row"));
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| AppError::parse(path, e))?;
        let line = i + 2;
        if record.len() != header.len() {
            return Err(AppError::parse(
                path,
                format!(
                    "line {line}: {} fields, header has {}",
                    record.len(),
                    header.len()
                ),
            ));
        }
        let row = record
            .iter()
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| AppError::parse(path, format!("line {line}: not a number: {v:?}")))
            })
            .collect::<AppResult<Vec<f64>>>()?;
        rows.push(row);
    }
    let matrix = if rows.is_empty() {
        Matrix::zeros(0, header.len())
    } else {
        Matrix::from_rows(&rows)?
    };
    Ok(LabeledMatrix { header, matrix })
}

/// Header `c0, c1, …` for matrices without column names.
pub fn default_header(cols: usize) -> Vec<String> {
    (0..cols).map(|j| format!("c{j}")).collect()
}

pub fn write_matrix_csv(path: &Path, header: &[String], m: &Matrix) -> AppResult<()> {
    if header.len() != m.ncols() {
        return Err(AppError::Config(format!(
            "header has {} names for {} columns",
            header.len(),
            m.ncols()
        )));
    }
    write_csv_rows(path, header, m.rows_iter().map(|r| r.to_vec()))
}

/// Writes rows of numbers under a header.
pub fn write_csv_rows<I>(path: &Path, header: &[impl AsRef<str>], rows: I) -> AppResult<()>
where
    I: IntoIterator<Item = Vec<f64>>,
{
    let file = File::create(path).map_err(|e| AppError::io(path, e))?;
    let mut writer = csv::Writer::from_writer(BufWriter::new(file));
    let io = |e: csv::Error| AppError::parse(path, e);
    writer
        .write_record(header.iter().map(AsRef::as_ref))
        .map_err(io)?;
    for row in rows {
        writer
            .write_record(row.iter().map(|v| v.to_string()))
            .map_err(io)?;
    }
    writer.flush().map_err(|e| AppError::io(path, e))?;
    Ok(())
}

/// Reads a JSON array of index arrays.
pub fn read_groups_json(path: &Path) -> AppResult<GroupPartition> {
    let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    let groups: Vec<Vec<usize>> =
        serde_json::from_str(&text).map_err(|e| AppError::parse(path, e))?;
    Ok(GroupPartition::new(groups)?)
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> AppResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| AppError::parse(path, e))
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> AppResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| AppError::parse(path, e))?;
    text.push('\n');
    write_text(path, &text)
}

pub fn write_text(path: &Path, text: &str) -> AppResult<()> {
    let mut file = File::create(path).map_err(|e| AppError::io(path, e))?;
    file.write_all(text.as_bytes())
        .map_err(|e| AppError::io(path, e))
}
