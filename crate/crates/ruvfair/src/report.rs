//! Report artifacts of the COMPAS experiment.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ruvfair_core::metrics::{HistogramBin, RateSummary, RocCurve, StrataSummary, Summary};

use crate::error::{AppError, AppResult};
use crate::experiment::ExperimentReport;
use crate::io::{write_csv_rows, write_json, write_text};

/// File names written by [`write_artifacts`], relative to the output directory.
pub const ARTIFACTS: [&str; 7] = [
    "report.json",
    "tables.txt",
    "roc_lr_raw.csv",
    "roc_lr_debiased.csv",
    "roc_compas.csv",
    "hist_raw.csv",
    "hist_debiased.csv",
];

fn cell(s: &Summary) -> String {
    match (s.mean, s.se) {
        (Some(m), Some(se)) => format!("{m:.4} ({se:.4})"),
        (Some(m), None) => format!("{m:.4}"),
        _ => "n/a".to_string(),
    }
}

fn strata(s: &StrataSummary) -> [(&'static str, &RateSummary); 3] {
    [
        ("Population", &s.population),
        ("Caucasian", &s.caucasian),
        ("African-American", &s.african_american),
    ]
}

/// Aligned-text rate and accuracy tables, mean with standard error in
/// parentheses.
pub fn render_tables(report: &ExperimentReport) -> String {
    let mut out = String::new();
    let w = 17;
    for qt in &report.tables {
        let t = &qt.table;
        let _ = writeln!(
            out,
            "Threshold at quantile {} of LR scores (COMPAS: decile > {}), {} splits",
            qt.quantile, qt.compas_cutoff, t.splits
        );
        let _ = write!(out, "{:<18}", "");
        for h in [
            "FPR raw",
            "FPR debiased",
            "FPR COMPAS",
            "FNR raw",
            "FNR debiased",
            "FNR COMPAS",
        ] {
            let _ = write!(out, "{h:<w$}");
        }
        out.push('\n');
        let rows = strata(&t.raw)
            .into_iter()
            .zip(strata(&t.debiased))
            .zip(strata(&t.compas));
        for (((name, raw), (_, deb)), (_, cmp)) in rows {
            let _ = write!(out, "{name:<18}");
            for s in [&raw.fpr, &deb.fpr, &cmp.fpr, &raw.fnr, &deb.fnr, &cmp.fnr] {
                let _ = write!(out, "{:<w$}", cell(s));
            }
            out.truncate(out.trim_end().len());
            out.push('\n');
        }
        out.push('\n');
    }

    let _ = writeln!(out, "Proportion of correct predictions");
    let _ = writeln!(
        out,
        "{:<18}{:<w$}{:<w$}COMPAS",
        "Quantile", "LR raw", "LR debiased"
    );
    for qt in &report.tables {
        let t = &qt.table;
        let _ = writeln!(
            out,
            "{:<18}{:<w$}{:<w$}{}",
            qt.quantile,
            cell(&t.raw.population.accuracy),
            cell(&t.debiased.population.accuracy),
            cell(&t.compas.population.accuracy)
        );
    }
    out.push('\n');
    let _ = writeln!(out, "AUC over splits");
    let _ = writeln!(out, "{:<18}{:<w$}{:<w$}COMPAS", "", "LR raw", "LR debiased");
    let _ = writeln!(
        out,
        "{:<18}{:<w$}{:<w$}{}",
        "All",
        cell(&report.auc.lr_raw),
        cell(&report.auc.lr_debiased),
        cell(&report.auc.compas)
    );
    out.push('\n');
    let _ = writeln!(
        out,
        "African-American share of test scores above {}: raw {}, debiased {}",
        report.aa_tail_mass.cutoff,
        cell(&report.aa_tail_mass.raw),
        cell(&report.aa_tail_mass.debiased)
    );
    out
}

fn write_roc(path: &Path, curve: &RocCurve) -> AppResult<()> {
    write_csv_rows(
        path,
        &["fpr", "tpr"],
        curve.points.iter().map(|&(f, t)| vec![f, t]),
    )
}

fn write_hist(path: &Path, bins: &[HistogramBin]) -> AppResult<()> {
    write_csv_rows(
        path,
        &["bin_left", "bin_right", "count"],
        bins.iter().map(|b| vec![b.left, b.right, b.count as f64]),
    )
}

/// Writes every file in [`ARTIFACTS`] into `dir`, creating it if needed.
pub fn write_artifacts(dir: &Path, report: &ExperimentReport) -> AppResult<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    let path = |name: &str| dir.join(name);
    write_json(&path("report.json"), report)?;
    write_text(&path("tables.txt"), &render_tables(report))?;
    write_roc(&path("roc_lr_raw.csv"), &report.roc.lr_raw)?;
    write_roc(&path("roc_lr_debiased.csv"), &report.roc.lr_debiased)?;
    write_roc(&path("roc_compas.csv"), &report.roc.compas)?;
    write_hist(&path("hist_raw.csv"), &report.histograms.raw)?;
    write_hist(&path("hist_debiased.csv"), &report.histograms.debiased)?;
    Ok(ARTIFACTS.iter().map(|n| path(n)).collect())
}
