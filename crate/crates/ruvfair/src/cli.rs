//! Command-line entry point.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use ruvfair_core::{
    debias, debias_latent, estimate_a, estimate_subspace, Adjustment, ProtectedMatrix,
    RepresentationMatrix, Warning,
};
use serde::Serialize;

use crate::compas_data::load_compas;
use crate::error::{AppError, AppResult};
use crate::experiment::{run_experiment, ExperimentConfig};
use crate::io::{read_groups_json, read_matrix_csv, write_json, write_matrix_csv};
use crate::report::write_artifacts;
use crate::verify::{run_check, Check, VerifyConfig};

#[derive(Debug, Parser)]
#[command(
    name = "ruvfair",
    version,
    about = "Debias representations against protected attributes"
)]
struct Cli {
    /// More log output on stderr (repeat for more).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Observed,
    Latent,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Monte Carlo check of the estimators on synthetic data.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        check: Check,
        /// Report path; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Remove the protected-attribute component from a matrix.
    Debias {
        #[arg(long)]
        y: PathBuf,
        /// Protected attributes; required for the observed method.
        #[arg(long)]
        x: Option<PathBuf>,
        #[arg(long)]
        groups: PathBuf,
        #[arg(long, value_enum)]
        method: MethodArg,
        /// Subspace dimension for the latent method.
        #[arg(long)]
        rank: Option<usize>,
        /// Debiased matrix; fit diagnostics go to `<stem>.fit.json` beside it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the COMPAS experiment and write its report files.
    Compas {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .try_init();
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    init_logging(cli.verbose);
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> AppResult<i32> {
    match command {
        Command::Verify {
            config,
            check,
            out,
            seed,
        } => verify(&config, check, out.as_deref(), seed),
        Command::Debias {
            y,
            x,
            groups,
            method,
            rank,
            out,
        } => debias_cmd(&y, x.as_deref(), &groups, method, rank, &out),
        Command::Compas { config, out, seed } => compas(&config, &out, seed),
    }
}

fn verify(config: &Path, check: Check, out: Option<&Path>, seed: Option<u64>) -> AppResult<i32> {
    let mut cfg = VerifyConfig::from_file(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let report = run_check(&cfg, check)?;
    match out {
        Some(path) => write_json(path, &report)?,
        None => {
            let text = serde_json::to_string_pretty(&report)
                .map_err(|e| AppError::parse("<stdout>", e))?;
            println!("{text}");
        }
    }
    if report.passed {
        log::info!("{check:?}: all thresholds passed");
        Ok(0)
    } else {
        eprintln!("{check:?}: a threshold was exceeded");
        Ok(1)
    }
}

#[derive(Serialize)]
struct DebiasDiagnostics<'a> {
    rows: usize,
    cols: usize,
    adjustment: &'a Adjustment,
    warnings: &'a [Warning],
    #[serde(skip_serializing_if = "Option::is_none")]
    singular_values: Option<&'a [f64]>,
}

fn fit_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    out.with_file_name(format!("{stem}.fit.json"))
}

fn debias_cmd(
    y_path: &Path,
    x_path: Option<&Path>,
    groups: &Path,
    method: MethodArg,
    rank: Option<usize>,
    out: &Path,
) -> AppResult<i32> {
    let y_file = read_matrix_csv(y_path)?;
    let partition = read_groups_json(groups)?;
    partition.validate_for(y_file.matrix.nrows())?;
    let y = RepresentationMatrix::new(y_file.matrix)?;

    let (output, warnings, singular_values) = match method {
        MethodArg::Observed => {
            let x_path = x_path.ok_or_else(|| {
                AppError::Config("--x is required for the observed method".into())
            })?;
            let x = ProtectedMatrix::new(read_matrix_csv(x_path)?.matrix)?;
            let fit = estimate_a(&y, &x, &partition)?;
            let warnings = fit.warnings.clone();
            (debias(&y, &x, &fit)?, warnings, None)
        }
        MethodArg::Latent => {
            let k = rank.ok_or_else(|| {
                AppError::Config("--rank is required for the latent method".into())
            })?;
            let est = estimate_subspace(&y, &partition, k)?;
            (
                debias_latent(&y, &est.basis)?,
                est.warnings,
                Some(est.singular_values),
            )
        }
    };
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    write_matrix_csv(out, &y_file.header, &output.y_db)?;
    let diagnostics = DebiasDiagnostics {
        rows: output.y_db.nrows(),
        cols: output.y_db.ncols(),
        adjustment: &output.adjustment,
        warnings: &warnings,
        singular_values: singular_values.as_deref(),
    };
    write_json(&fit_path(out), &diagnostics)?;
    Ok(0)
}

fn compas(config: &Path, out: &Path, seed: Option<u64>) -> AppResult<i32> {
    let (mut cfg, data) = ExperimentConfig::from_file(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let loaded = load_compas(&data)?;
    if !loaded.skipped.is_empty() {
        eprintln!(
            "warning: skipped {} unparseable rows of {}",
            loaded.skipped.len(),
            data.display()
        );
    }
    let report = run_experiment(&cfg, &loaded.records, loaded.counts)?;
    for path in write_artifacts(out, &report)? {
        log::info!("wrote {}", path.display());
    }
    Ok(0)
}
