//! Report files of the convergence study.

use std::fs;
use std::path::{Path, PathBuf};

use super::config::SimConfig;
use super::experiment::ConvergenceReport;
use crate::error::{Error, Result};
use crate::io::{fmt_f64, CsvFile};

fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// Writes `errors.csv`, `summary.csv` and `fit.csv` into `dir` and returns
/// their paths.
pub fn emit_report(report: &ConvergenceReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let errors = dir.join("errors.csv");
    let mut f = CsvFile::create(&errors, &header(&["N", "trial", "t", "m", "k", "err"]))?;
    for r in &report.errors {
        f.row(&[
            r.n.to_string(),
            r.trial.to_string(),
            fmt_f64(r.t),
            r.m.to_string(),
            r.k.to_string(),
            fmt_f64(r.err),
        ])?;
    }
    f.finish()?;

    let summary = dir.join("summary.csv");
    let mut f = CsvFile::create(&summary, &header(&["N", "t", "m", "k", "rms", "quantile_C"]))?;
    for r in &report.summary {
        f.row(&[
            r.n.to_string(),
            fmt_f64(r.t),
            r.m.to_string(),
            r.k.to_string(),
            fmt_f64(r.rms),
            fmt_f64(r.quantile_c),
        ])?;
    }
    f.finish()?;

    let fit = dir.join("fit.csv");
    let mut f = CsvFile::create(&fit, &header(&["m", "k", "t", "p", "stderr"]))?;
    for r in &report.fits {
        f.row(&[r.m.to_string(), r.k.to_string(), fmt_f64(r.t), fmt_f64(r.p), fmt_f64(r.stderr)])?;
    }
    f.finish()?;
    Ok(vec![errors, summary, fit])
}

/// Writes the configuration with all defaults resolved to
/// `dir/effective_config.toml`.
pub fn write_effective_config(cfg: &SimConfig, dir: &Path) -> Result<PathBuf> {
    let path = dir.join("effective_config.toml");
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| Error::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    fs::write(&path, cfg.effective().to_toml_string()?).map_err(io_err(&path))?;
    Ok(path)
}
