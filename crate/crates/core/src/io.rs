//! CSV output. Floats are written with 17 significant digits so that every
//! value reads back bit for bit.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::momentsys::LatticeSeries;
use crate::orthopoly::RecurrenceCoefficients;

/// `x` with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Buffered CSV writer that attaches the path to every error.
pub struct CsvFile {
    path: PathBuf,
    writer: csv::Writer<fs::File>,
}

impl CsvFile {
    pub fn create(path: &Path, header: &[String]) -> Result<Self> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(|source| Error::Io {
                path: parent.to_path_buf(),
                source,
            })?;
        }
        let writer = csv::Writer::from_path(path).map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let mut f = Self {
            path: path.to_path_buf(),
            writer,
        };
        f.row(header)?;
        Ok(f)
    }

    pub fn row<S: AsRef<[u8]>>(&mut self, fields: &[S]) -> Result<()> {
        self.writer.write_record(fields).map_err(|source| Error::Csv {
            path: self.path.clone(),
            source,
        })
    }

    pub fn finish(mut self) -> Result<()> {
        self.writer.flush().map_err(|source| Error::Io {
            path: self.path.clone(),
            source,
        })
    }
}

/// A named moment series for the optional trajectory columns.
#[derive(Debug, Clone)]
pub struct MomentColumn {
    pub m: usize,
    pub k: i64,
    pub values: Vec<Complex64>,
}

/// Trajectory CSV: `t, re_Z01, im_Z01, r`, then `re_Z{m}_{k}, im_Z{m}_{k}`
/// per extra moment, then `source` when given.
pub fn write_trajectory(
    path: &Path,
    times: &[f64],
    order: &[Complex64],
    extra: &[MomentColumn],
    source: Option<&str>,
) -> Result<()> {
    let mut header: Vec<String> = ["t", "re_Z01", "im_Z01", "r"].iter().map(|s| s.to_string()).collect();
    for c in extra {
        header.push(format!("re_Z{}_{}", c.m, c.k));
        header.push(format!("im_Z{}_{}", c.m, c.k));
    }
    if source.is_some() {
        header.push("source".into());
    }
    let mut f = CsvFile::create(path, &header)?;
    for (i, (&t, z)) in times.iter().zip(order).enumerate() {
        let mut row = vec![fmt_f64(t), fmt_f64(z.re), fmt_f64(z.im), fmt_f64(z.norm())];
        for c in extra {
            row.push(fmt_f64(c.values[i].re));
            row.push(fmt_f64(c.values[i].im));
        }
        if let Some(s) = source {
            row.push(s.to_string());
        }
        f.row(&row)?;
    }
    f.finish()
}

/// Lattice CSV: `t, m, k, re_Z, im_Z`, one row per stored entry `k ≥ 0`.
pub fn write_lattice_series(path: &Path, series: &LatticeSeries) -> Result<()> {
    let header: Vec<String> = ["t", "m", "k", "re_Z", "im_Z"].iter().map(|s| s.to_string()).collect();
    let mut f = CsvFile::create(path, &header)?;
    for (&t, lat) in series.times.iter().zip(&series.lattices) {
        for m in 0..=lat.m_max() {
            for k in 0..=lat.k_max() as i64 {
                let z = lat.get(m, k);
                f.row(&[fmt_f64(t), m.to_string(), k.to_string(), fmt_f64(z.re), fmt_f64(z.im)])?;
            }
        }
    }
    f.finish()
}

/// Recurrence CSV: `n, a, b`; `b` is empty where it is not stored.
pub fn write_recurrence(path: &Path, coeffs: &RecurrenceCoefficients) -> Result<()> {
    let header: Vec<String> = ["n", "a", "b"].iter().map(|s| s.to_string()).collect();
    let mut f = CsvFile::create(path, &header)?;
    for (n, &a) in coeffs.a().iter().enumerate() {
        let b = coeffs.b().get(n).map_or(String::new(), |&b| fmt_f64(b));
        f.row(&[n.to_string(), fmt_f64(a), b])?;
    }
    f.finish()
}
