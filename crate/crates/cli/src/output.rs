//! Flat CSV and JSON writers. Numbers in CSV use 15 significant digits.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use volret::detect::CrossSection;
use volret::format::sig15;
use volret::nonlocal::LagCurve;
use volret::stats::TTestResult;

use crate::error::CliError;

/// A file being written, reporting errors against its path.
pub struct Output {
    path: PathBuf,
    inner: BufWriter<File>,
}

impl Output {
    pub fn create(path: impl AsRef<Path>) -> Result<Self, CliError> {
        let path = path.as_ref().to_path_buf();
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        Ok(Self {
            path,
            inner: BufWriter::new(file),
        })
    }

    pub fn line(&mut self, s: &str) -> Result<(), CliError> {
        writeln!(self.inner, "{s}").map_err(|e| CliError::io(&self.path, e))
    }

    pub fn writer(&mut self) -> &mut BufWriter<File> {
        &mut self.inner
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.inner.flush().map_err(|e| CliError::io(&self.path, e))
    }
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<(), CliError> {
    let mut out = Output::create(path)?;
    let text = serde_json::to_string_pretty(value).expect("serializable");
    out.line(&text)?;
    out.finish()
}

pub fn write_curve(path: impl AsRef<Path>, curve: &LagCurve) -> Result<(), CliError> {
    let mut out = Output::create(path)?;
    out.line("t,value,n_pos,n_neg,p0")?;
    for k in 0..curve.t_max() {
        out.line(&format!(
            "{},{},{},{},{}",
            k + 1,
            sig15(curve.values[k]),
            curve.counts_pos[k],
            curve.counts_neg[k],
            sig15(curve.p0[k])
        ))?;
    }
    out.finish()
}

/// `t,mean,se,n_units`; a single unit has no standard error, so that column
/// is dropped and a comment line says so.
pub fn write_mean(path: impl AsRef<Path>, cs: &CrossSection, n_units: usize) -> Result<(), CliError> {
    let mut out = Output::create(path)?;
    if n_units < 2 {
        out.line("# single series: standard error undefined, se column omitted")?;
        out.line("t,mean,n_units")?;
        for (k, (m, c)) in cs.mean.iter().zip(&cs.count).enumerate() {
            out.line(&format!("{},{},{}", k + 1, sig15(*m), c))?;
        }
    } else {
        out.line("t,mean,se,n_units")?;
        for (k, ((m, s), c)) in cs.mean.iter().zip(&cs.se).zip(&cs.count).enumerate() {
            out.line(&format!("{},{},{},{}", k + 1, sig15(*m), sig15(*s), c))?;
        }
    }
    out.finish()
}

pub fn write_ttests(path: impl AsRef<Path>, rows: &[TTestResult]) -> Result<(), CliError> {
    let mut out = Output::create(path)?;
    out.line("lag,t_stat,p_value,df")?;
    for r in rows {
        out.line(&format!("{},{},{},{}", r.lag, sig15(r.t_stat), sig15(r.p_value), r.df))?;
    }
    out.finish()
}
