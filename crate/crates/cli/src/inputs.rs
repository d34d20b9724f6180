use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use volret::format::read_series;
use volret::timeseries::{load_price_series, log_returns, normalize, normalize_values, PriceFormat, ReturnSeries};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Prices(PriceFormat),
    /// An `index,value` return dump such as `simulate` writes.
    Returns,
}

impl Default for InputFormat {
    fn default() -> Self {
        Self::Prices(PriceFormat::TwoColumn)
    }
}

impl FromStr for InputFormat {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        if s.eq_ignore_ascii_case("returns") {
            return Ok(Self::Returns);
        }
        s.parse().map(Self::Prices).map_err(|e: volret::Error| CliError::Config(e.to_string()))
    }
}

/// One normalized input series.
#[derive(Debug, Clone)]
pub struct Unit {
    pub name: String,
    pub returns: ReturnSeries,
    /// First and last price dates, when the input had dates.
    pub period: Option<(String, String)>,
}

fn is_pattern(s: &str) -> bool {
    s.contains(['*', '?', '['])
}

/// Expands files, directories (their `.csv` files) and glob patterns, in
/// sorted order within each argument.
pub fn expand(args: &[String]) -> Result<Vec<PathBuf>, CliError> {
    let mut out = Vec::new();
    for arg in args {
        if is_pattern(arg) {
            let mut hits: Vec<PathBuf> = glob::glob(arg)
                .map_err(|e| CliError::Config(format!("bad pattern {arg:?}: {e}")))?
                .filter_map(|p| p.ok())
                .filter(|p| p.is_file())
                .collect();
            if hits.is_empty() {
                return Err(CliError::Input(format!("{arg}: no matching files")));
            }
            hits.sort();
            out.extend(hits);
        } else {
            let path = PathBuf::from(arg);
            if path.is_dir() {
                let mut hits: Vec<PathBuf> = fs::read_dir(&path)
                    .map_err(|e| CliError::io(&path, e))?
                    .filter_map(|e| e.ok().map(|e| e.path()))
                    .filter(|p| p.is_file() && p.extension().is_some_and(|x| x.eq_ignore_ascii_case("csv")))
                    .collect();
                if hits.is_empty() {
                    return Err(CliError::Input(format!("{arg}: no .csv files in directory")));
                }
                hits.sort();
                out.extend(hits);
            } else {
                out.push(path);
            }
        }
    }
    Ok(out)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "series".into())
}

fn load_one(path: &Path, format: InputFormat) -> Result<Unit, CliError> {
    let named = |e: volret::Error| CliError::Input(format!("{}: {e}", path.display()));
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let reader = BufReader::new(file);
    let name = stem(path);
    match format {
        InputFormat::Prices(f) => {
            let prices = load_price_series(reader, f, name.clone()).map_err(named)?;
            let period = Some((prices.dates()[0].to_string(), prices.dates()[prices.len() - 1].to_string()));
            let returns = normalize(&log_returns(&prices)).map_err(named)?;
            Ok(Unit { name, returns, period })
        }
        InputFormat::Returns => {
            let values = read_series(reader).map_err(named)?;
            let returns = normalize_values(&values).map_err(named)?;
            Ok(Unit {
                name,
                returns,
                period: None,
            })
        }
    }
}

/// Loads every input; names are file stems, made unique by a numeric suffix.
pub fn load(args: &[String], format: InputFormat) -> Result<Vec<Unit>, CliError> {
    let paths = expand(args)?;
    let mut units: Vec<Unit> = paths
        .par_iter()
        .map(|p| load_one(p, format))
        .collect::<Result<_, _>>()?;
    let mut seen = std::collections::BTreeMap::<String, usize>::new();
    for u in units.iter_mut() {
        let k = seen.entry(u.name.clone()).or_insert(0);
        *k += 1;
        if *k > 1 {
            u.name = format!("{}_{}", u.name, k);
        }
    }
    Ok(units)
}
