//! Plain-text number formatting and the CSV dump layouts shared by the CLI.

use std::io::{self, Read, Write};

use crate::error::{Error, Result};

/// Formats `x` like C's `%.15g`: 15 significant digits, trailing zeros
/// removed, scientific notation outside `1e-4 <= |x| < 1e15`.
pub fn sig15(x: f64) -> String {
    sig(x, 15)
}

pub fn sig(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let p = digits.max(1);
    let sci = format!("{:.*e}", p - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= p as i32 {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (p as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Writes `index,value` rows with a header, indices starting at `first_index`.
pub fn write_series<W: Write>(mut out: W, first_index: usize, values: &[f64]) -> io::Result<()> {
    writeln!(out, "index,value")?;
    for (k, v) in values.iter().enumerate() {
        writeln!(out, "{},{}", first_index + k, sig15(*v))?;
    }
    Ok(())
}

/// Reads the values of an `index,value` dump. The header is optional and the
/// index column is ignored.
pub fn read_series<R: Read>(source: R) -> Result<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let mut values = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let record = record?;
        let row = record.position().map_or(0, |p| p.line());
        let field = record.get(1).unwrap_or("");
        if k == 0 && record.get(0).is_some_and(|h| h.eq_ignore_ascii_case("index")) {
            continue;
        }
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let v: f64 = field.parse().map_err(|_| Error::BadRow {
            row,
            reason: format!("non-numeric value {field:?}"),
        })?;
        if !v.is_finite() {
            return Err(Error::BadRow {
                row,
                reason: format!("non-finite value {field}"),
            });
        }
        values.push(v);
    }
    Ok(values)
}
