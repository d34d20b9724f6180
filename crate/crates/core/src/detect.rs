//! Criteria deciding whether a lag curve is significantly non-zero, and the
//! `(T1, T2)` amplitude landscape built from them.
//!
//! A curve is first smoothed with a centered 3-lag window. Its first sign
//! change at `t1` splits it into a first part `1..t1-1` and a second part
//! `t1..t1+tau-1` whose mean absolute values are `AP1` and `AP2`. The curve
//! is accepted when its initial run beyond `AP2` is longer than ten lags and
//! the whole second part stays below `AP1` in magnitude; the amplitude `AP0`
//! is the mean over that initial run.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::nonlocal::{LagCurve, Observable, WindowPair};

/// Length of the second part, in lags.
pub const DEFAULT_TAU: usize = 44;
/// The initial run must be strictly longer than this.
pub const MIN_RUN: usize = 10;

pub fn smooth3_values(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    (0..n)
        .map(|k| {
            let lo = k.saturating_sub(1);
            let hi = (k + 1).min(n - 1);
            let w = &values[lo..=hi];
            w.iter().sum::<f64>() / w.len() as f64
        })
        .collect()
}

/// Centered 3-point moving average; the window shrinks to two points at
/// either end.
pub fn smooth3(curve: &LagCurve) -> Result<LagCurve> {
    if curve.values.len() < 3 {
        return Err(Error::TooShort {
            needed: 3,
            got: curve.values.len(),
        });
    }
    Ok(curve.with_values(smooth3_values(&curve.values)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectionResult {
    pub t1: usize,
    pub ap1: f64,
    pub ap2: f64,
    pub t0: usize,
    /// Signed amplitude, zero unless both conditions hold.
    pub ap0: f64,
    pub passed_i: bool,
    pub passed_ii: bool,
}

impl DetectionResult {
    pub fn accepted(&self) -> bool {
        self.passed_i && self.passed_ii
    }
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Applies the sign-change split and conditions (i) and (ii) to an already
/// smoothed curve. Index `k` of `smoothed` is lag `k + 1`.
pub fn classify_values(smoothed: &[f64], tau: usize) -> Result<DetectionResult> {
    let len = smoothed.len();
    if tau == 0 {
        return Err(Error::InvalidParameter("tau must be >= 1".into()));
    }
    if len < tau + 1 {
        return Err(Error::TooShort {
            needed: tau + 1,
            got: len,
        });
    }
    let last_t1 = len - tau + 1;
    let s = sign(smoothed[0]);
    let t1 = (2..=last_t1)
        .find(|&t| sign(smoothed[t - 1]) != s)
        .unwrap_or(last_t1);

    let first = &smoothed[..t1 - 1];
    let second = &smoothed[t1 - 1..t1 - 1 + tau];
    let mean_abs = |p: &[f64]| p.iter().map(|x| x.abs()).sum::<f64>() / p.len() as f64;
    let ap1 = mean_abs(first);
    let ap2 = mean_abs(second);

    let sf = s as f64;
    let t0 = smoothed.iter().take_while(|&&x| sf * x > ap2).count();
    let passed_i = t0 > MIN_RUN;
    let passed_ii = second.iter().all(|x| x.abs() < ap1);
    let ap0 = if passed_i && passed_ii {
        smoothed[..t0].iter().sum::<f64>() / t0 as f64
    } else {
        0.0
    };
    Ok(DetectionResult {
        t1,
        ap1,
        ap2,
        t0,
        ap0,
        passed_i,
        passed_ii,
    })
}

pub fn classify(smoothed: &LagCurve, tau: usize) -> Result<DetectionResult> {
    classify_values(&smoothed.values, tau)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LandscapeCell {
    pub pair: WindowPair,
    pub detection: DetectionResult,
    /// Amplitude after the relative-magnitude filter.
    pub ap0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Landscape {
    pub observable: Observable,
    /// Cells in input order.
    pub cells: Vec<LandscapeCell>,
    /// Signed mean of the nonzero first-pass amplitudes.
    pub ap0_bar: f64,
}

impl Landscape {
    /// Pairs whose amplitude survived both passes.
    pub fn effective_region(&self) -> Vec<WindowPair> {
        self.cells.iter().filter(|c| c.ap0 != 0.0).map(|c| c.pair).collect()
    }

    /// Surviving cell with the largest `|ap0|`; ties keep the earliest cell.
    pub fn max_cell(&self) -> Option<&LandscapeCell> {
        self.cells
            .iter()
            .filter(|c| c.ap0 != 0.0)
            .fold(None, |best: Option<&LandscapeCell>, c| match best {
                Some(b) if b.ap0.abs() >= c.ap0.abs() => Some(b),
                _ => Some(c),
            })
    }

    pub fn get(&self, pair: WindowPair) -> Option<f64> {
        self.cells.iter().find(|c| c.pair == pair).map(|c| c.ap0)
    }
}

/// Landscape over the given raw (unsmoothed) curves, one per window pair.
pub fn landscape_scan(observable: Observable, curves: &[(WindowPair, LagCurve)], tau: usize) -> Result<Landscape> {
    let detections: Vec<DetectionResult> = curves
        .par_iter()
        .map(|(_, c)| smooth3(c).and_then(|s| classify(&s, tau)))
        .collect::<Result<_>>()?;
    Ok(landscape_from_detections(
        observable,
        curves.iter().map(|(p, _)| *p).zip(detections).collect(),
    ))
}

/// Second pass: zero every cell with `|ap0| <= |ap0_bar|`.
pub fn landscape_from_detections(observable: Observable, cells: Vec<(WindowPair, DetectionResult)>) -> Landscape {
    let nonzero: Vec<f64> = cells
        .iter()
        .map(|(_, d)| d.ap0)
        .filter(|&a| a != 0.0)
        .collect();
    let ap0_bar = if nonzero.is_empty() {
        0.0
    } else {
        nonzero.iter().sum::<f64>() / nonzero.len() as f64
    };
    let cells = cells
        .into_iter()
        .map(|(pair, detection)| {
            let ap0 = if detection.ap0.abs() > ap0_bar.abs() {
                detection.ap0
            } else {
                0.0
            };
            LandscapeCell { pair, detection, ap0 }
        })
        .collect();
    Landscape {
        observable,
        cells,
        ap0_bar,
    }
}

/// Per-lag mean across units, with the standard error of that mean.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossSection {
    pub mean: Vec<f64>,
    /// Sample standard deviation over `sqrt(count)`; `NaN` below two units.
    pub se: Vec<f64>,
    /// Units contributing a defined value at each lag.
    pub count: Vec<usize>,
}

/// Averages curves lag by lag, skipping undefined (`NaN`) entries.
pub fn cross_sectional_average(curves: &[LagCurve]) -> Result<CrossSection> {
    let first = curves
        .first()
        .ok_or_else(|| Error::InvalidParameter("no curves to average".into()))?;
    let t_max = first.t_max();
    if let Some(c) = curves.iter().find(|c| c.t_max() != t_max) {
        return Err(Error::LagMismatch(t_max, c.t_max()));
    }
    let rows: Vec<&[f64]> = curves.iter().map(|c| c.values.as_slice()).collect();
    Ok(cross_section_of(&rows, t_max))
}

pub(crate) fn cross_section_of(rows: &[&[f64]], t_max: usize) -> CrossSection {
    let mut out = CrossSection {
        mean: Vec::with_capacity(t_max),
        se: Vec::with_capacity(t_max),
        count: Vec::with_capacity(t_max),
    };
    for k in 0..t_max {
        let vals = rows.iter().map(|r| r[k]).filter(|v| !v.is_nan());
        let (count, sum) = vals.clone().fold((0usize, 0.0), |(c, s), v| (c + 1, s + v));
        let mean = if count > 0 { sum / count as f64 } else { f64::NAN };
        let se = if count > 1 {
            let ss: f64 = vals.map(|v| (v - mean) * (v - mean)).sum();
            (ss / (count - 1) as f64).sqrt() / (count as f64).sqrt()
        } else {
            f64::NAN
        };
        out.mean.push(mean);
        out.se.push(se);
        out.count.push(count);
    }
    out
}
