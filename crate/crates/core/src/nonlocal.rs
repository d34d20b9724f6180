//! Two-window volatility differences and the lagged observables built on them.
//!
//! For a window pair `(T1, T2)` the volatility difference is
//! `Δv(t') = <v(t')>_T1 - <v(t')>_T2`, defined for `t' >= T2`. At lag `t` the
//! valid sample is `t' ∈ [T2, n - t]`, and every observable at that lag is an
//! average over that range:
//!
//! | observable | summand                         |
//! |------------|---------------------------------|
//! | `ΔP`       | `P(r > 0 | Δv > 0) - P(r > 0 | Δv < 0)` |
//! | `F`        | `Δv(t') r(t'+t)`                |
//! | `G`        | `sgn Δv(t') sgn r(t'+t)`        |
//! | `H`        | `sgn Δv(t') r(t'+t)`            |
//! | `f`        | `v(t') r(t'+t)` (local baseline)|
//!
//! All window sums are accumulated oldest-first and divided once, so two
//! evaluations of the same quantity agree bit for bit no matter which entry
//! point produced them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::timeseries::{volatility, VolatilityKind, VolatilitySpec};

/// Short and long averaging windows, in trading days.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WindowPair {
    #[serde(rename = "T1")]
    pub short: usize,
    #[serde(rename = "T2")]
    pub long: usize,
}

impl WindowPair {
    pub fn new(short: usize, long: usize) -> Result<Self> {
        if short == 0 || short >= long {
            return Err(Error::InvalidWindowPair { short, long });
        }
        Ok(Self { short, long })
    }
}

impl fmt::Display for WindowPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T1={} T2={}", self.short, self.long)
    }
}

/// Rectangular grid of window pairs, `T1` outer and `T2` inner.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    pub short: Vec<usize>,
    pub long: Vec<usize>,
}

impl Grid {
    /// `T1 = 1..=44` step 1, `T2 = 45..=250` step 5.
    pub fn paper() -> Self {
        Self {
            short: (1..=44).collect(),
            long: (45..=250).step_by(5).collect(),
        }
    }

    /// Drops short windows the estimator cannot average over (`T1 < m`).
    pub fn restricted_to(mut self, spec: VolatilitySpec) -> Self {
        let min = spec.min_window();
        self.short.retain(|&t| t >= min);
        self.long.retain(|&t| t >= min);
        self
    }

    /// Parses `a:b[:step],c:d[:step]` (short range, long range; inclusive).
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("bad grid {s:?}, want T1lo:T1hi[:step],T2lo:T2hi[:step]"));
        let (a, b) = s.split_once(',').ok_or_else(bad)?;
        let range = |r: &str| -> Result<Vec<usize>> {
            let parts: Vec<usize> = r
                .split(':')
                .map(|p| p.trim().parse().map_err(|_| bad()))
                .collect::<Result<_>>()?;
            let (lo, hi, step) = match parts.as_slice() {
                [lo, hi] => (*lo, *hi, 1),
                [lo, hi, step] if *step > 0 => (*lo, *hi, *step),
                _ => return Err(bad()),
            };
            if lo > hi {
                return Err(bad());
            }
            Ok((lo..=hi).step_by(step).collect())
        };
        Ok(Self {
            short: range(a)?,
            long: range(b)?,
        })
    }

    /// All admissible pairs (`T1 < T2`) in row-major order.
    pub fn pairs(&self) -> Vec<WindowPair> {
        let mut out = Vec::with_capacity(self.short.len() * self.long.len());
        for &s in &self.short {
            for &l in &self.long {
                if let Ok(p) = WindowPair::new(s, l) {
                    out.push(p);
                }
            }
        }
        out
    }

    /// Distinct window lengths appearing on either axis.
    pub fn windows(&self) -> Vec<usize> {
        let mut w: Vec<usize> = self.short.iter().chain(&self.long).copied().collect();
        w.sort_unstable();
        w.dedup();
        w
    }
}

/// `<v(t')>_T` for every `t' >= T`; `values[k]` belongs to `t' = window + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowAverage {
    pub window: usize,
    pub values: Vec<f64>,
}

impl WindowAverage {
    pub fn first_valid(&self) -> usize {
        self.window
    }

    pub fn get(&self, t_prime: usize) -> Option<f64> {
        t_prime
            .checked_sub(self.window)
            .and_then(|k| self.values.get(k).copied())
    }
}

fn window_means(x: &[f64], len: usize) -> Vec<f64> {
    let d = len as f64;
    x.windows(len).map(|w| w.iter().sum::<f64>() / d).collect()
}

/// Average volatility over the trailing window of length `window` at every
/// admissible `t'`.
pub fn window_avg_series(returns: &[f64], spec: VolatilitySpec, window: usize) -> Result<WindowAverage> {
    if window == 0 {
        return Err(Error::InvalidParameter("window length must be >= 1".into()));
    }
    if returns.len() < window {
        return Err(Error::TooShort {
            needed: window,
            got: returns.len(),
        });
    }
    let values = match spec.kind {
        VolatilityKind::Abs => {
            let v: Vec<f64> = returns.iter().map(|r| r.abs()).collect();
            window_means(&v, window)
        }
        VolatilityKind::RmsWindow => {
            if window < spec.m {
                return Err(Error::InvalidParameter(format!(
                    "window {window} shorter than volatility window m={}",
                    spec.m
                )));
            }
            let v1 = volatility(returns, spec)?;
            window_means(v1.values(), window - spec.m + 1)
        }
        VolatilityKind::RmsCumulative => {
            let sq: Vec<f64> = returns.iter().map(|r| r * r).collect();
            let mut m = window_means(&sq, window);
            m.iter_mut().for_each(|x| *x = x.sqrt());
            m
        }
    };
    Ok(WindowAverage { window, values })
}

/// Single-point window average at 1-based `t_prime`.
pub fn window_avg_volatility(returns: &[f64], spec: VolatilitySpec, window: usize, t_prime: usize) -> Result<f64> {
    let n = returns.len();
    if window == 0 || t_prime < window || t_prime > n || window < spec.min_window() {
        return Err(Error::OutOfRange {
            t_prime,
            window,
            first: window,
            last: n,
        });
    }
    let slice = &returns[t_prime - window..t_prime];
    window_avg_series(slice, spec, window).map(|w| w.values[0])
}

/// `Δv(t')` for `t' >= first_valid`; `values[k]` belongs to `t' = first_valid + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaVSeries {
    values: Vec<f64>,
    first_valid: usize,
    spec: VolatilitySpec,
    pair: WindowPair,
}

impl DeltaVSeries {
    /// Combines two precomputed window averages of the same series.
    pub fn from_averages(
        short: &WindowAverage,
        long: &WindowAverage,
        spec: VolatilitySpec,
        pair: WindowPair,
    ) -> Result<Self> {
        if short.window != pair.short || long.window != pair.long {
            return Err(Error::InvalidParameter(format!(
                "window averages ({}, {}) do not match {pair}",
                short.window, long.window
            )));
        }
        let skip = pair.long - pair.short;
        let values: Vec<f64> = short.values[skip..]
            .iter()
            .zip(&long.values)
            .map(|(s, l)| s - l)
            .collect();
        Ok(Self {
            values,
            first_valid: pair.long,
            spec,
            pair,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn first_valid(&self) -> usize {
        self.first_valid
    }

    pub fn spec(&self) -> VolatilitySpec {
        self.spec
    }

    pub fn pair(&self) -> WindowPair {
        self.pair
    }

    /// Last `t'` with a defined value (the series length `n`).
    pub fn last_valid(&self) -> usize {
        self.first_valid + self.values.len() - 1
    }

    pub fn get(&self, t_prime: usize) -> Option<f64> {
        t_prime
            .checked_sub(self.first_valid)
            .and_then(|k| self.values.get(k).copied())
    }
}

fn check_pair(n: usize, spec: VolatilitySpec, pair: WindowPair) -> Result<()> {
    WindowPair::new(pair.short, pair.long)?;
    if pair.short < spec.min_window() {
        return Err(Error::InvalidParameter(format!(
            "T1={} is shorter than volatility window m={}",
            pair.short, spec.m
        )));
    }
    if n <= pair.long {
        return Err(Error::TooShort {
            needed: pair.long + 1,
            got: n,
        });
    }
    Ok(())
}

pub fn delta_v_series(returns: &[f64], spec: VolatilitySpec, pair: WindowPair) -> Result<DeltaVSeries> {
    check_pair(returns.len(), spec, pair)?;
    let short = window_avg_series(returns, spec, pair.short)?;
    let long = window_avg_series(returns, spec, pair.long)?;
    DeltaVSeries::from_averages(&short, &long, spec, pair)
}

/// Counts behind the conditional probabilities at one lag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalProbabilities {
    pub lag: usize,
    /// Number of valid `t'` at this lag.
    pub n_valid: usize,
    /// `#{Δv(t') > 0}`
    pub n_pos: usize,
    /// `#{Δv(t') < 0}`
    pub n_neg: usize,
    pub n_zero_dv: usize,
    /// `#{r(t'+t) = 0}` over all valid `t'`.
    pub n_zero_r: usize,
    /// `#{r(t'+t) > 0 ∧ Δv(t') > 0}`
    pub up_given_volatile: usize,
    /// `#{r(t'+t) > 0 ∧ Δv(t') < 0}`
    pub up_given_stable: usize,
    pub p_plus_given_volatile: Option<f64>,
    pub p_plus_given_stable: Option<f64>,
    /// Fraction of positive `r(t'+t)` over the `t'` with nonzero `Δv`.
    pub p0: Option<f64>,
}

impl ConditionalProbabilities {
    fn from_counts(
        lag: usize,
        n_valid: usize,
        n_pos: usize,
        n_neg: usize,
        n_zero_r: usize,
        up_given_volatile: usize,
        up_given_stable: usize,
    ) -> Self {
        let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
        Self {
            lag,
            n_valid,
            n_pos,
            n_neg,
            n_zero_dv: n_valid - n_pos - n_neg,
            n_zero_r,
            up_given_volatile,
            up_given_stable,
            p_plus_given_volatile: ratio(up_given_volatile, n_pos),
            p_plus_given_stable: ratio(up_given_stable, n_neg),
            p0: ratio(up_given_volatile + up_given_stable, n_pos + n_neg),
        }
    }

    /// `ΔP(t)`, undefined when either condition set is empty.
    pub fn delta_p(&self) -> Option<f64> {
        Some(self.p_plus_given_volatile? - self.p_plus_given_stable?)
    }
}

/// Valid `t'` count at `lag`, or an error when the range is empty.
fn valid_len(n: usize, first_valid: usize, lag: usize) -> Result<usize> {
    if lag == 0 || n < first_valid + lag {
        return Err(Error::EmptyLag { lag });
    }
    Ok(n - lag - first_valid + 1)
}

pub fn conditional_probabilities(returns: &[f64], dv: &DeltaVSeries, lag: usize) -> Result<ConditionalProbabilities> {
    let n = returns.len();
    if dv.last_valid() != n {
        return Err(Error::InvalidParameter(format!(
            "Δv series ends at t'={} but returns have length {n}",
            dv.last_valid()
        )));
    }
    let len = valid_len(n, dv.first_valid, lag)?;
    let ahead = &returns[dv.first_valid - 1 + lag..][..len];
    let (mut n_pos, mut n_neg, mut n_zero_r, mut upv, mut ups) = (0, 0, 0, 0, 0);
    for (&d, &r) in dv.values[..len].iter().zip(ahead) {
        let up = r > 0.0;
        n_zero_r += (r == 0.0) as usize;
        if d > 0.0 {
            n_pos += 1;
            upv += up as usize;
        } else if d < 0.0 {
            n_neg += 1;
            ups += up as usize;
        }
    }
    Ok(ConditionalProbabilities::from_counts(
        lag, len, n_pos, n_neg, n_zero_r, upv, ups,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Observable {
    #[serde(rename = "DELTA_P")]
    DeltaP,
    #[serde(rename = "DELTA_P1")]
    DeltaP1,
    #[serde(rename = "DELTA_P2")]
    DeltaP2,
    F,
    F1,
    G,
    H,
    #[serde(rename = "LOCAL_F")]
    LocalF,
}

/// What is averaged over the valid sample, independent of the volatility
/// estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    ProbabilityDifference,
    Product,
    SignProduct,
    SignTimesReturn,
    Local,
}

impl Observable {
    pub const ALL: [Observable; 8] = [
        Self::DeltaP,
        Self::DeltaP1,
        Self::DeltaP2,
        Self::F,
        Self::F1,
        Self::G,
        Self::H,
        Self::LocalF,
    ];

    pub fn statistic(self) -> Statistic {
        match self {
            Self::DeltaP | Self::DeltaP1 | Self::DeltaP2 => Statistic::ProbabilityDifference,
            Self::F | Self::F1 => Statistic::Product,
            Self::G => Statistic::SignProduct,
            Self::H => Statistic::SignTimesReturn,
            Self::LocalF => Statistic::Local,
        }
    }

    /// The estimator this observable is defined with, if it fixes one.
    pub fn required_kind(self) -> Option<VolatilityKind> {
        match self {
            Self::DeltaP | Self::F => Some(VolatilityKind::Abs),
            Self::DeltaP1 | Self::F1 => Some(VolatilityKind::RmsWindow),
            Self::DeltaP2 => Some(VolatilityKind::RmsCumulative),
            Self::G | Self::H | Self::LocalF => None,
        }
    }

    /// Estimator used when the caller does not choose one.
    pub fn default_volatility(self) -> VolatilitySpec {
        match self.required_kind() {
            Some(VolatilityKind::RmsWindow) => VolatilitySpec {
                kind: VolatilityKind::RmsWindow,
                m: VolatilitySpec::DEFAULT_M,
            },
            Some(VolatilityKind::RmsCumulative) => VolatilitySpec::rms_cumulative(),
            _ => VolatilitySpec::abs(),
        }
    }

    pub fn check_volatility(self, spec: VolatilitySpec) -> Result<()> {
        let ok = match self.required_kind() {
            Some(kind) => kind == spec.kind,
            None => !(self == Self::LocalF && spec.kind == VolatilityKind::RmsCumulative),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "observable {self} is not defined with volatility {spec}"
            )))
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::DeltaP => "DELTA_P",
            Self::DeltaP1 => "DELTA_P1",
            Self::DeltaP2 => "DELTA_P2",
            Self::F => "F",
            Self::F1 => "F1",
            Self::G => "G",
            Self::H => "H",
            Self::LocalF => "LOCAL_F",
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_uppercase().replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|o| o.name() == norm)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown observable {s:?}")))
    }
}

/// An observable as a function of lag `t = 1..=t_max`. Index `k` holds lag
/// `k + 1`; undefined lags are `NaN`.
#[derive(Debug, Clone, PartialEq)]
pub struct LagCurve {
    pub observable: Observable,
    pub pair: WindowPair,
    pub spec: VolatilitySpec,
    pub values: Vec<f64>,
    pub counts_pos: Vec<usize>,
    pub counts_neg: Vec<usize>,
    pub p0: Vec<f64>,
}

impl LagCurve {
    pub fn t_max(&self) -> usize {
        self.values.len()
    }

    /// Value at 1-based lag `t`.
    pub fn at(&self, t: usize) -> Option<f64> {
        t.checked_sub(1).and_then(|k| self.values.get(k).copied())
    }

    pub fn with_values(&self, values: Vec<f64>) -> Self {
        Self {
            values,
            ..self.clone()
        }
    }
}

/// Sign indicators of one return series, reusable across window pairs.
#[derive(Debug, Clone)]
pub struct ReturnSigns {
    up: Vec<u8>,
    down: Vec<u8>,
    up_prefix: Vec<u32>,
    down_prefix: Vec<u32>,
}

fn prefix(mask: &[u8]) -> Vec<u32> {
    let mut acc = 0u32;
    std::iter::once(0)
        .chain(mask.iter().map(|&b| {
            acc += b as u32;
            acc
        }))
        .collect()
}

#[inline]
fn dot(a: &[u8], b: &[u8]) -> u32 {
    // u16 lanes vectorize well; chunks keep the partial sums from overflowing.
    a.chunks(4096)
        .zip(b.chunks(4096))
        .map(|(x, y)| {
            x.iter()
                .zip(y)
                .map(|(&p, &q)| (p & q) as u16)
                .fold(0u16, |s, v| s.wrapping_add(v)) as u32
        })
        .sum()
}

impl ReturnSigns {
    pub fn new(returns: &[f64]) -> Self {
        let up: Vec<u8> = returns.iter().map(|&r| (r > 0.0) as u8).collect();
        let down: Vec<u8> = returns.iter().map(|&r| (r < 0.0) as u8).collect();
        let up_prefix = prefix(&up);
        let down_prefix = prefix(&down);
        Self {
            up,
            down,
            up_prefix,
            down_prefix,
        }
    }
}

/// Computes a lag curve from a precomputed `Δv` series.
pub fn curve_from_delta_v(
    returns: &[f64],
    signs: &ReturnSigns,
    dv: &DeltaVSeries,
    observable: Observable,
    t_max: usize,
) -> Result<LagCurve> {
    let n = returns.len();
    if t_max == 0 {
        return Err(Error::InvalidParameter("t_max must be >= 1".into()));
    }
    if signs.up.len() != n || dv.last_valid() != n {
        return Err(Error::InvalidParameter("Δv series and returns are misaligned".into()));
    }
    let statistic = observable.statistic();
    let fv = dv.first_valid;
    let volatile: Vec<u8> = dv.values.iter().map(|&d| (d > 0.0) as u8).collect();
    let stable: Vec<u8> = dv.values.iter().map(|&d| (d < 0.0) as u8).collect();
    let volatile_prefix = prefix(&volatile);
    let stable_prefix = prefix(&stable);

    let local = if statistic == Statistic::Local {
        Some(volatility(returns, dv.spec)?)
    } else {
        None
    };

    let mut curve = LagCurve {
        observable,
        pair: dv.pair,
        spec: dv.spec,
        values: Vec::with_capacity(t_max),
        counts_pos: Vec::with_capacity(t_max),
        counts_neg: Vec::with_capacity(t_max),
        p0: Vec::with_capacity(t_max),
    };

    for lag in 1..=t_max {
        if let Some(v) = &local {
            let vf = v.first_valid();
            let len = valid_len(n, vf, lag)?;
            let ahead = &returns[vf - 1 + lag..][..len];
            let sum: f64 = v.values()[..len].iter().zip(ahead).map(|(a, b)| a * b).sum();
            let up = (signs.up_prefix[vf - 1 + lag + len] - signs.up_prefix[vf - 1 + lag]) as usize;
            curve.values.push(sum / len as f64);
            curve.counts_pos.push(len);
            curve.counts_neg.push(0);
            curve.p0.push(up as f64 / len as f64);
            continue;
        }

        let len = valid_len(n, fv, lag)?;
        let off = fv - 1 + lag;
        let up = &signs.up[off..off + len];
        let vol = &volatile[..len];
        let stab = &stable[..len];
        let n_pos = volatile_prefix[len] as usize;
        let n_neg = stable_prefix[len] as usize;
        let upv = dot(vol, up) as usize;
        let ups = dot(stab, up) as usize;
        let n_up = (signs.up_prefix[off + len] - signs.up_prefix[off]) as usize;
        let n_down = (signs.down_prefix[off + len] - signs.down_prefix[off]) as usize;
        let cp = ConditionalProbabilities::from_counts(lag, len, n_pos, n_neg, len - n_up - n_down, upv, ups);

        let value = match statistic {
            Statistic::ProbabilityDifference => cp.delta_p().unwrap_or(f64::NAN),
            Statistic::Product => {
                let ahead = &returns[off..off + len];
                let sum: f64 = dv.values[..len].iter().zip(ahead).map(|(d, r)| d * r).sum();
                sum / len as f64
            }
            Statistic::SignProduct => {
                let down = &signs.down[off..off + len];
                let concordant = upv + dot(stab, down) as usize;
                let discordant = ups + dot(vol, down) as usize;
                let m = concordant + discordant;
                if m == 0 {
                    f64::NAN
                } else {
                    (concordant as f64 - discordant as f64) / m as f64
                }
            }
            Statistic::SignTimesReturn => {
                let ahead = &returns[off..off + len];
                let mut sum = 0.0;
                for (&d, &r) in dv.values[..len].iter().zip(ahead) {
                    if d > 0.0 {
                        sum += r;
                    } else if d < 0.0 {
                        sum -= r;
                    }
                }
                sum / len as f64
            }
            Statistic::Local => unreachable!("handled above"),
        };
        curve.values.push(value);
        curve.counts_pos.push(n_pos);
        curve.counts_neg.push(n_neg);
        curve.p0.push(cp.p0.unwrap_or(f64::NAN));
    }
    Ok(curve)
}

pub fn lag_curve(
    returns: &[f64],
    spec: VolatilitySpec,
    pair: WindowPair,
    observable: Observable,
    t_max: usize,
) -> Result<LagCurve> {
    observable.check_volatility(spec)?;
    let dv = delta_v_series(returns, spec, pair)?;
    curve_from_delta_v(returns, &ReturnSigns::new(returns), &dv, observable, t_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Returns whose magnitudes are exactly `mags` and whose signs alternate.
    fn with_abs(mags: &[f64]) -> Vec<f64> {
        mags.iter()
            .enumerate()
            .map(|(i, m)| if i % 2 == 0 { *m } else { -*m })
            .collect()
    }

    #[test]
    fn window_pair_validation() {
        assert!(WindowPair::new(5, 5).is_err());
        assert!(WindowPair::new(0, 5).is_err());
        assert!(WindowPair::new(6, 5).is_err());
        assert!(WindowPair::new(1, 2).is_ok());
    }

    #[test]
    fn paper_grid_shape() {
        let g = Grid::paper();
        assert_eq!(g.short.len(), 44);
        assert_eq!(g.long.len(), 42);
        assert_eq!(g.pairs().len(), 1848);
        let g = Grid::paper().restricted_to(VolatilitySpec::rms_window(5).unwrap());
        assert_eq!(g.short[0], 5);
        assert_eq!(Grid::parse("1:44,45:250:5").unwrap(), Grid::paper());
        assert!(Grid::parse("3:1,4:5").is_err());
    }

    #[test]
    fn window_average_examples() {
        let r = [1.0, -2.0, 3.0];
        assert_eq!(window_avg_volatility(&r, VolatilitySpec::abs(), 3, 3).unwrap(), 2.0);
        assert_eq!(window_avg_volatility(&r, VolatilitySpec::abs(), 1, 2).unwrap(), 2.0);
        assert!(window_avg_volatility(&r, VolatilitySpec::abs(), 3, 2).is_err());
        assert!(window_avg_volatility(&r, VolatilitySpec::abs(), 3, 4).is_err());

        let c = [0.7, -0.7, 0.7, 0.7, -0.7];
        let a = window_avg_volatility(&c, VolatilitySpec::abs(), 4, 5).unwrap();
        let b = window_avg_volatility(&c, VolatilitySpec::rms_cumulative(), 4, 5).unwrap();
        assert_abs_diff_eq!(a, 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(b, 0.7, epsilon = 1e-15);

        // v1 with m = 2 over T = 3 averages T - m + 1 = 2 points.
        let r = [3.0, 4.0, 0.0];
        let spec = VolatilitySpec::rms_window(2).unwrap();
        let expected = (12.5f64.sqrt() + 8.0f64.sqrt()) / 2.0;
        assert_abs_diff_eq!(window_avg_volatility(&r, spec, 3, 3).unwrap(), expected, epsilon = 1e-15);
        assert!(window_avg_volatility(&r, spec, 1, 3).is_err());
    }

    #[test]
    fn delta_v_examples() {
        let pair = WindowPair::new(1, 2).unwrap();
        let dv = delta_v_series(&with_abs(&[1.0, 1.0, 1.0, 1.0, 1.0]), VolatilitySpec::abs(), pair).unwrap();
        assert_eq!(dv.first_valid(), 2);
        assert!(dv.values().iter().all(|&d| d == 0.0));

        let pair = WindowPair::new(1, 4).unwrap();
        let dv = delta_v_series(&with_abs(&[1.0, 1.0, 1.0, 9.0, 1.0]), VolatilitySpec::abs(), pair).unwrap();
        assert_eq!(dv.get(4), Some(6.0));

        assert!(matches!(
            delta_v_series(&[1.0; 10], VolatilitySpec::abs(), WindowPair { short: 5, long: 5 }),
            Err(Error::InvalidWindowPair { .. })
        ));
        assert!(matches!(
            delta_v_series(&[1.0; 4], VolatilitySpec::abs(), WindowPair::new(1, 4).unwrap()),
            Err(Error::TooShort { .. })
        ));
    }

    /// `Δv` with prescribed signs at `t' = 1..` placed directly.
    fn dv_with(values: Vec<f64>, n: usize) -> DeltaVSeries {
        assert_eq!(values.len(), n);
        DeltaVSeries {
            values,
            first_valid: 1,
            spec: VolatilitySpec::abs(),
            pair: WindowPair { short: 1, long: 2 },
        }
    }

    #[test]
    fn conditional_probability_enumeration() {
        // Δv at t' = 1..4, next-day returns r(2..5).
        let r = [0.5, 1.0, 1.0, -1.0, -1.0];
        let dv = dv_with(vec![1.0, 1.0, 1.0, -1.0, 0.3], 5);
        let cp = conditional_probabilities(&r, &dv, 1).unwrap();
        assert_eq!(cp.n_valid, 4);
        assert_eq!(cp.p_plus_given_volatile, Some(2.0 / 3.0));
        assert_eq!(cp.p_plus_given_stable, Some(0.0));
        assert_eq!(cp.p0, Some(0.5));
        let identity = (3.0 * cp.p_plus_given_volatile.unwrap() + cp.p_plus_given_stable.unwrap()) / 4.0;
        assert_abs_diff_eq!(identity, 0.5, epsilon = 1e-15);

        let r = [0.5, -1.0, 1.0, 1.0, -1.0];
        let dv = dv_with(vec![1.0, 1.0, -1.0, -1.0, 0.3], 5);
        let cp = conditional_probabilities(&r, &dv, 1).unwrap();
        assert_eq!(cp.p_plus_given_volatile, Some(0.5));
        assert_eq!(cp.p_plus_given_stable, Some(0.5));
        assert_eq!(cp.delta_p(), Some(0.0));

        let dv = dv_with(vec![1.0; 5], 5);
        let cp = conditional_probabilities(&r, &dv, 1).unwrap();
        assert_eq!(cp.p_plus_given_stable, None);
        assert_eq!(cp.delta_p(), None);

        assert!(matches!(
            conditional_probabilities(&r, &dv, 5),
            Err(Error::EmptyLag { lag: 5 })
        ));
    }

    #[test]
    fn zero_conventions() {
        let r = [0.5, 0.0, 1.0, 1.0, -1.0];
        let dv = dv_with(vec![1.0, 0.0, -1.0, 2.0, 0.3], 5);
        let cp = conditional_probabilities(&r, &dv, 1).unwrap();
        assert_eq!(cp.n_zero_dv, 1);
        assert_eq!(cp.n_zero_r, 1);
        assert_eq!(cp.n_pos, 2);
        assert_eq!(cp.p_plus_given_volatile, Some(0.0));
        assert_eq!(cp.p_plus_given_stable, Some(1.0));
    }

    #[test]
    fn f_hand_oracle() {
        let r = [0.1, 2.0, -2.0];
        let dv = dv_with(vec![1.0, -1.0, 0.0], 3);
        let c = curve_from_delta_v(&r, &ReturnSigns::new(&r), &dv, Observable::F, 1).unwrap();
        assert_eq!(c.values, vec![2.0]);
        let c = curve_from_delta_v(&r, &ReturnSigns::new(&r), &dv, Observable::G, 1).unwrap();
        assert_eq!(c.values, vec![1.0]);
        let c = curve_from_delta_v(&r, &ReturnSigns::new(&r), &dv, Observable::H, 1).unwrap();
        assert_eq!(c.values, vec![2.0]);
        let c = curve_from_delta_v(&r, &ReturnSigns::new(&r), &dv, Observable::LocalF, 1).unwrap();
        assert_abs_diff_eq!(c.values[0], (0.1 * 2.0 - 2.0 * 2.0) / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn curve_matches_conditional_probabilities() {
        let r: Vec<f64> = (0..120).map(|i| ((i * 37 % 17) as f64 - 8.3) * if i % 3 == 0 { 2.0 } else { 1.0 }).collect();
        let pair = WindowPair::new(3, 20).unwrap();
        let spec = VolatilitySpec::abs();
        let c = lag_curve(&r, spec, pair, Observable::DeltaP, 30).unwrap();
        let dv = delta_v_series(&r, spec, pair).unwrap();
        for t in 1..=30 {
            let cp = conditional_probabilities(&r, &dv, t).unwrap();
            assert_eq!(c.at(t), cp.delta_p());
            assert_eq!(c.counts_pos[t - 1], cp.n_pos);
            assert_eq!(c.p0[t - 1], cp.p0.unwrap());
        }
    }

    #[test]
    fn observable_volatility_rules() {
        assert!(Observable::DeltaP1.check_volatility(VolatilitySpec::abs()).is_err());
        assert!(Observable::G.check_volatility(VolatilitySpec::rms_cumulative()).is_ok());
        assert!(Observable::LocalF.check_volatility(VolatilitySpec::rms_cumulative()).is_err());
        assert_eq!("delta_p1".parse::<Observable>().unwrap(), Observable::DeltaP1);
        assert_eq!(Observable::DeltaP1.default_volatility().m, 5);
        assert!(lag_curve(&[1.0; 50], VolatilitySpec::abs(), WindowPair::new(1, 5).unwrap(), Observable::DeltaP2, 3).is_err());
    }

    #[test]
    fn dot_handles_long_inputs() {
        let a = vec![1u8; 70_000];
        assert_eq!(dot(&a, &a), 70_000);
    }
}
