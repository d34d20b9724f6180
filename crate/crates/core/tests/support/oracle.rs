//! Direct-enumeration reference for the nonlocal observables.
//!
//! Everything is recomputed from the definitions with 1-based indices and no
//! shared intermediate state. Sums run oldest-first and are divided once,
//! which is the arithmetic the library commits to.

#![allow(dead_code)]

use volret::nonlocal::{Observable, WindowPair};
use volret::timeseries::{VolatilityKind, VolatilitySpec};

/// `r(t')`, 1-based.
fn r(returns: &[f64], t: usize) -> f64 {
    returns[t - 1]
}

fn v1(returns: &[f64], m: usize, t: usize) -> f64 {
    let mut s = 0.0;
    for j in (t + 1 - m)..=t {
        s += r(returns, j) * r(returns, j);
    }
    (s / m as f64).sqrt()
}

/// Window-averaged volatility at `t'`.
pub fn avg(returns: &[f64], spec: VolatilitySpec, window: usize, t: usize) -> f64 {
    match spec.kind {
        VolatilityKind::Abs => {
            let mut s = 0.0;
            for j in (t + 1 - window)..=t {
                s += r(returns, j).abs();
            }
            s / window as f64
        }
        VolatilityKind::RmsWindow => {
            let count = window - spec.m + 1;
            let mut s = 0.0;
            for j in (t + 1 - count)..=t {
                s += v1(returns, spec.m, j);
            }
            s / count as f64
        }
        VolatilityKind::RmsCumulative => {
            let mut s = 0.0;
            for j in (t + 1 - window)..=t {
                s += r(returns, j) * r(returns, j);
            }
            (s / window as f64).sqrt()
        }
    }
}

pub fn delta_v(returns: &[f64], spec: VolatilitySpec, pair: WindowPair, t: usize) -> f64 {
    avg(returns, spec, pair.short, t) - avg(returns, spec, pair.long, t)
}

fn sign(x: f64) -> i32 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Counts over the valid `t'` range at one lag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Counts {
    pub valid: usize,
    pub pos: usize,
    pub neg: usize,
    pub up_pos: usize,
    pub up_neg: usize,
}

pub fn counts(returns: &[f64], spec: VolatilitySpec, pair: WindowPair, lag: usize) -> Counts {
    let n = returns.len();
    let mut c = Counts {
        valid: 0,
        pos: 0,
        neg: 0,
        up_pos: 0,
        up_neg: 0,
    };
    for tp in pair.long..=(n - lag) {
        c.valid += 1;
        let d = delta_v(returns, spec, pair, tp);
        let up = r(returns, tp + lag) > 0.0;
        if d > 0.0 {
            c.pos += 1;
            c.up_pos += up as usize;
        } else if d < 0.0 {
            c.neg += 1;
            c.up_neg += up as usize;
        }
    }
    c
}

/// `P0(t)` over the nonzero-`Δv` days; `NaN` when there are none.
pub fn p0(returns: &[f64], spec: VolatilitySpec, pair: WindowPair, lag: usize) -> f64 {
    let c = counts(returns, spec, pair, lag);
    if c.pos + c.neg == 0 {
        f64::NAN
    } else {
        (c.up_pos + c.up_neg) as f64 / (c.pos + c.neg) as f64
    }
}

/// Observable value at one lag; `NaN` where undefined.
pub fn observable(returns: &[f64], spec: VolatilitySpec, pair: WindowPair, obs: Observable, lag: usize) -> f64 {
    let n = returns.len();
    match obs {
        Observable::DeltaP | Observable::DeltaP1 | Observable::DeltaP2 => {
            let c = counts(returns, spec, pair, lag);
            if c.pos == 0 || c.neg == 0 {
                f64::NAN
            } else {
                c.up_pos as f64 / c.pos as f64 - c.up_neg as f64 / c.neg as f64
            }
        }
        Observable::F | Observable::F1 => {
            let mut s = 0.0;
            let mut k = 0usize;
            for tp in pair.long..=(n - lag) {
                s += delta_v(returns, spec, pair, tp) * r(returns, tp + lag);
                k += 1;
            }
            s / k as f64
        }
        Observable::G => {
            let (mut agree, mut disagree) = (0i64, 0i64);
            for tp in pair.long..=(n - lag) {
                match sign(delta_v(returns, spec, pair, tp)) * sign(r(returns, tp + lag)) {
                    1 => agree += 1,
                    -1 => disagree += 1,
                    _ => {}
                }
            }
            if agree + disagree == 0 {
                f64::NAN
            } else {
                (agree - disagree) as f64 / (agree + disagree) as f64
            }
        }
        Observable::H => {
            let mut s = 0.0;
            let mut k = 0usize;
            for tp in pair.long..=(n - lag) {
                match sign(delta_v(returns, spec, pair, tp)) {
                    1 => s += r(returns, tp + lag),
                    -1 => s -= r(returns, tp + lag),
                    _ => {}
                }
                k += 1;
            }
            s / k as f64
        }
        Observable::LocalF => {
            let first = match spec.kind {
                VolatilityKind::RmsWindow => spec.m,
                _ => 1,
            };
            let mut s = 0.0;
            let mut k = 0usize;
            for tp in first..=(n - lag) {
                let v = match spec.kind {
                    VolatilityKind::RmsWindow => v1(returns, spec.m, tp),
                    _ => r(returns, tp).abs(),
                };
                s += v * r(returns, tp + lag);
                k += 1;
            }
            s / k as f64
        }
    }
}

/// Exact equality, with `NaN` matching `NaN`.
pub fn same(a: f64, b: f64) -> bool {
    (a.is_nan() && b.is_nan()) || a == b
}

/// One randomized equivalence case.
#[derive(Debug, Clone)]
pub struct Case {
    pub returns: Vec<f64>,
    pub spec: VolatilitySpec,
    pub pair: WindowPair,
    pub lag: usize,
}

/// Series of length at most 50, sometimes quantized so that exact ties,
/// zero returns and zero `Δv` occur.
pub fn random_case<R: rand::Rng>(rng: &mut R) -> Case {
    use rand_distr::{Distribution, StandardNormal};
    let n = rng.random_range(6..=50);
    let quantized = rng.random_bool(0.4);
    let returns: Vec<f64> = (0..n)
        .map(|_| {
            if quantized {
                rng.random_range(-2i32..=2) as f64 * 0.5
            } else {
                StandardNormal.sample(rng)
            }
        })
        .collect();
    let spec = match rng.random_range(0..3) {
        0 => VolatilitySpec::abs(),
        1 => VolatilitySpec::rms_window(rng.random_range(1..=3)).unwrap(),
        _ => VolatilitySpec::rms_cumulative(),
    };
    let min_short = spec.min_window();
    let long = rng.random_range(min_short + 1..n);
    let short = rng.random_range(min_short..long);
    let lag = rng.random_range(1..=n - long);
    Case {
        returns,
        spec,
        pair: WindowPair::new(short, long).unwrap(),
        lag,
    }
}

/// Observables defined with the case's volatility estimator.
pub fn observables_for(spec: VolatilitySpec) -> Vec<Observable> {
    Observable::ALL
        .into_iter()
        .filter(|o| o.check_volatility(spec).is_ok())
        .collect()
}
