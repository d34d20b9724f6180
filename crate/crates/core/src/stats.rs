//! Per-lag Student's t-tests and shuffled-surrogate null testing.

use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::Serialize;
use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};
use crate::nonlocal::{lag_curve, LagCurve, Observable, WindowPair};
use crate::rng::derive_seed;
use crate::timeseries::{shuffle_values, VolatilitySpec};

pub const DEFAULT_ALPHA: f64 = 0.01;

/// Two-sided tail probability `P(|T| >= |t|)` for Student's t with `df`
/// degrees of freedom, through the regularized incomplete beta function.
pub fn two_sided_p(t: f64, df: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    if t.is_infinite() {
        return 0.0;
    }
    let x = df / (df + t * t);
    beta_reg(df / 2.0, 0.5, x).clamp(0.0, 1.0)
}

pub fn student_t_cdf(t: f64, df: f64) -> f64 {
    let tail = 0.5 * two_sided_p(t, df);
    if t >= 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TTestResult {
    pub lag: usize,
    pub t_stat: f64,
    pub p_value: f64,
    pub df: usize,
    /// Zero sample variance; the p-value is 0 or 1 by convention.
    pub degenerate: bool,
}

/// One-sample two-sided t-test of the values against mean zero.
pub fn t_test(lag: usize, values: &[f64]) -> Result<TTestResult> {
    let n = values.len();
    if n < 2 {
        return Err(Error::TooShort { needed: 2, got: n });
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    let df = n - 1;
    if var == 0.0 {
        let (t_stat, p_value) = if mean == 0.0 {
            (0.0, 1.0)
        } else {
            (mean.signum() * f64::INFINITY, 0.0)
        };
        return Ok(TTestResult {
            lag,
            t_stat,
            p_value,
            df,
            degenerate: true,
        });
    }
    let t_stat = mean / (var.sqrt() / (n as f64).sqrt());
    Ok(TTestResult {
        lag,
        t_stat,
        p_value: two_sided_p(t_stat, df as f64),
        df,
        degenerate: false,
    })
}

/// Values of every unit at lag `t`, skipping undefined entries.
fn column(curves: &[LagCurve], t: usize) -> Result<Vec<f64>> {
    curves
        .iter()
        .map(|c| c.at(t).ok_or(Error::LagMismatch(t, c.t_max())))
        .filter(|v| !matches!(v, Ok(x) if x.is_nan()))
        .collect()
}

/// t-test across units at every lag in `lags`.
pub fn t_tests(curves: &[LagCurve], lags: RangeInclusive<usize>) -> Result<Vec<TTestResult>> {
    lags.map(|t| t_test(t, &column(curves, t)?)).collect()
}

/// True iff every lag in `lags` is significant at `alpha`.
pub fn confirm_nonzero(curves: &[LagCurve], lags: RangeInclusive<usize>, alpha: f64) -> Result<bool> {
    Ok(t_tests(curves, lags)?.iter().all(|r| r.p_value < alpha))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurrogateReport {
    pub observable: Observable,
    pub pair: WindowPair,
    pub n_units: usize,
    pub n_shuffles: usize,
    pub alpha: f64,
    /// Cross-sectional mean curve of each shuffle.
    pub null_curves: Vec<Vec<f64>>,
    /// Per-lag p-values of each shuffle.
    pub p_values: Vec<Vec<f64>>,
    /// Fraction of lags with `p < alpha` in each shuffle.
    pub significant_fraction: Vec<f64>,
    /// Fraction over all shuffles and lags.
    pub overall_fraction: f64,
}

/// Recomputes the observable on time-shuffled copies of every unit.
///
/// With two or more units the per-lag t-test runs across units within each
/// shuffle. A single unit is tested across shuffles instead, and the
/// per-shuffle fractions then all equal the overall fraction.
#[allow(clippy::too_many_arguments)]
pub fn surrogate_null(
    units: &[&[f64]],
    spec: VolatilitySpec,
    pair: WindowPair,
    observable: Observable,
    t_max: usize,
    n_shuffles: usize,
    seed: u64,
    alpha: f64,
) -> Result<SurrogateReport> {
    if n_shuffles == 0 {
        return Err(Error::InvalidParameter("n_shuffles must be >= 1".into()));
    }
    if units.is_empty() {
        return Err(Error::InvalidParameter("no input series".into()));
    }
    let n_units = units.len();
    let per_shuffle: Vec<Vec<LagCurve>> = (0..n_shuffles)
        .into_par_iter()
        .map(|s| {
            units
                .iter()
                .enumerate()
                .map(|(u, r)| {
                    let shuffled = shuffle_values(r, derive_seed(seed, (s * n_units + u) as u64));
                    lag_curve(&shuffled, spec, pair, observable, t_max)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let null_curves: Vec<Vec<f64>> = per_shuffle
        .iter()
        .map(|cs| crate::detect::cross_sectional_average(cs).map(|x| x.mean))
        .collect::<Result<_>>()?;

    let p_values: Vec<Vec<f64>> = if n_units >= 2 {
        per_shuffle
            .iter()
            .map(|cs| Ok(t_tests(cs, 1..=t_max)?.iter().map(|r| r.p_value).collect()))
            .collect::<Result<_>>()?
    } else {
        let flat: Vec<LagCurve> = per_shuffle.into_iter().flatten().collect();
        if flat.len() < 2 {
            return Err(Error::InvalidParameter(
                "a single unit needs at least two shuffles to test".into(),
            ));
        }
        let p: Vec<f64> = t_tests(&flat, 1..=t_max)?.iter().map(|r| r.p_value).collect();
        vec![p; n_shuffles]
    };

    let frac = |ps: &[f64]| ps.iter().filter(|&&p| p < alpha).count() as f64 / ps.len() as f64;
    let significant_fraction: Vec<f64> = p_values.iter().map(|p| frac(p)).collect();
    let overall_fraction = significant_fraction.iter().sum::<f64>() / n_shuffles as f64;
    Ok(SurrogateReport {
        observable,
        pair,
        n_units,
        n_shuffles,
        alpha,
        null_curves,
        p_values,
        significant_fraction,
        overall_fraction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn symmetric_values_give_p_one() {
        let r = t_test(1, &[0.3, -0.3, 0.1, -0.1]).unwrap();
        assert_eq!(r.t_stat, 0.0);
        assert_abs_diff_eq!(r.p_value, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn degenerate_samples() {
        let r = t_test(1, &[1.0, 1.0, 1.0]).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.p_value, 0.0);
        let r = t_test(1, &[0.0, 0.0]).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.p_value, 1.0);
        assert!(t_test(1, &[1.0]).is_err());
    }

    #[test]
    fn four_point_example() {
        let r = t_test(3, &[0.01, 0.02, 0.03, 0.04]).unwrap();
        assert_eq!(r.df, 3);
        assert_abs_diff_eq!(r.t_stat, 15.0f64.sqrt(), epsilon = 1e-12);
        // Closed form for df = 3:
        // P(|T| > t) = 1 - (2/π)[atan(u) + u/(1+u²)], u = t/√3.
        let u = r.t_stat / 3.0f64.sqrt();
        let exact = 1.0 - 2.0 / std::f64::consts::PI * (u.atan() + u / (1.0 + u * u));
        assert_abs_diff_eq!(r.p_value, exact, epsilon = 1e-13);
        assert_abs_diff_eq!(r.p_value, 0.0305, epsilon = 5e-5);
    }

    #[test]
    fn cauchy_closed_form() {
        for t in [-7.0_f64, -1.0, 0.0, 0.5, 3.0] {
            let exact = 0.5 + t.atan() / std::f64::consts::PI;
            assert_abs_diff_eq!(student_t_cdf(t, 1.0), exact, epsilon = 1e-14);
        }
    }

    #[test]
    fn strong_signal_is_confirmed() {
        // mean 0.01, sd 0.01, 200 units: t ≈ √200 ≈ 14.1.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let curves: Vec<LagCurve> = (0..200)
            .map(|_| {
                let values = (0..10)
                    .map(|_| { let z: f64 = StandardNormal.sample(&mut rng); 0.01 + 0.01 * z })
                    .collect();
                test_curve(values)
            })
            .collect();
        assert!(confirm_nonzero(&curves, 1..=10, DEFAULT_ALPHA).unwrap());
        let mut weak = curves.clone();
        for c in weak.iter_mut() {
            c.values[4] -= 0.01;
        }
        assert!(!confirm_nonzero(&weak, 1..=10, DEFAULT_ALPHA).unwrap());
    }

    fn test_curve(values: Vec<f64>) -> LagCurve {
        let n = values.len();
        LagCurve {
            observable: Observable::DeltaP,
            pair: WindowPair { short: 1, long: 2 },
            spec: VolatilitySpec::abs(),
            values,
            counts_pos: vec![0; n],
            counts_neg: vec![0; n],
            p0: vec![0.5; n],
        }
    }

    #[test]
    fn surrogate_preconditions_and_determinism() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let data: Vec<Vec<f64>> = (0..4)
            .map(|_| (0..300).map(|_| -> f64 { StandardNormal.sample(&mut rng) }).collect())
            .collect();
        let units: Vec<&[f64]> = data.iter().map(|d| d.as_slice()).collect();
        let pair = WindowPair::new(3, 40).unwrap();
        let run = |n, seed| surrogate_null(&units, VolatilitySpec::abs(), pair, Observable::DeltaP, 20, n, seed, 0.01);
        assert!(run(0, 1).is_err());
        let a = run(3, 1).unwrap();
        assert_eq!(a, run(3, 1).unwrap());
        assert_eq!(a.null_curves.len(), 3);
        assert_ne!(a.null_curves, run(3, 2).unwrap().null_curves);

        let single = surrogate_null(&units[..1], VolatilitySpec::abs(), pair, Observable::DeltaP, 20, 5, 1, 0.01).unwrap();
        assert_eq!(single.p_values.len(), 5);
    }

    proptest! {
        #[test]
        fn scale_and_sign_invariance(v in prop::collection::vec(-1.0f64..1.0, 3..40), k in 0.01f64..100.0) {
            let a = t_test(1, &v).unwrap();
            prop_assume!(!a.degenerate);
            let scaled: Vec<f64> = v.iter().map(|x| x * k).collect();
            let b = t_test(1, &scaled).unwrap();
            prop_assert!((a.t_stat - b.t_stat).abs() <= 1e-9 * a.t_stat.abs().max(1.0));
            prop_assert!((a.p_value - b.p_value).abs() <= 1e-9);
            let neg: Vec<f64> = v.iter().map(|x| -x).collect();
            let c = t_test(1, &neg).unwrap();
            prop_assert_eq!(c.t_stat, -a.t_stat);
            prop_assert_eq!(c.p_value, a.p_value);
            prop_assert!((0.0..=1.0).contains(&a.p_value));
        }
    }
}
