//! Batch evaluation over many window pairs and many series.
//!
//! Window averages are computed once per (series, window length) and shared
//! by every pair that uses that length. Across series the work runs in
//! parallel, but per-cell sums are always accumulated in series order, so the
//! results do not depend on the thread count.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::detect::{classify_values, landscape_from_detections, smooth3_values, Landscape};
use crate::error::{Error, Result};
use crate::nonlocal::{
    curve_from_delta_v, window_avg_series, DeltaVSeries, LagCurve, Observable, ReturnSigns, WindowAverage, WindowPair,
};
use crate::timeseries::VolatilitySpec;

/// One series with its window averages cached.
pub struct SeriesScanner<'a> {
    returns: &'a [f64],
    spec: VolatilitySpec,
    signs: ReturnSigns,
    averages: BTreeMap<usize, WindowAverage>,
}

impl<'a> SeriesScanner<'a> {
    pub fn new(returns: &'a [f64], spec: VolatilitySpec, pairs: &[WindowPair]) -> Result<Self> {
        let mut averages = BTreeMap::new();
        for p in pairs {
            WindowPair::new(p.short, p.long)?;
            if p.long >= returns.len() {
                return Err(Error::TooShort {
                    needed: p.long + 1,
                    got: returns.len(),
                });
            }
            for w in [p.short, p.long] {
                if let std::collections::btree_map::Entry::Vacant(slot) = averages.entry(w) {
                    slot.insert(window_avg_series(returns, spec, w)?);
                }
            }
        }
        Ok(Self {
            returns,
            spec,
            signs: ReturnSigns::new(returns),
            averages,
        })
    }

    pub fn delta_v(&self, pair: WindowPair) -> Result<DeltaVSeries> {
        let get = |w: usize| {
            self.averages
                .get(&w)
                .ok_or_else(|| Error::InvalidParameter(format!("window {w} was not prepared")))
        };
        DeltaVSeries::from_averages(get(pair.short)?, get(pair.long)?, self.spec, pair)
    }

    pub fn curve(&self, pair: WindowPair, observable: Observable, t_max: usize) -> Result<LagCurve> {
        observable.check_volatility(self.spec)?;
        curve_from_delta_v(self.returns, &self.signs, &self.delta_v(pair)?, observable, t_max)
    }
}

/// Curves of every unit at each pair: `out[cell][unit]`.
pub fn panel(
    units: &[&[f64]],
    spec: VolatilitySpec,
    pairs: &[WindowPair],
    observable: Observable,
    t_max: usize,
) -> Result<Vec<Vec<LagCurve>>> {
    observable.check_volatility(spec)?;
    let per_unit: Vec<Vec<LagCurve>> = units
        .par_iter()
        .map(|r| {
            let s = SeriesScanner::new(r, spec, pairs)?;
            pairs.iter().map(|&p| s.curve(p, observable, t_max)).collect()
        })
        .collect::<Result<_>>()?;
    let mut out: Vec<Vec<LagCurve>> = pairs.iter().map(|_| Vec::with_capacity(units.len())).collect();
    for unit in per_unit {
        for (cell, c) in out.iter_mut().zip(unit) {
            cell.push(c);
        }
    }
    Ok(out)
}

/// Cross-sectional mean curve at each pair, skipping undefined lags.
pub fn mean_curves(
    units: &[&[f64]],
    spec: VolatilitySpec,
    pairs: &[WindowPair],
    observable: Observable,
    t_max: usize,
) -> Result<Vec<Vec<f64>>> {
    observable.check_volatility(spec)?;
    if units.is_empty() {
        return Err(Error::InvalidParameter("no input series".into()));
    }
    let mut sums = vec![vec![0.0f64; t_max]; pairs.len()];
    let mut counts = vec![vec![0usize; t_max]; pairs.len()];
    let block = rayon::current_num_threads().max(1) * 2;
    for chunk in units.chunks(block) {
        let results: Vec<Vec<Vec<f64>>> = chunk
            .par_iter()
            .map(|r| {
                let s = SeriesScanner::new(r, spec, pairs)?;
                pairs
                    .iter()
                    .map(|&p| s.curve(p, observable, t_max).map(|c| c.values))
                    .collect()
            })
            .collect::<Result<_>>()?;
        for unit in results {
            for ((sum, count), values) in sums.iter_mut().zip(counts.iter_mut()).zip(unit) {
                for ((s, c), v) in sum.iter_mut().zip(count.iter_mut()).zip(values) {
                    if !v.is_nan() {
                        *s += v;
                        *c += 1;
                    }
                }
            }
        }
    }
    Ok(sums
        .into_iter()
        .zip(counts)
        .map(|(s, c)| {
            s.into_iter()
                .zip(c)
                .map(|(s, c)| if c > 0 { s / c as f64 } else { f64::NAN })
                .collect()
        })
        .collect())
}

/// Amplitude landscape of the cross-sectional mean curve over `pairs`.
pub fn ensemble_landscape(
    units: &[&[f64]],
    spec: VolatilitySpec,
    pairs: &[WindowPair],
    observable: Observable,
    t_max: usize,
    tau: usize,
) -> Result<Landscape> {
    let means = mean_curves(units, spec, pairs, observable, t_max)?;
    let detections = means
        .par_iter()
        .map(|m| classify_values(&smooth3_values(m), tau))
        .collect::<Result<Vec<_>>>()?;
    Ok(landscape_from_detections(
        observable,
        pairs.iter().copied().zip(detections).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detect::cross_sectional_average;
    use crate::nonlocal::lag_curve;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian_units(n_units: usize, len: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n_units)
            .map(|_| (0..len).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect()
    }

    #[test]
    fn scanner_matches_direct_curves() {
        let data = gaussian_units(1, 400, 1);
        let pairs = vec![WindowPair::new(3, 50).unwrap(), WindowPair::new(10, 60).unwrap()];
        let spec = VolatilitySpec::rms_window(3).unwrap();
        let s = SeriesScanner::new(&data[0], spec, &pairs).unwrap();
        for &p in &pairs {
            for obs in [Observable::DeltaP1, Observable::F1, Observable::G, Observable::H] {
                assert_eq!(s.curve(p, obs, 40).unwrap(), lag_curve(&data[0], spec, p, obs, 40).unwrap());
            }
        }
        assert!(s.curve(WindowPair::new(4, 50).unwrap(), Observable::DeltaP1, 5).is_err());
    }

    #[test]
    fn mean_curves_match_cross_section() {
        let data = gaussian_units(5, 300, 2);
        let units: Vec<&[f64]> = data.iter().map(|d| d.as_slice()).collect();
        let pairs = vec![WindowPair::new(2, 45).unwrap(), WindowPair::new(5, 70).unwrap()];
        let spec = VolatilitySpec::abs();
        let means = mean_curves(&units, spec, &pairs, Observable::DeltaP, 60).unwrap();
        let cells = panel(&units, spec, &pairs, Observable::DeltaP, 60).unwrap();
        for (m, cell) in means.iter().zip(&cells) {
            assert_eq!(*m, cross_sectional_average(cell).unwrap().mean);
        }
    }

    #[test]
    fn landscape_is_thread_count_independent() {
        let data = gaussian_units(6, 300, 3);
        let units: Vec<&[f64]> = data.iter().map(|d| d.as_slice()).collect();
        let pairs: Vec<WindowPair> = (1..=4).map(|t| WindowPair::new(t, 50).unwrap()).collect();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| ensemble_landscape(&units, VolatilitySpec::abs(), &pairs, Observable::F, 100, 44).unwrap())
        };
        assert_eq!(run(1), run(3));
    }
}
