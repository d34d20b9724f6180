//! Agent-based market with investment horizons, herding and an asymmetric
//! trading preference between volatile and stable markets.
//!
//! Each day the `N` agents are split into roughly `1/D` equally sized groups,
//! where the herding degree `D` is the magnitude of the horizon-weighted
//! return relative to `N`. Every group draws one decision (buy, sell or hold)
//! and the day's return is the net demand. The buy probability is tilted by
//! `c` times the perceived volatility `ξ` (recent volatility seen through all
//! horizons, relative to the background over the longest horizon) while the
//! total trading probability stays at `2p`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::timeseries::{normalize_values, ReturnSeries};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub n_agents: usize,
    pub max_horizon: usize,
    pub eta: f64,
    pub p: f64,
    pub c: f64,
    pub total_steps: usize,
    pub warmup_discard: usize,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_agents: 10_000,
            max_horizon: 150,
            eta: 1.12,
            p: 0.0154,
            c: 1.0 / 80.0,
            total_steps: 20_000,
            warmup_discard: 15_000,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.n_agents == 0 {
            return bad("n_agents must be >= 1".into());
        }
        if self.max_horizon == 0 {
            return bad("max_horizon must be >= 1".into());
        }
        if !(self.eta > 0.0) {
            return bad(format!("eta must be positive, got {}", self.eta));
        }
        if !(self.p > 0.0 && self.p < 0.5) {
            return bad(format!("p must lie in (0, 1/2), got {}", self.p));
        }
        if !(self.c.abs() <= 1.0) {
            return bad(format!("|c| must be <= 1, got {}", self.c));
        }
        if self.total_steps <= self.warmup_discard {
            return bad("total_steps must exceed warmup_discard".into());
        }
        if self.warmup_discard < self.max_horizon {
            return bad("warmup_discard must be >= max_horizon".into());
        }
        Ok(())
    }

    /// Number of returns kept after the warmup.
    pub fn kept(&self) -> usize {
        self.total_steps - self.warmup_discard
    }
}

/// `γ_i = i^-η / Σ_j j^-η` for `i = 1..=M`.
pub fn horizon_weights(max_horizon: usize, eta: f64) -> Result<Vec<f64>> {
    if max_horizon == 0 || !(eta > 0.0) {
        return Err(Error::InvalidParameter("need M >= 1 and eta > 0".into()));
    }
    let raw: Vec<f64> = (1..=max_horizon).map(|i| (i as f64).powf(-eta)).collect();
    let total: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|g| g / total).collect())
}

/// Horizon weights in the lag form used by the weighted return:
/// `w_j = Σ_{i > j} γ_i` (0-based `j`), and `k = 1 / Σ_j w_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnKernel {
    pub lag_weights: Vec<f64>,
    pub k: f64,
}

impl ReturnKernel {
    pub fn new(gamma: &[f64]) -> Self {
        let mut lag_weights = vec![0.0; gamma.len()];
        let mut acc = 0.0;
        for (j, g) in gamma.iter().enumerate().rev() {
            acc += g;
            lag_weights[j] = acc;
        }
        let k = 1.0 / lag_weights.iter().sum::<f64>();
        Self { lag_weights, k }
    }
}

/// `R'(t) = k Σ_i γ_i Σ_{j<i} R(t-j)`, evaluated as `k Σ_j w_j R(t-j)`.
/// `history` is chronological and must hold at least `M` values; only the
/// last `M` are read.
pub fn weighted_return(history: &[f64], kernel: &ReturnKernel) -> f64 {
    let m = kernel.lag_weights.len();
    debug_assert!(history.len() >= m);
    let recent = &history[history.len() - m..];
    let s: f64 = kernel
        .lag_weights
        .iter()
        .zip(recent.iter().rev())
        .map(|(w, r)| w * r)
        .sum();
    kernel.k * s
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Herding {
    pub degree: f64,
    pub group_count: usize,
}

/// `D = |R'|/N`, split into `round(1/D)` groups clamped to `[1, N]`.
pub fn herding_degree(weighted_return: f64, n_agents: usize) -> Herding {
    let mag = weighted_return.abs();
    let degree = (mag / n_agents as f64).min(1.0);
    let group_count = if mag > 0.0 {
        let g = (n_agents as f64 / mag).round();
        g.clamp(1.0, n_agents as f64) as usize
    } else {
        n_agents
    };
    Herding { degree, group_count }
}

/// Coefficients turning a volatility history into `Σ_i γ_i V_i(t)`:
/// `u_j = Σ_{i >= j} γ_i / i`, applied to `V(t-j+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VolatilityKernel {
    pub coefficients: Vec<f64>,
}

impl VolatilityKernel {
    pub fn new(gamma: &[f64]) -> Self {
        let mut coefficients = vec![0.0; gamma.len()];
        let mut acc = 0.0;
        for (idx, g) in gamma.iter().enumerate().rev() {
            acc += g / (idx + 1) as f64;
            coefficients[idx] = acc;
        }
        Self { coefficients }
    }
}

/// `ξ(t) = Σ_i γ_i V_i(t) / V_M(t)`; `1` when the background `V_M` is zero.
/// `history` is chronological with at least `M` values.
pub fn perceived_volatility(history: &[f64], kernel: &VolatilityKernel) -> f64 {
    let m = kernel.coefficients.len();
    debug_assert!(history.len() >= m);
    let recent = &history[history.len() - m..];
    let background = recent.iter().sum::<f64>() / m as f64;
    if background == 0.0 {
        return 1.0;
    }
    let integrated: f64 = kernel
        .coefficients
        .iter()
        .zip(recent.iter().rev())
        .map(|(u, v)| u * v)
        .sum();
    integrated / background
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradingProbabilities {
    pub buy: f64,
    pub sell: f64,
}

/// `P_buy = p [c ξ + (1 - c)]` clamped to `[0, 2p]`, `P_sell = 2p - P_buy`.
pub fn trading_probabilities(xi: f64, p: f64, c: f64) -> TradingProbabilities {
    let buy = (p * (c * xi + (1.0 - c))).clamp(0.0, 2.0 * p);
    TradingProbabilities {
        buy,
        sell: 2.0 * p - buy,
    }
}

/// Net demand of `n_agents` split into `group_count` groups whose sizes
/// differ by at most one, each group buying, selling or holding as a block.
///
/// Only group sizes enter the return, so instead of assigning agents to
/// groups the buy/sell/hold counts are drawn per size class; this has the
/// same distribution as one draw per group.
pub fn grouped_return<R: Rng + ?Sized>(
    n_agents: usize,
    group_count: usize,
    probs: TradingProbabilities,
    rng: &mut R,
) -> i64 {
    let g = group_count.clamp(1, n_agents);
    let small = n_agents / g;
    let large_groups = n_agents % g;
    let trade = probs.buy + probs.sell;
    let buy_share = if trade > 0.0 { (probs.buy / trade).clamp(0.0, 1.0) } else { 0.5 };
    let mut net = 0i64;
    for (count, size) in [(g - large_groups, small), (large_groups, small + 1)] {
        if count == 0 {
            continue;
        }
        let traders = Binomial::new(count as u64, trade.clamp(0.0, 1.0))
            .expect("valid probability")
            .sample(rng);
        let buys = Binomial::new(traders, buy_share).expect("valid probability").sample(rng);
        let sells = traders - buys;
        net += size as i64 * (buys as i64 - sells as i64);
    }
    net
}

/// Evolving market: return history, volatility history and generator.
#[derive(Debug, Clone)]
pub struct SimState {
    config: SimConfig,
    gamma: Vec<f64>,
    returns_kernel: ReturnKernel,
    vol_kernel: VolatilityKernel,
    returns: Vec<f64>,
    volatility: Vec<f64>,
    herding: Herding,
    rng: ChaCha8Rng,
}

impl SimState {
    /// Seeds `M` standard-Gaussian returns; their magnitudes seed the
    /// volatility history.
    pub fn new(config: SimConfig) -> Result<Self> {
        config.validate()?;
        let gamma = horizon_weights(config.max_horizon, config.eta)?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let capacity = config.max_horizon + config.total_steps;
        let mut returns: Vec<f64> = Vec::with_capacity(capacity);
        returns.extend((0..config.max_horizon).map(|_| -> f64 { StandardNormal.sample(&mut rng) }));
        let mut volatility = Vec::with_capacity(capacity);
        volatility.extend(returns.iter().map(|r: &f64| r.abs()));
        let returns_kernel = ReturnKernel::new(&gamma);
        let herding = herding_degree(weighted_return(&returns, &returns_kernel), config.n_agents);
        Ok(Self {
            vol_kernel: VolatilityKernel::new(&gamma),
            returns_kernel,
            gamma,
            returns,
            volatility,
            herding,
            rng,
            config,
        })
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn k(&self) -> f64 {
        self.returns_kernel.k
    }

    /// Full return history including the Gaussian seed.
    pub fn returns(&self) -> &[f64] {
        &self.returns
    }

    pub fn weighted_return(&self) -> f64 {
        weighted_return(&self.returns, &self.returns_kernel)
    }

    /// Herding state that will govern the next step.
    pub fn herding(&self) -> Herding {
        self.herding
    }

    pub fn perceived_volatility(&self) -> f64 {
        perceived_volatility(&self.volatility, &self.vol_kernel)
    }

    pub fn next_probabilities(&self) -> TradingProbabilities {
        trading_probabilities(self.perceived_volatility(), self.config.p, self.config.c)
    }

    /// Advances one day and returns the new `R(t)`.
    pub fn step(&mut self) -> i64 {
        let probs = self.next_probabilities();
        let r = grouped_return(self.config.n_agents, self.herding.group_count, probs, &mut self.rng);
        self.returns.push(r as f64);
        self.volatility.push(r.unsigned_abs() as f64);
        self.herding = herding_degree(self.weighted_return(), self.config.n_agents);
        r
    }
}

/// Raw post-warmup returns `R(t)` of one run.
pub fn simulate_raw(config: &SimConfig) -> Result<Vec<f64>> {
    let mut state = SimState::new(*config)?;
    for _ in 0..config.total_steps {
        state.step();
    }
    let start = state.returns.len() - config.kept();
    Ok(state.returns.split_off(start))
}

/// Normalized post-warmup returns of one run.
pub fn simulate(config: &SimConfig) -> Result<ReturnSeries> {
    let raw = simulate_raw(config)?;
    normalize_values(&raw).map_err(|e| match e {
        Error::DegenerateSeries => Error::DegenerateSimulation,
        other => other,
    })
}

/// Seeds used by [`ensemble`].
pub fn sample_seeds(base_seed: u64, n_samples: usize) -> Vec<u64> {
    (0..n_samples as u64).map(|i| derive_seed(base_seed, i)).collect()
}

/// `n_samples` independent runs; sample `i` uses `derive_seed(base_seed, i)`.
pub fn ensemble(config: &SimConfig, n_samples: usize, base_seed: u64) -> Result<Vec<ReturnSeries>> {
    ensemble_with(config, n_samples, base_seed, simulate)
}

pub fn ensemble_raw(config: &SimConfig, n_samples: usize, base_seed: u64) -> Result<Vec<Vec<f64>>> {
    ensemble_with(config, n_samples, base_seed, simulate_raw)
}

fn ensemble_with<T: Send>(
    config: &SimConfig,
    n_samples: usize,
    base_seed: u64,
    run: fn(&SimConfig) -> Result<T>,
) -> Result<Vec<T>> {
    if n_samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be >= 1".into()));
    }
    config.validate()?;
    sample_seeds(base_seed, n_samples)
        .into_par_iter()
        .map(|seed| run(&SimConfig { seed, ..*config }))
        .collect()
}
