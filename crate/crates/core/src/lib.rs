//! Volatility-return correlations that are nonlocal in time.
//!
//! The crate is organised as a pipeline:
//!
//! - [`timeseries`]: price ingestion, log-returns, normalization, volatility
//!   estimators and shuffled surrogates.
//! - [`nonlocal`]: two-window volatility differences and the lagged
//!   observables built on them (probability differences, correlation
//!   functions and the local baseline).
//! - [`detect`]: the smoothing / sign-change / amplitude criteria that decide
//!   whether a lag curve is non-zero, and the `(T1, T2)` landscape.
//! - [`stats`]: per-lag Student's t-tests and surrogate null testing.
//! - [`abm`]: an agent-based market with herding and an asymmetric trading
//!   preference between volatile and stable markets.
//! - [`scan`]: batch evaluation of many window pairs over many series.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod abm;
pub mod detect;
pub mod error;
pub mod format;
pub mod nonlocal;
pub mod rng;
pub mod scan;
pub mod stats;
pub mod timeseries;

pub use error::{Error, Result};
