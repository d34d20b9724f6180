//! Command-line flags, the JSON config file, and their merge.
//!
//! Every flag has a config-file key of the same name. A flag given on the
//! command line wins over the file; anything left unset falls back to the
//! per-command default.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Deserialize;

use volret::abm::SimConfig;
use volret::nonlocal::{Grid, Observable, WindowPair};
use volret::timeseries::VolatilitySpec;

use crate::error::CliError;
use crate::inputs::InputFormat;

pub const DEFAULT_T_MAX: usize = 150;
pub const DEFAULT_SHUFFLES: usize = 50;
pub const DEFAULT_SAMPLES: usize = 100;
pub const DEFAULT_OUT: &str = "volret_out";
/// Window pair used when a simulation is analyzed without an explicit pair.
pub const SIMULATION_PAIR: (usize, usize) = (3, 150);

#[derive(Debug, Parser)]
#[command(name = "volret", version, about = "Nonlocal volatility-return correlations in daily prices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Lag curves for one window pair, their cross-sectional mean and per-lag t-tests.
    Analyze,
    /// Detection amplitudes over a grid of window pairs.
    Landscape,
    /// Agent-based simulation ensemble; `--analyze` chains an analysis of the output.
    Simulate,
    /// The observable on time-shuffled surrogates of the inputs.
    ShuffleTest,
}

#[derive(Debug, Clone, Default, clap::Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Flags {
    /// JSON file with defaults for any of these flags.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// Input files, directories of `.csv` files, or glob patterns.
    #[arg(long, global = true, num_args = 1.., value_delimiter = ',')]
    #[serde(default, deserialize_with = "one_or_many")]
    pub input: Option<Vec<String>>,
    /// two-column, yahoo, or returns (an `index,value` dump).
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// DELTA_P, DELTA_P1, DELTA_P2, F, F1, G, H or LOCAL_F.
    #[arg(long, global = true)]
    pub observable: Option<String>,
    /// abs, rms:m or rmscum.
    #[arg(long, global = true)]
    pub vol: Option<String>,
    #[arg(long, global = true)]
    pub t1: Option<usize>,
    #[arg(long, global = true)]
    pub t2: Option<usize>,
    /// `a:b[:step],c:d[:step]` ranges for T1 and T2.
    #[arg(long, global = true)]
    pub grid: Option<String>,
    #[arg(long, global = true)]
    pub tmax: Option<usize>,
    #[arg(long, global = true)]
    pub tau: Option<usize>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    pub shuffles: Option<usize>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub c: Option<f64>,
    #[arg(long, global = true)]
    pub agents: Option<usize>,
    #[arg(long, global = true)]
    pub horizon: Option<usize>,
    #[arg(long, global = true)]
    pub eta: Option<f64>,
    #[arg(long, global = true)]
    pub p: Option<f64>,
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    #[arg(long, global = true)]
    pub discard: Option<usize>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to the available hardware.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// After `simulate`, run `analyze` on the generated series.
    #[arg(long, global = true)]
    #[serde(default)]
    pub analyze: bool,
}

fn one_or_many<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<Vec<String>>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(String),
        Many(Vec<String>),
    }
    Ok(Option::<OneOrMany>::deserialize(d)?.map(|v| match v {
        OneOrMany::One(s) => vec![s],
        OneOrMany::Many(v) => v,
    }))
}

impl Flags {
    /// Fills every unset field from `file`.
    fn or(self, file: Flags) -> Flags {
        Flags {
            config: self.config,
            input: self.input.or(file.input),
            format: self.format.or(file.format),
            observable: self.observable.or(file.observable),
            vol: self.vol.or(file.vol),
            t1: self.t1.or(file.t1),
            t2: self.t2.or(file.t2),
            grid: self.grid.or(file.grid),
            tmax: self.tmax.or(file.tmax),
            tau: self.tau.or(file.tau),
            alpha: self.alpha.or(file.alpha),
            seed: self.seed.or(file.seed),
            samples: self.samples.or(file.samples),
            shuffles: self.shuffles.or(file.shuffles),
            c: self.c.or(file.c),
            agents: self.agents.or(file.agents),
            horizon: self.horizon.or(file.horizon),
            eta: self.eta.or(file.eta),
            p: self.p.or(file.p),
            steps: self.steps.or(file.steps),
            discard: self.discard.or(file.discard),
            out: self.out.or(file.out),
            jobs: self.jobs.or(file.jobs),
            analyze: self.analyze || file.analyze,
        }
    }

    /// Merges in the config file named by `--config`, if any.
    pub fn resolve(self) -> Result<Flags, CliError> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let text = fs::read_to_string(&path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let file: Flags = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Ok(self.or(file))
    }
}

fn config<T>(r: volret::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Config(e.to_string()))
}

/// Fully defaulted analysis settings shared by every command.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub observable: Observable,
    pub spec: VolatilitySpec,
    pub t_max: usize,
    pub tau: usize,
    pub alpha: f64,
}

impl Flags {
    pub fn analysis(&self) -> Result<Analysis, CliError> {
        let observable: Observable = match &self.observable {
            Some(s) => config(s.parse())?,
            None => Observable::DeltaP,
        };
        let spec = match &self.vol {
            Some(s) => config(s.parse::<VolatilitySpec>())?,
            None => observable.default_volatility(),
        };
        config(observable.check_volatility(spec))?;
        let t_max = self.tmax.unwrap_or(DEFAULT_T_MAX);
        if t_max == 0 {
            return Err(CliError::Config("--tmax must be >= 1".into()));
        }
        let tau = self.tau.unwrap_or(volret::detect::DEFAULT_TAU);
        if tau == 0 {
            return Err(CliError::Config("--tau must be >= 1".into()));
        }
        let alpha = self.alpha.unwrap_or(volret::stats::DEFAULT_ALPHA);
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(CliError::Config(format!("--alpha must lie in (0, 1), got {alpha}")));
        }
        Ok(Analysis {
            observable,
            spec,
            t_max,
            tau,
            alpha,
        })
    }

    /// The single window pair, falling back to `default` when given.
    pub fn pair(&self, spec: VolatilitySpec, default: Option<(usize, usize)>) -> Result<WindowPair, CliError> {
        let (t1, t2) = match (self.t1, self.t2, default) {
            (Some(a), Some(b), _) => (a, b),
            (a, b, Some((da, db))) => (a.unwrap_or(da), b.unwrap_or(db)),
            _ => return Err(CliError::Config("--t1 and --t2 are required".into())),
        };
        let pair = config(WindowPair::new(t1, t2))?;
        if t1 < spec.min_window() {
            return Err(CliError::Config(format!(
                "T1={t1} is shorter than the volatility window m={}",
                spec.m
            )));
        }
        Ok(pair)
    }

    pub fn grid(&self, spec: VolatilitySpec) -> Result<Vec<WindowPair>, CliError> {
        let grid = match &self.grid {
            Some(s) => config(Grid::parse(s))?,
            None => Grid::paper(),
        };
        let pairs = grid.restricted_to(spec).pairs();
        if pairs.is_empty() {
            return Err(CliError::Config("the grid contains no valid window pair".into()));
        }
        Ok(pairs)
    }

    pub fn format(&self) -> Result<InputFormat, CliError> {
        match &self.format {
            Some(s) => s.parse(),
            None => Ok(InputFormat::default()),
        }
    }

    pub fn inputs(&self) -> Result<Vec<String>, CliError> {
        match &self.input {
            Some(v) if !v.is_empty() => Ok(v.clone()),
            _ => Err(CliError::Config("--input is required".into())),
        }
    }

    pub fn out(&self) -> &Path {
        self.out.as_deref().unwrap_or(Path::new(DEFAULT_OUT))
    }

    pub fn sim_config(&self) -> Result<SimConfig, CliError> {
        let d = SimConfig::default();
        let cfg = SimConfig {
            n_agents: self.agents.unwrap_or(d.n_agents),
            max_horizon: self.horizon.unwrap_or(d.max_horizon),
            eta: self.eta.unwrap_or(d.eta),
            p: self.p.unwrap_or(d.p),
            c: self.c.unwrap_or(d.c),
            total_steps: self.steps.unwrap_or(d.total_steps),
            warmup_discard: self.discard.unwrap_or(d.warmup_discard),
            seed: self.seed.unwrap_or(d.seed),
        };
        config(cfg.validate())?;
        Ok(cfg)
    }

    pub fn samples(&self) -> Result<usize, CliError> {
        match self.samples.unwrap_or(DEFAULT_SAMPLES) {
            0 => Err(CliError::Config("--samples must be >= 1".into())),
            n => Ok(n),
        }
    }

    pub fn shuffles(&self) -> Result<usize, CliError> {
        match self.shuffles.unwrap_or(DEFAULT_SHUFFLES) {
            0 => Err(CliError::Config("--shuffles must be >= 1".into())),
            n => Ok(n),
        }
    }
}
