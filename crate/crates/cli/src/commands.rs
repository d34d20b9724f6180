use std::path::Path;

use serde::Serialize;

use volret::abm::{ensemble, sample_seeds, SimConfig};
use volret::detect::{classify_values, cross_sectional_average, smooth3_values, DetectionResult, Landscape};
use volret::format::{sig15, write_series};
use volret::nonlocal::{Observable, WindowPair};
use volret::scan::{ensemble_landscape, panel};
use volret::stats::{surrogate_null, t_test, TTestResult};

use crate::args::{Analysis, Flags, SIMULATION_PAIR};
use crate::error::CliError;
use crate::inputs::{self, InputFormat, Unit};
use crate::output::{write_curve, write_json, write_mean, write_ttests, Output};

fn core<T>(r: volret::Result<T>) -> Result<T, CliError> {
    r.map_err(CliError::from_core)
}

fn slices(units: &[Unit]) -> Vec<&[f64]> {
    units.iter().map(|u| u.returns.values()).collect()
}

fn load_inputs(flags: &Flags) -> Result<Vec<Unit>, CliError> {
    let format = flags.format()?;
    let args = flags.inputs()?;
    inputs::load(&args, format)
}

#[derive(Debug, Serialize)]
struct AnalyzeSummary {
    observable: Observable,
    volatility: String,
    #[serde(rename = "T1")]
    t1: usize,
    #[serde(rename = "T2")]
    t2: usize,
    t_max: usize,
    tau: usize,
    alpha: f64,
    n_units: usize,
    units: Vec<String>,
    /// Lags whose t-test across units is below `alpha`; absent for one unit.
    significant_lags: Option<Vec<usize>>,
    /// Detection on the smoothed mean curve; absent when it cannot run.
    detection: Option<DetectionResult>,
}

/// Per-unit curves, their cross-sectional mean and per-lag t-tests.
pub fn analyze(flags: &Flags) -> Result<(), CliError> {
    let units = load_inputs(flags)?;
    analyze_units(flags, &units, None, flags.out())
}

fn analyze_units(flags: &Flags, units: &[Unit], default_pair: Option<(usize, usize)>, out: &Path) -> Result<(), CliError> {
    let a = flags.analysis()?;
    let pair = flags.pair(a.spec, default_pair)?;
    let curves = core(panel(&slices(units), a.spec, &[pair], a.observable, a.t_max))?
        .pop()
        .expect("one cell per pair");
    for (u, c) in units.iter().zip(&curves) {
        write_curve(out.join("curves").join(format!("{}.csv", u.name)), c)?;
    }
    let cs = core(cross_sectional_average(&curves))?;
    write_mean(out.join("mean.csv"), &cs, units.len())?;

    let significant_lags = if units.len() >= 2 {
        let rows = lag_tests(&curves, a.t_max);
        write_ttests(out.join("ttest.csv"), &rows)?;
        Some(rows.iter().filter(|r| r.p_value < a.alpha).map(|r| r.lag).collect())
    } else {
        None
    };

    let detection = if a.t_max > a.tau && cs.mean.iter().all(|v| v.is_finite()) {
        Some(core(classify_values(&smooth3_values(&cs.mean), a.tau))?)
    } else {
        None
    };
    write_json(
        out.join("summary.json"),
        &AnalyzeSummary {
            observable: a.observable,
            volatility: a.spec.to_string(),
            t1: pair.short,
            t2: pair.long,
            t_max: a.t_max,
            tau: a.tau,
            alpha: a.alpha,
            n_units: units.len(),
            units: units.iter().map(|u| u.name.clone()).collect(),
            significant_lags,
            detection,
        },
    )
}

/// t-test across units at each lag; lags with fewer than two defined values
/// are reported as `nan`.
fn lag_tests(curves: &[volret::nonlocal::LagCurve], t_max: usize) -> Vec<TTestResult> {
    (1..=t_max)
        .map(|lag| {
            let column: Vec<f64> = curves
                .iter()
                .filter_map(|c| c.at(lag))
                .filter(|v| !v.is_nan())
                .collect();
            t_test(lag, &column).unwrap_or(TTestResult {
                lag,
                t_stat: f64::NAN,
                p_value: f64::NAN,
                df: 0,
                degenerate: true,
            })
        })
        .collect()
}

#[derive(Debug, Serialize)]
struct Cell {
    #[serde(rename = "T1")]
    t1: usize,
    #[serde(rename = "T2")]
    t2: usize,
}

impl From<WindowPair> for Cell {
    fn from(p: WindowPair) -> Self {
        Self { t1: p.short, t2: p.long }
    }
}

#[derive(Debug, Serialize)]
struct LandscapeSummary {
    observable: Observable,
    volatility: String,
    n_units: usize,
    n_cells: usize,
    ap0_bar: f64,
    max_ap0: Option<f64>,
    argmax: Option<Cell>,
    effective_region: Vec<Cell>,
}

fn span(values: impl Iterator<Item = usize>) -> String {
    let v: Vec<usize> = values.collect();
    match (v.iter().min(), v.iter().max()) {
        (Some(lo), Some(hi)) => format!("{lo}-{hi}"),
        _ => "-".into(),
    }
}

/// `name,period,T1,T2,max_ap0` in the layout of a per-market summary table.
fn table_row(units: &[Unit], land: &Landscape) -> String {
    let name = match units {
        [one] => one.name.clone(),
        many => format!("{} series", many.len()),
    };
    let period = if units.iter().all(|u| u.period.is_some()) {
        let first = units.iter().filter_map(|u| u.period.as_ref().map(|p| &p.0[..4])).min();
        let last = units.iter().filter_map(|u| u.period.as_ref().map(|p| &p.1[..4])).max();
        match (first, last) {
            (Some(a), Some(b)) => format!("{a}-{b}"),
            _ => String::new(),
        }
    } else {
        String::new()
    };
    let region = land.effective_region();
    let max = land.max_cell().map_or("0".to_string(), |c| format!("{:.3}", c.ap0));
    format!(
        "{name},{period},{},{},{max}",
        span(region.iter().map(|p| p.short)),
        span(region.iter().map(|p| p.long))
    )
}

/// Amplitude of the mean curve at every grid cell after both detection passes.
pub fn landscape(flags: &Flags) -> Result<(), CliError> {
    let a = flags.analysis()?;
    let pairs = flags.grid(a.spec)?;
    let units = load_inputs(flags)?;
    let land = core(ensemble_landscape(&slices(&units), a.spec, &pairs, a.observable, a.t_max, a.tau))?;
    let out = flags.out();

    let mut csv = Output::create(out.join("landscape.csv"))?;
    csv.line("T1,T2,ap0")?;
    for c in &land.cells {
        csv.line(&format!("{},{},{}", c.pair.short, c.pair.long, sig15(c.ap0)))?;
    }
    csv.finish()?;

    let max = land.max_cell();
    write_json(
        out.join("landscape.json"),
        &LandscapeSummary {
            observable: a.observable,
            volatility: a.spec.to_string(),
            n_units: units.len(),
            n_cells: land.cells.len(),
            ap0_bar: land.ap0_bar,
            max_ap0: max.map(|c| c.ap0),
            argmax: max.map(|c| c.pair.into()),
            effective_region: land.effective_region().into_iter().map(Cell::from).collect(),
        },
    )?;

    let mut table = Output::create(out.join("table.csv"))?;
    table.line("name,period,T1,T2,max_ap0")?;
    table.line(&table_row(&units, &land))?;
    table.finish()
}

#[derive(Debug, Serialize)]
struct Manifest {
    config: SimConfig,
    seed: u64,
    samples: usize,
    sample_seeds: Vec<u64>,
    discarded: usize,
    kept: usize,
    files: Vec<String>,
}

/// Simulation ensemble, its manifest and optionally a chained analysis.
pub fn simulate(flags: &Flags) -> Result<(), CliError> {
    let config = flags.sim_config()?;
    let samples = flags.samples()?;
    if flags.analyze {
        // Fail on bad analysis flags before spending time on the simulation.
        let a = flags.analysis()?;
        flags.pair(a.spec, Some(SIMULATION_PAIR))?;
    }
    let series = core(ensemble(&config, samples, config.seed))?;
    let out = flags.out();
    let width = samples.saturating_sub(1).to_string().len().max(4);
    let mut files = Vec::with_capacity(samples);
    for (i, s) in series.iter().enumerate() {
        let name = format!("series/sample_{i:0width$}.csv");
        let mut file = Output::create(out.join(&name))?;
        let path = out.join(&name);
        write_series(file.writer(), 1, s.values()).map_err(|e| CliError::io(&path, e))?;
        file.finish()?;
        files.push(name);
    }
    write_json(
        out.join("manifest.json"),
        &Manifest {
            config,
            seed: config.seed,
            samples,
            sample_seeds: sample_seeds(config.seed, samples),
            discarded: config.warmup_discard,
            kept: config.kept(),
            files: files.clone(),
        },
    )?;
    if flags.analyze {
        let written: Vec<String> = files
            .iter()
            .map(|f| out.join(f).to_string_lossy().into_owned())
            .collect();
        let units = inputs::load(&written, InputFormat::Returns)?;
        analyze_units(flags, &units, Some(SIMULATION_PAIR), &out.join("analysis"))?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct ShuffleSummary {
    observable: Observable,
    volatility: String,
    #[serde(rename = "T1")]
    t1: usize,
    #[serde(rename = "T2")]
    t2: usize,
    t_max: usize,
    seed: u64,
    n_units: usize,
    n_shuffles: usize,
    alpha: f64,
    significant_fraction: Vec<f64>,
    overall_fraction: f64,
}

/// Null distribution of the observable under time shuffling.
pub fn shuffle_test(flags: &Flags) -> Result<(), CliError> {
    let Analysis {
        observable,
        spec,
        t_max,
        alpha,
        ..
    } = flags.analysis()?;
    let pair = flags.pair(spec, None)?;
    let n_shuffles = flags.shuffles()?;
    let seed = flags.seed.unwrap_or(0);
    let units = load_inputs(flags)?;
    let report = core(surrogate_null(
        &slices(&units),
        spec,
        pair,
        observable,
        t_max,
        n_shuffles,
        seed,
        alpha,
    ))?;
    let out = flags.out();
    let mut csv = Output::create(out.join("null_curves.csv"))?;
    csv.line("shuffle,t,mean,p_value")?;
    for (s, (curve, ps)) in report.null_curves.iter().zip(&report.p_values).enumerate() {
        for (k, (m, p)) in curve.iter().zip(ps).enumerate() {
            csv.line(&format!("{s},{},{},{}", k + 1, sig15(*m), sig15(*p)))?;
        }
    }
    csv.finish()?;
    write_json(
        out.join("report.json"),
        &ShuffleSummary {
            observable,
            volatility: spec.to_string(),
            t1: pair.short,
            t2: pair.long,
            t_max,
            seed,
            n_units: units.len(),
            n_shuffles,
            alpha,
            significant_fraction: report.significant_fraction,
            overall_fraction: report.overall_fraction,
        },
    )
}
