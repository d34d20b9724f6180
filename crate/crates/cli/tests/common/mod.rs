#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chrono::{Days, NaiveDate};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_volret"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

/// Writes `n` two-column price files of `len` closes driven by i.i.d.
/// Gaussian log-returns.
pub fn write_price_panel(dir: &Path, n: usize, len: usize, seed: u64) -> Vec<PathBuf> {
    fs::create_dir_all(dir).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = NaiveDate::from_ymd_opt(2001, 1, 2).unwrap();
    (0..n)
        .map(|i| {
            let mut price = 100.0f64;
            let mut text = String::from("date,close\n");
            for d in 0..len {
                let z: f64 = StandardNormal.sample(&mut rng);
                price *= (0.01 * z).exp();
                let date = start.checked_add_days(Days::new(d as u64)).unwrap();
                text.push_str(&format!("{date},{price:.6}\n"));
            }
            let path = dir.join(format!("stock{i:03}.csv"));
            fs::write(&path, text).unwrap();
            path
        })
        .collect()
}

/// Every file under `root` with its bytes, sorted by relative path.
pub fn snapshot(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_path_buf();
                out.push((rel, fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}
