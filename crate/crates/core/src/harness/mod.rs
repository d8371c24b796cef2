//! Reproducible experiments: configuration, sampling and CSV output.
//!
//! Randomness comes from ChaCha8 seeded with the configured seed. Every
//! independent unit of work (one sweep trial, one balance run, ...) gets its
//! own stream derived from its key, so results do not depend on scheduling
//! or on which other grid points are present.

mod demos;
mod fig7;
pub mod svg;

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{IntegratorConfig, SyncCriteria};

pub use demos::{
    run_balance, run_bifurcation2, run_powergrid, run_vehicles, BalanceInitial, BalanceOutput, BalanceParams, BalanceRow,
    BifurcationOutcome, BifurcationParams, BifurcationRow, PowerRun, VehicleParams, VehicleRun,
};
pub use fig7::{run_fig7, run_fig7_empirical, EmpiricalRow, Fig7Row, FIG7_HEADER};

/// Distribution of natural frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FrequencyDistribution {
    /// i.i.d. uniform on `[low, high]`.
    Uniform { low: f64, high: f64 },
    /// `⌊n/2⌋` oscillators at `−magnitude`, the rest at `+magnitude`.
    Bipolar { magnitude: f64 },
    /// Fixed values; `n` must equal their count.
    Explicit { values: Vec<f64> },
}

impl Default for FrequencyDistribution {
    fn default() -> Self {
        FrequencyDistribution::Uniform { low: -1.0, high: 1.0 }
    }
}

impl FrequencyDistribution {
    pub fn validate(&self) -> Result<()> {
        match self {
            FrequencyDistribution::Uniform { low, high } => {
                if !(low.is_finite() && high.is_finite() && low < high) {
                    return Err(Error::invalid(format!("uniform distribution needs low < high, got [{low}, {high}]")));
                }
            }
            FrequencyDistribution::Bipolar { magnitude } => {
                if !(magnitude.is_finite() && *magnitude > 0.0) {
                    return Err(Error::invalid("bipolar magnitude must be positive"));
                }
            }
            FrequencyDistribution::Explicit { values } => {
                if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::invalid("explicit frequencies must be a nonempty list of finite numbers"));
                }
            }
        }
        Ok(())
    }

    /// Draw `n` frequencies. Uniform samples use inversion, `low + (high − low)·u`
    /// with `u` the generator's standard `[0, 1)` double.
    pub fn sample(&self, n: usize, rng: &mut impl Rng) -> Result<Vec<f64>> {
        match self {
            FrequencyDistribution::Uniform { low, high } => {
                Ok((0..n).map(|_| low + (high - low) * rng.gen::<f64>()).collect())
            }
            FrequencyDistribution::Bipolar { magnitude } => {
                Ok((0..n).map(|i| if i < n / 2 { -magnitude } else { *magnitude }).collect())
            }
            FrequencyDistribution::Explicit { values } => {
                if values.len() != n {
                    return Err(Error::invalid(format!("{} explicit frequencies for n = {n}", values.len())));
                }
                Ok(values.clone())
            }
        }
    }

    /// Density at zero of the centered distribution, when it exists.
    pub fn density_at_center(&self) -> Option<f64> {
        match self {
            FrequencyDistribution::Uniform { low, high } => Some(1.0 / (high - low)),
            _ => None,
        }
    }
}

/// Sorted list of distinct oscillator counts.
///
/// Parses `"2,10,50"`, `"lo:hi:log"`, `"lo:hi:log:count"` and
/// `"lo:hi:lin:count"`; log grids default to 20 points before rounding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "NGridRepr", into = "Vec<usize>")]
pub struct NGrid(Vec<usize>);

#[derive(Deserialize)]
#[serde(untagged)]
enum NGridRepr {
    List(Vec<usize>),
    Text(String),
}

impl TryFrom<NGridRepr> for NGrid {
    type Error = Error;
    fn try_from(r: NGridRepr) -> Result<Self> {
        match r {
            NGridRepr::List(v) => NGrid::new(v),
            NGridRepr::Text(s) => s.parse(),
        }
    }
}

impl From<NGrid> for Vec<usize> {
    fn from(g: NGrid) -> Self {
        g.0
    }
}

impl Default for NGrid {
    fn default() -> Self {
        NGrid::log_spaced(2, 300, 20).expect("valid default grid")
    }
}

impl NGrid {
    pub fn new(mut v: Vec<usize>) -> Result<Self> {
        if v.is_empty() || v.iter().any(|&n| n < 2) {
            return Err(Error::invalid("grid entries must be at least 2"));
        }
        v.sort_unstable();
        v.dedup();
        Ok(NGrid(v))
    }

    pub fn log_spaced(lo: usize, hi: usize, count: usize) -> Result<Self> {
        if lo < 2 || hi < lo || count == 0 {
            return Err(Error::invalid(format!("bad log grid {lo}:{hi} with {count} points")));
        }
        if count == 1 || lo == hi {
            return NGrid::new(vec![lo, hi]);
        }
        let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
        let v = (0..count)
            .map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp().round() as usize)
            .collect();
        NGrid::new(v)
    }

    pub fn linear(lo: usize, hi: usize, count: usize) -> Result<Self> {
        if lo < 2 || hi < lo || count == 0 {
            return Err(Error::invalid(format!("bad linear grid {lo}:{hi} with {count} points")));
        }
        if count == 1 {
            return NGrid::new(vec![lo, hi]);
        }
        let v = (0..count)
            .map(|k| (lo as f64 + (hi - lo) as f64 * k as f64 / (count - 1) as f64).round() as usize)
            .collect();
        NGrid::new(v)
    }

    pub fn values(&self) -> &[usize] {
        &self.0
    }
}

impl FromStr for NGrid {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid(format!("cannot parse n grid {s:?}"));
        let num = |p: &str| p.trim().parse::<usize>().map_err(|_| bad());
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [single] => NGrid::new(single.split(',').map(num).collect::<Result<_>>()?),
            [lo, hi, kind] | [lo, hi, kind, _] => {
                let count = if parts.len() == 4 { num(parts[3])? } else { 20 };
                match kind.trim() {
                    "log" => NGrid::log_spaced(num(lo)?, num(hi)?, count),
                    "lin" => NGrid::linear(num(lo)?, num(hi)?, count),
                    _ => Err(bad()),
                }
            }
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Fig7,
    Bifurcation2,
    Vehicles,
    Powergrid,
    Balance,
}

/// Parameters shared by all experiments plus per-experiment tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<ExperimentKind>,
    pub n_grid: NGrid,
    pub trials: usize,
    pub distribution: FrequencyDistribution,
    pub seed: u64,
    pub integrator: IntegratorConfig,
    pub sync: SyncCriteria,
    /// Output directory.
    pub out: PathBuf,
    /// Also write SVG line plots next to the CSV files.
    pub svg: bool,
    /// Run the simulated critical-coupling search for grid points up to
    /// this n (0 disables it).
    pub empirical_max_n: usize,
    pub bifurcation: BifurcationParams,
    pub vehicles: VehicleParams,
    pub balance: BalanceParams,
    /// Model file for the power-grid demo.
    pub model: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: None,
            n_grid: NGrid::default(),
            trials: 1000,
            distribution: FrequencyDistribution::default(),
            seed: 0,
            integrator: IntegratorConfig::default(),
            sync: SyncCriteria::default(),
            out: PathBuf::from("."),
            svg: false,
            empirical_max_n: 0,
            bifurcation: BifurcationParams::default(),
            vehicles: VehicleParams::default(),
            balance: BalanceParams::default(),
            model: None,
        }
    }
}

impl ExperimentConfig {
    /// Load from TOML or JSON, chosen by file extension (TOML otherwise).
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let (cfg, _) = Self::load_with_keys(path)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Like [`ExperimentConfig::load`] without validation, also returning the
    /// top-level keys present in the file so callers can tell explicit
    /// settings from defaults.
    pub fn load_with_keys(path: impl AsRef<Path>) -> Result<(Self, BTreeSet<String>)> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        if path.extension().and_then(|e| e.to_str()) == Some("json") {
            let value: serde_json::Value = serde_json::from_str(&text)?;
            let keys = value.as_object().map(|o| o.keys().cloned().collect()).unwrap_or_default();
            Ok((serde_json::from_value(value)?, keys))
        } else {
            let table: toml::Table = toml::from_str(&text)?;
            let keys = table.keys().cloned().collect();
            Ok((toml::from_str(&text)?, keys))
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        self.distribution.validate()?;
        self.integrator.validate()?;
        if !(self.sync.tol > 0.0 && self.sync.window > 0.0) {
            return Err(Error::invalid("sync tolerance and window must be positive"));
        }
        Ok(())
    }

    /// Generator for the unit of work identified by `key`.
    pub fn rng(&self, key: u64) -> ChaCha8Rng {
        stream_rng(self.seed, key)
    }
}

/// ChaCha8 seeded by `seed` on stream `key`.
pub fn stream_rng(seed: u64, key: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(key);
    rng
}

/// Stream key for trial `trial` at grid point `n`.
pub(crate) fn trial_key(n: usize, trial: usize) -> u64 {
    ((n as u64) << 32) | trial as u64
}

pub(crate) fn uniform_phases(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..n).map(|_| std::f64::consts::TAU * rng.gen::<f64>()).collect()
}

/// Minimal CSV table with deterministic number formatting.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Csv { text: header.join(",") + "\n" }
    }

    pub fn row(&mut self, cells: &[String]) {
        let _ = writeln!(self.text, "{}", cells.join(","));
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        write_file(path, &self.text)
    }
}

pub(crate) fn write_file(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, text)?;
    Ok(())
}

pub(crate) fn opt17(x: Option<f64>) -> String {
    x.map(crate::integrate::fmt17).unwrap_or_default()
}
