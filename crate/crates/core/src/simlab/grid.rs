use std::collections::HashSet;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::models::SimModel;
use super::scenario::{run_scenario, NuisanceScenario, RejectionEstimate, SimScenario};
use crate::data::{Bandwidth, BootDist, ResidualMode, TestConfig, WeightSpec};
use crate::error::{Error, Result};

/// Bandwidth as written in a grid file: `"auto"` or a positive number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BandwidthSetting {
    Fixed(f64),
    Named(String),
}

/// Monte Carlo grid read from TOML. Cells are the cartesian product of
/// `models × scenarios × ns × deltas`.
///
/// ```toml
/// models = ["model2"]
/// deltas = [0.0, 0.5]
/// ns = [500, 1000]
/// scenarios = [1, 2, 3, 4]
/// reps = 500
/// boot = 200
/// alpha = 0.05
/// seed = 7
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimGrid {
    pub models: Vec<SimModel>,
    /// Defaults to each model's studied values.
    #[serde(default)]
    pub deltas: Option<Vec<f64>>,
    pub ns: Vec<usize>,
    #[serde(default = "all_scenarios")]
    pub scenarios: Vec<u8>,
    pub reps: usize,
    #[serde(default = "default_boot")]
    pub boot: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_boot_dist")]
    pub boot_dist: BootDist,
    #[serde(default = "default_residual")]
    pub residual: ResidualMode,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default = "default_trunc")]
    pub trunc: f64,
    #[serde(default)]
    pub bandwidth: Option<BandwidthSetting>,
}

fn all_scenarios() -> Vec<u8> {
    vec![1, 2, 3, 4]
}
fn default_boot() -> usize {
    TestConfig::default().boot_reps
}
fn default_alpha() -> f64 {
    TestConfig::default().alpha
}
fn default_boot_dist() -> BootDist {
    BootDist::TwoPoint
}
fn default_residual() -> ResidualMode {
    ResidualMode::Local
}
fn default_grid() -> usize {
    WeightSpec::DEFAULT_GRID
}
fn default_trunc() -> f64 {
    TestConfig::default().trunc_floor
}

/// Key identifying a finished cell in the output file.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct CellKey {
    model: String,
    scenario: u8,
    n: usize,
    delta_bits: u64,
}

impl CellKey {
    fn of(sc: &SimScenario) -> Self {
        Self {
            model: sc.model.to_string(),
            scenario: sc.scenario.index(),
            n: sc.n,
            delta_bits: sc.delta.to_bits(),
        }
    }
}

pub const OUTPUT_HEADER: [&str; 17] = [
    "model",
    "scenario",
    "n",
    "delta",
    "rate",
    "se",
    "rejections",
    "reps",
    "failed",
    "boot",
    "alpha",
    "seed",
    "boot_dist",
    "residual",
    "grid",
    "trunc",
    "bandwidth",
];

impl SimGrid {
    pub fn from_toml(text: &str) -> Result<Self> {
        let g: Self = toml::from_str(text).map_err(|e| Error::InvalidConfig(format!("grid file: {e}")))?;
        g.validate()?;
        Ok(g)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    fn bandwidth(&self) -> Result<Bandwidth> {
        match &self.bandwidth {
            None => Ok(Bandwidth::Auto),
            Some(BandwidthSetting::Named(s)) if s == "auto" => Ok(Bandwidth::Auto),
            Some(BandwidthSetting::Named(s)) => {
                Err(Error::InvalidConfig(format!("bandwidth must be \"auto\" or a number, got `{s}`")))
            }
            Some(BandwidthSetting::Fixed(h)) => Ok(Bandwidth::Fixed(*h)),
        }
    }

    pub fn test_config(&self) -> Result<TestConfig> {
        let cfg = TestConfig {
            bandwidth: self.bandwidth()?,
            boot_reps: self.boot,
            boot_dist: self.boot_dist,
            residual_mode: self.residual,
            alpha: self.alpha,
            trunc_floor: self.trunc,
            seed: self.seed,
            weight: None,
        };
        cfg.validate()?;
        if self.grid < 10 {
            return Err(Error::InvalidConfig(format!("grid needs at least 10 points, got {}", self.grid)));
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.models.is_empty() || self.ns.is_empty() || self.scenarios.is_empty() {
            return Err(Error::InvalidConfig("models, ns and scenarios must be non-empty".into()));
        }
        if self.reps == 0 {
            return Err(Error::InvalidConfig("reps must be positive".into()));
        }
        for &s in &self.scenarios {
            NuisanceScenario::from_index(s)?;
        }
        if let Some(d) = &self.deltas {
            if d.is_empty() || d.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidConfig("deltas must be finite and non-empty".into()));
            }
        }
        self.test_config().map(|_| ())
    }

    /// Cells in output order: model, scenario, n, delta.
    pub fn cells(&self) -> Result<Vec<SimScenario>> {
        let test = self.test_config()?;
        let mut out = Vec::new();
        for &model in &self.models {
            let deltas = self.deltas.clone().unwrap_or_else(|| model.studied_deltas().to_vec());
            for &s in &self.scenarios {
                let scenario = NuisanceScenario::from_index(s)?;
                for &n in &self.ns {
                    for &delta in &deltas {
                        out.push(SimScenario {
                            model,
                            scenario,
                            n,
                            delta,
                            reps: self.reps,
                            grid_points: self.grid,
                            test: test.clone(),
                        });
                    }
                }
            }
        }
        Ok(out)
    }

    fn record(&self, sc: &SimScenario, est: &RejectionEstimate) -> Vec<String> {
        let bw = match sc.test.bandwidth {
            Bandwidth::Auto => "auto".to_string(),
            Bandwidth::Fixed(h) => h.to_string(),
        };
        vec![
            sc.model.to_string(),
            sc.scenario.index().to_string(),
            sc.n.to_string(),
            sc.delta.to_string(),
            est.rate.to_string(),
            est.se.to_string(),
            est.rejections.to_string(),
            est.reps.to_string(),
            est.failed.to_string(),
            self.boot.to_string(),
            self.alpha.to_string(),
            self.seed.to_string(),
            match self.boot_dist {
                BootDist::TwoPoint => "twopoint".into(),
                BootDist::Rademacher => "rademacher".into(),
            },
            match self.residual {
                ResidualMode::Local => "local".into(),
                ResidualMode::Global => "global".into(),
            },
            self.grid.to_string(),
            self.trunc.to_string(),
            bw,
        ]
    }
}

fn finished_cells(path: &Path) -> Result<HashSet<CellKey>> {
    let mut done = HashSet::new();
    if !path.exists() {
        return Ok(done);
    }
    let mut rdr = csv::Reader::from_path(path)?;
    let header = rdr.headers()?.clone();
    if header.iter().ne(OUTPUT_HEADER.iter().copied()) {
        return Err(Error::InvalidData(format!(
            "{} exists but is not a simulation output file",
            path.display()
        )));
    }
    for rec in rdr.records() {
        let rec = rec?;
        let parse_err = |c: &str| Error::InvalidData(format!("{}: bad `{c}` value", path.display()));
        done.insert(CellKey {
            model: rec[0].to_string(),
            scenario: rec[1].parse().map_err(|_| parse_err("scenario"))?,
            n: rec[2].parse().map_err(|_| parse_err("n"))?,
            delta_bits: rec[3].parse::<f64>().map_err(|_| parse_err("delta"))?.to_bits(),
        });
    }
    Ok(done)
}

/// Runs every cell not already present in `out`, appending one row per cell
/// and flushing after each so an interrupted run resumes where it stopped.
/// Cell `c` of the grid uses the master seed `derive_seed(seed, c)`.
pub fn run_grid(grid: &SimGrid, out: impl AsRef<Path>) -> Result<Vec<(SimScenario, RejectionEstimate)>> {
    let path = out.as_ref();
    let done = finished_cells(path)?;
    let fresh = done.is_empty() && !path.exists();
    let io_err = |source| Error::Io {
        path: path.display().to_string(),
        source,
    };
    let file = OpenOptions::new().create(true).append(true).open(path).map_err(io_err)?;
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    if fresh {
        wtr.write_record(OUTPUT_HEADER)?;
        wtr.flush().map_err(io_err)?;
    }
    let mut results = Vec::new();
    for (c, sc) in grid.cells()?.into_iter().enumerate() {
        if done.contains(&CellKey::of(&sc)) {
            log::info!("skipping finished cell {} s{} n={} delta={}", sc.model, sc.scenario.index(), sc.n, sc.delta);
            continue;
        }
        let master = crate::rng::derive_seed(grid.seed, c as u64);
        let est = run_scenario(&sc, master);
        log::info!(
            "{} s{} n={} delta={}: rate {:.3} (se {:.3}, failed {})",
            sc.model,
            sc.scenario.index(),
            sc.n,
            sc.delta,
            est.rate,
            est.se,
            est.failed
        );
        wtr.write_record(grid.record(&sc, &est))?;
        wtr.flush().map_err(io_err)?;
        results.push((sc, est));
    }
    wtr.into_inner()
        .map_err(|e| Error::InvalidData(format!("flushing {}: {e}", path.display())))?
        .flush()
        .map_err(io_err)?;
    Ok(results)
}
