//! Observational data, weight range, and test configuration.
//!
//! A [`Dataset`] holds `n` rows of `(L, A, Y)` with `L` in `R^d`, plus an
//! optional discrete group label used by the effect-modifier test. CSV is
//! the only ingestion format; the header names `y`, `a`, `l1..ld` and
//! optionally a group column.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    covariates: Vec<f64>,
    dim: usize,
    treatment: Vec<f64>,
    outcome: Vec<f64>,
    group: Option<Vec<usize>>,
}

impl Dataset {
    /// Builds a validated dataset. `covariates` is row-major with `dim`
    /// columns.
    pub fn new(
        covariates: Vec<f64>,
        dim: usize,
        treatment: Vec<f64>,
        outcome: Vec<f64>,
        group: Option<Vec<usize>>,
    ) -> Result<Self> {
        let n = treatment.len();
        if n == 0 {
            return Err(Error::Empty("dataset has no rows".into()));
        }
        if outcome.len() != n {
            return Err(Error::InvalidData(format!(
                "column lengths differ: treatment has {n} rows, outcome has {}",
                outcome.len()
            )));
        }
        if covariates.len() != n * dim {
            return Err(Error::InvalidData(format!(
                "covariate matrix has {} entries, expected {n}x{dim}",
                covariates.len()
            )));
        }
        for (i, (&a, &y)) in treatment.iter().zip(&outcome).enumerate() {
            if !a.is_finite() {
                return Err(Error::Cell {
                    row: i + 1,
                    column: "a".into(),
                    message: format!("non-finite value {a}"),
                });
            }
            if !y.is_finite() {
                return Err(Error::Cell {
                    row: i + 1,
                    column: "y".into(),
                    message: format!("non-finite value {y}"),
                });
            }
        }
        for (idx, v) in covariates.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::Cell {
                    row: idx / dim + 1,
                    column: format!("l{}", idx % dim + 1),
                    message: format!("non-finite value {v}"),
                });
            }
        }
        if let Some(g) = &group {
            if g.len() != n {
                return Err(Error::InvalidData(format!(
                    "group column has {} rows, expected {n}",
                    g.len()
                )));
            }
            let k = g.iter().max().map_or(0, |m| m + 1);
            let mut seen = vec![false; k];
            for &code in g {
                seen[code] = true;
            }
            if let Some(missing) = seen.iter().position(|s| !s) {
                return Err(Error::InvalidData(format!(
                    "group codes must be contiguous 0..{}; code {missing} never occurs",
                    k - 1
                )));
            }
        }
        Ok(Self {
            covariates,
            dim,
            treatment,
            outcome,
            group,
        })
    }

    pub fn len(&self) -> usize {
        self.treatment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.treatment.is_empty()
    }

    /// Number of covariate columns `d`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn covariate_row(&self, i: usize) -> &[f64] {
        &self.covariates[i * self.dim..(i + 1) * self.dim]
    }

    pub fn covariates(&self) -> &[f64] {
        &self.covariates
    }

    pub fn treatment(&self) -> &[f64] {
        &self.treatment
    }

    pub fn outcome(&self) -> &[f64] {
        &self.outcome
    }

    pub fn group(&self) -> Option<&[usize]> {
        self.group.as_deref()
    }

    /// Number of distinct group codes, or 0 when there is no group column.
    pub fn group_count(&self) -> usize {
        self.group
            .as_ref()
            .map_or(0, |g| g.iter().max().map_or(0, |m| m + 1))
    }

    pub fn with_outcome(&self, outcome: Vec<f64>) -> Result<Self> {
        Self::new(
            self.covariates.clone(),
            self.dim,
            self.treatment.clone(),
            outcome,
            self.group.clone(),
        )
    }

    pub fn with_group(&self, group: Option<Vec<usize>>) -> Result<Self> {
        Self::new(
            self.covariates.clone(),
            self.dim,
            self.treatment.clone(),
            self.outcome.clone(),
            group,
        )
    }

    /// Rows reordered so that row `i` of the result is row `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let d = self.dim;
        let mut cov = Vec::with_capacity(self.covariates.len());
        for &p in perm {
            cov.extend_from_slice(self.covariate_row(p));
        }
        Self::new(
            cov,
            d,
            perm.iter().map(|&p| self.treatment[p]).collect(),
            perm.iter().map(|&p| self.outcome[p]).collect(),
            self.group
                .as_ref()
                .map(|g| perm.iter().map(|&p| g[p]).collect()),
        )
    }
}

/// Elementwise minimum and maximum of the treatment column.
pub fn treatment_range(ds: &Dataset) -> (f64, f64) {
    ds.treatment()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &a| {
            (lo.min(a), hi.max(a))
        })
}

/// Linear-interpolation sample quantile (type 7).
pub fn quantile(values: &[f64], p: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let pos = p.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
}

/// Column names used when reading and writing CSV files.
#[derive(Debug, Clone)]
pub struct CsvSchema {
    pub outcome: String,
    pub treatment: String,
    pub covariate_prefix: String,
    /// Group column. May name one of the covariate columns, in which case
    /// that column is used both as a covariate and as the group label.
    pub group: Option<String>,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            outcome: "y".into(),
            treatment: "a".into(),
            covariate_prefix: "l".into(),
            group: Some("group".into()),
        }
    }
}

impl CsvSchema {
    pub fn with_group(mut self, group: Option<&str>) -> Self {
        self.group = group.map(str::to_owned);
        self
    }
}

pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_csv(file, schema)
}

/// Parses CSV from any reader. Row numbers in errors count data rows from 1.
pub fn read_csv<R: Read>(reader: R, schema: &CsvSchema) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::Empty("file has no header row".into()));
    }
    let find = |name: &str| headers.iter().position(|h| h == name);
    let y_col = find(&schema.outcome).ok_or_else(|| Error::MissingColumn(schema.outcome.clone()))?;
    let a_col =
        find(&schema.treatment).ok_or_else(|| Error::MissingColumn(schema.treatment.clone()))?;

    let mut cov_cols: Vec<(usize, usize)> = headers
        .iter()
        .enumerate()
        .filter_map(|(idx, h)| {
            h.strip_prefix(schema.covariate_prefix.as_str())
                .and_then(|rest| rest.parse::<usize>().ok())
                .map(|k| (k, idx))
        })
        .collect();
    cov_cols.sort_unstable();
    for (expected, &(k, _)) in (1..).zip(&cov_cols) {
        if k != expected {
            return Err(Error::MissingColumn(format!(
                "{}{expected}",
                schema.covariate_prefix
            )));
        }
    }
    let group_col = match &schema.group {
        Some(name) => find(name),
        None => None,
    };

    let dim = cov_cols.len();
    let mut covariates = Vec::new();
    let mut treatment = Vec::new();
    let mut outcome = Vec::new();
    let mut group = group_col.map(|_| Vec::new());

    for (r, record) in rdr.records().enumerate() {
        let row = r + 1;
        let record = record?;
        let cell = |idx: usize| -> Result<f64> {
            let name = headers.get(idx).unwrap_or("?").to_string();
            let raw = record.get(idx).ok_or_else(|| Error::Cell {
                row,
                column: name.clone(),
                message: "missing cell".into(),
            })?;
            let v: f64 = raw.parse().map_err(|_| Error::Cell {
                row,
                column: name.clone(),
                message: format!("non-numeric value `{raw}`"),
            })?;
            if !v.is_finite() {
                return Err(Error::Cell {
                    row,
                    column: name,
                    message: format!("non-finite value `{raw}`"),
                });
            }
            Ok(v)
        };
        outcome.push(cell(y_col)?);
        treatment.push(cell(a_col)?);
        for &(_, idx) in &cov_cols {
            covariates.push(cell(idx)?);
        }
        if let (Some(idx), Some(g)) = (group_col, group.as_mut()) {
            let v = cell(idx)?;
            if v < 0.0 || v.fract() != 0.0 {
                return Err(Error::Cell {
                    row,
                    column: headers[idx].to_string(),
                    message: format!("group code must be a non-negative integer, got {v}"),
                });
            }
            g.push(v as usize);
        }
    }
    if treatment.is_empty() {
        return Err(Error::Empty("file has a header but no data rows".into()));
    }
    Dataset::new(covariates, dim, treatment, outcome, group)
}

/// Writes `y,a,l1..ld[,group]`. Values use the shortest representation that
/// parses back to the same `f64`.
pub fn write_csv<W: Write>(ds: &Dataset, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = vec!["y".to_string(), "a".to_string()];
    header.extend((1..=ds.dim()).map(|k| format!("l{k}")));
    if ds.group().is_some() {
        header.push("group".into());
    }
    wtr.write_record(&header)?;
    for i in 0..ds.len() {
        let mut rec = vec![ds.outcome()[i].to_string(), ds.treatment()[i].to_string()];
        rec.extend(ds.covariate_row(i).iter().map(f64::to_string));
        if let Some(g) = ds.group() {
            rec.push(g[i].to_string());
        }
        wtr.write_record(&rec)?;
    }
    wtr.flush().map_err(|source| Error::Io {
        path: "<csv writer>".into(),
        source,
    })?;
    Ok(())
}

pub fn save_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    write_csv(ds, std::io::BufWriter::new(file))
}

/// Weight function `w(a) = 1` on `[lo, hi]`, zero outside, together with the
/// quadrature grid used for every integral against it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub lo: f64,
    pub hi: f64,
    pub grid_points: usize,
}

impl WeightSpec {
    pub const DEFAULT_GRID: usize = 100;

    pub fn new(lo: f64, hi: f64, grid_points: usize) -> Result<Self> {
        let w = Self { lo, hi, grid_points };
        w.check_shape()?;
        Ok(w)
    }

    /// Empirical 2.5th and 97.5th percentiles of the treatment.
    pub fn default_for(treatment: &[f64]) -> Self {
        Self {
            lo: quantile(treatment, 0.025),
            hi: quantile(treatment, 0.975),
            grid_points: Self::DEFAULT_GRID,
        }
    }

    fn check_shape(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(Error::InvalidConfig(format!(
                "weight range needs lo < hi, got [{}, {}]",
                self.lo, self.hi
            )));
        }
        if self.grid_points < 10 {
            return Err(Error::InvalidConfig(format!(
                "weight grid needs at least 10 points, got {}",
                self.grid_points
            )));
        }
        Ok(())
    }

    /// Checks the range lies inside the observed treatment support.
    pub fn validate(&self, treatment: &[f64]) -> Result<()> {
        self.check_shape()?;
        let (a_min, a_max) = treatment
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &a| (l.min(a), h.max(a)));
        if self.lo < a_min || self.hi > a_max {
            return Err(Error::InvalidConfig(format!(
                "weight range [{}, {}] is not inside the treatment range [{a_min}, {a_max}]",
                self.lo, self.hi
            )));
        }
        Ok(())
    }

    /// Equally spaced grid from `lo` to `hi` inclusive.
    pub fn grid(&self) -> Vec<f64> {
        let m = self.grid_points - 1;
        let step = (self.hi - self.lo) / m as f64;
        (0..=m)
            .map(|g| if g == m { self.hi } else { self.lo + g as f64 * step })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bandwidth {
    Auto,
    Fixed(f64),
}

/// Law of the wild bootstrap multipliers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BootDist {
    /// Golden-ratio two-point law, matches three moments.
    TwoPoint,
    /// Symmetric ±1 law.
    Rademacher,
}

impl std::str::FromStr for BootDist {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "twopoint" | "two-point" => Ok(Self::TwoPoint),
            "rademacher" => Ok(Self::Rademacher),
            other => Err(Error::InvalidConfig(format!("unknown bootstrap law `{other}`"))),
        }
    }
}

/// How bootstrap residuals are centered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResidualMode {
    /// Residual from the local linear fit at each `A_i`.
    Local,
    /// Residual from the grand mean of the pseudo-outcomes.
    Global,
}

impl std::str::FromStr for ResidualMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "local" => Ok(Self::Local),
            "global" => Ok(Self::Global),
            other => Err(Error::InvalidConfig(format!("unknown residual mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestConfig {
    pub bandwidth: Bandwidth,
    pub boot_reps: usize,
    pub boot_dist: BootDist,
    pub residual_mode: ResidualMode,
    pub alpha: f64,
    pub trunc_floor: f64,
    pub seed: u64,
    /// `None` resolves to [`WeightSpec::default_for`] on the data.
    pub weight: Option<WeightSpec>,
}

impl Default for TestConfig {
    fn default() -> Self {
        Self {
            bandwidth: Bandwidth::Auto,
            boot_reps: 200,
            boot_dist: BootDist::TwoPoint,
            residual_mode: ResidualMode::Local,
            alpha: 0.05,
            trunc_floor: 0.01,
            seed: 0,
            weight: None,
        }
    }
}

impl TestConfig {
    pub fn validate(&self) -> Result<()> {
        if let Bandwidth::Fixed(h) = self.bandwidth {
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::InvalidConfig(format!("bandwidth must be positive, got {h}")));
            }
        }
        if self.boot_reps == 0 {
            return Err(Error::InvalidConfig("boot_reps must be positive".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!("alpha must lie in (0,1), got {}", self.alpha)));
        }
        if !(self.trunc_floor >= 0.0 && self.trunc_floor < 0.5) {
            return Err(Error::InvalidConfig(format!(
                "trunc_floor must lie in [0, 0.5), got {}",
                self.trunc_floor
            )));
        }
        if let Some(w) = &self.weight {
            w.check_shape()?;
        }
        Ok(())
    }

    /// The weight spec actually used for this treatment vector.
    pub fn resolve_weight(&self, treatment: &[f64]) -> Result<WeightSpec> {
        let w = self.weight.unwrap_or_else(|| WeightSpec::default_for(treatment));
        w.validate(treatment)?;
        Ok(w)
    }
}
