//! Command-line front end. JSON results go to stdout, summaries and logs to
//! stderr.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::data::{load_csv, save_csv, Bandwidth, BootDist, CsvSchema, Dataset, ResidualMode, TestConfig, WeightSpec};
use crate::effect_test::{asymptotic_null_params, run_test_on_pseudo, AsymptoticNullParams};
use crate::error::{Error, Result};
use crate::kernel::{convolution_at_zero, Epanechnikov, Kernel};
use crate::local_linear::{fit_grid, CurveEstimate};
use crate::modifier::run_modifier_test_on_pseudo;
use crate::nuisance::{
    fit_beta_propensity, fit_linear_outcome, fit_logistic_outcome, BetaFitOptions, CovariateTransform,
    NuisanceModel, OracleSpec, OutcomeBasis, OutcomeModel, PropensityBasis, PropensityModel, Provenance,
};
use crate::pseudo::{compute_phi, compute_xi};
use crate::rng::stream;
use crate::simlab::{generate, run_grid, GeneratorMeta, SimGrid, SimModel};

#[derive(Debug, Parser)]
#[command(name = "dr-dose", version, about = "Doubly robust tests for continuous treatment effects")]
pub struct Cli {
    /// Worker threads; defaults to the available parallelism. Results do not
    /// depend on this value.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test whether the treatment has any effect on the outcome.
    Test(TestArgs),
    /// Test whether a discrete covariate modifies the treatment effect.
    Modifier(TestArgs),
    /// Estimate the dose-response curve with asymptotic diagnostics.
    Curve(CurveArgs),
    /// Run a Monte Carlo grid from a TOML file.
    Simulate(SimulateArgs),
    /// Print kernel self-convolutions at zero.
    Convolve(ConvolveArgs),
    /// Write a simulated dataset as CSV.
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutcomeChoice {
    /// `1, L, A, L·A` by least squares.
    Linear,
    /// `linear` plus a Gaussian bump in `A` at 2.5.
    Bump,
    /// `1, L, A, L·A, A^2, A^3` by logistic regression.
    Logistic,
    /// Cubic polynomials in `L` and `A`; logistic for binary outcomes.
    Flex,
    /// Closed-form truth of a simulation model.
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PropensityChoice {
    /// Beta with logit-linear mean.
    Beta,
    /// Beta with logit-cubic mean.
    Flex,
    /// Closed-form truth of a simulation model.
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Misspecify {
    None,
    /// Fit the outcome model on transformed covariates.
    KsOutcome,
    /// Fit the propensity model on transformed covariates.
    KsPropensity,
}

#[derive(Debug, Clone, Args)]
pub struct NuisanceArgs {
    #[arg(long, value_enum, default_value_t = OutcomeChoice::Linear)]
    pub outcome: OutcomeChoice,
    #[arg(long, value_enum, default_value_t = PropensityChoice::Beta)]
    pub propensity: PropensityChoice,
    #[arg(long, value_enum, default_value_t = Misspecify::None)]
    pub misspecify: Misspecify,
    /// Treatment support `lo,hi` of the Beta propensity. Defaults to the
    /// observed range padded by 0.1% on each side.
    #[arg(long)]
    pub support: Option<String>,
    /// Simulation model for oracle nuisances.
    #[arg(long)]
    pub oracle_model: Option<SimModel>,
    #[arg(long, default_value_t = 0.0)]
    pub oracle_delta: f64,
    #[arg(long)]
    pub save_nuisance: Option<PathBuf>,
    #[arg(long)]
    pub load_nuisance: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct TestFlags {
    /// `auto` for the rule of thumb or a positive number.
    #[arg(long, default_value = "auto")]
    pub bandwidth: String,
    #[arg(long, default_value_t = 200)]
    pub boot: usize,
    #[arg(long, default_value = "twopoint")]
    pub boot_dist: BootDist,
    #[arg(long, default_value = "local")]
    pub residual: ResidualMode,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Weight range `lo,hi`; defaults to the 2.5th and 97.5th percentiles.
    #[arg(long)]
    pub range: Option<String>,
    #[arg(long, default_value_t = WeightSpec::DEFAULT_GRID)]
    pub grid: usize,
    #[arg(long, default_value_t = 0.01)]
    pub trunc: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct TestArgs {
    pub csv: PathBuf,
    #[command(flatten)]
    pub nuisance: NuisanceArgs,
    #[command(flatten)]
    pub test: TestFlags,
    /// Group column; `modifier` defaults to `group`.
    #[arg(long)]
    pub group_col: Option<String>,
    #[arg(long)]
    pub save_curve: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CurveArgs {
    pub csv: PathBuf,
    #[command(flatten)]
    pub nuisance: NuisanceArgs,
    #[arg(long, default_value = "auto")]
    pub bandwidth: String,
    #[arg(long)]
    pub range: Option<String>,
    #[arg(long, default_value_t = WeightSpec::DEFAULT_GRID)]
    pub grid: usize,
    #[arg(long, default_value_t = 0.01)]
    pub trunc: f64,
    #[arg(long)]
    pub save_curve: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// TOML grid file.
    pub config: PathBuf,
    /// Output CSV; existing rows are kept and their cells skipped.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ConvolveArgs {
    /// Number of self-convolutions `s` (1..=4); all orders when omitted.
    #[arg(long)]
    pub order: Option<u32>,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub model: SimModel,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_pair(s: &str, flag: &str) -> Result<(f64, f64)> {
    let bad = || Error::InvalidConfig(format!("--{flag} expects `lo,hi`, got `{s}`"));
    let (lo, hi) = s.split_once(',').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn parse_bandwidth(s: &str) -> Result<Bandwidth> {
    if s == "auto" {
        return Ok(Bandwidth::Auto);
    }
    match s.parse::<f64>() {
        Ok(h) if h.is_finite() && h > 0.0 => Ok(Bandwidth::Fixed(h)),
        _ => Err(Error::InvalidConfig(format!("--bandwidth expects `auto` or a positive number, got `{s}`"))),
    }
}

/// Weight range from `--range`, or `None` for the data-driven default.
fn parse_weight(range: Option<&str>, grid: usize) -> Result<Option<WeightSpec>> {
    match range {
        Some(r) => {
            let (lo, hi) = parse_pair(r, "range")?;
            Ok(Some(WeightSpec::new(lo, hi, grid)?))
        }
        None => {
            if grid < 10 {
                return Err(Error::InvalidConfig(format!("--grid needs at least 10 points, got {grid}")));
            }
            Ok(None)
        }
    }
}

fn resolve_weight(spec: Option<WeightSpec>, grid: usize, a: &[f64]) -> Result<WeightSpec> {
    let w = spec.unwrap_or(WeightSpec {
        grid_points: grid,
        ..WeightSpec::default_for(a)
    });
    w.validate(a)?;
    Ok(w)
}

impl TestFlags {
    fn to_config(&self) -> Result<TestConfig> {
        let cfg = TestConfig {
            bandwidth: parse_bandwidth(&self.bandwidth)?,
            boot_reps: self.boot,
            boot_dist: self.boot_dist,
            residual_mode: self.residual,
            alpha: self.alpha,
            trunc_floor: self.trunc,
            seed: self.seed,
            weight: parse_weight(self.range.as_deref(), self.grid)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl NuisanceArgs {
    fn validate(&self) -> Result<()> {
        let oracle = self.outcome == OutcomeChoice::Oracle || self.propensity == PropensityChoice::Oracle;
        if oracle && self.oracle_model.is_none() && self.load_nuisance.is_none() {
            return Err(Error::InvalidConfig("oracle nuisances need --oracle-model".into()));
        }
        if !self.oracle_delta.is_finite() {
            return Err(Error::InvalidConfig("--oracle-delta must be finite".into()));
        }
        if self.misspecify == Misspecify::KsOutcome && self.outcome == OutcomeChoice::Oracle {
            return Err(Error::InvalidConfig("--misspecify ks-outcome needs a fitted outcome model".into()));
        }
        if self.misspecify == Misspecify::KsPropensity && self.propensity == PropensityChoice::Oracle {
            return Err(Error::InvalidConfig("--misspecify ks-propensity needs a fitted propensity model".into()));
        }
        if let Some(s) = &self.support {
            parse_pair(s, "support")?;
        }
        Ok(())
    }

    fn support(&self, a: &[f64]) -> Result<(f64, f64)> {
        match &self.support {
            Some(s) => {
                let (lo, hi) = parse_pair(s, "support")?;
                Ok((lo, hi - lo))
            }
            None => {
                let (lo, hi) = a
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
                let pad = 1e-3 * (hi - lo);
                Ok((lo - pad, hi - lo + 2.0 * pad))
            }
        }
    }

    fn fit(&self, ds: &Dataset, trunc: f64) -> Result<NuisanceModel> {
        if let Some(path) = &self.load_nuisance {
            return NuisanceModel::load(path)?.with_trunc_floor(trunc);
        }
        let ks = |on: bool| {
            if on {
                CovariateTransform::KangSchafer
            } else {
                CovariateTransform::Identity
            }
        };
        let spec = self.oracle_model.map(|m| OracleSpec::new(m, self.oracle_delta));
        let propensity = match self.propensity {
            PropensityChoice::Oracle => PropensityModel::Oracle(spec.clone().expect("validated")),
            choice => {
                let (offset, scale) = self.support(ds.treatment())?;
                let basis = if choice == PropensityChoice::Flex {
                    PropensityBasis::Flexible
                } else {
                    PropensityBasis::Linear
                };
                let opts = BetaFitOptions::new(scale, ks(self.misspecify == Misspecify::KsPropensity))
                    .basis(basis)
                    .offset(offset);
                PropensityModel::Beta(fit_beta_propensity(ds, &opts)?)
            }
        };
        let tf = ks(self.misspecify == Misspecify::KsOutcome);
        let binary = ds.outcome().iter().all(|&y| y == 0.0 || y == 1.0);
        let outcome = match self.outcome {
            OutcomeChoice::Oracle => OutcomeModel::Oracle(spec.expect("validated")),
            OutcomeChoice::Linear => OutcomeModel::Fitted(fit_linear_outcome(ds, OutcomeBasis::Linear, tf)?),
            OutcomeChoice::Bump => OutcomeModel::Fitted(fit_linear_outcome(ds, OutcomeBasis::LinearBump, tf)?),
            OutcomeChoice::Logistic => OutcomeModel::Fitted(fit_logistic_outcome(ds, OutcomeBasis::Cubic, tf)?),
            OutcomeChoice::Flex if binary => {
                OutcomeModel::Fitted(fit_logistic_outcome(ds, OutcomeBasis::Flexible, tf)?)
            }
            OutcomeChoice::Flex => OutcomeModel::Fitted(fit_linear_outcome(ds, OutcomeBasis::Flexible, tf)?),
        };
        let provenance = if self.misspecify != Misspecify::None {
            Provenance::Misspecified
        } else if matches!(propensity, PropensityModel::Oracle(_)) || matches!(outcome, OutcomeModel::Oracle(_)) {
            Provenance::Oracle
        } else {
            Provenance::Fitted
        };
        let nm = NuisanceModel::new(propensity, outcome, trunc, provenance)?;
        if let Some(path) = &self.save_nuisance {
            nm.save(path)?;
        }
        Ok(nm)
    }

    fn describe(&self, nm: &NuisanceModel) -> Value {
        json!({
            "outcome": format!("{:?}", self.outcome).to_lowercase(),
            "propensity": format!("{:?}", self.propensity).to_lowercase(),
            "misspecify": match self.misspecify {
                Misspecify::None => "none",
                Misspecify::KsOutcome => "ks-outcome",
                Misspecify::KsPropensity => "ks-propensity",
            },
            "provenance": nm.provenance,
            "support": nm.propensity.support(),
            "loaded_from": self.load_nuisance.as_ref().map(|p| p.display().to_string()),
            "oracle": self.oracle_model.map(|m| json!({"model": m, "delta": self.oracle_delta})),
        })
    }
}

fn print_json(v: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(v)?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "{text}").map_err(|source| Error::Io {
        path: "<stdout>".into(),
        source,
    })
}

fn boot_dist_name(d: BootDist) -> &'static str {
    match d {
        BootDist::TwoPoint => "twopoint",
        BootDist::Rademacher => "rademacher",
    }
}

fn residual_name(r: ResidualMode) -> &'static str {
    match r {
        ResidualMode::Local => "local",
        ResidualMode::Global => "global",
    }
}

/// Asymptotic constants; `curves` adds the σ² and density estimates.
fn diag_json(d: &AsymptoticNullParams, curves: bool) -> Value {
    let mut v = json!({
        "b0h": d.b0h,
        "V": d.v,
        "V_squared": d.v_squared,
        "k2_at_zero": d.k2_at_zero,
        "k4_at_zero": d.k4_at_zero,
        "excluded_points": d.excluded_points,
    });
    if curves {
        v["sigma2"] = json!(d.sigma2);
        v["density"] = json!(d.density);
    }
    v
}

fn load(csv: &Path, group: Option<&str>) -> Result<Dataset> {
    load_csv(csv, &CsvSchema::default().with_group(group))
}

fn cmd_test(args: &TestArgs) -> Result<()> {
    let mut cfg = args.test.to_config()?;
    args.nuisance.validate()?;
    let ds = load(&args.csv, args.group_col.as_deref())?;
    cfg.weight = Some(resolve_weight(cfg.weight, args.test.grid, ds.treatment())?);
    let nm = args.nuisance.fit(&ds, cfg.trunc_floor)?;
    let xi = compute_xi(&ds, &nm)?;
    let a = ds.treatment();
    let k = Epanechnikov;
    let res = run_test_on_pseudo(a, &xi.values, &cfg, &k)?;
    let weight = res.config.weight.expect("resolved");
    let mut warnings = res.warnings.clone();
    let diag = match asymptotic_null_params(a, &xi.values, res.bandwidth, &k, &weight) {
        Ok(d) => diag_json(&d, false),
        Err(e) => {
            warnings.push(format!("asymptotic diagnostics unavailable: {e}"));
            Value::Null
        }
    };
    if let Some(path) = &args.save_curve {
        res.curve.save_csv(path)?;
    }
    eprintln!(
        "effect test: T = {:.6}, p = {:.4}, critical value {:.6} at alpha {} ({} replicates, h = {:.4}, n = {})",
        res.statistic, res.p_value, res.critical_value, cfg.alpha, cfg.boot_reps, res.bandwidth, res.n
    );
    print_json(&json!({
        "test": "effect",
        "input": args.csv.display().to_string(),
        "statistic": res.statistic,
        "p_value": res.p_value,
        "critical_value": res.critical_value,
        "reject": res.reject(),
        "alpha": cfg.alpha,
        "B": cfg.boot_reps,
        "bandwidth": res.bandwidth,
        "boot_dist": boot_dist_name(cfg.boot_dist),
        "residual_mode": residual_name(cfg.residual_mode),
        "seed": cfg.seed,
        "n": res.n,
        "null_center": res.null_center,
        "flagged_grid_points": res.curve.flagged_count(),
        "residual_fallbacks": res.residual_fallbacks,
        "weight": weight,
        "diag": diag,
        "warnings": warnings,
        "config": res.config,
        "nuisance": args.nuisance.describe(&nm),
    }))
}

fn write_curves(path: &Path, curves: &[(String, &CurveEstimate)]) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path)?;
    wtr.write_record(["curve", "a", "theta", "slope", "flagged"])?;
    for (name, c) in curves {
        for g in 0..c.grid.len() {
            wtr.write_record([
                name.clone(),
                c.grid[g].to_string(),
                c.theta[g].to_string(),
                c.slope[g].to_string(),
                c.flagged[g].to_string(),
            ])?;
        }
    }
    wtr.flush().map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn cmd_modifier(args: &TestArgs) -> Result<()> {
    let mut cfg = args.test.to_config()?;
    args.nuisance.validate()?;
    let group_col = args.group_col.as_deref().unwrap_or("group");
    let ds = load(&args.csv, Some(group_col))?;
    cfg.weight = Some(resolve_weight(cfg.weight, args.test.grid, ds.treatment())?);
    let groups = ds
        .group()
        .ok_or_else(|| Error::MissingColumn(group_col.to_string()))?
        .to_vec();
    if ds.group_count() < 2 {
        return Err(Error::InvalidData(format!(
            "need >= 2 groups for the modifier test, found {}",
            ds.group_count()
        )));
    }
    let nm = args.nuisance.fit(&ds, cfg.trunc_floor)?;
    let phi = compute_phi(&ds, &nm)?;
    let res = run_modifier_test_on_pseudo(ds.treatment(), &phi.values, &groups, &cfg, &Epanechnikov)?;
    if let Some(path) = &args.save_curve {
        let mut curves: Vec<(String, &CurveEstimate)> = vec![("pooled".into(), &res.pooled_curve)];
        curves.extend(res.per_group_curves.iter().enumerate().map(|(g, c)| (g.to_string(), c)));
        write_curves(path, &curves)?;
    }
    eprintln!(
        "modifier test: T = {:.6}, p = {:.4}, critical value {:.6} at alpha {} ({} groups, {} replicates, n = {})",
        res.statistic,
        res.p_value,
        res.critical_value,
        cfg.alpha,
        res.group_sizes.len(),
        cfg.boot_reps,
        ds.len()
    );
    print_json(&json!({
        "test": "modifier",
        "input": args.csv.display().to_string(),
        "group_col": group_col,
        "statistic": res.statistic,
        "p_value": res.p_value,
        "critical_value": res.critical_value,
        "reject": res.reject(),
        "alpha": cfg.alpha,
        "B": cfg.boot_reps,
        "group_sizes": res.group_sizes,
        "group_bandwidths": res.group_bandwidths,
        "pooled_bandwidth": res.pooled_bandwidth,
        "boot_dist": boot_dist_name(cfg.boot_dist),
        "residual_mode": residual_name(cfg.residual_mode),
        "seed": cfg.seed,
        "n": ds.len(),
        "flagged_grid_points": res.per_group_curves.iter().map(CurveEstimate::flagged_count).collect::<Vec<_>>(),
        "residual_fallbacks": res.residual_fallbacks,
        "warnings": res.warnings,
        "config": res.config,
        "nuisance": args.nuisance.describe(&nm),
    }))
}

fn cmd_curve(args: &CurveArgs) -> Result<()> {
    let bandwidth = parse_bandwidth(&args.bandwidth)?;
    let spec = parse_weight(args.range.as_deref(), args.grid)?;
    args.nuisance.validate()?;
    if !(args.trunc >= 0.0 && args.trunc < 0.5) {
        return Err(Error::InvalidConfig(format!("--trunc must lie in [0, 0.5), got {}", args.trunc)));
    }
    let ds = load(&args.csv, None)?;
    let nm = args.nuisance.fit(&ds, args.trunc)?;
    let xi = compute_xi(&ds, &nm)?;
    let a = ds.treatment();
    let k = Epanechnikov;
    let weight = resolve_weight(spec, args.grid, a)?;
    let h = crate::effect_test::resolve_bandwidth(bandwidth, a, &xi.values, &k)?;
    let curve = fit_grid(&weight.grid(), a, &xi.values, h, &k)?;
    let mut warnings = Vec::new();
    let diag = match asymptotic_null_params(a, &xi.values, h, &k, &weight) {
        Ok(d) => diag_json(&d, true),
        Err(e) => {
            warnings.push(format!("asymptotic diagnostics unavailable: {e}"));
            Value::Null
        }
    };
    if let Some(path) = &args.save_curve {
        curve.save_csv(path)?;
    }
    eprintln!(
        "curve: {} grid points on [{:.4}, {:.4}], h = {:.4}, {} flagged",
        curve.grid.len(),
        weight.lo,
        weight.hi,
        h,
        curve.flagged_count()
    );
    let nan_to_null = |v: &[f64]| -> Vec<Option<f64>> { v.iter().map(|x| x.is_finite().then_some(*x)).collect() };
    print_json(&json!({
        "input": args.csv.display().to_string(),
        "n": ds.len(),
        "bandwidth": h,
        "kernel": k.name(),
        "weight": weight,
        "trunc": args.trunc,
        "grid": curve.grid,
        "theta": nan_to_null(&curve.theta),
        "slope": nan_to_null(&curve.slope),
        "flagged": curve.flagged,
        "diag": diag,
        "warnings": warnings,
        "nuisance": args.nuisance.describe(&nm),
    }))
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let grid = SimGrid::load(&args.config)?;
    let cells = grid.cells()?.len();
    eprintln!("simulate: {cells} cell(s), {} replicate(s) each", grid.reps);
    let results = run_grid(&grid, &args.out)?;
    for (sc, est) in &results {
        eprintln!(
            "{} scenario {} n={} delta={}: rate {:.3} (se {:.3}, failed {})",
            sc.model,
            sc.scenario.index(),
            sc.n,
            sc.delta,
            est.rate,
            est.se,
            est.failed
        );
    }
    print_json(&json!({
        "config": grid,
        "out": args.out.display().to_string(),
        "cells": cells,
        "cells_run": results.len(),
    }))
}

fn cmd_convolve(args: &ConvolveArgs) -> Result<()> {
    let k = Epanechnikov;
    let orders: Vec<u32> = match args.order {
        Some(s) => vec![s],
        None => (1..=4).collect(),
    };
    let values = orders
        .iter()
        .map(|&s| {
            Ok(json!({
                "order": s,
                "factors": s + 1,
                "value_at_zero": convolution_at_zero(&k, s)?,
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    print_json(&json!({
        "kernel": k.name(),
        "roughness": k.roughness(),
        "second_moment": k.second_moment(),
        "rot_constant": crate::kernel::rot_constant(&k),
        "convolutions": values,
    }))
}

fn cmd_generate(args: &GenerateArgs) -> Result<()> {
    if args.n < 2 {
        return Err(Error::InvalidConfig(format!("--n must be at least 2, got {}", args.n)));
    }
    if !args.delta.is_finite() {
        return Err(Error::InvalidConfig("--delta must be finite".into()));
    }
    let mut rng = stream(args.seed, &[]);
    let ds = generate(args.model, args.n, args.delta, &mut rng);
    save_csv(&ds, &args.out)?;
    print_json(&json!({
        "out": args.out.display().to_string(),
        "seed": args.seed,
        "meta": GeneratorMeta::new(args.model, args.delta, args.n),
    }))
}

fn dispatch(cmd: &Command) -> Result<()> {
    match cmd {
        Command::Test(a) => cmd_test(a),
        Command::Modifier(a) => cmd_modifier(a),
        Command::Curve(a) => cmd_curve(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Convolve(a) => cmd_convolve(a),
        Command::Generate(a) => cmd_generate(a),
    }
}

/// Runs a parsed command line on a pool of `--threads` workers.
pub fn run(cli: &Cli) -> Result<()> {
    if cli.threads == Some(0) {
        return Err(Error::InvalidConfig("--threads must be positive".into()));
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    pool.install(|| dispatch(&cli.command))
}
