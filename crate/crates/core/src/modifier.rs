//! Test of whether a discrete covariate modifies the treatment effect.
//!
//! Each group gets its own local linear curve of the conditional
//! pseudo-outcomes `φ` on treatment. The statistic sums, over unordered pairs
//! of groups, the integrated squared difference of their curves on the
//! shared weight grid. The bootstrap null pools all groups around a single
//! curve `θ_h` and perturbs the residuals from it.

use rayon::prelude::*;

use crate::data::{Dataset, ResidualMode, TestConfig, WeightSpec};
use crate::effect_test::{
    boot_rng, bootstrap_critical_value, bootstrap_p_value, resolve_bandwidth, shifted_mean,
    trapezoid, wild_draw, MIN_STABLE_BOOT,
};
use crate::error::{Error, Result};
use crate::kernel::{Epanechnikov, Kernel};
use crate::local_linear::{check_flagged, fit_grid, CurveEstimate, LinearSmoother, LocalLinear};
use crate::nuisance::NuisanceModel;
use crate::pseudo::compute_phi;

/// Smallest group size accepted by the modifier test.
pub const MIN_GROUP_SIZE: usize = 20;

#[derive(Debug, Clone)]
pub struct ModifierTestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub critical_value: f64,
    pub boot_stats: Vec<f64>,
    pub per_group_curves: Vec<CurveEstimate>,
    pub pooled_curve: CurveEstimate,
    pub group_sizes: Vec<usize>,
    pub group_bandwidths: Vec<f64>,
    pub pooled_bandwidth: f64,
    pub config: TestConfig,
    pub residual_fallbacks: usize,
    pub warnings: Vec<String>,
}

impl ModifierTestResult {
    pub fn reject(&self) -> bool {
        self.statistic > self.critical_value
    }
}

/// Row indices of each group `0..k`.
fn members(groups: &[usize]) -> Vec<Vec<usize>> {
    let k = groups.iter().max().map_or(0, |m| m + 1);
    let mut out = vec![Vec::new(); k];
    for (i, &g) in groups.iter().enumerate() {
        out[g].push(i);
    }
    out
}

fn check_groups(groups: &[usize]) -> Result<Vec<Vec<usize>>> {
    let m = members(groups);
    if m.len() < 2 {
        return Err(Error::InvalidData(format!(
            "need >= 2 groups for the modifier test, found {}",
            m.len()
        )));
    }
    if let Some((g, rows)) = m.iter().enumerate().find(|(_, r)| r.len() < MIN_GROUP_SIZE) {
        return Err(Error::InvalidData(format!(
            "group {g} has {} observations; the modifier test needs at least {MIN_GROUP_SIZE}",
            rows.len()
        )));
    }
    Ok(m)
}

/// Sum over unordered pairs of `∫ (θ_m - θ_j)^2`, counting a grid point only
/// where both curves are unflagged.
fn pairwise_sum(grid: &[f64], curves: &[Vec<Option<f64>>]) -> f64 {
    let mut total = 0.0;
    for m in 1..curves.len() {
        for j in 0..m {
            let diff: Vec<Option<f64>> = curves[m]
                .iter()
                .zip(&curves[j])
                .map(|(x, y)| match (x, y) {
                    (Some(x), Some(y)) => Some((x - y) * (x - y)),
                    _ => None,
                })
                .collect();
            total += trapezoid(grid, &diff);
        }
    }
    total
}

fn curve_values(c: &CurveEstimate) -> Vec<Option<f64>> {
    c.theta
        .iter()
        .zip(&c.flagged)
        .map(|(&t, &f)| (!f).then_some(t))
        .collect()
}

/// `T^p_n` and the per-group curves. `bandwidths[g]` is used for group `g`.
pub fn modifier_statistic<K: Kernel + ?Sized>(
    a: &[f64],
    phi: &[f64],
    groups: &[usize],
    bandwidths: &[f64],
    w: &WeightSpec,
    k: &K,
) -> Result<(f64, Vec<CurveEstimate>)> {
    if a.len() != phi.len() || a.len() != groups.len() {
        return Err(Error::InvalidData("treatment, pseudo-outcome and group lengths differ".into()));
    }
    let m = check_groups(groups)?;
    if bandwidths.len() != m.len() {
        return Err(Error::InvalidConfig(format!(
            "{} bandwidths for {} groups",
            bandwidths.len(),
            m.len()
        )));
    }
    w.validate(a)?;
    let grid = w.grid();
    let curves = m
        .iter()
        .zip(bandwidths)
        .map(|(rows, &h)| {
            let ag: Vec<f64> = rows.iter().map(|&i| a[i]).collect();
            let pg: Vec<f64> = rows.iter().map(|&i| phi[i]).collect();
            fit_grid(&grid, &ag, &pg, h, k)
        })
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<Vec<Option<f64>>> = curves.iter().map(curve_values).collect();
    Ok((pairwise_sum(&grid, &values), curves))
}

/// Modifier test on precomputed conditional pseudo-outcomes.
pub fn run_modifier_test_on_pseudo<K: Kernel + ?Sized>(
    a: &[f64],
    phi: &[f64],
    groups: &[usize],
    cfg: &TestConfig,
    k: &K,
) -> Result<ModifierTestResult> {
    cfg.validate()?;
    let m = check_groups(groups)?;
    let mut warnings = Vec::new();
    if cfg.boot_reps < MIN_STABLE_BOOT {
        warnings.push(format!(
            "{} bootstrap replicates is below {MIN_STABLE_BOOT}; the critical value is unstable",
            cfg.boot_reps
        ));
    }
    let weight = cfg.resolve_weight(a)?;
    let grid = weight.grid();
    let subsets: Vec<(Vec<f64>, Vec<f64>)> = m
        .iter()
        .map(|rows| (rows.iter().map(|&i| a[i]).collect(), rows.iter().map(|&i| phi[i]).collect()))
        .collect();
    let group_bandwidths = subsets
        .iter()
        .map(|(ag, pg)| resolve_bandwidth(cfg.bandwidth, ag, pg, k))
        .collect::<Result<Vec<_>>>()?;
    let (statistic, per_group_curves) =
        modifier_statistic(a, phi, groups, &group_bandwidths, &weight, k)?;

    // Pooled null curve and residuals around it.
    let pooled_bandwidth = resolve_bandwidth(cfg.bandwidth, a, phi, k)?;
    let pooled_curve = fit_grid(&grid, a, phi, pooled_bandwidth, k)?;
    let pooled = LocalLinear::new(a, pooled_bandwidth, k);
    let center = shifted_mean(phi);
    let mut fallbacks = 0;
    let base: Vec<f64> = a
        .iter()
        .map(|&ai| match pooled.fit(ai, phi) {
            Some(f) => f.theta,
            None => {
                fallbacks += 1;
                center
            }
        })
        .collect();
    let eps: Vec<f64> = match cfg.residual_mode {
        ResidualMode::Local => phi.iter().zip(&base).map(|(p, b)| p - b).collect(),
        ResidualMode::Global => phi.iter().map(|p| p - center).collect(),
    };
    if fallbacks > 0 {
        warnings.push(format!(
            "{fallbacks} pooled fit(s) at observed treatments were singular; used the grand mean"
        ));
    }

    let smoothers: Vec<LinearSmoother> = subsets
        .iter()
        .zip(&group_bandwidths)
        .map(|((ag, _), &h)| LinearSmoother::new(&grid, ag, h, k))
        .collect();
    for s in &smoothers {
        check_flagged(s.flagged_count(), s.len())?;
    }
    let boot_stats: Vec<f64> = (0..cfg.boot_reps)
        .into_par_iter()
        .map(|b| {
            let mut rng = boot_rng(cfg.seed, b);
            let star = wild_draw(&eps, cfg.boot_dist, &mut rng);
            let values: Vec<Vec<Option<f64>>> = m
                .iter()
                .zip(&smoothers)
                .map(|(rows, s)| {
                    let pg: Vec<f64> = rows.iter().map(|&i| base[i] + star[i]).collect();
                    s.apply(&pg)
                })
                .collect();
            pairwise_sum(&grid, &values)
        })
        .collect();
    for w in &warnings {
        log::warn!("{w}");
    }
    let mut config = cfg.clone();
    config.weight = Some(weight);
    Ok(ModifierTestResult {
        statistic,
        p_value: bootstrap_p_value(statistic, &boot_stats),
        critical_value: bootstrap_critical_value(&boot_stats, cfg.alpha),
        boot_stats,
        per_group_curves,
        pooled_curve,
        group_sizes: m.iter().map(Vec::len).collect(),
        group_bandwidths,
        pooled_bandwidth,
        config,
        residual_fallbacks: fallbacks,
        warnings,
    })
}

/// Conditional pseudo-outcomes from `nm`, then the pooled-null bootstrap
/// modifier test with the Epanechnikov kernel.
pub fn run_modifier_test(ds: &Dataset, nm: &NuisanceModel, cfg: &TestConfig) -> Result<ModifierTestResult> {
    cfg.validate()?;
    let groups = ds
        .group()
        .ok_or_else(|| Error::InvalidData("the modifier test needs a group column".into()))?;
    check_groups(groups)?;
    let nm = nm.clone().with_trunc_floor(cfg.trunc_floor)?;
    let phi = compute_phi(ds, &nm)?;
    run_modifier_test_on_pseudo(ds.treatment(), &phi.values, groups, cfg, &Epanechnikov)
}
