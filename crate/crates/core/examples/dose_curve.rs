//! Estimates the dose-response curve by local linear smoothing of the
//! pseudo-outcomes and prints it next to the true curve.
//!
//! cargo run --release --example dose_curve

use dr_dose::nuisance::{fit_beta_propensity, fit_linear_outcome, BetaFitOptions, CovariateTransform, OutcomeBasis};
use dr_dose::nuisance::{NuisanceModel, OutcomeModel, PropensityModel, Provenance};
use dr_dose::simlab::{gen_model2, SimModel};
use dr_dose::{compute_xi, fit_grid, rot_bandwidth, Epanechnikov, WeightSpec};

fn main() -> dr_dose::Result<()> {
    let delta = 0.5;
    let ds = gen_model2(4000, delta, &mut dr_dose::rng::stream(3, &[]));
    let prop = fit_beta_propensity(&ds, &BetaFitOptions::new(5.0, CovariateTransform::Identity))?;
    let out = fit_linear_outcome(&ds, OutcomeBasis::LinearBump, CovariateTransform::Identity)?;
    let nm = NuisanceModel::new(PropensityModel::Beta(prop), OutcomeModel::Fitted(out), 0.01, Provenance::Fitted)?;
    let xi = compute_xi(&ds, &nm)?;
    let h = rot_bandwidth(ds.treatment(), &xi.values, &Epanechnikov)?;
    let w = WeightSpec::default_for(ds.treatment());
    let grid = WeightSpec::new(w.lo, w.hi, 21)?.grid();
    let curve = fit_grid(&grid, ds.treatment(), &xi.values, h, &Epanechnikov)?;
    println!("rule-of-thumb bandwidth {h:.3}");
    println!("{:>6} {:>9} {:>9}", "a", "estimate", "truth");
    for (a, t) in curve.grid.iter().zip(&curve.theta) {
        println!("{a:6.2} {t:9.4} {:9.4}", SimModel::Model2.effect_curve(delta, *a));
    }
    Ok(())
}
