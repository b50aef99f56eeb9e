//! Writes a dataset to CSV, reads it back with an explicit schema and runs
//! the effect test on the loaded data.
//!
//! cargo run --release --example csv_workflow

use dr_dose::nuisance::{
    fit_beta_propensity, fit_linear_outcome, BetaFitOptions, CovariateTransform, NuisanceModel, OutcomeBasis,
    OutcomeModel, PropensityModel, Provenance,
};
use dr_dose::simlab::gen_model2;
use dr_dose::{load_csv, run_test, save_csv, CsvSchema, TestConfig};

fn main() -> dr_dose::Result<()> {
    let path = std::env::temp_dir().join("dr_dose_example.csv");
    save_csv(&gen_model2(800, 0.4, &mut dr_dose::rng::stream(8, &[])), &path)?;
    let ds = load_csv(&path, &CsvSchema::default())?;
    println!("loaded {} rows with {} covariates from {}", ds.len(), ds.dim(), path.display());
    // Real data has no known dose range; pad the observed one.
    let (lo, hi) = ds.treatment().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &a| (l.min(a), h.max(a)));
    let pad = 1e-3 * (hi - lo);
    let opts = BetaFitOptions::new(hi - lo + 2.0 * pad, CovariateTransform::Identity).offset(lo - pad);
    let prop = fit_beta_propensity(&ds, &opts)?;
    let out = fit_linear_outcome(&ds, OutcomeBasis::Linear, CovariateTransform::Identity)?;
    let nm = NuisanceModel::new(PropensityModel::Beta(prop), OutcomeModel::Fitted(out), 0.01, Provenance::Fitted)?;
    let r = run_test(&ds, &nm, &TestConfig::default())?;
    println!("T = {:.3}, p = {:.4}", r.statistic, r.p_value);
    Ok(())
}
