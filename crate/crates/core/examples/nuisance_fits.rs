//! Fits the Beta propensity and logistic outcome models on Model 1 data,
//! compares coefficients with the truth and round-trips the fit through JSON.
//!
//! cargo run --release --example nuisance_fits

use dr_dose::nuisance::{
    fit_beta_propensity, fit_logistic_outcome, BetaFitOptions, CovariateTransform, NuisanceModel, OutcomeBasis,
    OutcomeModel, PropensityModel, Provenance,
};
use dr_dose::simlab::{gen_model1, SimModel};

fn main() -> dr_dose::Result<()> {
    let delta = 0.01;
    let ds = gen_model1(5000, delta, &mut dr_dose::rng::stream(5, &[]));
    let prop = fit_beta_propensity(&ds, &BetaFitOptions::new(SimModel::Model1.scale(), CovariateTransform::Identity))?;
    println!("logit lambda coefficients {:.3?} in {} iterations", prop.coefficients, prop.iterations);
    println!("truth                      [-0.800, 0.100, 0.100, -0.100, 0.200]");
    let out = fit_logistic_outcome(&ds, OutcomeBasis::Cubic, CovariateTransform::Identity)?;
    println!("outcome fit converged: {}", out.converged);
    let l = [0.5, -0.2, 1.0, 0.0];
    for a in [2.0, 10.0, 18.0] {
        let truth = SimModel::Model1.outcome_section(delta, &l).eval(a);
        println!("mu(l, {a:4}) fitted {:.4}, true {truth:.4}", out.eval(&l, a)?);
    }

    let nm = NuisanceModel::new(PropensityModel::Beta(prop), OutcomeModel::Fitted(out), 0.01, Provenance::Fitted)?;
    let path = std::env::temp_dir().join("dr_dose_nuisance_example.json");
    nm.save(&path)?;
    let back = NuisanceModel::load(&path)?;
    println!("saved to {}; reloaded model identical: {}", path.display(), back == nm);
    Ok(())
}
