//! Shows the double robustness of the pseudo-outcome: with one nuisance
//! model misspecified the smoothed pseudo-outcomes still track the true
//! curve, with both misspecified they need not.
//!
//! cargo run --release --example double_robustness

use dr_dose::local_linear::LinearSmoother;
use dr_dose::nuisance::{
    fit_beta_propensity, fit_linear_outcome, BetaFitOptions, CovariateTransform, NuisanceModel, OracleSpec,
    OutcomeBasis, OutcomeModel, PropensityModel, Provenance,
};
use dr_dose::simlab::{gen_model2, SimModel};
use dr_dose::{compute_xi, Epanechnikov};

fn main() -> dr_dose::Result<()> {
    let delta = 0.5;
    let ds = gen_model2(6000, delta, &mut dr_dose::rng::stream(6, &[]));
    let spec = OracleSpec::new(SimModel::Model2, delta);
    let mu_bad = fit_linear_outcome(&ds, OutcomeBasis::Linear, CovariateTransform::KangSchafer)?;
    let pi_bad = fit_beta_propensity(&ds, &BetaFitOptions::new(5.0, CovariateTransform::KangSchafer))?;
    let pairs = [
        ("both correct", PropensityModel::Oracle(spec.clone()), OutcomeModel::Oracle(spec.clone())),
        ("outcome wrong", PropensityModel::Oracle(spec.clone()), OutcomeModel::Fitted(mu_bad.clone())),
        ("propensity wrong", PropensityModel::Beta(pi_bad.clone()), OutcomeModel::Oracle(spec.clone())),
        ("both wrong", PropensityModel::Beta(pi_bad), OutcomeModel::Fitted(mu_bad)),
    ];
    let points = [1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0];
    let sm = LinearSmoother::new(&points, ds.treatment(), 0.15, &Epanechnikov);
    let truth: Vec<String> = points.iter().map(|&a| format!("{:6.3}", SimModel::Model2.effect_curve(delta, a))).collect();
    println!("{:>17} {}", "truth", truth.join(" "));
    for (name, p, o) in pairs {
        let nm = NuisanceModel::new(p, o, 0.01, Provenance::Misspecified)?;
        let xi = compute_xi(&ds, &nm)?;
        let est: Vec<String> = sm
            .apply(&xi.values)
            .into_iter()
            .map(|v| v.map_or("     -".into(), |v| format!("{v:6.3}")))
            .collect();
        println!("{name:>17} {}", est.join(" "));
    }
    Ok(())
}
