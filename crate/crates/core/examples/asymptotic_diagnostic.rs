//! Compares the bootstrap null distribution with the asymptotic bias and
//! variance constants, which are reported as diagnostics only.
//!
//! cargo run --release --example asymptotic_diagnostic

use dr_dose::data::Bandwidth;
use dr_dose::nuisance::oracle_nuisance;
use dr_dose::simlab::{gen_model2, SimModel};
use dr_dose::{asymptotic_null_params, compute_xi, run_test_on_pseudo, Epanechnikov, TestConfig};

fn main() -> dr_dose::Result<()> {
    let ds = gen_model2(3000, 0.0, &mut dr_dose::rng::stream(4, &[]));
    let xi = compute_xi(&ds, &oracle_nuisance(SimModel::Model2, 0.0))?;
    for h in [0.1, 0.3] {
        let cfg = TestConfig {
            bandwidth: Bandwidth::Fixed(h),
            boot_reps: 400,
            ..TestConfig::default()
        };
        let r = run_test_on_pseudo(ds.treatment(), &xi.values, &cfg, &Epanechnikov)?;
        let w = r.config.weight.expect("resolved by the test");
        let d = asymptotic_null_params(ds.treatment(), &xi.values, h, &Epanechnikov, &w)?;
        let n = r.boot_stats.len() as f64;
        let mean = r.boot_stats.iter().sum::<f64>() / n;
        let var = r.boot_stats.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1.0);
        println!(
            "h {h}: bootstrap mean {mean:.3} vs b0h {:.3}; bootstrap var {var:.3} vs V {:.3} / V_squared {:.3}; T = {:.3}",
            d.b0h, d.v, d.v_squared, r.statistic
        );
    }
    Ok(())
}
