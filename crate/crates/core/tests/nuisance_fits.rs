use dr_dose::kernel::adaptive_simpson;
use dr_dose::nuisance::{
    fit_beta_propensity, fit_linear_outcome, fit_logistic_outcome, oracle_nuisance, BetaFitOptions,
    BetaSection, CovariateTransform, NuisanceModel, OutcomeBasis, OutcomeModel, PropensityBasis, PropensityModel, Provenance,
};
use dr_dose::simlab::{gen_model1, gen_model2, SimModel};
use dr_dose::Dataset;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use std::f64::consts::PI;

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Inverse Fisher information of a logit-linear Beta(λ, 1 - λ) model at the
/// true coefficients; per-row information is λ²(1-λ)² π² / sin²(πλ) z z'.
fn beta_standard_errors(ds: &Dataset, truth: &[f64]) -> Vec<f64> {
    let p = truth.len();
    let mut info = DMatrix::<f64>::zeros(p, p);
    for i in 0..ds.len() {
        let z: Vec<f64> = std::iter::once(1.0).chain(ds.covariate_row(i).iter().copied()).collect();
        let eta: f64 = z.iter().zip(truth).map(|(a, b)| a * b).sum();
        let lam = logistic(eta);
        let w = (lam * (1.0 - lam) * PI / (PI * lam).sin()).powi(2);
        let zv = DVector::from_vec(z);
        info += w * &zv * zv.transpose();
    }
    let cov = info.try_inverse().unwrap();
    (0..p).map(|j| cov[(j, j)].sqrt()).collect()
}

#[test]
fn beta_mle_recovers_model2_coefficients() {
    let mut rng = dr_dose::rng::stream(31, &[]);
    let ds = gen_model2(5000, 0.0, &mut rng);
    let fit = fit_beta_propensity(&ds, &BetaFitOptions::new(5.0, CovariateTransform::Identity)).unwrap();
    let truth = [0.0, 0.1, 0.1, -0.1, 0.2];
    let se = beta_standard_errors(&ds, &truth);
    for j in 0..5 {
        let z = (fit.coefficients[j] - truth[j]) / se[j];
        assert!(z.abs() < 3.0, "coefficient {j}: {} (se {})", fit.coefficients[j], se[j]);
    }
}

#[test]
fn fitted_density_integrates_to_one() {
    let mut rng = dr_dose::rng::stream(32, &[]);
    let ds = gen_model2(2000, 0.0, &mut rng);
    let fit = fit_beta_propensity(&ds, &BetaFitOptions::new(5.0, CovariateTransform::Identity)).unwrap();
    let r = 5.0;
    for _ in 0..10 {
        let l: Vec<f64> = (0..4).map(|_| rng.random::<f64>() * 6.0 - 3.0).collect();
        // The upper half is the lower half of Beta(1 - λ, λ), which avoids
        // cancellation in R - a; a = (R/2) t^5 tames the endpoint singularity.
        let mirror = BetaSection::new(1.0 - fit.lambda(&l).unwrap(), 0.0, r);
        let left = |t: f64| fit.density(0.5 * r * t.powi(5), &l).unwrap() * 2.5 * r * t.powi(4);
        let right = |t: f64| mirror.density(0.5 * r * t.powi(5)) * 2.5 * r * t.powi(4);
        let total = adaptive_simpson(&left, 0.0, 1.0, 1e-10) + adaptive_simpson(&right, 0.0, 1.0, 1e-10);
        assert!((total - 1.0).abs() < 1e-6, "l={l:?}: {total}");
    }
}

#[test]
fn constant_beta_mean_matches_one_parameter_search() {
    let mut rng = dr_dose::rng::stream(33, &[]);
    let lam: f64 = 0.3;
    let gamma_a = rand_distr::Gamma::new(lam, 1.0).unwrap();
    let gamma_b = rand_distr::Gamma::new(1.0 - lam, 1.0).unwrap();
    use rand_distr::Distribution;
    let a: Vec<f64> = (0..1500)
        .map(|_| loop {
            let (u, v): (f64, f64) = (gamma_a.sample(&mut rng), gamma_b.sample(&mut rng));
            let x = u / (u + v);
            if x > 0.0 && x < 1.0 {
                break 5.0 * x;
            }
        })
        .collect();
    let ds = Dataset::new(vec![0.0; a.len()], 1, a.clone(), vec![0.0; a.len()], None).unwrap();
    let opts = BetaFitOptions::new(5.0, CovariateTransform::Identity).basis(PropensityBasis::Intercept);
    let fit = fit_beta_propensity(&ds, &opts).unwrap();
    let got = fit.lambda(&[0.0]).unwrap();
    // Profile log likelihood in λ, maximised by golden section.
    let s1: f64 = a.iter().map(|v| (v / 5.0).ln()).sum();
    let s2: f64 = a.iter().map(|v| (1.0 - v / 5.0).ln()).sum();
    let n = a.len() as f64;
    let ll = |l: f64| (l - 1.0) * s1 - l * s2 + n * ((PI * l).sin() / PI).ln();
    let (mut lo, mut hi) = (1e-3, 1.0 - 1e-3);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = hi - g * (hi - lo);
        let d = lo + g * (hi - lo);
        if ll(c) > ll(d) {
            hi = d;
        } else {
            lo = c;
        }
    }
    let want = 0.5 * (lo + hi);
    assert!((got - want).abs() < 1e-4, "{got} vs {want}");
}

#[test]
fn logistic_fit_recovers_model1_coefficient() {
    let mut rng = dr_dose::rng::stream(34, &[]);
    let ds = gen_model1(5000, 0.0, &mut rng);
    let fit = fit_logistic_outcome(&ds, OutcomeBasis::Linear, CovariateTransform::Identity).unwrap();
    assert!(fit.converged);
    // Linear basis columns: 1, L1..L4, A, A·L1..A·L4; at δ = 0 the truth is
    // logit μ = 1 + 0.2 L1 + 0.2 L2 + 0.3 L3 - 0.1 L4.
    let truth = [1.0, 0.2, 0.2, 0.3, -0.1, 0.0, 0.0, 0.0, 0.0, 0.0];
    let n = ds.len();
    let x = DMatrix::from_fn(n, 10, |i, j| {
        let l = ds.covariate_row(i);
        let a = ds.treatment()[i];
        match j {
            0 => 1.0,
            1..=4 => l[j - 1],
            5 => a,
            _ => a * l[j - 6],
        }
    });
    let eta = &x * DVector::from_column_slice(&truth);
    let w = DVector::from_iterator(n, eta.iter().map(|&e| logistic(e) * (1.0 - logistic(e))));
    let info = x.transpose() * DMatrix::from_diagonal(&w) * &x;
    let cov = info.try_inverse().unwrap();
    let se = cov[(3, 3)].sqrt();
    let z = (fit.coefficients[3] - 0.3) / se;
    assert!(z.abs() < 3.0, "L3 coefficient {} (se {se})", fit.coefficients[3]);
}

#[test]
fn logistic_fit_on_unrelated_outcome_is_flat() {
    let mut rng = dr_dose::rng::stream(35, &[]);
    let n = 2000;
    let l: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
    let a: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 5.0).collect();
    let y: Vec<f64> = (0..n).map(|_| f64::from(u8::from(rng.random::<bool>()))).collect();
    let ds = Dataset::new(l, 1, a, y, None).unwrap();
    let fit = fit_logistic_outcome(&ds, OutcomeBasis::Linear, CovariateTransform::Identity).unwrap();
    let ybar = ds.outcome().iter().sum::<f64>() / n as f64;
    let mut dev: Vec<f64> = (0..n)
        .map(|i| (fit.eval(ds.covariate_row(i), ds.treatment()[i]).unwrap() - ybar).abs())
        .collect();
    let mean_p = (0..n).map(|i| fit.eval(ds.covariate_row(i), ds.treatment()[i]).unwrap()).sum::<f64>() / n as f64;
    // The intercept score equation pins the average fitted probability.
    assert!((mean_p - ybar).abs() < 1e-8);
    dev.sort_by(f64::total_cmp);
    assert!(dev[n / 2] < 0.02, "median deviation {}", dev[n / 2]);
}

#[test]
fn kang_schafer_design_changes_the_outcome_fit() {
    let mut rng = dr_dose::rng::stream(36, &[]);
    let ds = gen_model2(1000, 0.3, &mut rng);
    let plain = fit_linear_outcome(&ds, OutcomeBasis::LinearBump, CovariateTransform::Identity).unwrap();
    let bent = fit_linear_outcome(&ds, OutcomeBasis::LinearBump, CovariateTransform::KangSchafer).unwrap();
    let gap = (0..ds.len())
        .map(|i| {
            let (l, a) = (ds.covariate_row(i), ds.treatment()[i]);
            (plain.eval(l, a).unwrap() - bent.eval(l, a).unwrap()).abs()
        })
        .fold(0.0, f64::max);
    assert!(gap > 1e-3, "max prediction gap {gap}");
}

#[test]
fn kang_schafer_covariates_are_correlated() {
    let mut rng = dr_dose::rng::stream(37, &[]);
    let n = 5000;
    let rows: Vec<[f64; 4]> = (0..n)
        .map(|_| {
            let l: [f64; 4] = std::array::from_fn(|_| rand_distr::Distribution::<f64>::sample(&rand_distr::StandardNormal, &mut rng));
            dr_dose::nuisance::basis::kang_schafer_row(&l)
        })
        .collect();
    let mean: Vec<f64> = (0..4).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    let cov = |j: usize, k: usize| rows.iter().map(|r| (r[j] - mean[j]) * (r[k] - mean[k])).sum::<f64>() / n as f64;
    let mut largest: f64 = 0.0;
    for j in 0..4 {
        for k in 0..j {
            largest = largest.max((cov(j, k) / (cov(j, j) * cov(k, k)).sqrt()).abs());
        }
    }
    assert!(largest > 0.1, "largest off-diagonal correlation {largest}");
}

#[test]
fn fitted_nuisance_round_trips_through_json() {
    let mut rng = dr_dose::rng::stream(38, &[]);
    let ds = gen_model2(500, 0.2, &mut rng);
    let prop = fit_beta_propensity(&ds, &BetaFitOptions::new(5.0, CovariateTransform::Identity)).unwrap();
    let out = fit_linear_outcome(&ds, OutcomeBasis::LinearBump, CovariateTransform::Identity).unwrap();
    let nm = NuisanceModel::new(PropensityModel::Beta(prop), OutcomeModel::Fitted(out), 0.01, Provenance::Fitted).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nuisance.json");
    nm.save(&path).unwrap();
    let back = NuisanceModel::load(&path).unwrap();
    for i in 0..ds.len() {
        let (l, a) = (ds.covariate_row(i), ds.treatment()[i]);
        assert_eq!(nm.propensity(a, l).unwrap().to_bits(), back.propensity(a, l).unwrap().to_bits());
        assert_eq!(nm.outcome(l, a).unwrap().to_bits(), back.outcome(l, a).unwrap().to_bits());
    }
    let oracle = oracle_nuisance(SimModel::Model2, 0.2);
    let back = NuisanceModel::from_json(&oracle.to_json().unwrap()).unwrap();
    assert_eq!(back.outcome(ds.covariate_row(0), 1.0).unwrap(), oracle.outcome(ds.covariate_row(0), 1.0).unwrap());
}
