use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::Serialize;

use super::models::{SimModel, BUMP_EXPONENT_SIGN};
use crate::data::Dataset;

/// Smallest Gamma shape used when drawing Beta variates.
pub const MIN_SHAPE: f64 = 1e-4;

/// Describes how a simulated dataset was produced.
#[derive(Debug, Clone, Serialize)]
pub struct GeneratorMeta {
    pub model: SimModel,
    pub delta: f64,
    pub n: usize,
    pub treatment_support: (f64, f64),
    pub bump_exponent: &'static str,
}

impl GeneratorMeta {
    pub fn new(model: SimModel, delta: f64, n: usize) -> Self {
        Self {
            model,
            delta,
            n,
            treatment_support: (0.0, model.scale()),
            bump_exponent: BUMP_EXPONENT_SIGN,
        }
    }
}

/// `Beta(p, q)` as `X / (X + Y)` with independent Gamma draws. Redraws the
/// rare underflow that would land exactly on 0 or 1.
pub fn beta_via_gamma<R: Rng + ?Sized>(p: f64, q: f64, rng: &mut R) -> f64 {
    let gx = Gamma::new(p.max(MIN_SHAPE), 1.0).expect("positive shape");
    let gy = Gamma::new(q.max(MIN_SHAPE), 1.0).expect("positive shape");
    loop {
        let x: f64 = gx.sample(rng);
        let y: f64 = gy.sample(rng);
        let v = x / (x + y);
        if v > 0.0 && v < 1.0 {
            return v;
        }
    }
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

fn draw<R: Rng + ?Sized>(model: SimModel, n: usize, delta: f64, rng: &mut R) -> Dataset {
    let mut cov = Vec::with_capacity(4 * n);
    let mut a = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut group = Vec::with_capacity(n);
    for _ in 0..n {
        let mut l = [normal(rng), normal(rng), normal(rng), normal(rng)];
        if model == SimModel::Modifier {
            l[3] = if l[3] > 1.0 { 1.0 } else { 0.0 };
            group.push(l[3] as usize);
        }
        let lambda = model.lambda(&l);
        let ai = model.scale() * beta_via_gamma(lambda, 1.0 - lambda, rng);
        let mu = model.outcome_section(delta, &l).eval(ai);
        let yi = match model {
            SimModel::Model1 => {
                if rng.random::<f64>() < mu {
                    1.0
                } else {
                    0.0
                }
            }
            SimModel::Model2 | SimModel::Modifier => mu + 0.5 * normal(rng),
        };
        cov.extend_from_slice(&l);
        a.push(ai);
        y.push(yi);
    }
    let group = (model == SimModel::Modifier).then_some(group);
    // A modifier sample so small that one level never occurs keeps no group.
    let group = group.filter(|g| g.contains(&0) && g.contains(&1));
    Dataset::new(cov, 4, a, y, group).expect("generated data satisfies the dataset invariants")
}

/// Binary-outcome model: `(A/20) | L ~ Beta(λ, 1-λ)` with
/// `logit λ = -0.8 + 0.1 L1 + 0.1 L2 - 0.1 L3 + 0.2 L4` and
/// `logit μ = 1 + (0.2, 0.2, 0.3, -0.1)'L + δ A (0.1 - 0.1 L1 + 0.1 L3 - 0.13^2 A^2)`.
pub fn gen_model1<R: Rng + ?Sized>(n: usize, delta: f64, rng: &mut R) -> Dataset {
    draw(SimModel::Model1, n, delta, rng)
}

/// Continuous-outcome model: `(A/5) | L ~ Beta(λ, 1-λ)` with
/// `logit λ = 0.1 L1 + 0.1 L2 - 0.1 L3 + 0.2 L4` and
/// `Y ~ N((0.2, 0.2, 0.3, -0.1)'L + A(-0.1 L1 + 0.1 L3) + δ exp{-(A-2.5)^2/0.25}, 0.5^2)`.
pub fn gen_model2<R: Rng + ?Sized>(n: usize, delta: f64, rng: &mut R) -> Dataset {
    draw(SimModel::Model2, n, delta, rng)
}

/// Effect-modifier model; the group column is `L4 = 1{L̃4 > 1}`.
pub fn gen_modifier<R: Rng + ?Sized>(n: usize, delta: f64, rng: &mut R) -> Dataset {
    draw(SimModel::Modifier, n, delta, rng)
}

pub fn generate<R: Rng + ?Sized>(model: SimModel, n: usize, delta: f64, rng: &mut R) -> Dataset {
    draw(model, n, delta, rng)
}
