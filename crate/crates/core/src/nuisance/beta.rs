use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::basis::{CovariateTransform, PropensityBasis};
use super::BetaSection;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{expand_coefficients, independent_columns};
use crate::simlab::models::logistic;

pub const DEFAULT_LAMBDA_CLIP: f64 = 1e-4;

/// Beta propensity `(A - offset) / scale | L ~ Beta(λ(L), 1 - λ(L))` with
/// `logit λ` linear in a covariate basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaPropensityFit {
    pub basis: PropensityBasis,
    pub transform: CovariateTransform,
    /// Intercept first, then one slope per basis feature.
    pub coefficients: Vec<f64>,
    pub offset: f64,
    pub scale: f64,
    pub lambda_clip: f64,
    pub iterations: usize,
    pub gradient_norm: f64,
}

impl BetaPropensityFit {
    pub fn lambda(&self, l: &[f64]) -> Result<f64> {
        let lt = self.transform.apply(l)?;
        let f = self.basis.features(&lt);
        if f.len() != self.coefficients.len() {
            return Err(Error::InvalidData(format!(
                "propensity fit has {} coefficients but the basis has {} features",
                self.coefficients.len(),
                f.len()
            )));
        }
        let eta: f64 = f.iter().zip(&self.coefficients).map(|(x, b)| x * b).sum();
        Ok(logistic(eta).clamp(self.lambda_clip, 1.0 - self.lambda_clip))
    }

    pub fn section(&self, l: &[f64]) -> Result<BetaSection> {
        Ok(BetaSection::new(self.lambda(l)?, self.offset, self.scale))
    }

    pub fn density(&self, a: f64, l: &[f64]) -> Result<f64> {
        Ok(self.section(l)?.density(a))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BetaFitOptions {
    pub basis: PropensityBasis,
    pub transform: CovariateTransform,
    pub offset: f64,
    pub scale: f64,
    pub max_iter: usize,
    pub grad_tol: f64,
}

impl BetaFitOptions {
    pub fn new(scale: f64, transform: CovariateTransform) -> Self {
        Self {
            basis: PropensityBasis::Linear,
            transform,
            offset: 0.0,
            scale,
            max_iter: 500,
            grad_tol: 1e-6,
        }
    }

    pub fn basis(mut self, basis: PropensityBasis) -> Self {
        self.basis = basis;
        self
    }

    pub fn offset(mut self, offset: f64) -> Self {
        self.offset = offset;
        self
    }
}

struct Problem {
    /// Whitened design: `z' z / n = I`.
    z: DMatrix<f64>,
    log_x: Vec<f64>,
    log_1mx: Vec<f64>,
    clip: f64,
}

impl Problem {
    fn lambdas(&self, theta: &DVector<f64>) -> Vec<f64> {
        (&self.z * theta)
            .iter()
            .map(|&eta| logistic(eta).clamp(self.clip, 1.0 - self.clip))
            .collect()
    }

    /// Mean log-likelihood, without the constant `-ln(π R)`.
    fn loglik(&self, theta: &DVector<f64>) -> f64 {
        let lam = self.lambdas(theta);
        let n = lam.len() as f64;
        lam.iter()
            .enumerate()
            .map(|(i, &l)| (l - 1.0) * self.log_x[i] - l * self.log_1mx[i] + (PI * l).sin().ln())
            .sum::<f64>()
            / n
    }

    fn gradient(&self, theta: &DVector<f64>) -> DVector<f64> {
        let eta = &self.z * theta;
        let n = eta.len();
        let score = DVector::from_iterator(
            n,
            eta.iter().enumerate().map(|(i, &e)| {
                let raw = logistic(e);
                if raw <= self.clip || raw >= 1.0 - self.clip {
                    return 0.0;
                }
                let dl = self.log_x[i] - self.log_1mx[i] + PI / (PI * raw).tan();
                dl * raw * (1.0 - raw)
            }),
        );
        self.z.tr_mul(&score) / n as f64
    }
}

/// Maximum-likelihood Beta propensity by gradient ascent with a backtracking
/// (Armijo) line search. The design is whitened first, so the mean
/// log-likelihood has a near-isotropic Hessian. Stops when the gradient's
/// max-norm falls below `grad_tol`; reaching `max_iter` is an error.
pub fn fit_beta_propensity(ds: &Dataset, opts: &BetaFitOptions) -> Result<BetaPropensityFit> {
    fit_beta_propensity_traced(ds, opts).map(|(fit, _)| fit)
}

/// As [`fit_beta_propensity`], also returning the log-likelihood after each
/// accepted step.
pub fn fit_beta_propensity_traced(
    ds: &Dataset,
    opts: &BetaFitOptions,
) -> Result<(BetaPropensityFit, Vec<f64>)> {
    if !(opts.scale > 0.0) {
        return Err(Error::InvalidConfig(format!("scale must be positive, got {}", opts.scale)));
    }
    let n = ds.len();
    let p = opts.basis.width(ds.dim());
    let mut log_x = Vec::with_capacity(n);
    let mut log_1mx = Vec::with_capacity(n);
    for (i, &a) in ds.treatment().iter().enumerate() {
        let x = (a - opts.offset) / opts.scale;
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::Cell {
                row: i + 1,
                column: "a".into(),
                message: format!(
                    "treatment {a} lies outside the Beta support ({}, {})",
                    opts.offset,
                    opts.offset + opts.scale
                ),
            });
        }
        log_x.push(x.ln());
        log_1mx.push((-x).ln_1p());
    }
    let mut g = DMatrix::zeros(n, p);
    for i in 0..n {
        let lt = opts.transform.apply(ds.covariate_row(i))?;
        for (j, f) in opts.basis.features(&lt).into_iter().enumerate() {
            g[(i, j)] = f;
        }
    }
    // The flexible basis is over-complete on discrete covariates; its aliased
    // columns are dropped and get coefficient 0.
    let keep = if opts.basis == PropensityBasis::Flexible {
        independent_columns(&g)
    } else {
        (0..p).collect()
    };
    let g = g.select_columns(&keep);
    let q = keep.len();
    // Whitening: g = q r, z = sqrt(n) q, so g b = z θ with b = sqrt(n) r^{-1} θ.
    let qr = g.clone().qr();
    let r = qr.r();
    let rmax = (0..q).map(|j| r[(j, j)].abs()).fold(0.0, f64::max);
    if (0..q).any(|j| r[(j, j)].abs() <= 1e-10 * rmax) {
        return Err(Error::Degenerate("propensity design is rank deficient".into()));
    }
    let sqrt_n = (n as f64).sqrt();
    let problem = Problem {
        z: qr.q() * sqrt_n,
        log_x,
        log_1mx,
        clip: DEFAULT_LAMBDA_CLIP,
    };

    let mut theta = DVector::zeros(q);
    let mut ll = problem.loglik(&theta);
    let mut trace = vec![ll];
    let mut step = 2.0;
    let mut grad = problem.gradient(&theta);
    let mut gnorm = grad.amax();
    let mut iterations = 0;
    while gnorm >= opts.grad_tol {
        if iterations == opts.max_iter {
            return Err(Error::NoConvergence {
                iterations,
                gradient_norm: gnorm,
            });
        }
        iterations += 1;
        let g2 = grad.norm_squared();
        let mut accepted = false;
        for _ in 0..60 {
            let cand = &theta + &grad * step;
            let cll = problem.loglik(&cand);
            if cll.is_finite() && cll >= ll + 1e-4 * step * g2 {
                theta = cand;
                ll = cll;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // No ascent direction left at machine precision.
            break;
        }
        trace.push(ll);
        step *= 1.5;
        grad = problem.gradient(&theta);
        gnorm = grad.amax();
    }

    let b_scaled = r
        .solve_upper_triangular(&(theta * sqrt_n))
        .ok_or_else(|| Error::Degenerate("singular propensity factor".into()))?;
    Ok((
        BetaPropensityFit {
            basis: opts.basis,
            transform: opts.transform,
            coefficients: expand_coefficients(b_scaled.as_slice(), &keep, p),
            offset: opts.offset,
            scale: opts.scale,
            lambda_clip: DEFAULT_LAMBDA_CLIP,
            iterations,
            gradient_norm: gnorm,
        },
        trace,
    ))
}
