use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::basis::{CovariateTransform, DoseTerm, OutcomeBasis};
use super::{Link, OutcomeSection, PROB_CLIP};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{expand_coefficients, independent_columns, least_squares};
use crate::simlab::models::logistic;

const IRLS_MAX_ITER: usize = 100;
const IRLS_TOL: f64 = 1e-8;

/// Parametric outcome regression `μ(l, a)` on a fixed basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeFit {
    pub basis: OutcomeBasis,
    pub transform: CovariateTransform,
    pub link: Link,
    pub coefficients: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl OutcomeFit {
    pub fn section(&self, l: &[f64]) -> Result<OutcomeSection> {
        let lt = self.transform.apply(l)?;
        let mut s = OutcomeSection {
            poly: [0.0; 4],
            bump: 0.0,
            link: self.link,
        };
        let terms = self.basis.terms(&lt);
        if terms.len() != self.coefficients.len() {
            return Err(Error::InvalidData(format!(
                "outcome fit has {} coefficients but the basis has {} columns",
                self.coefficients.len(),
                terms.len()
            )));
        }
        for ((g, term), b) in terms.into_iter().zip(&self.coefficients) {
            match term {
                DoseTerm::Power(k) => s.poly[k as usize] += b * g,
                DoseTerm::Bump => s.bump += b * g,
            }
        }
        Ok(s)
    }

    pub fn eval(&self, l: &[f64], a: f64) -> Result<f64> {
        Ok(self.section(l)?.eval(a))
    }
}

/// Design matrix and the columns to fit. The flexible basis is over-complete
/// on discrete covariates (`L^2 = L` for binary `L`), so its aliased columns
/// are dropped and get coefficient 0; other bases must be full rank.
fn design(ds: &Dataset, basis: OutcomeBasis, transform: CovariateTransform) -> Result<(DMatrix<f64>, Vec<usize>)> {
    let n = ds.len();
    let p = basis.width(ds.dim());
    let mut x = DMatrix::zeros(n, p);
    for i in 0..n {
        let lt = transform.apply(ds.covariate_row(i))?;
        let a = ds.treatment()[i];
        for (j, (g, term)) in basis.terms(&lt).into_iter().enumerate() {
            x[(i, j)] = g * term.eval(a);
        }
    }
    let keep = if basis == OutcomeBasis::Flexible {
        independent_columns(&x)
    } else {
        (0..x.ncols()).collect()
    };
    if keep.len() < x.ncols() {
        log::debug!("outcome basis: dropped {} aliased columns", x.ncols() - keep.len());
        x = x.select_columns(&keep);
    }
    Ok((x, keep))
}

/// Ordinary least squares of `Y` on the basis.
pub fn fit_linear_outcome(
    ds: &Dataset,
    basis: OutcomeBasis,
    transform: CovariateTransform,
) -> Result<OutcomeFit> {
    let (x, keep) = design(ds, basis, transform)?;
    let fit = least_squares(&x, ds.outcome(), None)?;
    Ok(OutcomeFit {
        basis,
        transform,
        link: Link::Identity,
        coefficients: expand_coefficients(&fit.coefficients, &keep, basis.width(ds.dim())),
        iterations: 1,
        converged: true,
    })
}

/// Logistic regression of a binary `Y` by iteratively reweighted least
/// squares. Stops when the largest coefficient change drops below `1e-8` or
/// after 100 iterations; a fit that does not settle (complete separation,
/// constant outcome) is returned with `converged = false` and its
/// probabilities clipped to `[1e-6, 1 - 1e-6]`.
pub fn fit_logistic_outcome(
    ds: &Dataset,
    basis: OutcomeBasis,
    transform: CovariateTransform,
) -> Result<OutcomeFit> {
    if let Some(i) = ds.outcome().iter().position(|&y| y != 0.0 && y != 1.0) {
        return Err(Error::Cell {
            row: i + 1,
            column: "y".into(),
            message: "logistic outcome model needs a binary outcome".into(),
        });
    }
    let (x, keep) = design(ds, basis, transform)?;
    let (n, p) = x.shape();
    let y = ds.outcome();
    let mut beta = vec![0.0; p];
    let mut converged = false;
    let mut iterations = 0;
    let mut z = vec![0.0; n];
    let mut w = vec![0.0; n];
    while iterations < IRLS_MAX_ITER {
        iterations += 1;
        for i in 0..n {
            let eta: f64 = x.row(i).iter().zip(&beta).map(|(xi, b)| xi * b).sum();
            let mu = logistic(eta).clamp(1e-10, 1.0 - 1e-10);
            let wi = mu * (1.0 - mu);
            w[i] = wi;
            z[i] = eta + (y[i] - mu) / wi;
        }
        let next = match least_squares(&x, &z, Some(&w)) {
            Ok(fit) => fit.coefficients,
            Err(e) if iterations == 1 => return Err(e),
            // Weights collapsed under separation; keep the last iterate.
            Err(_) => break,
        };
        let change = next
            .iter()
            .zip(&beta)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        beta = next;
        if change < IRLS_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!(
            "logistic outcome fit did not converge in {iterations} iterations; \
             probabilities are clipped to [{PROB_CLIP}, {}]",
            1.0 - PROB_CLIP
        );
    }
    Ok(OutcomeFit {
        basis,
        transform,
        link: Link::Logit,
        coefficients: expand_coefficients(&beta, &keep, basis.width(ds.dim())),
        iterations,
        converged,
    })
}
