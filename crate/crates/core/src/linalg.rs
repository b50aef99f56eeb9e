//! Small dense least-squares helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Least-squares solution with its residual sum of squares.
#[derive(Debug, Clone)]
pub struct LsFit {
    pub coefficients: Vec<f64>,
    pub rss: f64,
}

/// Column scaling applied before solving so that designs mixing `A^3` with
/// unit-scale covariates stay well conditioned.
fn column_scales(x: &DMatrix<f64>) -> Vec<f64> {
    x.column_iter()
        .map(|c| {
            let s = c.amax();
            if s > 0.0 {
                s
            } else {
                1.0
            }
        })
        .collect()
}

/// Solves `min ||y - X b||` (optionally weighted by `w`) by Householder QR.
/// Fails if the scaled design is numerically rank deficient.
pub fn least_squares(x: &DMatrix<f64>, y: &[f64], w: Option<&[f64]>) -> Result<LsFit> {
    let (n, p) = x.shape();
    if n < p {
        return Err(Error::Degenerate(format!("{n} rows for {p} coefficients")));
    }
    let scales = column_scales(x);
    let mut xs = x.clone();
    for (j, s) in scales.iter().enumerate() {
        xs.column_mut(j).scale_mut(1.0 / s);
    }
    let mut ys = DVector::from_column_slice(y);
    if let Some(w) = w {
        for i in 0..n {
            let r = w[i].sqrt();
            xs.row_mut(i).scale_mut(r);
            ys[i] *= r;
        }
    }
    let qr = xs.clone().qr();
    let r = qr.r();
    let rmax = (0..p).map(|j| r[(j, j)].abs()).fold(0.0, f64::max);
    if let Some(j) = (0..p).find(|&j| r[(j, j)].abs() <= 1e-10 * rmax.max(f64::MIN_POSITIVE)) {
        return Err(Error::Degenerate(format!(
            "design matrix is rank deficient (column {j})"
        )));
    }
    let qty = qr.q().transpose() * &ys;
    let b = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::Degenerate("singular triangular factor".into()))?;
    let resid = &ys - &xs * &b;
    let coefficients = b.iter().zip(&scales).map(|(bj, s)| bj / s).collect();
    Ok(LsFit {
        coefficients,
        rss: resid.norm_squared(),
    })
}

/// Indices of the columns of `x` that are not numerically spanned by the
/// columns kept before them, scanning left to right.
pub fn independent_columns(x: &DMatrix<f64>) -> Vec<usize> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut keep = Vec::new();
    for (j, c) in x.column_iter().enumerate() {
        let norm = c.norm();
        if norm == 0.0 {
            continue;
        }
        let mut v = c.into_owned() / norm;
        // Two Gram-Schmidt passes keep the residual orthogonal to working precision.
        for _ in 0..2 {
            for q in &basis {
                let d = q.dot(&v);
                v.axpy(-d, q, 1.0);
            }
        }
        let r = v.norm();
        if r > 1e-8 {
            basis.push(v / r);
            keep.push(j);
        }
    }
    keep
}

/// Spreads coefficients fitted on the columns `keep` back to width `p`,
/// with zeros for dropped columns.
pub fn expand_coefficients(b: &[f64], keep: &[usize], p: usize) -> Vec<f64> {
    let mut out = vec![0.0; p];
    for (&j, &v) in keep.iter().zip(b) {
        out[j] = v;
    }
    out
}
