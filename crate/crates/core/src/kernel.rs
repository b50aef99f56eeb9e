//! Smoothing kernels, their self-convolutions, and rule-of-thumb bandwidths.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::least_squares;

/// Absolute tolerance for every kernel integral.
pub const QUAD_TOL: f64 = 1e-8;

/// A symmetric probability density supported on `[-1, 1]`.
pub trait Kernel: Send + Sync + std::fmt::Debug {
    fn eval(&self, u: f64) -> f64;

    fn name(&self) -> &'static str;

    /// `∫ K(u)^2 du`.
    fn roughness(&self) -> f64 {
        adaptive_simpson(&|u| self.eval(u).powi(2), -1.0, 1.0, QUAD_TOL * 1e-3)
    }

    /// `∫ u^2 K(u) du`.
    fn second_moment(&self) -> f64 {
        adaptive_simpson(&|u| u * u * self.eval(u), -1.0, 1.0, QUAD_TOL * 1e-3)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Epanechnikov;

impl Kernel for Epanechnikov {
    #[inline]
    fn eval(&self, u: f64) -> f64 {
        if u.abs() <= 1.0 {
            0.75 * (1.0 - u * u)
        } else {
            0.0
        }
    }

    fn name(&self) -> &'static str {
        "epanechnikov"
    }
}

pub fn epanechnikov() -> Epanechnikov {
    Epanechnikov
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn step<F: Fn(f64) -> f64 + ?Sized>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    if b <= a {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Integrates over `[a, b]` split at every integer inside it and at `extra`
/// breakpoints. Kernel convolutions are piecewise smooth between these.
fn piecewise_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, extra: &[f64], tol: f64) -> f64 {
    let mut cuts: Vec<f64> = vec![a, b];
    let mut k = a.ceil();
    while k < b {
        cuts.push(k);
        k += 1.0;
    }
    cuts.extend(extra.iter().copied().filter(|&c| c > a && c < b));
    cuts.sort_by(|x, y| x.total_cmp(y));
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
    let pieces = (cuts.len() - 1) as f64;
    cuts.windows(2)
        .map(|w| adaptive_simpson(f, w[0], w[1], tol / pieces))
        .sum()
}

/// `K^(s)(x)` with `K^(0) = K` and `K^(s)(x) = ∫ K^(s-1)(y) K(x - y) dy`,
/// i.e. the `(s + 1)`-fold convolution product of `K`.
fn convolution<K: Kernel + ?Sized>(k: &K, s: u32, x: f64, tol: f64) -> f64 {
    if s == 0 {
        return k.eval(x);
    }
    let reach = s as f64;
    let lo = (-reach).max(x - 1.0);
    let hi = reach.min(x + 1.0);
    if hi <= lo {
        return 0.0;
    }
    let inner_tol = tol * 1e-2;
    piecewise_simpson(
        &|y| convolution(k, s - 1, y, inner_tol) * k.eval(x - y),
        lo,
        hi,
        &[x - 1.0, x + 1.0],
        tol,
    )
}

/// Value at zero of the `s`-times convolution `K^(s)`, `s` in `1..=4`.
///
/// With `K^(0) = K` this is the `(s + 1)`-fold product, so `s = 1` gives
/// `∫K^2` (0.6 for the Epanechnikov kernel) and `s = 3` gives the four-fold
/// product `∫(K*K)^2`. Symmetry of `K` splits the evaluation as
/// `∫ K^(p)(y) K^(q)(y) dy` with `p + q = s - 1`, halving the nesting depth.
pub fn convolution_at_zero<K: Kernel + ?Sized>(k: &K, s: u32) -> Result<f64> {
    if !(1..=4).contains(&s) {
        return Err(Error::InvalidConfig(format!(
            "convolution order must be in 1..=4, got {s}"
        )));
    }
    let p = (s - 1) / 2;
    let q = s - 1 - p;
    let tol = QUAD_TOL * 1e-2;
    let reach = (p + 1) as f64;
    Ok(piecewise_simpson(
        &|y| convolution(k, p, y, tol * 1e-2) * convolution(k, q, y, tol * 1e-2),
        -reach,
        reach,
        &[],
        tol,
    ))
}

/// `C_K = (∫K^2 / (∫u^2 K)^2)^{1/5}`, the kernel factor of the rule-of-thumb
/// bandwidth for local linear regression.
pub fn rot_constant<K: Kernel + ?Sized>(k: &K) -> f64 {
    let mu2 = k.second_moment();
    (k.roughness() / (mu2 * mu2)).powf(0.2)
}

/// Rule-of-thumb bandwidth for local linear regression of `xi` on `a`.
///
/// A global quartic pilot `xi ≈ b0 + b1 a + ... + b4 a^4` supplies the
/// residual variance and curvature `m''(a) = 2 b2 + 6 b3 a + 12 b4 a^2`;
/// `h = C_K [σ² (a_max - a_min) / Σ m''(A_i)^2]^{1/5}`, clamped to
/// `[(a_max - a_min)/n, (a_max - a_min)/2]`.
pub fn rot_bandwidth<K: Kernel + ?Sized>(a: &[f64], xi: &[f64], k: &K) -> Result<f64> {
    let n = a.len();
    if n < 6 {
        return Err(Error::Degenerate(format!(
            "rule-of-thumb bandwidth needs at least 6 points, got {n}"
        )));
    }
    if xi.len() != n {
        return Err(Error::InvalidData("treatment and response lengths differ".into()));
    }
    let (a_min, a_max) = a
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    let range = a_max - a_min;
    if !(range > 0.0) {
        return Err(Error::Degenerate("all treatment values are equal".into()));
    }
    // Pilot fit in centred/scaled units t = (a - c) / s.
    let c = 0.5 * (a_min + a_max);
    let s = 0.5 * range;
    let x = DMatrix::from_fn(n, 5, |i, j| ((a[i] - c) / s).powi(j as i32));
    let fit = least_squares(&x, xi, None)?;
    let b = &fit.coefficients;
    let upper = range / 2.0;
    let mean = xi.iter().sum::<f64>() / n as f64;
    let spread = xi.iter().fold(0.0f64, |m, &v| m.max((v - mean).abs()));
    if b[2..].iter().all(|c| c.abs() <= 1e-10 * spread) {
        // A pilot without curvature puts no upper limit on the bandwidth.
        return Ok(upper);
    }
    let sigma2 = fit.rss / (n - 5) as f64;
    let curvature: f64 = a
        .iter()
        .map(|&ai| {
            let t = (ai - c) / s;
            let m2 = (2.0 * b[2] + 6.0 * b[3] * t + 12.0 * b[4] * t * t) / (s * s);
            m2 * m2
        })
        .sum();
    let lower = range / n as f64;
    let h = rot_constant(k) * (sigma2 * range / curvature).powf(0.2);
    if !h.is_finite() || h > upper {
        Ok(upper)
    } else {
        Ok(h.max(lower))
    }
}
