//! Local linear regression of pseudo-outcomes on treatment.
//!
//! At a point `a` with `u_i = (A_i - a) / h` and `w_i = K(u_i)`, let
//! `S_r = Σ w_i u_i^r` and `T_r = Σ w_i u_i^r ξ_i`. Then
//!
//! ```text
//! θ(a)  = (S2 T0 - S1 T1) / (S0 S2 - S1^2)
//! slope = (S0 T1 - S1 T0) / (S0 S2 - S1^2)
//! ```
//!
//! where `slope` is the coefficient on `(t - a) / h`, i.e. `h` times the
//! derivative. Windows with `|S0 S2 - S1^2| < 1e-12 S0^2` are flagged.

use std::io::Write;

use crate::error::{Error, Result};
use crate::kernel::Kernel;

/// Relative threshold on the local design determinant.
pub const SINGULAR_TOL: f64 = 1e-12;
/// Largest share of flagged grid points tolerated by [`fit_grid`].
pub const MAX_FLAGGED_SHARE: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFit {
    pub theta: f64,
    pub slope: f64,
}

#[inline]
fn solve(s: [f64; 3], t: [f64; 2]) -> Option<LocalFit> {
    let det = s[0] * s[2] - s[1] * s[1];
    if !(s[0] > 0.0) || det.abs() < SINGULAR_TOL * s[0] * s[0] {
        return None;
    }
    Some(LocalFit {
        theta: (s[2] * t[0] - s[1] * t[1]) / det,
        slope: (s[0] * t[1] - s[1] * t[0]) / det,
    })
}

/// Local linear fit at `a` by a direct scan; `None` for a singular window.
pub fn fit_at<K: Kernel + ?Sized>(a: f64, treat: &[f64], xi: &[f64], h: f64, k: &K) -> Option<LocalFit> {
    let mut s = [0.0; 3];
    let mut t = [0.0; 2];
    for (&ai, &yi) in treat.iter().zip(xi) {
        let u = (ai - a) / h;
        let w = k.eval(u);
        if w == 0.0 {
            continue;
        }
        s[0] += w;
        s[1] += w * u;
        s[2] += w * u * u;
        t[0] += w * yi;
        t[1] += w * u * yi;
    }
    solve(s, t)
}

/// Local linear smoother over a fixed treatment vector. Treatments are
/// sorted once so each window is located by binary search.
#[derive(Debug, Clone)]
pub struct LocalLinear<'k, K: Kernel + ?Sized> {
    treat: Vec<f64>,
    order: Vec<usize>,
    sorted: Vec<f64>,
    h: f64,
    kernel: &'k K,
}

impl<'k, K: Kernel + ?Sized> LocalLinear<'k, K> {
    pub fn new(treat: &[f64], h: f64, kernel: &'k K) -> Self {
        let mut order: Vec<usize> = (0..treat.len()).collect();
        order.sort_by(|&i, &j| treat[i].total_cmp(&treat[j]).then(i.cmp(&j)));
        let sorted = order.iter().map(|&i| treat[i]).collect();
        Self {
            treat: treat.to_vec(),
            order,
            sorted,
            h,
            kernel,
        }
    }

    pub fn bandwidth(&self) -> f64 {
        self.h
    }

    /// Original row indices within `h` of `a`, ascending.
    fn window(&self, a: f64) -> Vec<usize> {
        let lo = self.sorted.partition_point(|&v| v < a - self.h);
        let hi = self.sorted.partition_point(|&v| v <= a + self.h);
        let mut idx = self.order[lo..hi].to_vec();
        idx.sort_unstable();
        idx
    }

    /// Fit at `a`. Rows are visited in original index order so the result
    /// is bit-identical to [`fit_at`].
    pub fn fit(&self, a: f64, xi: &[f64]) -> Option<LocalFit> {
        let mut s = [0.0; 3];
        let mut t = [0.0; 2];
        for i in self.window(a) {
            let u = (self.treat[i] - a) / self.h;
            let w = self.kernel.eval(u);
            if w == 0.0 {
                continue;
            }
            s[0] += w;
            s[1] += w * u;
            s[2] += w * u * u;
            t[0] += w * xi[i];
            t[1] += w * u * xi[i];
        }
        solve(s, t)
    }
}

/// Equivalent-kernel weights `l_i(a)` with `θ(a) = Σ l_i(a) ξ_i`, one sparse
/// row per grid point. The design depends only on the treatments, so the
/// same smoother serves every bootstrap replicate.
#[derive(Debug, Clone)]
pub struct LinearSmoother {
    /// `None` marks a flagged (singular) grid point.
    rows: Vec<Option<Vec<(usize, f64)>>>,
}

impl LinearSmoother {
    pub fn new<K: Kernel + ?Sized>(points: &[f64], treat: &[f64], h: f64, k: &K) -> Self {
        let mut order: Vec<usize> = (0..treat.len()).collect();
        order.sort_by(|&i, &j| treat[i].total_cmp(&treat[j]).then(i.cmp(&j)));
        let sorted: Vec<f64> = order.iter().map(|&i| treat[i]).collect();
        let rows = points
            .iter()
            .map(|&a| {
                let lo = sorted.partition_point(|&v| v < a - h);
                let hi = sorted.partition_point(|&v| v <= a + h);
                let mut idx: Vec<usize> = order[lo..hi].to_vec();
                idx.sort_unstable();
                let mut s = [0.0; 3];
                let mut us = Vec::with_capacity(idx.len());
                for &i in &idx {
                    let u = (treat[i] - a) / h;
                    let w = k.eval(u);
                    s[0] += w;
                    s[1] += w * u;
                    s[2] += w * u * u;
                    us.push((i, u, w));
                }
                let det = s[0] * s[2] - s[1] * s[1];
                if !(s[0] > 0.0) || det.abs() < SINGULAR_TOL * s[0] * s[0] {
                    return None;
                }
                Some(
                    us.into_iter()
                        .filter(|&(_, _, w)| w != 0.0)
                        .map(|(i, u, w)| (i, w * (s[2] - s[1] * u) / det))
                        .collect(),
                )
            })
            .collect();
        Self { rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn is_flagged(&self, g: usize) -> bool {
        self.rows[g].is_none()
    }

    pub fn flagged_count(&self) -> usize {
        self.rows.iter().filter(|r| r.is_none()).count()
    }

    /// Smoothed values; `None` at flagged points.
    pub fn apply(&self, xi: &[f64]) -> Vec<Option<f64>> {
        self.rows
            .iter()
            .map(|r| r.as_ref().map(|w| w.iter().map(|&(i, l)| l * xi[i]).sum()))
            .collect()
    }

    /// Sum of squared weights `Σ l_i(a)^2` at each point, `None` if flagged.
    pub fn weight_norms(&self) -> Vec<Option<f64>> {
        self.rows
            .iter()
            .map(|r| r.as_ref().map(|w| w.iter().map(|&(_, l)| l * l).sum()))
            .collect()
    }

    pub fn row(&self, g: usize) -> Option<&[(usize, f64)]> {
        self.rows[g].as_deref()
    }
}

/// Local linear curve on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveEstimate {
    pub grid: Vec<f64>,
    /// `NaN` at flagged points.
    pub theta: Vec<f64>,
    pub slope: Vec<f64>,
    pub flagged: Vec<bool>,
    pub h: f64,
    pub kernel: String,
}

impl CurveEstimate {
    pub fn flagged_count(&self) -> usize {
        self.flagged.iter().filter(|&&f| f).count()
    }

    /// Writes `a,theta,slope,flagged`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["a", "theta", "slope", "flagged"])?;
        for g in 0..self.grid.len() {
            wtr.write_record([
                self.grid[g].to_string(),
                self.theta[g].to_string(),
                self.slope[g].to_string(),
                self.flagged[g].to_string(),
            ])?;
        }
        wtr.flush().map_err(|source| Error::Io {
            path: "<curve writer>".into(),
            source,
        })
    }

    pub fn save_csv(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

/// Fits every grid point; more than 20% flagged points is an error.
pub fn fit_grid<K: Kernel + ?Sized>(
    grid: &[f64],
    treat: &[f64],
    xi: &[f64],
    h: f64,
    k: &K,
) -> Result<CurveEstimate> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidConfig(format!("bandwidth must be positive, got {h}")));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidConfig("grid must be strictly increasing".into()));
    }
    let ll = LocalLinear::new(treat, h, k);
    let mut curve = CurveEstimate {
        grid: grid.to_vec(),
        theta: Vec::with_capacity(grid.len()),
        slope: Vec::with_capacity(grid.len()),
        flagged: Vec::with_capacity(grid.len()),
        h,
        kernel: k.name().to_string(),
    };
    for &a in grid {
        match ll.fit(a, xi) {
            Some(f) => {
                curve.theta.push(f.theta);
                curve.slope.push(f.slope);
                curve.flagged.push(false);
            }
            None => {
                curve.theta.push(f64::NAN);
                curve.slope.push(f64::NAN);
                curve.flagged.push(true);
            }
        }
    }
    check_flagged(curve.flagged_count(), grid.len())?;
    Ok(curve)
}

pub(crate) fn check_flagged(flagged: usize, total: usize) -> Result<()> {
    if flagged as f64 > MAX_FLAGGED_SHARE * total as f64 {
        return Err(Error::TooManyFlagged { flagged, total });
    }
    Ok(())
}
