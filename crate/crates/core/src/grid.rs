//! Uniform grids on the half-line and the line, finite-difference stencils
//! and quadrature weights.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;

/// Vector-valued samples `u(i h)`, `i = 0..=N`, on `[0, X]`, with an
/// optional stack of one-sided derivatives at `x = 0`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct HalfLineSamples {
    pub h: f64,
    /// `comps[c][i]` is component `c` at `x_i`.
    pub comps: Vec<Vec<f64>>,
    /// `jet[c][n]` is `d^n u_c / dx^n (0)`.
    pub jet: Option<Vec<Vec<f64>>>,
}

pub type SampledHalfLine = HalfLineSamples;
/// Same layout with `t` as the variable and `k` as the step.
pub type BoundarySignal = HalfLineSamples;

impl HalfLineSamples {
    pub fn new(h: f64, comps: Vec<Vec<f64>>) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidParameter(format!("grid spacing {h}")));
        }
        let Some(first) = comps.first() else {
            return Err(Error::Dimension("no components".into()));
        };
        let len = first.len();
        if len < 2 || comps.iter().any(|c| c.len() != len) {
            return Err(Error::Dimension("components must share a length of at least 2".into()));
        }
        Ok(HalfLineSamples { h, comps, jet: None })
    }

    pub fn scalar(h: f64, values: Vec<f64>) -> Result<Self> {
        Self::new(h, vec![values])
    }

    /// Samples `exprs` on `n + 1` points and records their jets to `order`
    /// where they exist.
    pub fn from_exprs(exprs: &[Expr], h: f64, n: usize, order: usize) -> Result<Self> {
        let comps = exprs
            .iter()
            .map(|e| (0..=n).map(|i| e.eval(i as f64 * h)).collect())
            .collect();
        let mut s = Self::new(h, comps)?;
        s.jet = Some(exprs.iter().map(|e| e.partial_jet(0.0, order)).collect());
        Ok(s)
    }

    pub fn with_jet(mut self, jet: Vec<Vec<f64>>) -> Result<Self> {
        if jet.len() != self.q() {
            return Err(Error::Dimension("jet component count".into()));
        }
        for (c, j) in jet.iter().enumerate() {
            if let Some(&j0) = j.first() {
                let u0 = self.comps[c][0];
                if (j0 - u0).abs() > 1e-12 * (1.0 + u0.abs()) {
                    return Err(Error::InvalidParameter(format!(
                        "jet[{c}][0] = {j0} disagrees with sample {u0}"
                    )));
                }
            }
        }
        self.jet = Some(jet);
        Ok(self)
    }

    pub fn q(&self) -> usize {
        self.comps.len()
    }

    /// Number of intervals `N`.
    pub fn n(&self) -> usize {
        self.comps[0].len() - 1
    }

    pub fn extent(&self) -> f64 {
        self.n() as f64 * self.h
    }

    pub fn comp(&self, c: usize) -> &[f64] {
        &self.comps[c]
    }

    /// Cubic interpolation of component `c` at `x`; `None` outside `[0, X]`.
    pub fn interpolate(&self, c: usize, x: f64) -> Option<f64> {
        interp_cubic(&self.comps[c], self.h, x)
    }

    /// `d^order u_c / dx^order (0)`: the exact jet when present, otherwise a
    /// one-sided stencil of `order + 4` points.
    pub fn boundary_derivative(&self, c: usize, order: usize) -> Result<f64> {
        if let Some(j) = &self.jet {
            if let Some(v) = j[c].get(order) {
                return Ok(*v);
            }
            return Err(Error::JetUnderflow { order: j[c].len() });
        }
        one_sided_derivative(&self.comps[c], self.h, order)
    }

    pub fn has_exact_jet(&self) -> bool {
        self.jet.is_some()
    }
}

/// Samples on the line, `x_i = x0 + i h`.
#[derive(Clone, Debug, PartialEq)]
pub struct LineSamples {
    pub x0: f64,
    pub h: f64,
    pub values: Vec<f64>,
}

impl LineSamples {
    pub fn from_fn(x0: f64, x1: f64, n: usize, f: impl Fn(f64) -> f64) -> Self {
        let h = (x1 - x0) / n as f64;
        LineSamples {
            x0,
            h,
            values: (0..=n).map(|i| f(x0 + i as f64 * h)).collect(),
        }
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.h
    }
}

pub fn interp_cubic(v: &[f64], h: f64, x: f64) -> Option<f64> {
    let n = v.len() - 1;
    let s = x / h;
    if s < -1e-9 || s > n as f64 + 1e-9 {
        return None;
    }
    let s = s.clamp(0.0, n as f64);
    let i = s.floor() as usize;
    if (s - i as f64) == 0.0 {
        return Some(v[i.min(n)]);
    }
    if n < 3 {
        let i = i.min(n - 1);
        let w = s - i as f64;
        return Some(v[i] * (1.0 - w) + v[i + 1] * w);
    }
    let base = i.saturating_sub(1).min(n - 3);
    let mut acc = 0.0;
    for a in 0..4 {
        let xa = (base + a) as f64;
        let mut l = 1.0;
        for b in 0..4 {
            if a != b {
                let xb = (base + b) as f64;
                l *= (s - xb) / (xa - xb);
            }
        }
        acc += l * v[base + a];
    }
    Some(acc)
}

/// Fornberg's algorithm: `w[d][i]` is the weight of `f(x[i])` in the
/// approximation of `f^(d)(z)`, `d = 0..=m`.
pub fn fornberg_weights(z: f64, x: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// `u^(order)(0)` from the first `order + 4` samples.
pub fn one_sided_derivative(v: &[f64], h: f64, order: usize) -> Result<f64> {
    let npts = order + 4;
    if v.len() < npts {
        return Err(Error::JetUnderflow { order });
    }
    let xs: Vec<f64> = (0..npts).map(|i| i as f64).collect();
    let w = fornberg_weights(0.0, &xs, order);
    let d: f64 = w[order].iter().zip(v).map(|(a, b)| a * b).sum();
    Ok(d / h.powi(order as i32))
}

/// First derivative on a uniform grid: fourth-order centered in the
/// interior, second-order at the two points next to each end, second-order
/// one-sided at the ends.
pub fn diff(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    let mut d = vec![0.0; n];
    if n < 3 {
        if n == 2 {
            let s = (v[1] - v[0]) / h;
            d[0] = s;
            d[1] = s;
        }
        return d;
    }
    d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
    for i in 1..n - 1 {
        d[i] = if i >= 2 && i + 2 < n {
            (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]) / (12.0 * h)
        } else {
            (v[i + 1] - v[i - 1]) / (2.0 * h)
        };
    }
    d
}

/// Composite quadrature weights on `n` equispaced points: Simpson when the
/// interval count is even, Simpson plus a closing 3/8 panel when odd.
pub fn quad_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; n];
    match n {
        0 | 1 => return w,
        2 => {
            w[0] = h / 2.0;
            w[1] = h / 2.0;
            return w;
        }
        3 => {
            w[0] = h / 3.0;
            w[1] = 4.0 * h / 3.0;
            w[2] = h / 3.0;
            return w;
        }
        _ => {}
    }
    let intervals = n - 1;
    let simpson_end = if intervals.is_multiple_of(2) { intervals } else { intervals - 3 };
    for i in (0..simpson_end).step_by(2) {
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
    }
    if simpson_end < intervals {
        let s = simpson_end;
        let k = 3.0 * h / 8.0;
        w[s] += k;
        w[s + 1] += 3.0 * k;
        w[s + 2] += 3.0 * k;
        w[s + 3] += k;
    }
    w
}

pub fn integrate(v: &[f64], h: f64) -> f64 {
    quad_weights(v.len(), h).iter().zip(v).map(|(w, x)| w * x).sum()
}

pub fn l2_norm(v: &[f64], h: f64) -> f64 {
    let sq: Vec<f64> = v.iter().map(|x| x * x).collect();
    integrate(&sq, h).max(0.0).sqrt()
}
