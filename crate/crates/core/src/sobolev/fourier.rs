//! Fourier-multiplier norms on the line and the plane.
//!
//! Samples are zero-padded to twice their length, transformed, and the
//! multiplier is applied at the angular frequencies `xi_k = 2 pi k / (L h)`.
//! With `u_hat(xi) = int u e^{-i x xi} dx` the discrete sum approximates
//! `(2 pi)^{-1} int m(xi) |u_hat|^2 dxi`, so `s = 0` is the L2 norm.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::LineSamples;
use crate::verdict::NormResult;

pub const S_MAX: f64 = 6.0;
/// Window edges must be below this fraction of the peak.
pub const WINDOW_TOL: f64 = 1e-6;

/// Power spectrum on the padded grid.
#[derive(Clone, Debug)]
pub struct Spectrum {
    /// Signed frequency index per bin.
    pub index: Vec<i64>,
    pub xi: Vec<f64>,
    /// `(h / L) |U_k|^2`; sums to `h sum |u_i|^2`.
    pub power: Vec<f64>,
}

fn check_window(values: &[f64], what: &str) -> Result<()> {
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return Ok(());
    }
    let edge = values[0].abs().max(values[values.len() - 1].abs());
    if edge > WINDOW_TOL * peak {
        return Err(Error::WindowTooSmall(format!(
            "{what}: edge value {edge:e} vs peak {peak:e}"
        )));
    }
    Ok(())
}

fn signed(k: usize, len: usize) -> i64 {
    if k < len.div_ceil(2) {
        k as i64
    } else {
        k as i64 - len as i64
    }
}

pub fn spectrum(values: &[f64], h: f64) -> Result<Spectrum> {
    check_window(values, "line samples")?;
    let len = 2 * values.len();
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    buf.resize(len, Complex64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let scale = h / len as f64;
    let index: Vec<i64> = (0..len).map(|k| signed(k, len)).collect();
    let dxi = 2.0 * std::f64::consts::PI / (len as f64 * h);
    Ok(Spectrum {
        xi: index.iter().map(|&k| k as f64 * dxi).collect(),
        power: buf.iter().map(|c| scale * c.norm_sqr()).collect(),
        index,
    })
}

/// Frequency octave of a bin: 0 for the zero mode, `j` for `|k|` in
/// `[2^{j-1}, 2^j)`.
fn octave(k: u64) -> usize {
    if k == 0 {
        0
    } else {
        (u64::BITS - k.leading_zeros()) as usize
    }
}

/// Applies a multiplier and accumulates octave partials.
fn octave_partials(sp: &Spectrum, mult: impl Fn(f64) -> f64) -> (f64, Vec<f64>) {
    let max_oct = sp.index.iter().map(|k| octave(k.unsigned_abs())).max().unwrap_or(0);
    let mut bins = vec![0.0; max_oct + 1];
    for ((k, xi), p) in sp.index.iter().zip(&sp.xi).zip(&sp.power) {
        bins[octave(k.unsigned_abs())] += mult(*xi) * p;
    }
    let mut acc = 0.0;
    let seq: Vec<f64> = bins
        .iter()
        .map(|b| {
            acc += b;
            acc
        })
        .collect();
    (acc, seq)
}

fn check_s(s: f64) -> Result<()> {
    if !(0.0..=S_MAX).contains(&s) {
        return Err(Error::InvalidParameter(format!("s = {s} outside [0, {S_MAX}]")));
    }
    Ok(())
}

/// `( int (1 + xi^2)^s |u_hat|^2 )^{1/2}`.
pub fn fourier_hs_norm(u: &LineSamples, s: f64) -> Result<NormResult> {
    check_s(s)?;
    let sp = spectrum(&u.values, u.h)?;
    let (total, seq) = octave_partials(&sp, |xi| (1.0 + xi * xi).powf(s));
    Ok(NormResult::from_sequence(total.max(0.0).sqrt(), seq))
}

/// `( int (1 + xi^2)^{s+1} / (1 + delta^2 xi^2) |u_hat|^2 )^{1/2}`.
pub fn hsdelta_norm(u: &LineSamples, s: f64, delta: f64) -> Result<NormResult> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta = {delta} must be positive")));
    }
    check_s(s)?;
    let sp = spectrum(&u.values, u.h)?;
    let (total, seq) = octave_partials(&sp, |xi| {
        let w = 1.0 + xi * xi;
        w.powf(s) * w / (1.0 + delta * delta * xi * xi)
    });
    Ok(NormResult::from_sequence(total.max(0.0).sqrt(), seq))
}

/// `H^s` norm on the plane for samples `v[j * nx + i]` (x fastest),
/// multiplier `(1 + xi^2 + tau^2)^s`.
pub fn hs_norm_2d(v: &[f64], nx: usize, ny: usize, hx: f64, hy: f64, s: f64) -> Result<NormResult> {
    plane_norm(v, nx, ny, hx, hy, s, false)
}

/// As `hs_norm_2d`, but the samples are one period in `x`: no padding and
/// no edge check in that direction.
pub fn hs_norm_2d_periodic_x(v: &[f64], nx: usize, ny: usize, hx: f64, hy: f64, s: f64) -> Result<NormResult> {
    plane_norm(v, nx, ny, hx, hy, s, true)
}

fn plane_norm(v: &[f64], nx: usize, ny: usize, hx: f64, hy: f64, s: f64, periodic_x: bool) -> Result<NormResult> {
    check_s(s)?;
    if v.len() != nx * ny || nx < 2 || ny < 2 {
        return Err(Error::Dimension(format!("{} samples for {nx} x {ny}", v.len())));
    }
    let peak = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if peak > 0.0 {
        let mut edge = 0.0f64;
        for i in 0..nx {
            edge = edge.max(v[i].abs()).max(v[(ny - 1) * nx + i].abs());
        }
        if !periodic_x {
            for j in 0..ny {
                edge = edge.max(v[j * nx].abs()).max(v[j * nx + nx - 1].abs());
            }
        }
        if edge > WINDOW_TOL * peak {
            return Err(Error::WindowTooSmall(format!(
                "plane samples: edge value {edge:e} vs peak {peak:e}"
            )));
        }
    }
    let (lx, ly) = (if periodic_x { nx } else { 2 * nx }, 2 * ny);
    let mut buf = vec![Complex64::new(0.0, 0.0); lx * ly];
    for j in 0..ny {
        for i in 0..nx {
            buf[j * lx + i] = Complex64::new(v[j * nx + i], 0.0);
        }
    }
    let mut planner = FftPlanner::new();
    let fx = planner.plan_fft_forward(lx);
    for row in buf.chunks_mut(lx) {
        fx.process(row);
    }
    let fy = planner.plan_fft_forward(ly);
    let mut col = vec![Complex64::new(0.0, 0.0); ly];
    for i in 0..lx {
        for j in 0..ly {
            col[j] = buf[j * lx + i];
        }
        fy.process(&mut col);
        for j in 0..ly {
            buf[j * lx + i] = col[j];
        }
    }
    let scale = hx * hy / (lx * ly) as f64;
    let dx = 2.0 * std::f64::consts::PI / (lx as f64 * hx);
    let dy = 2.0 * std::f64::consts::PI / (ly as f64 * hy);
    let max_oct = octave(lx.max(ly) as u64);
    let mut bins = vec![0.0; max_oct + 1];
    for j in 0..ly {
        let ky = signed(j, ly);
        let eta = ky as f64 * dy;
        for i in 0..lx {
            let kx = signed(i, lx);
            let xi = kx as f64 * dx;
            let m = (1.0 + xi * xi + eta * eta).powf(s);
            let o = octave(kx.unsigned_abs().max(ky.unsigned_abs()));
            bins[o] += m * scale * buf[j * lx + i].norm_sqr();
        }
    }
    let mut acc = 0.0;
    let seq: Vec<f64> = bins
        .iter()
        .map(|b| {
            acc += b;
            acc
        })
        .collect();
    Ok(NormResult::from_sequence(acc.max(0.0).sqrt(), seq))
}
