//! Mollifier-based equivalent norm and the Friedrichs commutator diagnostic.
//!
//! The kernel is `rho = c d^m/dx^m rho0` with `rho0` the normalized compact
//! bump `exp(-1 / (1 - x^2))`, so `|rho_hat(xi)| = c |xi|^m |rho0_hat(xi)|`
//! vanishes to order `m` at the origin. `c` makes the mean of `|rho_hat|` over
//! `[1, 2]` equal to one. The scale integral over `eps in (0, 1]` is sampled
//! at `eps_j = 2^-j` with weight `ln 2`.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{interp_cubic, LineSamples};
use crate::sobolev::fourier::{hsdelta_norm, spectrum};
use crate::verdict::NormResult;

const TABLE_STEP: f64 = 0.02;
const BUMP_POINTS: usize = 4000;
/// Scales with `eps * xi_max` below this contribute nothing measurable.
const EPS_FLOOR: f64 = 1e-2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MollifierSpec {
    /// Order of vanishing of `rho_hat` at zero (even).
    pub m: usize,
}

impl MollifierSpec {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 || m % 2 == 1 {
            return Err(Error::InvalidParameter(format!("mollifier order {m} must be even and positive")));
        }
        Ok(MollifierSpec { m })
    }

    /// `m = 2 ceil(s) + 2`.
    pub fn for_order(s: f64) -> Self {
        MollifierSpec {
            m: 2 * s.max(0.0).ceil() as usize + 2,
        }
    }
}

fn bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - x * x)).exp()
    }
}

/// `rho0_hat` on `[0, xi_max]`; the trapezoid rule is spectrally accurate
/// for the compactly supported smooth bump.
struct Table {
    vals: Vec<f64>,
    m: usize,
    c: f64,
}

impl Table {
    fn new(spec: &MollifierSpec, xi_max: f64) -> Table {
        let hq = 2.0 / BUMP_POINTS as f64;
        let xs: Vec<f64> = (0..=BUMP_POINTS).map(|i| -1.0 + i as f64 * hq).collect();
        let b: Vec<f64> = xs.iter().map(|&x| bump(x)).collect();
        let mass: f64 = b.iter().sum::<f64>() * hq;
        let n = (xi_max.max(2.0) / TABLE_STEP).ceil() as usize + 4;
        let vals: Vec<f64> = crate::parallel::map_range(n + 1, |k| {
            let xi = k as f64 * TABLE_STEP;
            xs.iter().zip(&b).map(|(x, bv)| bv * (xi * x).cos()).sum::<f64>() * hq / mass
        });
        let mut t = Table { vals, m: spec.m, c: 1.0 };
        let probe = 101;
        let mean = (0..probe)
            .map(|i| t.rho_hat(1.0 + i as f64 / (probe - 1) as f64).abs())
            .sum::<f64>()
            / probe as f64;
        t.c = 1.0 / mean;
        t
    }

    fn rho_hat(&self, xi: f64) -> f64 {
        let a = xi.abs();
        let r0 = interp_cubic(&self.vals, TABLE_STEP, a).unwrap_or(0.0);
        self.c * a.powi(self.m as i32) * r0
    }
}

fn scales(xi_max: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut eps = 1.0;
    while eps * xi_max >= EPS_FLOOR || out.is_empty() {
        out.push(eps);
        eps *= 0.5;
    }
    out
}

fn scale_weight(eps: f64, s: f64, delta: f64) -> f64 {
    std::f64::consts::LN_2 * eps.powf(-2.0 * (s + 1.0)) / (1.0 + delta * delta / (eps * eps))
}

/// `|v|_{L2} + ( int_0^1 |v * rho_eps|^2 eps^{-2(s+1)} (1 + delta^2/eps^2)^{-1} deps/eps )^{1/2}`.
pub fn mollifier_equiv_norm(v: &LineSamples, s: f64, delta: f64, rho: &MollifierSpec) -> Result<NormResult> {
    if rho.m as f64 <= s + 1.0 {
        return Err(Error::InvalidParameter(format!(
            "mollifier order {} must exceed s + 1 = {}",
            rho.m,
            s + 1.0
        )));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta = {delta} must be positive")));
    }
    let sp = spectrum(&v.values, v.h)?;
    let l2 = sp.power.iter().sum::<f64>().max(0.0).sqrt();
    let xi_max = sp.xi.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let table = Table::new(rho, xi_max);
    let mut acc = 0.0;
    let mut seq = Vec::new();
    for eps in scales(xi_max) {
        let conv: f64 = sp
            .xi
            .iter()
            .zip(&sp.power)
            .map(|(xi, p)| {
                let r = table.rho_hat(eps * xi);
                r * r * p
            })
            .sum();
        acc += scale_weight(eps, s, delta) * conv;
        seq.push(acc);
    }
    Ok(NormResult::from_sequence(l2 + acc.max(0.0).sqrt(), seq))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FriedrichsReport {
    /// Dyadic sum of `|[a d/dx, rho_eps *] v|^2 eps^{-2(s+1)} (1 + delta^2/eps^2)^{-1}`.
    pub commutator_sum: f64,
    pub hsdelta_sq: f64,
    pub ratio: f64,
}

/// Commutator of `P = a(x) d/dx` with mollification, measured against the
/// `H^{s,delta}` norm. Reported only; no bound is asserted.
pub fn friedrichs_diagnostic(
    v: &LineSamples,
    a: impl Fn(f64) -> f64,
    s: f64,
    delta: f64,
    rho: &MollifierSpec,
) -> Result<FriedrichsReport> {
    let sp = spectrum(&v.values, v.h)?;
    let len = sp.xi.len();
    let xi_max = sp.xi.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let table = Table::new(rho, xi_max);
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);
    let av: Vec<f64> = (0..len).map(|i| a(v.x0 + i as f64 * v.h)).collect();

    let mut vhat: Vec<Complex64> = v.values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    vhat.resize(len, Complex64::new(0.0, 0.0));
    fwd.process(&mut vhat);
    let ik = |k: usize| Complex64::new(0.0, sp.xi[k]);
    let norm = 1.0 / len as f64;

    // a * dv/dx, transformed.
    let mut dv: Vec<Complex64> = (0..len).map(|k| ik(k) * vhat[k]).collect();
    inv.process(&mut dv);
    let mut adv_hat: Vec<Complex64> = dv.iter().zip(&av).map(|(d, a)| d * norm * a).collect();
    fwd.process(&mut adv_hat);

    let mut total = 0.0;
    for eps in scales(xi_max) {
        let rho: Vec<f64> = sp.xi.iter().map(|xi| table.rho_hat(eps * xi)).collect();
        let mut first: Vec<Complex64> = (0..len).map(|k| ik(k) * rho[k] * vhat[k]).collect();
        inv.process(&mut first);
        let mut second: Vec<Complex64> = (0..len).map(|k| rho[k] * adv_hat[k]).collect();
        inv.process(&mut second);
        let c2: f64 = (0..len)
            .map(|i| (first[i].re * norm * av[i] - second[i].re * norm).powi(2))
            .sum::<f64>()
            * v.h;
        total += scale_weight(eps, s, delta) * c2;
    }
    let hd = hsdelta_norm(v, s, delta)?.value;
    let hsdelta_sq = hd * hd;
    Ok(FriedrichsReport {
        commutator_sum: total,
        hsdelta_sq,
        ratio: if hsdelta_sq > 0.0 { total / hsdelta_sq } else { 0.0 },
    })
}
