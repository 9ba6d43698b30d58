//! Lifting operators: the half-plane lift `R_m`, odd extension, the corner
//! lift of a pair `(u0, g)`, synthesis of compatible data and the
//! approximate solution built from the time Taylor coefficients.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::compat::{check_cc_order_with_tol, DataFn, DataTriple};
use crate::error::{Error, Result};
use crate::expr::{eta, Expr};
use crate::field::{Field2D, FieldMeta};
use crate::grid::{diff, l2_norm, one_sided_derivative, HalfLineSamples, LineSamples};
use crate::sobolev::{fourier_hs_norm, gagliardo_seminorm, h1200_norm, hs_norm_2d, hs_norm_2d_periodic_x};
use crate::system::SystemSpec;
use crate::verdict::{NormResult, Verdict};

/// Relative edge level and spectral tail allowed in lifted data.
pub const LIFT_WINDOW_TOL: f64 = 1e-8;
/// Default support end of the cutoffs used by the lifts.
pub const DEFAULT_SUPPORT_END: f64 = 1.0;
/// Time samples on each side of `t = 0` in `lift_rm`.
pub const LIFT_HALF_STEPS: usize = 256;
/// Side of the quarter-plane window returned by `corner_lift`.
pub const CORNER_WINDOW: f64 = 4.0;
/// Longest stretch of input used by the corner membership checks.
const MEMBERSHIP_EXTENT: f64 = 8.0;
/// Extra jet orders stored with a cutoff profile.
const CUTOFF_EXTRA_JET: usize = 8;

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn monomial(m: usize) -> Expr {
    let mut e = Expr::c(1.0);
    for _ in 0..m {
        e = e * Expr::var();
    }
    e
}

/// `chi(t) = t^m / m! * eta(t)`, `eta = 1` on `[0, end/2]`, `0` past `end`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub m: usize,
    pub support_end: f64,
    /// `chi` on `[0, 1.25 support_end]` with its exact jet at 0.
    pub profile: HalfLineSamples,
}

pub fn make_cutoff(m: usize, support_end: f64) -> Result<CutoffSpec> {
    if !(support_end > 0.0) {
        return Err(Error::InvalidParameter(format!("support_end = {support_end} must be positive")));
    }
    let n = 640;
    let h = 1.25 * support_end / n as f64;
    let vals: Vec<f64> = (0..=n).map(|i| chi(m, support_end, i as f64 * h)).collect();
    let mut jet = vec![0.0; m + CUTOFF_EXTRA_JET + 1];
    jet[m] = 1.0;
    let profile = HalfLineSamples::scalar(h, vals)?.with_jet(vec![jet])?;
    Ok(CutoffSpec { m, support_end, profile })
}

fn chi(m: usize, end: f64, t: f64) -> f64 {
    let e = eta(t, 0.5 * end, end);
    if e == 0.0 {
        return 0.0;
    }
    t.powi(m as i32) / factorial(m) * e
}

impl CutoffSpec {
    pub fn eval(&self, t: f64) -> f64 {
        chi(self.m, self.support_end, t)
    }

    /// The cutoff as an expression in `scale * t`.
    pub fn expr(&self, scale: f64) -> Expr {
        let arg = Expr::c(scale) * Expr::var();
        monomial(self.m) * Expr::c(scale.powi(self.m as i32) / factorial(self.m))
            * arg.eta(0.5 * self.support_end, self.support_end)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub operator: String,
    pub m: Option<usize>,
    pub lambda: Option<f64>,
    pub theta: Option<f64>,
}

/// Samples `values[j * nx + i]` at `(x0 + i h, t0 + j k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaneFn {
    pub x0: f64,
    pub t0: f64,
    pub h: f64,
    pub k: f64,
    pub nx: usize,
    pub nt: usize,
    pub values: Vec<f64>,
    /// Rows are one period of a periodic function of `x`.
    pub periodic_x: bool,
    pub provenance: Provenance,
}

impl PlaneFn {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.values[j * self.nx..(j + 1) * self.nx]
    }

    pub fn column(&self, i: usize) -> Vec<f64> {
        (0..self.nt).map(|j| self.get(i, j)).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Index of the time sample at `t = 0`.
    pub fn t_zero_index(&self) -> Option<usize> {
        let j = (-self.t0 / self.k).round();
        (j >= 0.0 && (j * self.k + self.t0).abs() < 1e-9 * self.k && (j as usize) < self.nt).then_some(j as usize)
    }

    /// `d^order/dt^order` at `t = 0` from the side `t >= 0`, for every `x`.
    pub fn time_jet(&self, order: usize) -> Result<Vec<f64>> {
        let j0 = self.t_zero_index().ok_or_else(|| Error::InvalidParameter("plane does not contain t = 0".into()))?;
        let npts = order + 4;
        if j0 + npts > self.nt {
            return Err(Error::JetUnderflow { order });
        }
        (0..self.nx)
            .map(|i| {
                let col: Vec<f64> = (j0..j0 + npts).map(|j| self.get(i, j)).collect();
                one_sided_derivative(&col, self.k, order)
            })
            .collect()
    }

    pub fn hs_norm(&self, s: f64) -> Result<NormResult> {
        if self.periodic_x {
            hs_norm_2d_periodic_x(&self.values, self.nx, self.nt, self.h, self.k, s)
        } else {
            hs_norm_2d(&self.values, self.nx, self.nt, self.h, self.k, s)
        }
    }
}

fn signed_freq(k: usize, n: usize, h: f64) -> f64 {
    let kk = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
    2.0 * std::f64::consts::PI * kk / (n as f64 * h)
}

fn fft(values: &[f64], plan: &Arc<dyn Fft<f64>>) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    plan.process(&mut buf);
    buf
}

fn check_far_edge(values: &[f64], what: &str) -> Result<()> {
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let edge = values[values.len() - 1].abs();
    if peak > 0.0 && edge > LIFT_WINDOW_TOL * peak {
        return Err(Error::WindowTooSmall(format!("{what}: edge {edge:e} vs peak {peak:e}")));
    }
    Ok(())
}

fn check_window(values: &[f64], what: &str) -> Result<f64> {
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let edge = values[0].abs().max(values[values.len() - 1].abs());
    if peak > 0.0 && edge > LIFT_WINDOW_TOL * peak {
        return Err(Error::WindowTooSmall(format!("{what}: edge {edge:e} vs peak {peak:e}")));
    }
    Ok(peak)
}

/// Spectral content in the top quarter of the resolved band.
fn check_aliasing(hat: &[Complex64]) -> Result<()> {
    let n = hat.len();
    let peak = hat.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let cut = 3 * n / 8;
    let tail = hat
        .iter()
        .enumerate()
        .filter(|(k, _)| (*k).min(n - *k) > cut)
        .fold(0.0f64, |m, (_, z)| m.max(z.norm()));
    if peak > 0.0 && tail > LIFT_WINDOW_TOL * peak {
        return Err(Error::Aliasing {
            tail: tail / peak,
            limit: LIFT_WINDOW_TOL,
        });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftReport {
    /// `|R_m g|_{H^{m+s+1/2}}` on the plane.
    pub lifted_norm: NormResult,
    pub g_norm: NormResult,
    /// `lifted_norm / (lambda^s |g|_{H^s})`.
    pub bound_constant: f64,
    pub s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lift {
    pub plane: PlaneFn,
    pub report: LiftReport,
}

/// Transform in `x'`: `(R_m g)^(xi, t) = chi(lambda t <xi>) / (lambda <xi>)^m g^(xi)`.
/// The time window is `|t| <= 1.25 support_end / lambda`, which holds the
/// support of every frequency since `<xi> >= 1`.
pub fn lift_rm(g: &LineSamples, m: usize, lambda: f64, s_report: f64) -> Result<Lift> {
    let plane = lift_rm_plane(g, m, lambda, DEFAULT_SUPPORT_END)?;
    let lifted_norm = plane.hs_norm(m as f64 + s_report + 0.5)?;
    let g_norm = fourier_hs_norm(g, s_report)?;
    let denom = lambda.powf(s_report) * g_norm.value;
    let bound_constant = if denom > 0.0 { lifted_norm.value / denom } else { 0.0 };
    Ok(Lift {
        plane,
        report: LiftReport {
            lifted_norm,
            g_norm,
            bound_constant,
            s: s_report,
        },
    })
}

/// The plane part of `lift_rm` without norms.
pub fn lift_rm_plane(g: &LineSamples, m: usize, lambda: f64, support_end: f64) -> Result<PlaneFn> {
    if !(lambda >= 1.0) {
        return Err(Error::InvalidParameter(format!("lambda = {lambda} must be at least 1")));
    }
    let n = g.values.len();
    if n < 16 {
        return Err(Error::Dimension(format!("{n} samples on the boundary line")));
    }
    check_window(&g.values, "boundary data")?;
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let ghat = fft(&g.values, &fwd);
    check_aliasing(&ghat)?;
    let bracket: Vec<f64> = (0..n)
        .map(|k| {
            let xi = signed_freq(k, n, g.h);
            (1.0 + xi * xi).sqrt()
        })
        .collect();
    let tw = 1.25 * support_end / lambda;
    let dt = tw / LIFT_HALF_STEPS as f64;
    let nt = 2 * LIFT_HALF_STEPS + 1;
    let rows = crate::parallel::map_range(nt, |j| {
        let t = -tw + j as f64 * dt;
        let mut buf: Vec<Complex64> = (0..n)
            .map(|k| {
                let a = lambda * bracket[k];
                ghat[k] * (chi(m, support_end, a * t) / a.powi(m as i32))
            })
            .collect();
        inv.process(&mut buf);
        buf.into_iter().map(|z| z.re / n as f64).collect::<Vec<f64>>()
    });
    Ok(PlaneFn {
        x0: g.x0,
        t0: -tw,
        h: g.h,
        k: dt,
        nx: n,
        nt,
        values: rows.concat(),
        periodic_x: true,
        provenance: Provenance {
            operator: "lift_rm".into(),
            m: Some(m),
            lambda: Some(lambda),
            theta: None,
        },
    })
}

/// `max_g |R_m g|_{H^r} / |g|_{L2}` over a test set.
pub fn lift_operator_probe(tests: &[LineSamples], m: usize, lambda: f64, r: f64) -> Result<f64> {
    let mut best = 0.0f64;
    for g in tests {
        let plane = lift_rm_plane(g, m, lambda, DEFAULT_SUPPORT_END)?;
        let num = plane.hs_norm(r)?.value;
        let den = l2_norm(&g.values, g.h);
        if den > 0.0 {
            best = best.max(num / den);
        }
    }
    Ok(best)
}

/// `I(u0)(-y) = -u0(y)` on `[-X, X]`, zero at the origin.
pub fn odd_extension(u0: &[f64], h: f64) -> LineSamples {
    let n = u0.len().saturating_sub(1);
    let mut values = vec![0.0; 2 * n + 1];
    for i in 1..=n {
        values[n + i] = u0[i];
        values[n - i] = -u0[i];
    }
    LineSamples {
        x0: -(n as f64) * h,
        h,
        values,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub theta: f64,
    pub u0_seminorm: Option<NormResult>,
    pub g_seminorm: Option<NormResult>,
    pub corner_hardy: Option<NormResult>,
    pub corner_gap: f64,
}

fn membership(u0: &[f64], g: &[f64], h: f64, theta: f64) -> Result<MembershipReport> {
    let len = u0.len().min(g.len()).min((MEMBERSHIP_EXTENT / h) as usize + 1);
    let (u0, g) = (&u0[..len], &g[..len]);
    let reject = || Error::CornerIncompatible(theta);
    // The theta = 1 seminorm is not reachable by the Gagliardo form; 3/4
    // still sees every jump.
    let th = if theta < 1.0 { theta } else { 0.75 };
    let su = gagliardo_seminorm(u0, h, th)?;
    let sg = gagliardo_seminorm(g, h, th)?;
    if su.verdict == Verdict::Divergent || sg.verdict == Verdict::Divergent {
        return Err(reject());
    }
    let gap = (u0[0] - g[0]).abs();
    let mut hardy = None;
    if (theta - 0.5).abs() < 1e-12 {
        let d: Vec<f64> = u0.iter().zip(g).map(|(a, b)| a - b).collect();
        let r = h1200_norm(&d, h);
        if r.verdict != Verdict::Finite {
            return Err(reject());
        }
        hardy = Some(r);
    } else if theta > 0.5 {
        let scale = u0.iter().chain(g).fold(1.0f64, |m, v| m.max(v.abs()));
        if gap > 10.0 * h * h * scale {
            return Err(reject());
        }
    }
    Ok(MembershipReport {
        theta,
        u0_seminorm: Some(su),
        g_seminorm: Some(sg),
        corner_hardy: hardy,
        corner_gap: gap,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CornerLift {
    /// Quarter-plane window `[0, W] x [0, W]`, `x` standing for `y`.
    pub plane: PlaneFn,
    pub membership: MembershipReport,
}

/// `R(u0, g) = R_b g + R_0 (u0 - R_b g|_{t=0})`. `R_b` lifts `g` off
/// `y = 0` through its even extension in `t`; `R_0` lifts through the odd
/// extension in `y`, so its `y = 0` trace vanishes.
pub fn corner_lift(u0: &HalfLineSamples, g: &HalfLineSamples, theta: f64) -> Result<CornerLift> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::InvalidParameter(format!("theta = {theta} must lie in (0, 1]")));
    }
    if u0.q() != 1 || g.q() != 1 {
        return Err(Error::Dimension("corner lift works on scalar data".into()));
    }
    let h = u0.h;
    if (g.h - h).abs() > 1e-12 * h {
        return Err(Error::Dimension(format!("spacings {h} and {} differ", g.h)));
    }
    let (uv, gv) = (u0.comp(0), g.comp(0));
    let report = membership(uv, gv, h, theta)?;
    check_far_edge(uv, "initial data")?;
    check_far_edge(gv, "boundary data")?;
    let end = DEFAULT_SUPPORT_END;
    let nw = ((CORNER_WINDOW / h).round() as usize).min(uv.len() - 1).min(gv.len() - 1) + 1;
    let mut planner = FftPlanner::new();

    // R_b g on rows y_i < end; every t in the window.
    let ge = odd_or_even(gv, false);
    let lg = ge.len();
    let ghat = fft(&ge, &planner.plan_fft_forward(lg));
    let brg: Vec<f64> = (0..lg).map(|k| (1.0 + signed_freq(k, lg, h).powi(2)).sqrt()).collect();
    let inv_g = planner.plan_fft_inverse(lg);
    let ny_b = ((end / h).ceil() as usize + 1).min(uv.len());
    let rb_rows: Vec<Vec<f64>> = crate::parallel::map_range(ny_b, |i| {
        let y = i as f64 * h;
        let mut buf: Vec<Complex64> = (0..lg).map(|k| ghat[k] * chi(0, end, brg[k] * y)).collect();
        inv_g.process(&mut buf);
        buf.into_iter().map(|z| z.re / lg as f64).collect()
    });
    // v = u0 - R_b g|_{t=0}.
    let mut v = uv.to_vec();
    for (i, row) in rb_rows.iter().enumerate() {
        v[i] -= row[0];
    }
    let ve = odd_or_even(&v, true);
    let lv = ve.len();
    let vhat = fft(&ve, &planner.plan_fft_forward(lv));
    let brv: Vec<f64> = (0..lv).map(|k| (1.0 + signed_freq(k, lv, h).powi(2)).sqrt()).collect();
    let inv_v = planner.plan_fft_inverse(lv);
    let nt_0 = ((end / h).ceil() as usize + 1).min(nw);
    let r0_rows: Vec<Vec<f64>> = crate::parallel::map_range(nt_0, |j| {
        let t = j as f64 * h;
        let mut buf: Vec<Complex64> = (0..lv).map(|k| vhat[k] * chi(0, end, brv[k] * t)).collect();
        inv_v.process(&mut buf);
        buf.into_iter().take(nw).map(|z| z.re / lv as f64).collect()
    });

    let mut values = vec![0.0; nw * nw];
    for (j, row) in r0_rows.iter().enumerate() {
        values[j * nw..(j + 1) * nw].copy_from_slice(row);
    }
    for (i, row) in rb_rows.iter().enumerate().take(nw) {
        for j in 0..nw {
            values[j * nw + i] += row[j];
        }
    }
    Ok(CornerLift {
        plane: PlaneFn {
            x0: 0.0,
            t0: 0.0,
            h,
            k: h,
            nx: nw,
            nt: nw,
            values,
            periodic_x: false,
            provenance: Provenance {
                operator: "corner_lift".into(),
                m: None,
                lambda: None,
                theta: Some(theta),
            },
        },
        membership: report,
    })
}

/// Periodic extension of `[0, X]` samples to `[-X, X)`, index 0 at the
/// origin. Odd extensions are set to zero at the origin.
fn odd_or_even(v: &[f64], odd: bool) -> Vec<f64> {
    let n = v.len() - 1;
    let mut out = vec![0.0; 2 * n];
    let sign = if odd { -1.0 } else { 1.0 };
    out[0] = if odd { 0.0 } else { v[0] };
    for i in 1..n {
        out[i] = v[i];
        out[2 * n - i] = sign * v[i];
    }
    out[n] = if odd { 0.0 } else { v[n] };
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Correction {
    pub order: usize,
    pub eps: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Synthesis {
    pub data: DataTriple,
    pub corrections: Vec<Correction>,
    pub lambda: f64,
    /// `|g~ - g|_{H^1(0, 2)}` summed over boundary rows.
    pub change_h1: f64,
}

const CHANGE_EXTENT: f64 = 2.0;
const CHANGE_POINTS: usize = 4096;

/// Subtracts `eps_j chi_{j-1}(lambda t) / lambda^{j-1}` from `g` for every
/// order `k < j <= m` whose residual exceeds its tolerance.
pub fn synthesize_compatible_data(
    spec: &SystemSpec,
    data: &DataTriple,
    k: usize,
    m: usize,
    lambda: f64,
) -> Result<Synthesis> {
    if m <= k {
        return Err(Error::InvalidParameter(format!("target order {m} must exceed {k}")));
    }
    if !(lambda >= 1.0) {
        return Err(Error::InvalidParameter(format!("lambda = {lambda} must be at least 1")));
    }
    let DataFn::Closed(g) = &data.g else {
        return Err(Error::InvalidParameter("synthesis needs closed-form boundary data".into()));
    };
    for j in 1..=k {
        let (eps, tol) = check_cc_order_with_tol(j, spec, data)?;
        if eps.iter().any(|e| e.abs() > tol) {
            return Err(Error::LowerOrderViolated(j));
        }
    }
    let mut corrections = Vec::new();
    let mut delta: Vec<Expr> = vec![Expr::zero(); g.len()];
    for j in (k + 1)..=m {
        let (eps, tol) = check_cc_order_with_tol(j, spec, data)?;
        if eps.iter().all(|e| e.abs() <= tol) {
            continue;
        }
        let chi = make_cutoff(j - 1, DEFAULT_SUPPORT_END)?.expr(lambda) * Expr::c(lambda.powi(-(j as i32 - 1)));
        for (r, e) in eps.iter().enumerate() {
            if *e != 0.0 {
                delta[r] = std::mem::replace(&mut delta[r], Expr::zero()) + Expr::c(*e) * chi.clone();
            }
        }
        corrections.push(Correction { order: j, eps });
    }
    if corrections.is_empty() {
        return Ok(Synthesis {
            data: data.clone(),
            corrections,
            lambda,
            change_h1: 0.0,
        });
    }
    let h = CHANGE_EXTENT / CHANGE_POINTS as f64;
    let mut change = 0.0;
    for d in &delta {
        let vals: Vec<f64> = (0..=CHANGE_POINTS).map(|i| d.eval(i as f64 * h)).collect();
        change += l2_norm(&vals, h).powi(2) + l2_norm(&diff(&vals, h), h).powi(2);
    }
    let g_new: Vec<Expr> = g
        .iter()
        .zip(delta)
        .map(|(gi, d)| if d.is_zero() { gi.clone() } else { gi.clone() - d })
        .collect();
    Ok(Synthesis {
        data: DataTriple {
            g: DataFn::Closed(g_new),
            ..data.clone()
        },
        corrections,
        lambda,
        change_h1: change.sqrt(),
    })
}

/// `u_app(x, t) = sum_j t^j / j! v_j(x) chi(t)` on `nt + 1` time levels of
/// step `k`. The cutoff must be of order 0 so that `chi = 1` near `t = 0`.
pub fn approximate_solution(v: &[HalfLineSamples], chi: &CutoffSpec, nt: usize, k: f64) -> Result<Field2D> {
    if chi.m != 0 {
        return Err(Error::InvalidParameter("the approximate solution needs an order-0 cutoff".into()));
    }
    let first = v.first().ok_or_else(|| Error::Dimension("no Taylor coefficients".into()))?;
    let (q, h, nx) = (first.q(), first.h, first.n());
    if v.iter().any(|w| w.q() != q || w.n() != nx || (w.h - h).abs() > 1e-12 * h) {
        return Err(Error::Dimension("Taylor coefficients on different grids".into()));
    }
    let mut out = Field2D::zeros(q, nx, nt, h, k);
    for j in 0..=nt {
        let t = j as f64 * k;
        let c = chi.eval(t);
        if c == 0.0 {
            continue;
        }
        let weights: Vec<f64> = (0..v.len()).map(|l| t.powi(l as i32) / factorial(l) * c).collect();
        for comp in 0..q {
            for i in 0..=nx {
                out.data[[comp, j, i]] = v.iter().zip(&weights).map(|(w, a)| a * w.comps[comp][i]).sum();
            }
        }
    }
    out.meta = FieldMeta {
        spec: "approximate solution".into(),
        data: format!("{} Taylor coefficients", v.len()),
    };
    Ok(out)
}
