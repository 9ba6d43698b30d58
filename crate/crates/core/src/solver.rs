//! Method of characteristics for constant-coefficient systems on `x > 0`.
//!
//! With `A = P diag(lambda) P^{-1}` and `w = P^{-1} u`, each `w_i` obeys
//! `d/dt w_i - lambda_i d/dx w_i = (P^{-1} f)_i` and is transported along
//! `x(s) = x + lambda_i (t - s)`. Outgoing components come from the initial
//! data; incoming ones from the initial data when `x >= |lambda_i| t`,
//! otherwise from the boundary, where
//! `(B P_in) w_in(0, t) = g(t) - (B P_out) w_out(0, t)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::compat::{DataFn, DataTriple};
use crate::error::{Error, Result};
use crate::field::{Field2D, FieldMeta};
use crate::grid::{integrate, quad_weights, HalfLineSamples};
use crate::system::{require_admissible, CharDecomp, SystemSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMode {
    ExactCharacteristics,
    ToyClosedForm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    /// Spatial intervals.
    pub nx: usize,
    /// Time intervals.
    pub nt: usize,
    pub x_extent: f64,
    pub t_extent: f64,
    /// Quadrature intervals per characteristic segment (rounded up to even).
    pub duhamel_steps: usize,
    pub mode: SolveMode,
}

impl SolveConfig {
    pub fn new(nx: usize, nt: usize, x_extent: f64, t_extent: f64) -> Self {
        SolveConfig {
            nx,
            nt,
            x_extent,
            t_extent,
            duhamel_steps: 16,
            mode: SolveMode::ExactCharacteristics,
        }
    }

    pub fn h(&self) -> f64 {
        self.x_extent / self.nx as f64
    }

    pub fn k(&self) -> f64 {
        self.t_extent / self.nt as f64
    }

    fn validate(&self) -> Result<()> {
        if self.nx < 8 || self.nt < 8 {
            return Err(Error::InvalidParameter("grid needs at least 8 intervals per direction".into()));
        }
        if self.duhamel_steps < 4 {
            return Err(Error::InvalidParameter("duhamel_steps must be at least 4".into()));
        }
        if !(self.x_extent > 0.0 && self.t_extent > 0.0) {
            return Err(Error::InvalidParameter("extents must be positive".into()));
        }
        Ok(())
    }
}

fn fingerprint(data: &DataTriple) -> String {
    let show = |d: &DataFn| match d {
        DataFn::Closed(e) => e.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "),
        DataFn::Sampled(s) => format!("sampled(h={}, N={}, q={})", s.h, s.n(), s.q()),
    };
    let mut s = format!("u0=[{}] g=[{}]", show(&data.u0), show(&data.g));
    if !data.f.is_zero() {
        s.push_str(&format!(" f={} terms", data.f.terms.len()));
    }
    s
}

fn spec_string(spec: &SystemSpec) -> String {
    let rows = |m: &DMatrix<f64>| {
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| m[(i, j)].to_string()).collect::<Vec<_>>().join(" "))
            .collect::<Vec<_>>()
            .join("; ")
    };
    format!("A=[{}] B=[{}]", rows(&spec.a), rows(&spec.b))
}

fn check_horizons(data: &DataTriple, need_u0: f64, need_g: f64) -> Result<()> {
    if let Some(e) = data.g.extent() {
        if e + 1e-12 < need_g {
            return Err(Error::HorizonExceeded("boundary"));
        }
    }
    if let Some(e) = data.u0.extent() {
        if e + 1e-12 < need_u0 {
            return Err(Error::HorizonExceeded("initial"));
        }
    }
    Ok(())
}

/// `u_t + u_x = 0`: `u0(x - t)` for `x >= t`, `g(t - x)` otherwise.
pub fn solve_toy(u0: &DataFn, g: &DataFn, config: &SolveConfig) -> Result<Field2D> {
    config.validate()?;
    if u0.ncomp() != 1 || g.ncomp() != 1 {
        return Err(Error::Dimension("the transport problem is scalar".into()));
    }
    let data = DataTriple {
        u0: u0.clone(),
        g: g.clone(),
        f: Default::default(),
    };
    check_horizons(&data, config.x_extent, config.t_extent)?;
    let (h, k) = (config.h(), config.k());
    let nx = config.nx;
    let rows: Vec<Result<Vec<f64>>> = crate::parallel::map_range(config.nt + 1, |j| {
        let t = j as f64 * k;
        (0..=nx)
            .map(|i| {
                let x = i as f64 * h;
                let v = if x >= t { u0.eval(0, x - t) } else { g.eval(0, t - x) };
                v.ok_or(Error::HorizonExceeded(if x >= t { "initial" } else { "boundary" }))
            })
            .collect()
    });
    let mut out = Field2D::zeros(1, nx, config.nt, h, k);
    for (j, row) in rows.into_iter().enumerate() {
        for (i, v) in row?.into_iter().enumerate() {
            out.data[[0, j, i]] = v;
        }
    }
    out.meta = FieldMeta {
        spec: "toy: u_t + u_x = 0".into(),
        data: fingerprint(&data),
    };
    Ok(out)
}

struct Characteristics<'a> {
    dec: CharDecomp,
    bp_in_inv: DMatrix<f64>,
    bp_out: DMatrix<f64>,
    data: &'a DataTriple,
    q: usize,
    steps: usize,
}

impl Characteristics<'_> {
    fn u0(&self, x: f64) -> Result<DVector<f64>> {
        let mut v = DVector::zeros(self.q);
        for c in 0..self.q {
            v[c] = self.data.u0.eval(c, x).ok_or(Error::HorizonExceeded("initial"))?;
        }
        Ok(v)
    }

    fn w0(&self, i: usize, x: f64) -> Result<f64> {
        Ok((self.dec.p_inv.row(i) * self.u0(x)?)[0])
    }

    fn forcing_w(&self, i: usize, x: f64, t: f64) -> f64 {
        let f = self.data.f.eval(self.q, x, t);
        (0..self.q).map(|c| self.dec.p_inv[(i, c)] * f[c]).sum()
    }

    /// `int_{t0}^{t} (P^{-1} f)_i (x + lambda_i (t - s), s) ds`.
    fn duhamel(&self, i: usize, x: f64, t: f64, t0: f64) -> f64 {
        if self.data.f.is_zero() || t <= t0 {
            return 0.0;
        }
        let lam = self.dec.eigenvalues[i];
        let n = self.steps + self.steps % 2;
        let ds = (t - t0) / n as f64;
        let vals: Vec<f64> = (0..=n)
            .map(|m| {
                let s = t0 + m as f64 * ds;
                self.forcing_w(i, x + lam * (t - s), s)
            })
            .collect();
        integrate(&vals, ds)
    }

    /// Outgoing components at `x = 0`.
    fn w_out_boundary(&self, tau: f64) -> Result<DVector<f64>> {
        let out = &self.dec.outgoing;
        let mut v = DVector::zeros(out.len());
        for (a, &i) in out.iter().enumerate() {
            let lam = self.dec.eigenvalues[i];
            v[a] = self.w0(i, lam * tau)? + self.duhamel(i, 0.0, tau, 0.0);
        }
        Ok(v)
    }

    fn w_in_boundary(&self, tau: f64) -> Result<DVector<f64>> {
        let nb = self.bp_in_inv.nrows();
        let mut g = DVector::zeros(nb);
        for c in 0..nb {
            g[c] = self.data.g.eval(c, tau).ok_or(Error::HorizonExceeded("boundary"))?;
        }
        let rhs = if self.dec.outgoing.is_empty() {
            g
        } else {
            g - &self.bp_out * self.w_out_boundary(tau)?
        };
        Ok(&self.bp_in_inv * rhs)
    }

    fn w(&self, i: usize, x: f64, t: f64) -> Result<f64> {
        let lam = self.dec.eigenvalues[i];
        let x0 = x + lam * t;
        if lam > 0.0 || x0 >= 0.0 {
            return Ok(self.w0(i, x0)? + self.duhamel(i, x, t, 0.0));
        }
        let tb = t - x / lam.abs();
        let a = self.dec.incoming.iter().position(|&k| k == i).expect("incoming index");
        Ok(self.w_in_boundary(tb)?[a] + self.duhamel(i, x, t, tb))
    }

    fn u(&self, x: f64, t: f64) -> Result<DVector<f64>> {
        let mut w = DVector::zeros(self.q);
        for i in 0..self.q {
            w[i] = self.w(i, x, t)?;
        }
        Ok(&self.dec.p * w)
    }
}

/// Exact solution by characteristics; the forcing is integrated with
/// composite Simpson along each characteristic segment.
pub fn solve_exact(spec: &SystemSpec, data: &DataTriple, config: &SolveConfig) -> Result<Field2D> {
    config.validate()?;
    data.check(spec)?;
    if config.mode == SolveMode::ToyClosedForm {
        if spec != &SystemSpec::toy() || !data.f.is_zero() {
            return Err(Error::InvalidParameter("closed-form mode needs the unforced transport problem".into()));
        }
        return solve_toy(&data.u0, &data.g, config);
    }
    if !spec.is_time_constant() {
        return Err(Error::InvalidParameter("the characteristics solver needs constant A and B".into()));
    }
    let dec = require_admissible(spec)?;
    check_horizons(data, config.x_extent + dec.lambda_max() * config.t_extent, config.t_extent)?;
    let p_in = dec.columns(&dec.incoming);
    let p_out = dec.columns(&dec.outgoing);
    let bp_in = &spec.b * p_in;
    let bp_in_inv = if bp_in.nrows() == 0 {
        DMatrix::zeros(0, 0)
    } else {
        bp_in.clone().try_inverse().ok_or(Error::Lopatinskii { cond: f64::INFINITY })?
    };
    let ch = Characteristics {
        bp_out: &spec.b * p_out,
        bp_in_inv,
        dec,
        data,
        q: spec.q(),
        steps: config.duhamel_steps,
    };
    let (h, k) = (config.h(), config.k());
    let (nx, q) = (config.nx, spec.q());
    let rows: Vec<Result<Vec<f64>>> = crate::parallel::map_range(config.nt + 1, |j| {
        let t = j as f64 * k;
        let mut row = vec![0.0; q * (nx + 1)];
        for i in 0..=nx {
            let u = ch.u(i as f64 * h, t)?;
            for c in 0..q {
                row[c * (nx + 1) + i] = u[c];
            }
        }
        Ok(row)
    });
    let mut out = Field2D::zeros(q, nx, config.nt, h, k);
    for (j, row) in rows.into_iter().enumerate() {
        let row = row?;
        for c in 0..q {
            for i in 0..=nx {
                out.data[[c, j, i]] = row[c * (nx + 1) + i];
            }
        }
    }
    out.meta = FieldMeta {
        spec: spec_string(spec),
        data: fingerprint(data),
    };
    Ok(out)
}

/// Dispatches on `config.mode`.
pub fn solve(spec: &SystemSpec, data: &DataTriple, config: &SolveConfig) -> Result<Field2D> {
    solve_exact(spec, data, config)
}

/// `(u(., 0), u(0, .))`.
pub fn extract_traces(u: &Field2D) -> (HalfLineSamples, HalfLineSamples) {
    let q = u.q();
    let initial = HalfLineSamples {
        h: u.h,
        comps: (0..q).map(|c| u.time_slice(c, 0)).collect(),
        jet: None,
    };
    let boundary = HalfLineSamples {
        h: u.k,
        comps: (0..q).map(|c| u.space_slice(c, 0)).collect(),
        jet: None,
    };
    (initial, boundary)
}

/// `|B u(0, .) - g|_{L2(0, T)}`.
pub fn boundary_residual(spec: &SystemSpec, u: &Field2D, g: &DataFn) -> Result<f64> {
    let (_, bnd) = extract_traces(u);
    let m = bnd.n();
    let w = quad_weights(m + 1, u.k);
    let mut acc = 0.0;
    for (j, wj) in w.iter().enumerate() {
        let t = j as f64 * u.k;
        for r in 0..spec.nb() {
            let bu: f64 = (0..spec.q()).map(|c| spec.b[(r, c)] * bnd.comps[c][j]).sum();
            let gv = g.eval(r, t).ok_or(Error::HorizonExceeded("boundary"))?;
            acc += wj * (bu - gv).powi(2);
        }
    }
    Ok(acc.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use crate::system::ForcingTerm;

    fn cfg(n: usize) -> SolveConfig {
        SolveConfig::new(n, n, 2.0, 2.0)
    }

    #[test]
    fn toy_sine_is_global() {
        let d = DataTriple::closed(&["sin(x)"], &["-sin(t)"]).unwrap();
        let u = solve_toy(&d.u0, &d.g, &cfg(64)).unwrap();
        for j in 0..=64 {
            for i in 0..=64 {
                let (x, t) = (i as f64 / 32.0, j as f64 / 32.0);
                assert!((u.get(0, i, j) - (x - t).sin()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn toy_jump_along_characteristic() {
        let d = DataTriple::closed(&["1"], &["0"]).unwrap();
        let u = solve_toy(&d.u0, &d.g, &cfg(16)).unwrap();
        assert_eq!(u.get(0, 10, 4), 1.0);
        assert_eq!(u.get(0, 4, 10), 0.0);
    }

    #[test]
    fn exact_matches_toy() {
        let d = DataTriple::closed(&["exp(-x)*cos(3*x)"], &["exp(-t)"]).unwrap();
        let a = solve_toy(&d.u0, &d.g, &cfg(32)).unwrap();
        let b = solve_exact(&SystemSpec::toy(), &d, &cfg(32)).unwrap();
        let err = (&a.data - &b.data).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn diagonal_system() {
        let s = SystemSpec::from_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]], &[vec![0.0, 1.0]]).unwrap();
        let d = DataTriple::closed(&["exp(-x)", "0"], &["0"]).unwrap();
        let u = solve_exact(&s, &d, &cfg(32)).unwrap();
        for j in 0..=32 {
            for i in 0..=32 {
                let (x, t) = (i as f64 / 16.0, j as f64 / 16.0);
                assert!((u.get(0, i, j) - (-(x + t)).exp()).abs() < 1e-14);
                assert_eq!(u.get(1, i, j), 0.0);
            }
        }
    }

    #[test]
    fn coupled_boundary_condition() {
        // Outgoing mode reflected into the incoming one through B.
        let s = SystemSpec::from_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]], &[vec![0.5, 1.0]]).unwrap();
        let d = DataTriple::closed(&["exp(-x)", "0"], &["0.5"]).unwrap();
        let u = solve_exact(&s, &d, &cfg(32)).unwrap();
        assert!(boundary_residual(&s, &u, &d.g).unwrap() < 1e-14);
        // u2(x, t) = 0.5 - 0.5 e^{-(t - x)} for x < t.
        let (x, t): (f64, f64) = (0.25, 1.5);
        assert!((u.get(1, 4, 24) - 0.5 + 0.5 * (-(t - x)).exp()).abs() < 1e-14);
    }

    #[test]
    fn duhamel_against_closed_form() {
        // u_t + u_x = e^{-x} with zero data: u = e^{-max(0, x - t)} - e^{-x}.
        let mut d = DataTriple::closed(&["0"], &["0"]).unwrap();
        d.f.terms.push(ForcingTerm {
            component: 0,
            x: Expr::parse("exp(-x)").unwrap(),
            t: Expr::parse("1").unwrap(),
        });
        let mut c = cfg(16);
        c.duhamel_steps = 64;
        let u = solve_exact(&SystemSpec::toy(), &d, &c).unwrap();
        for (i, j) in [(4, 12), (12, 4), (8, 8)] {
            let (x, t): (f64, f64) = (i as f64 / 8.0, j as f64 / 8.0);
            let want = (-(x - t).max(0.0)).exp() - (-x).exp();
            assert!((u.get(0, i, j) - want).abs() < 1e-9, "{} vs {want}", u.get(0, i, j));
        }
    }

    #[test]
    fn lopatinskii_failure_is_an_error() {
        let s = SystemSpec::from_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]], &[vec![1.0, 0.0]]).unwrap();
        let d = DataTriple::closed(&["0", "0"], &["0"]).unwrap();
        assert!(matches!(solve_exact(&s, &d, &cfg(16)), Err(Error::Lopatinskii { .. })));
    }

    #[test]
    fn sampled_horizon() {
        let g = DataFn::Sampled(HalfLineSamples::scalar(0.1, vec![0.0; 11]).unwrap());
        let u0 = DataFn::parse(&["0"]).unwrap();
        assert!(matches!(solve_toy(&u0, &g, &cfg(16)), Err(Error::HorizonExceeded("boundary"))));
    }
}
