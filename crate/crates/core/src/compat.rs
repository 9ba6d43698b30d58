//! Compatibility calculus at the corner `x = 0, t = 0`.
//!
//! The formal time derivatives `v_j = d^j u / dt^j (., 0)` follow from the
//! equation:
//!
//! ```text
//! v_0 = u0,   v_{j+1} = sum_{l<=j} C(j,l) A_l d/dx v_{j-l} + d^j f/dt^j (., 0)
//! ```
//!
//! Each `v_j` is kept as a linear form in the spatial derivatives of `u0`
//! and the mixed derivatives of `f`, so it can be evaluated at the corner
//! from exact jets and along the half-line from closed forms or samples.
//! The order-`j` residual is
//!
//! ```text
//! eps_j = d^{j-1} g / dt^{j-1} (0) - sum_{l<j} C(j-1,l) B_l v_{j-1-l}(0)
//! ```
//!
//! and the half-order check at `k - 1/2` asks that the residual function
//! obtained by pairing `t` with `x` lies in `H^{1/2}_{00}`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::grid::{diff, l2_norm, quad_weights, HalfLineSamples};
use crate::sobolev::fractional::{gagliardo_seminorm, h1200_norm};
use crate::system::{ForcingSpec, SystemSpec};
use crate::verdict::{NormResult, Verdict};

/// Relative residual tolerance for exact jets.
pub const TOL_CC_EXACT: f64 = 1e-8;
/// Multiplier of `h^2` for numerically differentiated inputs.
pub const TOL_CC_SAMPLED: f64 = 10.0;
/// Grid used to sample half-order residual functions from closed forms.
pub const RESIDUAL_EXTENT: f64 = 2.0;
pub const RESIDUAL_POINTS: usize = 2048;

/// Data given either as closed-form expressions or as samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataFn {
    Closed(Vec<Expr>),
    Sampled(HalfLineSamples),
}

impl DataFn {
    pub fn parse(srcs: &[&str]) -> Result<DataFn> {
        Ok(DataFn::Closed(srcs.iter().map(|s| Expr::parse(s)).collect::<Result<_>>()?))
    }

    pub fn zeros(n: usize) -> DataFn {
        DataFn::Closed(vec![Expr::zero(); n])
    }

    pub fn ncomp(&self) -> usize {
        match self {
            DataFn::Closed(e) => e.len(),
            DataFn::Sampled(s) => s.q(),
        }
    }

    pub fn is_exact(&self) -> bool {
        match self {
            DataFn::Closed(_) => true,
            DataFn::Sampled(s) => s.has_exact_jet(),
        }
    }

    /// Spacing of sampled data.
    pub fn spacing(&self) -> Option<f64> {
        match self {
            DataFn::Closed(_) => None,
            DataFn::Sampled(s) => Some(s.h),
        }
    }

    /// Sampled window length; closed forms are unbounded.
    pub fn extent(&self) -> Option<f64> {
        match self {
            DataFn::Closed(_) => None,
            DataFn::Sampled(s) => Some(s.extent()),
        }
    }

    pub fn eval(&self, c: usize, x: f64) -> Option<f64> {
        match self {
            DataFn::Closed(e) => Some(e[c].eval(x)),
            DataFn::Sampled(s) => s.interpolate(c, x),
        }
    }

    /// `d^p / dx^p` at 0 for `p = 0..=order`.
    pub fn jet0(&self, c: usize, order: usize) -> Result<Vec<f64>> {
        match self {
            DataFn::Closed(e) => e[c].jet(0.0, order),
            DataFn::Sampled(s) => (0..=order).map(|p| s.boundary_derivative(c, p)).collect(),
        }
    }

    /// `out[p][i] = d^p/dx^p` at `x_i = i h`, `i = 0..=n`. Derivatives that do
    /// not exist are infinite.
    pub fn deriv_grid(&self, c: usize, order: usize, h: f64, n: usize) -> Result<Vec<Vec<f64>>> {
        match self {
            DataFn::Closed(e) => {
                let cols: Vec<Vec<f64>> = crate::parallel::map_range(n + 1, |i| {
                    let s = e[c].series(i as f64 * h, order);
                    let d = s.derivatives();
                    (0..=order).map(|p| d.get(p).copied().unwrap_or(f64::INFINITY)).collect()
                });
                Ok((0..=order).map(|p| cols.iter().map(|col| col[p]).collect()).collect())
            }
            DataFn::Sampled(s) => {
                if (s.h - h).abs() > 1e-12 * h || s.n() < n {
                    return Err(Error::Dimension(format!(
                        "sampled data on h = {}, N = {} cannot serve h = {h}, N = {n}",
                        s.h,
                        s.n()
                    )));
                }
                let mut out = vec![s.comp(c).to_vec()];
                for p in 1..=order {
                    let d = diff(&out[p - 1], h);
                    out.push(d);
                }
                if let Some(j) = &s.jet {
                    for (p, row) in out.iter_mut().enumerate() {
                        if let Some(v) = j[c].get(p) {
                            row[0] = *v;
                        }
                    }
                }
                for row in out.iter_mut() {
                    row.truncate(n + 1);
                }
                Ok(out)
            }
        }
    }

    pub fn scaled(&self, k: f64) -> DataFn {
        match self {
            DataFn::Closed(e) => DataFn::Closed(e.iter().map(|x| x.clone() * k).collect()),
            DataFn::Sampled(s) => {
                let mut s = s.clone();
                for c in s.comps.iter_mut() {
                    c.iter_mut().for_each(|v| *v *= k);
                }
                if let Some(j) = s.jet.as_mut() {
                    j.iter_mut().flatten().for_each(|v| *v *= k);
                }
                DataFn::Sampled(s)
            }
        }
    }

    /// Sum of two closed-form data sets.
    pub fn plus(&self, o: &DataFn) -> Result<DataFn> {
        match (self, o) {
            (DataFn::Closed(a), DataFn::Closed(b)) if a.len() == b.len() => Ok(DataFn::Closed(
                a.iter().zip(b).map(|(x, y)| x.clone() + y.clone()).collect(),
            )),
            _ => Err(Error::Dimension("only closed forms of equal size can be added".into())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataTriple {
    pub u0: DataFn,
    pub g: DataFn,
    #[serde(default)]
    pub f: ForcingSpec,
}

impl DataTriple {
    pub fn closed(u0: &[&str], g: &[&str]) -> Result<DataTriple> {
        Ok(DataTriple {
            u0: DataFn::parse(u0)?,
            g: DataFn::parse(g)?,
            f: ForcingSpec::zero(),
        })
    }

    pub fn zero(spec: &SystemSpec) -> DataTriple {
        DataTriple {
            u0: DataFn::zeros(spec.q()),
            g: DataFn::zeros(spec.nb()),
            f: ForcingSpec::zero(),
        }
    }

    pub fn check(&self, spec: &SystemSpec) -> Result<()> {
        if self.u0.ncomp() != spec.q() || self.g.ncomp() != spec.nb() {
            return Err(Error::Dimension(format!(
                "data have {} / {} components, system needs {} / {}",
                self.u0.ncomp(),
                self.g.ncomp(),
                spec.q(),
                spec.nb()
            )));
        }
        self.f.check_components(spec.q())
    }

    pub fn is_exact(&self) -> bool {
        self.u0.is_exact() && self.g.is_exact()
    }

    pub fn scaled(&self, k: f64) -> DataTriple {
        DataTriple {
            u0: self.u0.scaled(k),
            g: self.g.scaled(k),
            f: self.f.scaled(k),
        }
    }

    pub fn plus(&self, o: &DataTriple) -> Result<DataTriple> {
        let mut f = self.f.clone();
        f.terms.extend(o.f.terms.iter().cloned());
        Ok(DataTriple {
            u0: self.u0.plus(&o.u0)?,
            g: self.g.plus(&o.g)?,
            f,
        })
    }

    /// Residual tolerance for the given scale.
    pub fn tol_cc(&self, scale: f64) -> f64 {
        let s = scale.max(1.0);
        if self.is_exact() {
            TOL_CC_EXACT * s
        } else {
            let h = self.u0.spacing().into_iter().chain(self.g.spacing()).fold(0.0f64, f64::max);
            TOL_CC_SAMPLED * h * h * s
        }
    }
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn is_zero(m: &DMatrix<f64>) -> bool {
    m.iter().all(|v| *v == 0.0)
}

/// `v_j = sum_n M[j][n] d^n u0 + sum_{n,l} F[j][n][l] d_x^n d_t^l f(., 0)`.
#[derive(Clone, Debug)]
pub struct LinearForms {
    pub m: Vec<Vec<DMatrix<f64>>>,
    pub f: Vec<Vec<Vec<DMatrix<f64>>>>,
}

impl LinearForms {
    pub fn new(spec: &SystemSpec, k: usize) -> Self {
        let q = spec.q();
        let zero = DMatrix::<f64>::zeros(q, q);
        let mut m = vec![vec![DMatrix::identity(q, q)]];
        let mut f: Vec<Vec<Vec<DMatrix<f64>>>> = vec![vec![]];
        for j in 0..k {
            let mut mj = vec![zero.clone(); j + 2];
            let mut fj = vec![vec![zero.clone(); j + 1]; j + 2];
            for l in 0..=j {
                let al = spec.a_l(l);
                if is_zero(&al) {
                    continue;
                }
                let c = binom(j, l);
                for (n, mm) in m[j - l].iter().enumerate() {
                    if !is_zero(mm) {
                        mj[n + 1] += &al * mm * c;
                    }
                }
                for (n, row) in f[j - l].iter().enumerate() {
                    for (lf, ff) in row.iter().enumerate() {
                        if !is_zero(ff) {
                            fj[n + 1][lf] += &al * ff * c;
                        }
                    }
                }
            }
            fj[0][j] += DMatrix::identity(q, q);
            m.push(mj);
            f.push(fj);
        }
        LinearForms { m, f }
    }

    /// Highest `u0` derivative order that `v_j` actually uses.
    pub fn u0_order(&self, j: usize) -> Option<usize> {
        self.m[j].iter().rposition(|m| !is_zero(m))
    }

    /// Evaluates `v_j` from derivative stacks `du[p]` (q-vectors) and
    /// `df[n][l]`.
    pub fn apply(&self, j: usize, du: &[DVector<f64>], df: &[Vec<DVector<f64>>]) -> DVector<f64> {
        let q = self.m[0][0].nrows();
        let mut out = DVector::zeros(q);
        for (n, mm) in self.m[j].iter().enumerate() {
            if !is_zero(mm) {
                out += mm * &du[n];
            }
        }
        for (n, row) in self.f[j].iter().enumerate() {
            for (l, ff) in row.iter().enumerate() {
                if !is_zero(ff) {
                    out += ff * &df[n][l];
                }
            }
        }
        out
    }
}

/// `df[n][l]` = q-vector of `d_x^n d_t^l f(x, 0)` for `n + l <= order`.
fn forcing_stack_at(f: &ForcingSpec, q: usize, x: f64, order: usize) -> Result<Vec<Vec<DVector<f64>>>> {
    let mut out = vec![vec![DVector::zeros(q); order + 1]; order + 1];
    for term in &f.terms {
        let tj = term.t.jet(0.0, order)?;
        let xs = term.x.series(x, order);
        if xs.valid() < order + 1 {
            return Err(Error::JetUnderflow { order: xs.valid() });
        }
        let xd = xs.derivatives();
        for n in 0..=order {
            for l in 0..=(order - n) {
                out[n][l][term.component] += xd[n] * tj[l];
            }
        }
    }
    Ok(out)
}

/// `v_j(0)` for `j = 0..=k`, together with the largest magnitude involved.
fn corner_values(spec: &SystemSpec, data: &DataTriple, forms: &LinearForms, k: usize, cc_order: usize) -> Result<(Vec<DVector<f64>>, f64)> {
    let q = spec.q();
    let underflow = |_| Error::JetUnderflow { order: cc_order };
    let need = (0..=k).filter_map(|j| forms.u0_order(j)).max().unwrap_or(0);
    let mut du = vec![DVector::zeros(q); need + 1];
    for c in 0..q {
        let jet = data.u0.jet0(c, need).map_err(underflow)?;
        for (p, v) in jet.iter().enumerate() {
            du[p][c] = *v;
        }
    }
    let df = forcing_stack_at(&data.f, q, 0.0, k).map_err(underflow)?;
    let mut scale = du.iter().flat_map(|v| v.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
    let vs: Vec<DVector<f64>> = (0..=k)
        .map(|j| {
            let mut padded = du.clone();
            padded.resize(j + 1, DVector::zeros(q));
            forms.apply(j, &padded, &df)
        })
        .collect();
    for v in &vs {
        scale = scale.max(v.amax());
    }
    Ok((vs, scale))
}

/// `v_0, ..., v_k` sampled on `x_i = i h`, `i = 0..=n`, with corner jets
/// where the data provide them.
pub fn taylor_coefficients(spec: &SystemSpec, data: &DataTriple, k: usize, h: f64, n: usize) -> Result<Vec<HalfLineSamples>> {
    data.check(spec)?;
    let q = spec.q();
    let forms = LinearForms::new(spec, k);
    let du: Vec<Vec<Vec<f64>>> = (0..q).map(|c| data.u0.deriv_grid(c, k, h, n)).collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(k + 1);
    for j in 0..=k {
        let cols: Vec<Result<DVector<f64>>> = crate::parallel::map_range(n + 1, |i| {
            let x = i as f64 * h;
            let dui: Vec<DVector<f64>> = (0..=j).map(|p| DVector::from_fn(q, |c, _| du[c][p][i])).collect();
            let df = if data.f.is_zero() {
                vec![vec![DVector::zeros(q); j + 1]; j + 1]
            } else {
                forcing_stack_at(&data.f, q, x, j)?
            };
            Ok(forms.apply(j, &dui, &df))
        });
        let cols: Vec<DVector<f64>> = cols.into_iter().collect::<Result<_>>()?;
        let comps: Vec<Vec<f64>> = (0..q).map(|c| cols.iter().map(|v| v[c]).collect()).collect();
        let mut s = HalfLineSamples::new(h, comps)?;
        // Corner jet of v_j up to total order k.
        let depth = k - j;
        let jet: Option<Vec<Vec<f64>>> = (|| {
            let need = j + depth;
            let mut stack = vec![DVector::zeros(q); need + 1];
            for c in 0..q {
                let jt = data.u0.jet0(c, need).ok()?;
                for (p, v) in jt.iter().enumerate() {
                    stack[p][c] = *v;
                }
            }
            let df = forcing_stack_at(&data.f, q, 0.0, need).ok()?;
            let mut per_c = vec![Vec::with_capacity(depth + 1); q];
            for p in 0..=depth {
                let shifted: Vec<DVector<f64>> = stack[p..].to_vec();
                let dfs: Vec<Vec<DVector<f64>>> = df[p..].iter().cloned().collect();
                let v = forms.apply(j, &pad(&shifted, j + 1, q), &pad2(&dfs, j + 1, q));
                for c in 0..q {
                    per_c[c].push(v[c]);
                }
            }
            Some(per_c)
        })();
        if let Some(jet) = jet {
            if data.u0.is_exact() {
                for c in 0..q {
                    s.comps[c][0] = jet[c][0];
                }
                s = s.with_jet(jet)?;
            }
        }
        out.push(s);
    }
    Ok(out)
}

fn pad(v: &[DVector<f64>], len: usize, q: usize) -> Vec<DVector<f64>> {
    let mut out = v.to_vec();
    out.resize(len.max(out.len()), DVector::zeros(q));
    out
}

fn pad2(v: &[Vec<DVector<f64>>], len: usize, q: usize) -> Vec<Vec<DVector<f64>>> {
    let mut out: Vec<Vec<DVector<f64>>> = v.iter().map(|r| pad(r, len, q)).collect();
    out.resize(len.max(out.len()), vec![DVector::zeros(q); len]);
    out
}

/// Residual of the order-`j` condition and the tolerance that applies.
pub fn check_cc_order_with_tol(j: usize, spec: &SystemSpec, data: &DataTriple) -> Result<(Vec<f64>, f64)> {
    if j == 0 {
        return Err(Error::InvalidParameter("compatibility orders start at 1".into()));
    }
    data.check(spec)?;
    let forms = LinearForms::new(spec, j - 1);
    let (vs, mut scale) = corner_values(spec, data, &forms, j - 1, j)?;
    let mut eps = DVector::zeros(spec.nb());
    for c in 0..spec.nb() {
        let gj = data.g.jet0(c, j - 1).map_err(|_| Error::JetUnderflow { order: j })?;
        eps[c] = gj[j - 1];
        scale = scale.max(gj[j - 1].abs());
    }
    for l in 0..j {
        let bl = spec.b_l(l);
        if is_zero(&bl) {
            continue;
        }
        let term = bl * &vs[j - 1 - l] * binom(j - 1, l);
        scale = scale.max(term.amax());
        eps -= term;
    }
    Ok((eps.iter().copied().collect(), data.tol_cc(scale)))
}

/// `eps_j`, the order-`j` compatibility residual at the corner.
pub fn check_cc_order(j: usize, spec: &SystemSpec, data: &DataTriple) -> Result<Vec<f64>> {
    check_cc_order_with_tol(j, spec, data).map(|r| r.0)
}

fn residual_grid(data: &DataTriple) -> Result<(f64, usize)> {
    match (data.u0.spacing(), data.g.spacing()) {
        (None, None) => Ok((RESIDUAL_EXTENT / RESIDUAL_POINTS as f64, RESIDUAL_POINTS)),
        (a, b) => {
            let h = a.or(b).expect("one is sampled");
            if let (Some(a), Some(b)) = (a, b) {
                if (a - b).abs() > 1e-12 * a {
                    return Err(Error::Dimension("u0 and g must share a spacing".into()));
                }
            }
            let ext = [data.u0.extent(), data.g.extent()]
                .into_iter()
                .flatten()
                .fold(f64::INFINITY, f64::min);
            Ok((h, (ext / h + 1e-9).floor() as usize))
        }
    }
}

/// Order-`k` residual as a function on the half-line, pairing `t` with `x`.
pub fn residual_function(k: usize, spec: &SystemSpec, data: &DataTriple, h: f64, n: usize) -> Result<Vec<Vec<f64>>> {
    let vs = if k >= 2 {
        taylor_coefficients(spec, data, k - 1, h, n)?
    } else {
        taylor_coefficients(spec, data, 0, h, n)?
    };
    let mut out = Vec::with_capacity(spec.nb());
    for c in 0..spec.nb() {
        let g = data.g.deriv_grid(c, k - 1, h, n)?;
        out.push(g[k - 1].clone());
    }
    for l in 0..k {
        let bl = spec.b_l(l);
        if is_zero(&bl) {
            continue;
        }
        let w = binom(k - 1, l);
        let v = &vs[k - 1 - l];
        for (r, row) in out.iter_mut().enumerate() {
            for (i, val) in row.iter_mut().enumerate() {
                let mut acc = 0.0;
                for c in 0..spec.q() {
                    let bv = bl[(r, c)];
                    if bv != 0.0 {
                        acc += bv * v.comps[c][i];
                    }
                }
                *val -= w * acc;
            }
        }
    }
    Ok(out)
}

/// Half-order condition at `k - 1/2`: orders below `k` must hold and the
/// order-`k` residual function must lie in `H^{1/2}_{00}` componentwise.
pub fn check_cc_half_order(k: usize, spec: &SystemSpec, data: &DataTriple) -> Result<NormResult> {
    if k == 0 {
        return Err(Error::InvalidParameter("half-order checks start at k = 1".into()));
    }
    for j in 1..k {
        let (eps, tol) = check_cc_order_with_tol(j, spec, data)?;
        if eps.iter().any(|e| e.abs() > tol) {
            return Err(Error::LowerOrderViolated(j));
        }
    }
    half_order_unchecked(k, spec, data)
}

fn half_order_unchecked(k: usize, spec: &SystemSpec, data: &DataTriple) -> Result<NormResult> {
    let (h, n) = residual_grid(data)?;
    let r = residual_function(k, spec, data, h, n)?;
    if !data.is_exact() {
        let parts: Vec<NormResult> = r.iter().map(|rc| h1200_norm(rc, h)).collect();
        return Ok(merge(parts));
    }
    let peak = r.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = match check_cc_order_with_tol(k, spec, data) {
        Ok((_, tol)) => tol,
        Err(Error::JetUnderflow { .. }) => TOL_CC_EXACT * peak.max(1.0),
        Err(e) => return Err(e),
    };
    let mut base = 0.0;
    let mut verdicts = vec![];
    for rc in &r {
        let g = gagliardo_seminorm(rc, h, 0.5)?;
        let l2 = l2_norm(rc, h);
        base += g.value * g.value + l2 * l2;
        verdicts.push(g.verdict);
    }
    let hardy = graded_hardy(k, spec, data, floor)?;
    verdicts.push(hardy.verdict);
    Ok(NormResult {
        value: (base + hardy.value).sqrt(),
        truncation_sequence: hardy.truncation_sequence.iter().map(|p| base + p).collect(),
        verdict: crate::sobolev::fractional::combine(&verdicts),
        slope: hardy.slope,
    })
}

/// Octaves `[2^-j, 2^(1-j)] RESIDUAL_EXTENT`, `j = 1..=GRADED_OCTAVES`, for
/// the Hardy part of closed-form half-order checks.
pub const GRADED_OCTAVES: usize = 40;
const OCTAVE_STEPS: usize = 32;

/// `int r^2 / tau` accumulated octave by octave towards the corner, with
/// residual values at or below `floor` treated as zero. A uniform grid only
/// reaches a few octaves, where a nonzero `r(0)` can still be masked by the
/// slope of `r`.
fn graded_hardy(k: usize, spec: &SystemSpec, data: &DataTriple, floor: f64) -> Result<NormResult> {
    let w = quad_weights(OCTAVE_STEPS + 1, 1.0);
    let octaves = crate::parallel::map_range(GRADED_OCTAVES, |j| -> Result<f64> {
        let a = RESIDUAL_EXTENT / 2f64.powi(j as i32 + 1);
        let h = a / OCTAVE_STEPS as f64;
        let r = residual_function(k, spec, data, h, 2 * OCTAVE_STEPS)?;
        let mut acc = 0.0;
        for rc in &r {
            for (m, wm) in w.iter().enumerate() {
                let i = OCTAVE_STEPS + m;
                let v = if rc[i].abs() <= floor { 0.0 } else { rc[i] };
                acc += wm * h * v * v / (i as f64 * h);
            }
        }
        Ok(acc)
    });
    let mut seq = Vec::with_capacity(GRADED_OCTAVES);
    let mut total = 0.0;
    for o in octaves {
        let o = o?;
        if !o.is_finite() {
            return Ok(NormResult {
                value: f64::INFINITY,
                truncation_sequence: vec![f64::INFINITY],
                verdict: Verdict::Divergent,
                slope: crate::verdict::BLOWUP_SLOPE,
            });
        }
        total += o;
        seq.push(total);
    }
    if total == 0.0 {
        return Ok(NormResult::zero());
    }
    Ok(NormResult::from_sequence(total, seq))
}

fn merge(parts: Vec<NormResult>) -> NormResult {
    if parts.len() == 1 {
        return parts.into_iter().next().expect("one");
    }
    let verdict = crate::sobolev::fractional::combine(&parts.iter().map(|p| p.verdict).collect::<Vec<_>>());
    let value = parts.iter().map(|p| p.value * p.value).sum::<f64>().sqrt();
    let len = parts.iter().map(|p| p.truncation_sequence.len()).max().unwrap_or(0);
    let seq = (0..len)
        .map(|i| {
            parts
                .iter()
                .map(|p| {
                    let s = &p.truncation_sequence;
                    s[i.min(s.len() - 1)]
                })
                .sum()
        })
        .collect();
    let slope = parts.iter().map(|p| p.slope).fold(f64::NEG_INFINITY, f64::max);
    NormResult {
        value,
        truncation_sequence: seq,
        verdict,
        slope,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfOrderCheck {
    /// The check sits at `k - 1/2`.
    pub k: usize,
    pub result: NormResult,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompatReport {
    pub orders_checked: Vec<usize>,
    /// `residuals[i]` belongs to `orders_checked[i]`.
    pub residuals: Vec<Vec<f64>>,
    pub passed: Vec<bool>,
    pub tolerances: Vec<f64>,
    pub half_orders: Vec<HalfOrderCheck>,
    /// The half-order check just above the verified order, when computed.
    pub half_order_hardy: Option<NormResult>,
    pub verified_order: f64,
    pub s_max: f64,
    /// Corner jets ran out at this order (capped mode only).
    pub jet_limited_at: Option<usize>,
    /// Every passing order with an exactly zero residual had a finite
    /// half-order check below it.
    pub hierarchy_consistent: bool,
}

impl CompatReport {
    fn cc(&self, j: usize) -> Option<bool> {
        self.orders_checked.iter().position(|&o| o == j).map(|i| self.passed[i])
    }

    fn half(&self, k: usize) -> Option<&NormResult> {
        self.half_orders.iter().find(|h| h.k == k).map(|h| &h.result)
    }

    /// Whether the conditions of order `s` hold: orders up to `k` for
    /// `s = k + theta`, `theta < 1/2`; additionally the half-order check
    /// at `k + 1/2` when `theta = 1/2`; orders up to `k + 1` when
    /// `theta > 1/2`. Unknown entries count as failures.
    pub fn satisfies(&self, s: f64) -> bool {
        if s < 0.0 {
            return true;
        }
        let k = s.floor() as usize;
        let theta = s - k as f64;
        let upto = |m: usize| (1..=m).all(|j| self.cc(j) == Some(true));
        if (theta - 0.5).abs() < 1e-12 {
            upto(k) && self.half(k + 1).is_some_and(|r| r.verdict == Verdict::Finite)
        } else if theta < 0.5 {
            upto(k)
        } else {
            upto(k + 1)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompatOptions {
    /// Stop at the first jet underflow instead of failing.
    pub capped: bool,
}

/// Runs the integer and half-integer checks needed up to `s_max` (a
/// multiple of 1/2) and assembles the verified order.
pub fn compat_report(spec: &SystemSpec, data: &DataTriple, s_max: f64) -> Result<CompatReport> {
    compat_report_with(spec, data, s_max, CompatOptions { capped: false })
}

pub fn compat_report_with(spec: &SystemSpec, data: &DataTriple, s_max: f64, opts: CompatOptions) -> Result<CompatReport> {
    data.check(spec)?;
    if s_max < 0.0 || (2.0 * s_max).fract() != 0.0 {
        return Err(Error::InvalidParameter(format!("s_max = {s_max} must be a nonnegative multiple of 1/2")));
    }
    let max_cc = s_max.floor() as usize;
    let max_half = (s_max - 0.5).floor() as i64 + 1;
    let mut rep = CompatReport {
        orders_checked: vec![],
        residuals: vec![],
        passed: vec![],
        tolerances: vec![],
        half_orders: vec![],
        half_order_hardy: None,
        verified_order: 0.0,
        s_max,
        jet_limited_at: None,
        hierarchy_consistent: true,
    };
    let mut all_pass = true;
    let top = max_cc.max(max_half.max(0) as usize);
    for j in 1..=top {
        // Half check at j - 1/2 needs orders below j.
        if (j as i64) <= max_half && all_pass {
            let r = half_order_unchecked(j, spec, data)?;
            rep.half_orders.push(HalfOrderCheck { k: j, result: r });
        }
        if j > max_cc || rep.jet_limited_at.is_some() {
            continue;
        }
        match check_cc_order_with_tol(j, spec, data) {
            Ok((eps, tol)) => {
                let pass = eps.iter().all(|e| e.abs() <= tol);
                all_pass &= pass;
                rep.orders_checked.push(j);
                rep.residuals.push(eps);
                rep.passed.push(pass);
                rep.tolerances.push(tol);
            }
            Err(Error::JetUnderflow { order }) if opts.capped => {
                rep.jet_limited_at = Some(order);
                all_pass = false;
            }
            Err(e) => return Err(e),
        }
    }
    let mut s = 0.0;
    let mut verified = 0.0;
    while s <= s_max + 1e-12 {
        if !rep.satisfies(s) {
            break;
        }
        verified = s;
        s += 0.5;
    }
    rep.verified_order = verified;
    let next_k = verified.floor() as usize + 1;
    rep.half_order_hardy = rep.half(next_k).cloned().or_else(|| rep.half_orders.last().map(|h| h.result.clone()));
    for (i, &j) in rep.orders_checked.iter().enumerate() {
        let exact_zero = rep.passed[i] && rep.residuals[i].iter().all(|e| *e == 0.0);
        if exact_zero {
            if let Some(h) = rep.half(j) {
                if h.verdict == Verdict::Divergent {
                    rep.hierarchy_consistent = false;
                }
            }
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(u0: &str, g: &str) -> (SystemSpec, DataTriple) {
        (SystemSpec::toy(), DataTriple::closed(&[u0], &[g]).unwrap())
    }

    #[test]
    fn zero_data_reaches_s_max() {
        let (s, d) = toy("0", "0");
        let r = compat_report(&s, &d, 3.5).unwrap();
        assert_eq!(r.verified_order, 3.5);
        assert!(r.residuals.iter().flatten().all(|e| *e == 0.0));
    }

    #[test]
    fn exponential_pair() {
        let (s, d) = toy("exp(-x)", "exp(-t)");
        assert_eq!(check_cc_order(1, &s, &d).unwrap(), vec![0.0]);
        assert!((check_cc_order(2, &s, &d).unwrap()[0] + 2.0).abs() < 1e-14);
        let r = compat_report(&s, &d, 3.0).unwrap();
        assert_eq!(r.verified_order, 1.0);
        assert_eq!(r.half_order_hardy.unwrap().verdict, Verdict::Divergent);
    }

    #[test]
    fn taylor_coefficients_toy_exponential() {
        let (s, d) = toy("exp(-x)", "0");
        let v = taylor_coefficients(&s, &d, 3, 0.01, 100).unwrap();
        for vj in &v {
            for (i, val) in vj.comp(0).iter().enumerate() {
                assert!((val - (-(i as f64) * 0.01).exp()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn taylor_coefficients_diagonal_system() {
        let s = SystemSpec::from_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]], &[vec![0.0, 1.0]]).unwrap();
        let d = DataTriple::closed(&["sin(x)", "cos(x)"], &["0"]).unwrap();
        let v = taylor_coefficients(&s, &d, 1, 0.1, 10).unwrap();
        for i in 0..=10 {
            let x = i as f64 * 0.1;
            assert!((v[1].comp(0)[i] - x.cos()).abs() < 1e-14);
            assert!((v[1].comp(1)[i] - x.sin()).abs() < 1e-14);
        }
    }

    #[test]
    fn half_order_examples() {
        let (s, d) = toy("exp(-x)", "exp(-x)");
        assert_eq!(check_cc_half_order(1, &s, &d).unwrap().verdict, Verdict::Finite);
        let (s, d) = toy("x^0.3*eta(x)", "0");
        assert_eq!(check_cc_half_order(1, &s, &d).unwrap().verdict, Verdict::Finite);
        let (s, d) = toy("eta(x)", "0");
        assert_eq!(check_cc_half_order(1, &s, &d).unwrap().verdict, Verdict::Divergent);
        let (s, d) = toy("exp(-x)", "0");
        assert!(matches!(check_cc_half_order(2, &s, &d), Err(Error::LowerOrderViolated(1))));
    }

    #[test]
    fn smooth_compatible_pair() {
        let (s, d) = toy("x*eta(x)", "-t*eta(t)");
        assert!(compat_report(&s, &d, 3.0).unwrap().verified_order >= 2.0);
    }

    #[test]
    fn underflow_strict_and_capped() {
        let (s, d) = toy("x^0.3*eta(x)", "0");
        assert!(matches!(compat_report(&s, &d, 2.5), Err(Error::JetUnderflow { order: 2 })));
        let r = compat_report_with(&s, &d, 2.5, CompatOptions { capped: true }).unwrap();
        assert_eq!(r.jet_limited_at, Some(2));
        assert_eq!(r.verified_order, 1.0);
    }

    #[test]
    fn forcing_enters_recursion() {
        // u_t + u_x = e^{-x}: v_1 = -u0' + e^{-x}.
        let mut d = DataTriple::closed(&["0"], &["0"]).unwrap();
        d.f.terms.push(crate::system::ForcingTerm {
            component: 0,
            x: Expr::parse("exp(-x)").unwrap(),
            t: Expr::parse("1").unwrap(),
        });
        let s = SystemSpec::toy();
        let v = taylor_coefficients(&s, &d, 2, 0.1, 10).unwrap();
        assert!((v[1].comp(0)[3] - (-0.3f64).exp()).abs() < 1e-14);
        // v_2 = -v_1' = e^{-x}
        assert!((v[2].comp(0)[3] - (-0.3f64).exp()).abs() < 1e-14);
        assert!((check_cc_order(2, &s, &d).unwrap()[0] + 1.0).abs() < 1e-14);
    }
}
