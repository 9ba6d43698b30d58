//! Both sides of the energy estimates, and regularity sweeps that compare
//! measured Sobolev growth under refinement with the compatibility order.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::compat::{compat_report_with, CompatOptions, CompatReport, DataFn, DataTriple};
use crate::error::{Error, Result};
use crate::expr::{Expr, ETA_DEFAULT_END, ETA_DEFAULT_FLAT};
use crate::field::Field2D;
use crate::grid::{diff, l2_norm, quad_weights};
use crate::sobolev::fractional::{gagliardo_from_pair_sums, pair_sums};
use crate::solver::{solve_exact, SolveConfig};
use crate::system::{ForcingSpec, SystemSpec};
use crate::verdict::{classify, Verdict};

/// `rhs` at or below this counts as zero.
pub const ANOMALY_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateKind {
    Semigroup,
    Resolvent,
    WeightedResolvent,
}

impl fmt::Display for EstimateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EstimateKind::Semigroup => "semigroup",
            EstimateKind::Resolvent => "resolvent",
            EstimateKind::WeightedResolvent => "weighted_resolvent",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateSides {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub gamma: f64,
    pub s: f64,
    pub estimate_kind: EstimateKind,
    /// `rhs` vanished while `lhs` did not.
    pub anomaly: bool,
}

fn sample(d: &DataFn, c: usize, h: f64, n: usize) -> Result<Vec<f64>> {
    (0..=n)
        .map(|i| d.eval(c, i as f64 * h).ok_or(Error::HorizonExceeded("estimate data")))
        .collect()
}

/// `sum_{b <= s} |w(t) d^b v|_{L2}` with the components of each derivative
/// combined in `l2`.
fn line_weighted_norm(comps: &[Vec<f64>], h: f64, s: usize, gamma: f64) -> f64 {
    let w: Vec<f64> = (0..comps.first().map_or(0, |c| c.len())).map(|i| (-gamma * i as f64 * h).exp()).collect();
    let mut cur: Vec<Vec<f64>> = comps.to_vec();
    let mut total = 0.0;
    for b in 0..=s {
        if b > 0 {
            cur = cur.iter().map(|v| diff(v, h)).collect();
        }
        let sq: f64 = cur
            .iter()
            .map(|v| {
                let wv: Vec<f64> = v.iter().zip(&w).map(|(a, b)| a * b).collect();
                l2_norm(&wv, h).powi(2)
            })
            .sum();
        total += sq.sqrt();
    }
    total
}

fn forcing_field(data: &DataTriple, like: &Field2D) -> Field2D {
    let mut f = Field2D::zeros(like.q(), like.nx(), like.nt(), like.h, like.k);
    if data.f.is_zero() {
        return f;
    }
    for j in 0..=like.nt() {
        for i in 0..=like.nx() {
            let v = data.f.eval(like.q(), i as f64 * like.h, j as f64 * like.k);
            for (c, vc) in v.into_iter().enumerate() {
                f.data[[c, j, i]] = vc;
            }
        }
    }
    f
}

fn weighted_field_norm(u: &Field2D, s: usize, gamma: f64) -> Result<f64> {
    Ok(crate::sobolev::weighted_hs_gamma_norm(u, s as f64, gamma)?.value)
}

/// Left and right sides of the semigroup, resolvent or weighted resolvent
/// estimate for a computed solution `u` of the problem with data `data`.
/// Norms are taken over the grid window of `u`.
pub fn estimate_sides(u: &Field2D, data: &DataTriple, gamma: f64, s: usize, kind: EstimateKind) -> Result<EstimateSides> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter(format!("gamma = {gamma} must be positive")));
    }
    if kind != EstimateKind::WeightedResolvent && s != 0 {
        return Err(Error::InvalidParameter(format!("the {kind} estimate is an L2 estimate; got s = {s}")));
    }
    if s > crate::sobolev::weighted::WEIGHTED_S_MAX {
        return Err(Error::InvalidParameter(format!("s = {s} above the weighted-norm limit")));
    }
    let q = u.q();
    let (nx, nt, h, k) = (u.nx(), u.nt(), u.h, u.k);
    let u0: Vec<Vec<f64>> = (0..q).map(|c| sample(&data.u0, c, h, nx)).collect::<Result<_>>()?;
    let g: Vec<Vec<f64>> = (0..data.g.ncomp()).map(|c| sample(&data.g, c, k, nt)).collect::<Result<_>>()?;
    let trace: Vec<Vec<f64>> = (0..q).map(|c| u.space_slice(c, 0)).collect();
    let f = forcing_field(data, u);

    let (lhs, rhs) = match kind {
        EstimateKind::Semigroup => {
            let sup = (0..=nt)
                .map(|j| {
                    let sq: f64 = (0..q).map(|c| l2_norm(&u.time_slice(c, j), h).powi(2)).sum();
                    (-gamma * j as f64 * k).exp() * sq.sqrt()
                })
                .fold(0.0f64, f64::max);
            let lhs = sup + gamma.sqrt() * line_weighted_norm(&trace, k, 0, gamma);
            let rhs = line_weighted_norm(&u0, h, 0, 0.0)
                + line_weighted_norm(&g, k, 0, gamma)
                + weighted_field_norm(&f, 0, gamma)? / gamma.sqrt();
            (lhs, rhs)
        }
        EstimateKind::Resolvent => {
            let lhs = gamma * weighted_field_norm(u, 0, gamma)?.powi(2) + line_weighted_norm(&trace, k, 0, gamma).powi(2);
            let rhs = line_weighted_norm(&u0, h, 0, 0.0).powi(2)
                + line_weighted_norm(&g, k, 0, gamma).powi(2)
                + weighted_field_norm(&f, 0, gamma)?.powi(2) / gamma;
            (lhs, rhs)
        }
        EstimateKind::WeightedResolvent => {
            let lhs = gamma * weighted_field_norm(u, s, gamma)?.powi(2) + line_weighted_norm(&trace, k, s, gamma).powi(2);
            let rhs = line_weighted_norm(&u0, h, s, 0.0).powi(2)
                + line_weighted_norm(&g, k, s, gamma).powi(2)
                + weighted_field_norm(&f, s, gamma)?.powi(2) / gamma;
            (lhs, rhs)
        }
    };
    let anomaly = rhs <= ANOMALY_TOL && lhs > ANOMALY_TOL;
    let ratio = if rhs > ANOMALY_TOL {
        lhs / rhs
    } else if anomaly {
        f64::INFINITY
    } else {
        0.0
    };
    Ok(EstimateSides {
        lhs,
        rhs,
        ratio,
        gamma,
        s: s as f64,
        estimate_kind: kind,
        anomaly,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Bounded,
    Divergent,
    Inconclusive,
}

impl From<Verdict> for Classification {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Finite => Classification::Bounded,
            Verdict::Divergent => Classification::Divergent,
            Verdict::Inconclusive => Classification::Inconclusive,
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Bounded => "bounded",
            Classification::Divergent => "divergent",
            Classification::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Intervals per direction at level 0.
    pub n0: usize,
    /// Slice intervals per direction for the fractional parts, the same at
    /// every level. Must divide `n0`.
    pub slices: usize,
    pub x_extent: f64,
    pub t_extent: f64,
    pub duhamel_steps: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            n0: 128,
            slices: 32,
            x_extent: 2.0,
            t_extent: 2.0,
            duhamel_steps: 16,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub s: Vec<f64>,
    pub compat_order: f64,
    /// Intervals per direction at each level.
    pub grid_sizes: Vec<usize>,
    /// `norm_table[i][l]`: the `H^s` proxy for `s[i]` at level `l`.
    pub norm_table: Vec<Vec<f64>>,
    pub classification: Vec<Classification>,
    pub slopes: Vec<f64>,
    pub predicted: Vec<Classification>,
    pub data_finite: Vec<bool>,
    pub data_table: Vec<Vec<f64>>,
    pub compat: CompatReport,
}

impl SweepResult {
    /// `Some(true/false)` for decided cells, `None` when inconclusive.
    pub fn matches(&self) -> Vec<Option<bool>> {
        self.classification
            .iter()
            .zip(&self.predicted)
            .map(|(c, p)| (*c != Classification::Inconclusive).then_some(c == p))
            .collect()
    }
}

/// Pair sums of one slice, with its quadrature weight across slices.
struct Slice {
    weight: f64,
    h: f64,
    sums: Vec<f64>,
}

/// Squared `L2` norms of all derivatives of order `k` (index `k`), and
/// per-order slices of the top derivatives in each direction.
struct LevelKernels {
    l2sq: Vec<f64>,
    slices: Vec<Vec<Slice>>,
}

fn orders_needed(s_grid: &[f64]) -> (usize, Vec<bool>) {
    let kmax = s_grid.iter().fold(0usize, |m, s| m.max(s.floor() as usize));
    let mut frac = vec![false; kmax + 1];
    for s in s_grid {
        if s.fract() > 0.0 {
            frac[s.floor() as usize] = true;
        }
    }
    (kmax, frac)
}

fn field_kernels(u: &Field2D, s_grid: &[f64], n0: usize) -> LevelKernels {
    let (kmax, frac) = orders_needed(s_grid);
    // d[a][b] = dx^a dt^b u.
    let mut d: Vec<Vec<Field2D>> = Vec::new();
    for a in 0..=kmax {
        let base = if a == 0 { u.clone() } else { d[a - 1][0].dx() };
        let mut row = vec![base];
        for b in 1..=(kmax - a) {
            let next = row[b - 1].dt();
            row.push(next);
        }
        d.push(row);
    }
    let mut l2sq = vec![0.0; kmax + 1];
    let mut slices: Vec<Vec<Slice>> = (0..=kmax).map(|_| Vec::new()).collect();
    let (sx, st) = (u.nx() / n0, u.nt() / n0);
    let wt = quad_weights(n0 + 1, u.t_extent() / n0 as f64);
    let wx = quad_weights(n0 + 1, u.x_extent() / n0 as f64);
    for (a, row) in d.iter().enumerate() {
        for (b, f) in row.iter().enumerate() {
            let k = a + b;
            l2sq[k] += f.weighted_l2_sq(|_| 1.0);
            if !frac[k] {
                continue;
            }
            for c in 0..u.q() {
                let xs = crate::parallel::map_range(n0 + 1, |m| Slice {
                    weight: wt[m],
                    h: u.h,
                    sums: pair_sums(&f.time_slice(c, m * st), u.h),
                });
                let ts = crate::parallel::map_range(n0 + 1, |m| Slice {
                    weight: wx[m],
                    h: u.k,
                    sums: pair_sums(&f.space_slice(c, m * sx), u.k),
                });
                slices[k].extend(xs);
                slices[k].extend(ts);
            }
        }
    }
    LevelKernels { l2sq, slices }
}

fn line_kernels(comps: &[Vec<f64>], h: f64, s_grid: &[f64]) -> LevelKernels {
    let (kmax, frac) = orders_needed(s_grid);
    let mut l2sq = vec![0.0; kmax + 1];
    let mut slices: Vec<Vec<Slice>> = (0..=kmax).map(|_| Vec::new()).collect();
    for v in comps {
        let mut cur = v.clone();
        for k in 0..=kmax {
            if k > 0 {
                cur = diff(&cur, h);
            }
            l2sq[k] += l2_norm(&cur, h).powi(2);
            if frac[k] {
                slices[k].push(Slice {
                    weight: 1.0,
                    h,
                    sums: pair_sums(&cur, h),
                });
            }
        }
    }
    LevelKernels { l2sq, slices }
}

/// Squared proxy: integer derivative norms up to `floor(s)` plus the
/// Gagliardo seminorms of the top derivatives along each direction.
fn proxy_sq(kern: &LevelKernels, s: f64) -> Result<f64> {
    let k = s.floor() as usize;
    let theta = s - k as f64;
    let mut acc: f64 = kern.l2sq[..=k].iter().sum();
    if theta > 0.0 {
        for sl in &kern.slices[k] {
            let g = gagliardo_from_pair_sums(&sl.sums, sl.h, theta)?.value;
            acc += sl.weight * g * g;
        }
    }
    Ok(acc)
}

fn closed_only(data: &DataTriple) -> Result<()> {
    if !data.is_exact() {
        return Err(Error::InvalidParameter("regularity sweeps need closed-form data".into()));
    }
    Ok(())
}

/// Solves on `n0 2^l` grids for `l < levels`, measures the `H^s` proxy of
/// the solution and of the data at every level, classifies the growth of
/// each sequence and compares with the compatibility prediction.
pub fn regularity_sweep(spec: &SystemSpec, data: &DataTriple, s_grid: &[f64], levels: usize) -> Result<SweepResult> {
    regularity_sweep_with(spec, data, s_grid, levels, &SweepConfig::default())
}

pub fn regularity_sweep_with(
    spec: &SystemSpec,
    data: &DataTriple,
    s_grid: &[f64],
    levels: usize,
    cfg: &SweepConfig,
) -> Result<SweepResult> {
    if levels < 3 {
        return Err(Error::InvalidParameter(format!("levels = {levels}; at least 3 are needed")));
    }
    if s_grid.is_empty() || s_grid.iter().any(|s| !(0.0..=3.0).contains(s)) {
        return Err(Error::InvalidParameter("s grid must be nonempty and inside [0, 3]".into()));
    }
    if cfg.slices < 2 || cfg.n0 < 8 || !cfg.n0.is_multiple_of(cfg.slices) {
        return Err(Error::InvalidParameter("n0 must be at least 8 and a multiple of slices".into()));
    }
    closed_only(data)?;
    data.check(spec)?;
    let s_cap = (2.0 * s_grid.iter().fold(0.0f64, |m, s| m.max(*s))).ceil() / 2.0;
    let compat = compat_report_with(spec, data, s_cap, CompatOptions { capped: true })?;

    let sizes: Vec<usize> = (0..levels).map(|l| cfg.n0 << l).collect();
    let mut sol = vec![vec![0.0; levels]; s_grid.len()];
    let mut dat = vec![vec![0.0; levels]; s_grid.len()];
    for (l, &n) in sizes.iter().enumerate() {
        let mut sc = SolveConfig::new(n, n, cfg.x_extent, cfg.t_extent);
        sc.duhamel_steps = cfg.duhamel_steps;
        let u = solve_exact(spec, data, &sc)?;
        let kern = field_kernels(&u, s_grid, cfg.slices);
        let (h, k) = (sc.h(), sc.k());
        let u0: Vec<Vec<f64>> = (0..spec.q()).map(|c| sample(&data.u0, c, h, n)).collect::<Result<_>>()?;
        let g: Vec<Vec<f64>> = (0..spec.nb()).map(|c| sample(&data.g, c, k, n)).collect::<Result<_>>()?;
        let ku = line_kernels(&u0, h, s_grid);
        let kg = line_kernels(&g, k, s_grid);
        for (i, &s) in s_grid.iter().enumerate() {
            sol[i][l] = proxy_sq(&kern, s)?;
            dat[i][l] = proxy_sq(&ku, s)? + proxy_sq(&kg, s)?;
        }
    }
    let mut classification = Vec::new();
    let mut slopes = Vec::new();
    let mut predicted = Vec::new();
    let mut data_finite = Vec::new();
    for (i, &s) in s_grid.iter().enumerate() {
        let (v, slope) = classify(&sol[i]);
        classification.push(Classification::from(v));
        slopes.push(slope);
        let finite = classify(&dat[i]).0 != Verdict::Divergent;
        data_finite.push(finite);
        predicted.push(if finite && compat.satisfies(s) {
            Classification::Bounded
        } else {
            Classification::Divergent
        });
    }
    let root = |t: Vec<Vec<f64>>| t.into_iter().map(|r| r.into_iter().map(|v| v.max(0.0).sqrt()).collect()).collect();
    Ok(SweepResult {
        s: s_grid.to_vec(),
        compat_order: compat.verified_order,
        grid_sizes: sizes,
        norm_table: root(sol),
        classification,
        slopes,
        predicted,
        data_finite,
        data_table: root(dat),
        compat,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantProbeRow {
    pub theta: f64,
    /// `sup_t |u(t)|_{H^theta} / (|u0|_{H^theta} + |g|_{H^theta})` on the grid.
    pub constant: f64,
}

fn h_theta_line(v: &[f64], h: f64, theta: f64) -> Result<f64> {
    let semi = gagliardo_from_pair_sums(&pair_sums(v, h), h, theta)?.value;
    Ok((l2_norm(v, h).powi(2) + semi * semi).sqrt())
}

/// Ratio of the solution's `C_t H^theta` norm to the data's `H^theta`
/// norms on a single `n x n` grid, for each `theta`.
pub fn half_integer_constant_probe(
    spec: &SystemSpec,
    data: &DataTriple,
    theta_grid: &[f64],
    n: usize,
    cfg: &SweepConfig,
) -> Result<Vec<ConstantProbeRow>> {
    if theta_grid.iter().any(|t| !(*t > 0.0 && *t < 1.0)) {
        return Err(Error::InvalidParameter("theta must lie in (0, 1)".into()));
    }
    closed_only(data)?;
    let mut sc = SolveConfig::new(n, n, cfg.x_extent, cfg.t_extent);
    sc.duhamel_steps = cfg.duhamel_steps;
    let u = solve_exact(spec, data, &sc)?;
    let (h, k) = (sc.h(), sc.k());
    let stride = (n / cfg.slices).max(1);
    let times: Vec<usize> = (0..=n).step_by(stride).collect();
    theta_grid
        .iter()
        .map(|&theta| {
            let mut sup = 0.0f64;
            for &j in &times {
                let mut sq = 0.0;
                for c in 0..spec.q() {
                    sq += h_theta_line(&u.time_slice(c, j), h, theta)?.powi(2);
                }
                sup = sup.max(sq.sqrt());
            }
            let mut d = 0.0;
            for c in 0..spec.q() {
                d += h_theta_line(&sample(&data.u0, c, h, n)?, h, theta)?.powi(2);
            }
            let mut b = 0.0;
            for c in 0..spec.nb() {
                b += h_theta_line(&sample(&data.g, c, k, n)?, k, theta)?.powi(2);
            }
            let den = d.sqrt() + b.sqrt();
            Ok(ConstantProbeRow {
                theta,
                constant: if den > 0.0 { sup / den } else { 0.0 },
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub spec: SystemSpec,
    pub data: DataTriple,
    /// Largest half-integer `s` on the sweep grid at which the solution is
    /// expected to stay bounded; infinite for smooth compatible data.
    pub effective_order: f64,
}

fn toy_entry(name: &'static str, u0: &str, g: &str, order: f64) -> CorpusEntry {
    CorpusEntry {
        name,
        spec: SystemSpec::toy(),
        data: DataTriple::closed(&[u0], &[g]).expect("corpus expression"),
        effective_order: order,
    }
}

/// Twelve triples whose effective orders cover `0, 1/2, ..., 5/2` and the
/// smooth case.
pub fn standard_corpus() -> Vec<CorpusEntry> {
    let diag = SystemSpec::from_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]], &[vec![0.0, 1.0]]).expect("diagonal system");
    vec![
        toy_entry("cutoff-vs-zero", "eta(x)", "0", 0.0),
        toy_entry("decay-half-mismatch", "exp(-x)", "0.5*exp(-t)", 0.0),
        toy_entry("root-0.3", "x^0.3*eta(x)", "0", 0.5),
        toy_entry("sine-plus-root-0.3", "sin(x) + x^0.3*eta(x)", "-sin(t)", 0.5),
        toy_entry("decay-pair", "exp(-x)", "exp(-t)", 1.0),
        CorpusEntry {
            name: "diagonal-decay",
            spec: diag,
            data: DataTriple::closed(&["exp(-x)", "exp(-x)"], &["exp(-t)"]).expect("corpus expression"),
            effective_order: 1.0,
        },
        toy_entry("power-1.3", "x^1.3*eta(x)", "0", 1.5),
        toy_entry("decay-plus-power-1.3", "exp(-x) + x^1.3*eta(x)", "exp(t)", 1.5),
        toy_entry("cosine-vs-one", "cos(x)", "1", 2.0),
        toy_entry("decay-vs-affine", "exp(-x)", "1 + t", 2.0),
        toy_entry("power-2.3", "x^2.3*eta(x)", "0", 2.5),
        toy_entry("sine-pair", "sin(x)", "-sin(t)", f64::INFINITY),
    ]
}

/// Regularity grid used with the standard corpus.
pub const STANDARD_S_GRID: [f64; 6] = [0.4, 0.5, 1.0, 1.5, 2.0, 2.5];

/// A toy triple `u0 = eta(x) sum a_j x^j`, `g = eta(t) sum b_j t^j` with
/// coefficients on a 1/8 lattice, so corner jets are exact.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomToyCase {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub data: DataTriple,
}

fn lattice(rng: &mut ChaCha8Rng, lo: i32, hi: i32) -> f64 {
    rng.random_range(lo..=hi) as f64 / 8.0
}

fn cut_polynomial(c: &[f64]) -> Expr {
    let mut p = Expr::zero();
    for (j, &cj) in c.iter().enumerate() {
        p = p + Expr::c(cj) * Expr::var().powf(j as f64);
    }
    p * Expr::var().eta(ETA_DEFAULT_FLAT, ETA_DEFAULT_END)
}

/// `count` toy triples of polynomial degree `degree`. Each one matches
/// `b_j = (-1)^j a_j` below a random index in `0..=degree + 1` and breaks it
/// there (when the index is within the degree).
pub fn random_toy_corpus(seed: u64, count: usize, degree: usize) -> Vec<RandomToyCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let r = rng.random_range(0..=degree + 1);
            let a: Vec<f64> = (0..=degree).map(|_| lattice(&mut rng, -16, 16)).collect();
            let b: Vec<f64> = (0..=degree)
                .map(|j| {
                    let matched = if j % 2 == 0 { a[j] } else { -a[j] };
                    if j < r {
                        matched
                    } else if j == r {
                        let kick = lattice(&mut rng, 4, 16);
                        if rng.random_bool(0.5) {
                            matched + kick
                        } else {
                            matched - kick
                        }
                    } else {
                        lattice(&mut rng, -16, 16)
                    }
                })
                .collect();
            let data = DataTriple {
                u0: DataFn::Closed(vec![cut_polynomial(&a)]),
                g: DataFn::Closed(vec![cut_polynomial(&b)]),
                f: ForcingSpec::zero(),
            };
            RandomToyCase { a, b, data }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::solve_toy;

    fn toy(u0: &str, g: &str) -> DataTriple {
        DataTriple::closed(&[u0], &[g]).unwrap()
    }

    #[test]
    fn zero_data_estimates() {
        let d = toy("0", "0");
        let u = solve_toy(&d.u0, &d.g, &SolveConfig::new(32, 32, 2.0, 2.0)).unwrap();
        for kind in [EstimateKind::Semigroup, EstimateKind::Resolvent] {
            let e = estimate_sides(&u, &d, 1.0, 0, kind).unwrap();
            assert_eq!((e.lhs, e.rhs, e.ratio, e.anomaly), (0.0, 0.0, 0.0, false));
        }
    }

    #[test]
    fn l2_kinds_reject_s() {
        let d = toy("0", "0");
        let u = solve_toy(&d.u0, &d.g, &SolveConfig::new(32, 32, 2.0, 2.0)).unwrap();
        assert!(estimate_sides(&u, &d, 1.0, 1, EstimateKind::Resolvent).is_err());
    }

    #[test]
    fn resolvent_sides_by_hand() {
        // u = e^{-(x - t)} would need growing data; take u0 = 0, g = 1:
        // u = 1 on x < t. Then |e^{-gt} u(0,.)|^2 = (1 - e^{-2gT}) / (2g).
        let d = toy("0", "1");
        let n = 256;
        let u = solve_toy(&d.u0, &d.g, &SolveConfig::new(n, n, 2.0, 2.0)).unwrap();
        let e = estimate_sides(&u, &d, 1.0, 0, EstimateKind::Resolvent).unwrap();
        let gsq = (1.0 - (-4.0f64).exp()) / 2.0;
        assert!((e.rhs - gsq).abs() < 1e-6, "{} vs {gsq}", e.rhs);
        assert!(e.lhs > gsq);
    }

    #[test]
    fn sweep_smooth_is_bounded() {
        let r = regularity_sweep(&SystemSpec::toy(), &toy("sin(x)", "-sin(t)"), &[0.5, 1.0, 2.5], 3).unwrap();
        assert!(r.classification.iter().all(|c| *c == Classification::Bounded), "{:?} {:?}", r.classification, r.slopes);
        assert!(r.predicted.iter().all(|c| *c == Classification::Bounded));
    }

    #[test]
    fn sweep_jump_threshold() {
        let r = regularity_sweep(&SystemSpec::toy(), &toy("eta(x)", "0"), &[0.4, 0.5], 4).unwrap();
        assert_eq!(r.classification, vec![Classification::Bounded, Classification::Divergent], "{:?}", r.slopes);
        assert_eq!(r.predicted, r.classification);
    }

    #[test]
    fn corpus_parses() {
        assert_eq!(standard_corpus().len(), 12);
    }
}
