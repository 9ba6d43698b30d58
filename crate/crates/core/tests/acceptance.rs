//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Every tolerance and budget is a constant below.

use std::time::{Duration, Instant};

use ibvp_lab::compat::{compat_report, DataFn, DataTriple};
use ibvp_lab::grid::LineSamples;
use ibvp_lab::harness::{
    estimate_sides, random_toy_corpus, regularity_sweep, regularity_sweep_with, standard_corpus, Classification,
    EstimateKind, SweepConfig, STANDARD_S_GRID,
};
use ibvp_lab::lifting::{lift_operator_probe, lift_rm_plane, synthesize_compatible_data, DEFAULT_SUPPORT_END};
use ibvp_lab::solver::{solve, solve_toy, SolveConfig};
use ibvp_lab::sobolev::{fourier_hs_norm, gagliardo_seminorm, h1200_norm, hardy_integral, hsdelta_norm};
use ibvp_lab::sobolev::{mollifier_equiv_norm, MollifierSpec};
use ibvp_lab::system::SystemSpec;
use ibvp_lab::Verdict;

const TOY_TOL: f64 = 1e-12;
const TOY_N: usize = 512;
const TOY_BUDGET: Duration = Duration::from_secs(1);

const CC_SEED: u64 = 2024;
const CC_COUNT: usize = 20;
const CC_DEGREE: usize = 5;
const CC_S_MAX: f64 = 5.0;

const HALF_LEVELS: usize = 4;
const HALF_BUDGET: Duration = Duration::from_secs(120);

const TRACE_TOL: f64 = 1e-6;
const SMALLNESS_TOL: f64 = 0.2;

const GAMMAS: [f64; 4] = [1.0, 2.0, 4.0, 8.0];
/// Largest admitted `max_gamma ratio / ratio(gamma = 1)`.
const GAMMA_SPREAD: f64 = 1.5;
const REFINE_TOL: f64 = 0.1;

const DELTAS: [f64; 4] = [1.0, 0.25, 1.0 / 16.0, 1.0 / 64.0];
const CHECK_DELTAS: [f64; 3] = [0.5, 0.125, 1.0 / 32.0];
const ENVELOPE_TOL: f64 = 0.1;
const LIMIT_DELTA: f64 = 1.0 / 4096.0;
const LIMIT_TOL: f64 = 1e-3;

const SWEEP_MAX_INCONCLUSIVE: usize = 2;
const SWEEP_BUDGET: Duration = Duration::from_secs(600);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn eta(x: f64) -> f64 {
    ibvp_lab::expr::eta(x, 0.5, 1.5)
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// 1. The solver reproduces the piecewise closed form at every grid point.
fn toy_exactness() -> Outcome {
    type F = fn(f64) -> f64;
    let cases: [(&str, &str, F, F); 3] = [
        ("sin(x)", "-sin(t)", |x| x.sin(), |t| -t.sin()),
        ("exp(-x)", "0.5*exp(-t)", |x| (-x).exp(), |t| 0.5 * (-t).exp()),
        ("eta(x)", "0", eta, |_| 0.0),
    ];
    let cfg = SolveConfig::new(TOY_N, TOY_N, 2.0, 2.0);
    let mut worst = 0.0f64;
    let mut slowest = Duration::ZERO;
    for (us, gs, u0, g) in cases {
        let d = DataTriple::closed(&[us], &[gs]).unwrap();
        let t0 = Instant::now();
        let u = solve_toy(&d.u0, &d.g, &cfg).unwrap();
        slowest = slowest.max(t0.elapsed());
        for j in 0..=TOY_N {
            for i in 0..=TOY_N {
                let (x, t) = (i as f64 * cfg.h(), j as f64 * cfg.k());
                let want = if x >= t { u0(x - t) } else { g(t - x) };
                worst = worst.max((u.get(0, i, j) - want).abs());
            }
        }
    }
    outcome(
        worst <= TOY_TOL && slowest < TOY_BUDGET,
        format!("max error {worst:.2e} (tol {TOY_TOL:e}), slowest solve {slowest:.2?} at {TOY_N}x{TOY_N}"),
    )
}

/// 2. Verified order equals the index of the first broken relation
///    `u0^(j)(0) = (-1)^j g^(j)(0)`, found from symbolic jets.
fn toy_compat_equivalence() -> Outcome {
    let corpus = random_toy_corpus(CC_SEED, CC_COUNT, CC_DEGREE);
    let spec = SystemSpec::toy();
    let mut wrong = vec![];
    for (n, case) in corpus.iter().enumerate() {
        let (DataFn::Closed(u0), DataFn::Closed(g)) = (&case.data.u0, &case.data.g) else {
            unreachable!()
        };
        let ju = u0[0].jet(0.0, CC_DEGREE + 1).unwrap();
        let jg = g[0].jet(0.0, CC_DEGREE + 1).unwrap();
        let first_broken = (0..=CC_DEGREE + 1)
            .find(|&j| {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                (ju[j] - sign * jg[j]).abs() > 1e-9 * (1.0 + ju[j].abs())
            })
            .unwrap_or(CC_DEGREE + 2);
        let want = (first_broken as f64).min(CC_S_MAX);
        let got = compat_report(&spec, &case.data, CC_S_MAX).unwrap().verified_order;
        if got != want {
            wrong.push(format!("#{n}: {got} vs {want}"));
        }
    }
    outcome(
        wrong.is_empty(),
        format!("{}/{CC_COUNT} exact (seed {CC_SEED}) {}", CC_COUNT - wrong.len(), wrong.join(", ")),
    )
}

/// 3. `u0 = eta`, `g = 0`: data in H^{1/2} but not globally compatible;
///    the solution is divergent at s = 1/2 and bounded at s = 0.4.
fn half_integer_discriminator() -> Outcome {
    let spec = SystemSpec::toy();
    let d = DataTriple::closed(&["eta(x)"], &["0"]).unwrap();
    let h = 2.0 / 2048.0;
    let u0: Vec<f64> = (0..=2048).map(|i| eta(i as f64 * h)).collect();
    let data_half = gagliardo_seminorm(&u0, h, 0.5).unwrap().verdict;
    let mismatch = h1200_norm(&u0, h).verdict;
    let t0 = Instant::now();
    let r = regularity_sweep(&spec, &d, &[0.4, 0.5], HALF_LEVELS).unwrap();
    let dt = t0.elapsed();
    let pass = data_half == Verdict::Finite
        && mismatch == Verdict::Divergent
        && r.compat_order == 0.0
        && r.classification == [Classification::Bounded, Classification::Divergent]
        && dt < HALF_BUDGET;
    outcome(
        pass,
        format!(
            "data H^1/2 {data_half:?}, H^1/2_00 of u0 - g {mismatch:?}, s=0.4 {} (slope {:.3}), s=0.5 {} (slope {:.3}), {dt:.1?}",
            r.classification[0], r.slopes[0], r.classification[1], r.slopes[1]
        ),
    )
}

/// 4. Hardy verdicts on `x^alpha eta(x)`.
fn hardy_power_law() -> Outcome {
    let n = 1 << 14;
    let h = 2.0 / n as f64;
    let mut right = 0;
    let mut notes = vec![];
    for (alpha, finite) in [(0.1, true), (0.3, true), (1.0, true), (-0.2, false), (0.0, false)] {
        let u: Vec<f64> = (0..=n)
            .map(|i| {
                let x = i as f64 * h;
                if i == 0 && alpha < 0.0 {
                    0.0
                } else {
                    x.powf(alpha) * eta(x)
                }
            })
            .collect();
        let r = hardy_integral(&u, h);
        let want = if finite { Verdict::Finite } else { Verdict::Divergent };
        if r.verdict == want {
            right += 1;
        }
        notes.push(format!("{alpha}: {:?}", r.verdict));
    }
    outcome(right == 5, format!("{right}/5 correct [{}]", notes.join(", ")))
}

fn gauss(a: f64) -> LineSamples {
    LineSamples::from_fn(-16.0, 16.0, 256, |x| (-a * x * x).exp())
}

/// 5. Trace identities of `R_m` and the lambda-smallness rate.
fn lifting_traces() -> Outcome {
    let corpus = [gauss(0.5), gauss(1.0), gauss(4.0)];
    let mut worst = 0.0f64;
    for g in &corpus {
        let scale = g.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for m in 0..=2 {
            let p = lift_rm_plane(g, m, 2.0, DEFAULT_SUPPORT_END).unwrap();
            for j in 0..=m + 1 {
                let d = p.time_jet(j).unwrap();
                let e = (0..g.values.len()).fold(0.0f64, |e, i| {
                    let want = if j == m { g.values[i] } else { 0.0 };
                    e.max((d[i] - want).abs())
                });
                worst = worst.max(e / scale);
            }
        }
    }
    let mut ratio_err = 0.0f64;
    let tests = [gauss(1.0), gauss(4.0)];
    for m in 0..=2usize {
        for r in [0.0, 0.5, 1.0] {
            let target = 2f64.powf(-(m as f64 - r) - 0.5);
            let p: Vec<f64> = [4.0, 8.0, 16.0]
                .iter()
                .map(|&l| lift_operator_probe(&tests, m, l, r).unwrap())
                .collect();
            for w in p.windows(2) {
                ratio_err = ratio_err.max(rel_err(w[1] / w[0], target));
            }
        }
    }
    outcome(
        worst <= TRACE_TOL && ratio_err <= SMALLNESS_TOL,
        format!("worst relative trace error {worst:.2e}, worst doubling-ratio deviation {:.2}%", 100.0 * ratio_err),
    )
}

/// 6. Synthesis raises the verified order, shrinks with lambda and is
///    idempotent.
fn data_synthesis() -> Outcome {
    let corpus = standard_corpus();
    let mut notes = vec![];
    let mut pass = true;
    let mut cases = 0;
    for (k, m) in [(1usize, 3usize), (2, 4)] {
        for e in corpus.iter().filter(|e| e.effective_order == k as f64) {
            cases += 1;
            let mut changes = vec![];
            for lambda in [2.0, 4.0, 8.0] {
                let syn = synthesize_compatible_data(&e.spec, &e.data, k, m, lambda).unwrap();
                let v = compat_report(&e.spec, &syn.data, m as f64).unwrap().verified_order;
                let again = synthesize_compatible_data(&e.spec, &syn.data, k, m, lambda).unwrap();
                let idem = again.corrections.is_empty() && again.data == syn.data;
                if v < m as f64 || !idem {
                    pass = false;
                    notes.push(format!("{} lambda {lambda}: verified {v}, idempotent {idem}", e.name));
                }
                changes.push(syn.change_h1);
            }
            if !(changes[0] > changes[1] && changes[1] > changes[2]) {
                pass = false;
                notes.push(format!("{}: change not decreasing {changes:?}", e.name));
            }
        }
    }
    pass &= cases >= 4;
    outcome(pass, format!("{cases} triples, (k, m) in {{(1,3), (2,4)}} {}", notes.join("; ")))
}

/// 7. Estimate ratios stay bounded in gamma and stable under refinement.
fn estimate_boundedness() -> Outcome {
    let toy = SystemSpec::toy();
    let diag = SystemSpec::from_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]], &[vec![0.0, 1.0]]).unwrap();
    let corpus: Vec<(SystemSpec, DataTriple)> = vec![
        (toy.clone(), DataTriple::closed(&["sin(x)"], &["-sin(t)"]).unwrap()),
        (toy.clone(), DataTriple::closed(&["exp(-x)"], &["exp(-t)"]).unwrap()),
        (toy.clone(), DataTriple::closed(&["exp(-x)*sin(x)"], &["0"]).unwrap()),
        (toy, DataTriple::closed(&["x*exp(-x)"], &["t*exp(-t)"]).unwrap()),
        (diag, DataTriple::closed(&["exp(-x)", "exp(-x)"], &["exp(-t)"]).unwrap()),
    ];
    let kinds = [
        (EstimateKind::Semigroup, 0),
        (EstimateKind::Resolvent, 0),
        (EstimateKind::WeightedResolvent, 1),
    ];
    let mut spread = 0.0f64;
    let mut drift = 0.0f64;
    let mut finite = true;
    for (spec, d) in &corpus {
        let fields: Vec<_> = [128, 256]
            .iter()
            .map(|&n| solve(spec, d, &SolveConfig::new(n, n, 4.0, 4.0)).unwrap())
            .collect();
        for (kind, s) in kinds {
            let ratios: Vec<Vec<f64>> = fields
                .iter()
                .map(|u| GAMMAS.iter().map(|&g| estimate_sides(u, d, g, s, kind).unwrap().ratio).collect())
                .collect();
            for level in &ratios {
                finite &= level.iter().all(|r| r.is_finite() && *r > 0.0);
                let top = level.iter().fold(0.0f64, |m, r| m.max(*r));
                spread = spread.max(top / level[0]);
            }
            for (a, b) in ratios[0].iter().zip(&ratios[1]) {
                drift = drift.max(rel_err(*b, *a));
            }
        }
    }
    outcome(
        finite && spread <= GAMMA_SPREAD && drift <= REFINE_TOL,
        format!(
            "{} triples x 3 kinds: max ratio / ratio(gamma=1) {spread:.3} (limit {GAMMA_SPREAD}), refinement drift {:.2}%",
            corpus.len(),
            100.0 * drift
        ),
    )
}

/// 8. Mollifier norm against `H^{s,delta}`: one envelope for all delta, and
///    `H^{s,delta}` increasing to `H^{s+1}`.
fn norm_envelope() -> Outcome {
    let corpus = [
        LineSamples::from_fn(-16.0, 16.0, 1024, |x| (-x * x).exp()),
        LineSamples::from_fn(-16.0, 16.0, 1024, |x| (-0.5 * x * x).exp() * (3.0 * x).cos()),
        LineSamples::from_fn(-16.0, 16.0, 1024, |x| 1.0 / (x * x * 0.25 + 1.0).powi(6)),
    ];
    let mut notes = vec![];
    let mut pass = true;
    for s in [0.0, 0.5, 1.0] {
        let rho = MollifierSpec::for_order(s);
        let ratio = |v: &LineSamples, d: f64| {
            mollifier_equiv_norm(v, s, d, &rho).unwrap().value / hsdelta_norm(v, s, d).unwrap().value
        };
        let cal: Vec<f64> = corpus.iter().flat_map(|v| DELTAS.iter().map(move |&d| (v, d))).map(|(v, d)| ratio(v, d)).collect();
        let c = cal.iter().cloned().fold(f64::INFINITY, f64::min);
        let big_c = cal.iter().cloned().fold(0.0f64, f64::max);
        for v in &corpus {
            for &d in &CHECK_DELTAS {
                let r = ratio(v, d);
                if r < c * (1.0 - ENVELOPE_TOL) || r > big_c * (1.0 + ENVELOPE_TOL) {
                    pass = false;
                    notes.push(format!("s={s} delta={d}: {r:.3} outside [{c:.3}, {big_c:.3}]"));
                }
            }
            let mut prev = 0.0;
            for d in [1.0, 0.25, 1.0 / 16.0, 1.0 / 64.0, 1.0 / 256.0, LIMIT_DELTA] {
                let n = hsdelta_norm(v, s, d).unwrap().value;
                if n < prev {
                    pass = false;
                    notes.push(format!("s={s}: not increasing at delta={d}"));
                }
                prev = n;
            }
            let limit = fourier_hs_norm(v, s + 1.0).unwrap().value;
            if rel_err(prev, limit) > LIMIT_TOL {
                pass = false;
                notes.push(format!("s={s}: {prev} vs H^(s+1) {limit}"));
            }
        }
        notes.push(format!("s={s} envelope [{c:.3}, {big_c:.3}]"));
    }
    outcome(pass, notes.join("; "))
}

/// 9. The standard corpus sweep agrees with the predicted classification.
fn corpus_sweep() -> Outcome {
    let t0 = Instant::now();
    let cfg = SweepConfig::default();
    let mut mismatches = vec![];
    let mut inconclusive = vec![];
    let mut cells = 0;
    for e in standard_corpus() {
        let r = regularity_sweep_with(&e.spec, &e.data, &STANDARD_S_GRID, 4, &cfg).unwrap();
        for (i, m) in r.matches().into_iter().enumerate() {
            cells += 1;
            match m {
                Some(true) => {}
                Some(false) => mismatches.push(format!("{} s={}", e.name, r.s[i])),
                None => inconclusive.push(format!("{} s={}", e.name, r.s[i])),
            }
        }
    }
    let dt = t0.elapsed();
    outcome(
        mismatches.is_empty() && inconclusive.len() <= SWEEP_MAX_INCONCLUSIVE && dt < SWEEP_BUDGET,
        format!(
            "{cells} cells, mismatches [{}], inconclusive [{}], {dt:.1?}",
            mismatches.join(", "),
            inconclusive.join(", ")
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("toy exactness", toy_exactness),
        ("compatibility equivalence", toy_compat_equivalence),
        ("half-integer discriminator", half_integer_discriminator),
        ("hardy power law", hardy_power_law),
        ("lifting traces", lifting_traces),
        ("data synthesis", data_synthesis),
        ("estimate boundedness", estimate_boundedness),
        ("norm envelope", norm_envelope),
        ("corpus sweep", corpus_sweep),
    ];
    let mut failed = 0;
    for (n, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!("criterion {} ({name}): {} - {}", n + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if failed > 0 {
        println!("{failed} criterion/criteria failed");
        std::process::exit(1);
    }
}
