//! Intrinsic fractional seminorms on a truncated half-line and the Hardy
//! weight that separates `H^{1/2}_{00}` from `H^{1/2}`.

use crate::error::{Error, Result};
use crate::grid::{l2_norm, quad_weights};
use crate::parallel;
use crate::verdict::{classify, NormResult, Verdict, FINITE_BELOW};

/// Finest Hardy cutoff, in grid steps.
pub const HARDY_MIN_STEPS: usize = 8;

/// `S(d) = sum_i w_i w_{i+d} (u_i - u_{i+d})^2` for `d = 0..=N` with
/// trapezoid weights. `S(0) = 0`.
pub fn pair_sums(u: &[f64], h: f64) -> Vec<f64> {
    let n = u.len();
    let mut w = vec![h; n];
    w[0] = h / 2.0;
    w[n - 1] = h / 2.0;
    parallel::map_range(n, |d| {
        if d == 0 {
            return 0.0;
        }
        (0..n - d)
            .map(|i| {
                let du = u[i] - u[i + d];
                w[i] * w[i + d] * du * du
            })
            .sum()
    })
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("theta = {theta} must lie in (0, 1)")))
    }
}

/// Gagliardo seminorm from precomputed pair sums. The truncation sequence
/// adds one octave of the diagonal distance at a time, largest distances
/// first, down to the excluded band `|x - y| < h / 2`.
pub fn gagliardo_from_pair_sums(s: &[f64], h: f64, theta: f64) -> Result<NormResult> {
    check_theta(theta)?;
    let n = s.len() - 1;
    if n == 0 {
        return Ok(NormResult::zero());
    }
    // Kernel averaged over the lag cell [(d - 1/2) h, (d + 1/2) h].
    let p = 1.0 + 2.0 * theta;
    let cell = |d: usize| {
        let d = d as f64;
        ((d - 0.5).powf(1.0 - p) - (d + 0.5).powf(1.0 - p)) / (p - 1.0) / h.powf(p)
    };
    let term = |d: usize| 2.0 * s[d] * cell(d);
    let top = usize::BITS - 1 - n.leading_zeros();
    let mut seq = Vec::with_capacity(top as usize + 1);
    let mut acc = 0.0;
    let mut hi = n + 1;
    for a in (0..=top).rev() {
        let lo = 1usize << a;
        acc += (lo..hi).map(term).sum::<f64>();
        seq.push(acc);
        hi = lo;
    }
    Ok(NormResult::from_sequence(acc.max(0.0).sqrt(), seq))
}

/// `( int int |u(x) - u(y)|^2 / |x - y|^{1 + 2 theta} dx dy )^{1/2}` over
/// `[0, X]^2`.
pub fn gagliardo_seminorm(u: &[f64], h: f64, theta: f64) -> Result<NormResult> {
    check_theta(theta)?;
    if u.len() < 2 {
        return Ok(NormResult::zero());
    }
    gagliardo_from_pair_sums(&pair_sums(u, h), h, theta)
}

/// `int_0^X u(x)^2 / x dx` with lower cutoffs halving from the largest
/// power-of-two multiple of `h` below `X / 2` down to `HARDY_MIN_STEPS h`.
/// When the partials converge a geometric tail is added to the value.
pub fn hardy_integral(u: &[f64], h: f64) -> NormResult {
    let n = u.len().saturating_sub(1);
    if u.iter().all(|&v| v == 0.0) {
        return NormResult::zero();
    }
    if u.iter().any(|v| !v.is_finite()) {
        return NormResult {
            value: f64::INFINITY,
            truncation_sequence: vec![f64::INFINITY],
            verdict: Verdict::Divergent,
            slope: crate::verdict::BLOWUP_SLOPE,
        };
    }
    if n < 4 * HARDY_MIN_STEPS {
        // Too coarse for any nested cutoff.
        let f: Vec<f64> = (1..=n).map(|i| u[i] * u[i] / (i as f64 * h)).collect();
        let v = crate::grid::integrate(&f, h);
        return NormResult {
            value: v,
            truncation_sequence: vec![v],
            verdict: Verdict::Inconclusive,
            slope: 0.0,
        };
    }
    let integrand = |i: usize| u[i] * u[i] / (i as f64 * h);
    let seg = |a: usize, b: usize| -> f64 {
        let w = quad_weights(b - a + 1, h);
        (a..=b).zip(&w).map(|(i, wi)| wi * integrand(i)).sum()
    };
    let mut cut = HARDY_MIN_STEPS;
    while cut * 2 <= n / 2 {
        cut *= 2;
    }
    let mut acc = seg(cut, n);
    let mut seq = vec![acc];
    while cut > HARDY_MIN_STEPS {
        let lo = cut / 2;
        acc += seg(lo, cut);
        seq.push(acc);
        cut = lo;
    }
    let (verdict, slope) = classify(&seq);
    let mut value = acc;
    if verdict == Verdict::Finite && seq.len() >= 3 {
        let k = seq.len();
        let last = seq[k - 1] - seq[k - 2];
        let prev = seq[k - 2] - seq[k - 3];
        if prev > 0.0 && last > 0.0 {
            let r = (last / prev).min(2f64.powf(FINITE_BELOW));
            value += last * r / (1.0 - r);
        }
    }
    NormResult {
        value,
        truncation_sequence: seq,
        verdict,
        slope,
    }
}

/// `( |u|_{1/2}^2 + |u|_{L^2}^2 + int u^2 / x )^{1/2}`; finite only when
/// every part is.
pub fn h1200_norm(u: &[f64], h: f64) -> NormResult {
    let g = gagliardo_seminorm(u, h, 0.5).expect("theta is valid");
    let l2 = l2_norm(u, h);
    let hardy = hardy_integral(u, h);
    let base = g.value * g.value + l2 * l2;
    let verdict = combine(&[g.verdict, hardy.verdict]);
    NormResult {
        value: (base + hardy.value).max(0.0).sqrt(),
        truncation_sequence: hardy.truncation_sequence.iter().map(|p| base + p).collect(),
        verdict,
        slope: g.slope.max(hardy.slope),
    }
}

/// Finite if all are, divergent if any is, inconclusive otherwise.
pub fn combine(vs: &[Verdict]) -> Verdict {
    if vs.contains(&Verdict::Divergent) {
        Verdict::Divergent
    } else if vs.iter().all(|v| *v == Verdict::Finite) {
        Verdict::Finite
    } else {
        Verdict::Inconclusive
    }
}
