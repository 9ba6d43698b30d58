//! Exponentially weighted space-time norms `H^s_gamma` for integer `s`.

use crate::error::{Error, Result};
use crate::field::Field2D;
use crate::verdict::{NormResult, Verdict};

pub const WEIGHTED_S_MAX: usize = 3;

/// `sum_{|alpha| <= s} |e^{-gamma t} d^alpha u|_{L2}`. The truncation
/// sequence holds the partial sums over `|alpha| = 0, 1, ..., s`.
pub fn weighted_hs_gamma_norm(u: &Field2D, s: f64, gamma: f64) -> Result<NormResult> {
    if s.fract() != 0.0 || s < 0.0 || s > WEIGHTED_S_MAX as f64 {
        return Err(Error::InvalidParameter(format!(
            "weighted norm needs an integer order in 0..={WEIGHTED_S_MAX}, got {s}"
        )));
    }
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter(format!("gamma = {gamma} must be positive")));
    }
    let s = s as usize;
    let weight = |t: f64| (-2.0 * gamma * t).exp();
    // xs[a] = d_x^a u; each d_t^b applied on top.
    let mut xs = vec![u.clone()];
    for a in 1..=s {
        let next = xs[a - 1].dx();
        xs.push(next);
    }
    let mut by_order = vec![0.0; s + 1];
    for (a, fx) in xs.iter().enumerate() {
        let mut f = fx.clone();
        for b in 0..=(s - a) {
            if b > 0 {
                f = f.dt();
            }
            by_order[a + b] += f.weighted_l2_sq(weight).max(0.0).sqrt();
        }
    }
    let mut acc = 0.0;
    let seq: Vec<f64> = by_order
        .iter()
        .map(|v| {
            acc += v;
            acc
        })
        .collect();
    let finite = acc.is_finite();
    Ok(NormResult {
        value: acc,
        truncation_sequence: seq,
        verdict: if finite { Verdict::Finite } else { Verdict::Divergent },
        slope: 0.0,
    })
}
