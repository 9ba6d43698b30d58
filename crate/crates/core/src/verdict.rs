//! Membership verdicts from truncation sequences.
//!
//! A truncated integral `P_j` is evaluated at nested cutoffs that shrink by a
//! factor two per step (lower limits, diagonal bands, frequency octaves or
//! grid levels). The statistic is the growth exponent `sigma` of the
//! per-octave increments `P_j - P_{j-1} ~ 2^{sigma j}`, fitted by least
//! squares over the last few increments:
//!
//! * `sigma < FINITE_BELOW`: geometric decay, the limit exists.
//! * `sigma > DIVERGENT_ABOVE`: constant or growing increments, which covers
//!   logarithmic divergence (`sigma = 0`) as well as power blow-up.
//! * otherwise inconclusive.

use std::fmt;

use serde::{Deserialize, Serialize};

pub const FINITE_BELOW: f64 = -0.1;
pub const DIVERGENT_ABOVE: f64 = -0.05;
/// Increments are fitted over at most this many trailing octaves.
pub const FIT_WINDOW: usize = 4;
/// A last increment this small relative to the total counts as converged.
pub const CONVERGED_REL: f64 = 1e-12;
/// Reported exponent when the sequence is exactly stationary.
pub const STATIONARY_SLOPE: f64 = -50.0;
/// Reported exponent when a partial value is not finite.
pub const BLOWUP_SLOPE: f64 = 50.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Finite,
    Divergent,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Finite => "finite",
            Verdict::Divergent => "divergent",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormResult {
    pub value: f64,
    /// Partial values of the (squared, for norms) integral at nested cutoffs.
    pub truncation_sequence: Vec<f64>,
    pub verdict: Verdict,
    pub slope: f64,
}

impl NormResult {
    pub fn zero() -> Self {
        NormResult {
            value: 0.0,
            truncation_sequence: vec![0.0],
            verdict: Verdict::Finite,
            slope: STATIONARY_SLOPE,
        }
    }

    pub fn from_sequence(value: f64, truncation_sequence: Vec<f64>) -> Self {
        let (verdict, slope) = classify(&truncation_sequence);
        NormResult {
            value,
            truncation_sequence,
            verdict,
            slope,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.verdict == Verdict::Finite
    }
}

/// Least-squares slope of `ys` against `0, 1, 2, ...`.
pub fn fit_slope(ys: &[f64]) -> f64 {
    let n = ys.len() as f64;
    if ys.len() < 2 {
        return 0.0;
    }
    let mx = (n - 1.0) / 2.0;
    let my = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, y) in ys.iter().enumerate() {
        let dx = i as f64 - mx;
        num += dx * (y - my);
        den += dx * dx;
    }
    num / den
}

/// Verdict and increment exponent of a truncation sequence. A sequence
/// whose last step went down is never called divergent.
pub fn classify(seq: &[f64]) -> (Verdict, f64) {
    if seq.iter().any(|v| !v.is_finite()) {
        return (Verdict::Divergent, BLOWUP_SLOPE);
    }
    let Some(&last) = seq.last() else {
        return (Verdict::Inconclusive, 0.0);
    };
    let inc: Vec<f64> = seq.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let scale = seq.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tiny = CONVERGED_REL * scale;
    match inc.last() {
        None => {
            if last == 0.0 {
                (Verdict::Finite, STATIONARY_SLOPE)
            } else {
                (Verdict::Inconclusive, 0.0)
            }
        }
        Some(&d) if d <= tiny => (Verdict::Finite, STATIONARY_SLOPE),
        Some(_) => {
            let tail = &inc[inc.len().saturating_sub(FIT_WINDOW)..];
            if tail.len() < 2 {
                return (Verdict::Inconclusive, 0.0);
            }
            let floor = tiny.max(f64::MIN_POSITIVE);
            let logs: Vec<f64> = tail.iter().map(|d| d.max(floor).log2()).collect();
            let sigma = fit_slope(&logs);
            let verdict = if sigma < FINITE_BELOW {
                Verdict::Finite
            } else if sigma > DIVERGENT_ABOVE && seq[seq.len() - 1] > seq[seq.len() - 2] {
                Verdict::Divergent
            } else {
                Verdict::Inconclusive
            };
            (verdict, sigma)
        }
    }
}
