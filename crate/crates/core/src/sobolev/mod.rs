//! Sobolev-type norms with truncation diagnostics.

pub mod fourier;
pub mod fractional;
pub mod mollifier;
pub mod weighted;

pub use fourier::{fourier_hs_norm, hs_norm_2d, hs_norm_2d_periodic_x, hsdelta_norm};
pub use fractional::{gagliardo_seminorm, h1200_norm, hardy_integral};
pub use mollifier::{friedrichs_diagnostic, mollifier_equiv_norm, MollifierSpec};
pub use weighted::weighted_hs_gamma_norm;
