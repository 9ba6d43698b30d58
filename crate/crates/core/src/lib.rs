pub mod compat;
pub mod config;
pub mod error;
pub mod expr;
pub mod field;
pub mod grid;
pub mod harness;
pub mod io;
pub mod lifting;
pub mod parallel;
pub mod series;
pub mod solver;
pub mod sobolev;
pub mod system;
pub mod verdict;

pub use error::{Error, Result};
pub use expr::Expr;
pub use field::Field2D;
pub use grid::{BoundarySignal, HalfLineSamples, LineSamples, SampledHalfLine};
pub use verdict::{NormResult, Verdict};
