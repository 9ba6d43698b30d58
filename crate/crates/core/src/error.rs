use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("window too small: {0}")]
    WindowTooSmall(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("jet underflow at order {order}")]
    JetUnderflow { order: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("not hyperbolic: eigenvalue {re} + {im}i is not real")]
    NotHyperbolic { re: f64, im: f64 },

    #[error("not diagonalizable: eigenvalue {0} has a deficient eigenspace")]
    NotDiagonalizable(f64),

    #[error("characteristic boundary: min |eigenvalue| = {0:e}")]
    Characteristic(f64),

    #[error("boundary condition count mismatch: {conditions} conditions for {incoming} incoming modes")]
    CountMismatch { conditions: usize, incoming: usize },

    #[error("Lopatinskii failure: B restricted to the incoming space has cond {cond:e}")]
    Lopatinskii { cond: f64 },

    #[error("{0} data horizon exceeded")]
    HorizonExceeded(&'static str),

    #[error("lower-order CC violated at order {0}")]
    LowerOrderViolated(usize),

    #[error("corner data incompatible at order {0}")]
    CornerIncompatible(f64),

    #[error("aliasing: spectral tail {tail:e} exceeds {limit:e} of peak")]
    Aliasing { tail: f64, limit: f64 },

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command line front-end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. }
            | Error::Config(_)
            | Error::Json(_)
            | Error::Io(_)
            | Error::InvalidParameter(_) => 1,
            Error::JetUnderflow { .. }
            | Error::Dimension(_)
            | Error::HorizonExceeded(_)
            | Error::LowerOrderViolated(_)
            | Error::CornerIncompatible(_) => 2,
            Error::NotHyperbolic { .. }
            | Error::NotDiagonalizable(_)
            | Error::Characteristic(_)
            | Error::CountMismatch { .. }
            | Error::Lopatinskii { .. } => 3,
            Error::WindowTooSmall(_) | Error::Aliasing { .. } => 4,
        }
    }
}
