use thiserror::Error;

/// Errors raised by the library. The CLI maps these onto exit codes.
#[derive(Debug, Error)]
pub enum EscError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("rational overflow while combining multipliers {0} and {1}")]
    RationalOverflow(String, String),

    #[error("weights are outside the unit simplex: {0}")]
    Simplex(String),

    #[error("synthesis infeasible: min slack {slack:.3e} at {worst_block}")]
    Infeasible { slack: f64, worst_block: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("state left the finite range at t = {time:.6} s")]
    BlowUp { time: f64 },

    #[error("initial state outside the certified ellipsoid (V = {value:.4} > 1)")]
    OutsideRegion { value: f64 },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, EscError>;
