use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum NhqcError {
    #[error("matrix is not Hermitian: max |M - M^dagger| = {defect:.3e} exceeds {tolerance:.1e}")]
    NotHermitian { defect: f64, tolerance: f64 },

    #[error("matrix dimensions do not match: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("integration produced a non-finite value at step {step} (t = {t})")]
    NonFinite { step: usize, t: f64 },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("time {t} lies outside the schedule [0, {total}]")]
    TimeOutOfRange { t: f64, total: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("positivity violated at step {step}: minimum eigenvalue {min_eigenvalue:.3e}")]
    PositivityViolation { step: usize, min_eigenvalue: f64 },

    #[error("frame is not orthonormal: defect {defect:.3e} at t = {t}")]
    FrameDefect { defect: f64, t: f64 },

    #[error("accumulated holonomy is not unitary: defect {defect:.3e}")]
    NonUnitaryHolonomy { defect: f64 },

    #[error("ill-conditioned fit: {0}")]
    IllConditionedFit(String),

    #[error("unknown scheme '{0}'; valid schemes: sl, ss, ps, c, dc, to, s, cdd, sta, dfs3")]
    UnknownScheme(String),

    #[error("golden data: {0}")]
    Golden(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for NhqcError {
    fn from(e: std::io::Error) -> Self {
        NhqcError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, NhqcError>;
