use thiserror::Error;

/// Errors raised by the solver, diagnostics and verifiers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LandauError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("{field} = {value} is out of range: {field} must lie in {interval}")]
    OutOfRange {
        field: &'static str,
        value: f64,
        interval: &'static str,
    },

    #[error("kernel direction undefined at z = 0")]
    SingularPoint,

    #[error("field lives on a different grid than the kernel tables")]
    GridMismatch,

    #[error("field length {got} does not match grid size {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("adaptive cell quadrature did not converge within depth {depth} at offset {offset:?}")]
    QuadratureDiverged { depth: u32, offset: [i64; 3] },

    #[error("non-finite value in collision operator at step {step} (t = {t})")]
    NonFinite { step: usize, t: f64 },

    #[error("need at least {needed} records, got {got}")]
    InsufficientRecords { needed: usize, got: usize },

    #[error("unknown beta function '{0}' (expected xlogx_shift or power_<p>)")]
    UnknownBeta(String),

    #[error("zero denominator in {0}")]
    ZeroDenominator(&'static str),

    #[error("time stamps are not strictly increasing at record {0}")]
    NonMonotoneTime(usize),

    #[error("invalid initial condition: {0}")]
    InvalidInitialCondition(String),
}

pub type Result<T> = std::result::Result<T, LandauError>;

pub(crate) fn check_range(
    field: &'static str,
    value: f64,
    interval: &'static str,
    ok: bool,
) -> Result<()> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(LandauError::OutOfRange {
            field,
            value,
            interval,
        })
    }
}
