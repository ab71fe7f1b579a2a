use thiserror::Error;

use crate::windows::WindowKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("window length must be odd and at least 3, got {0}")]
    WindowLength(usize),

    #[error("invalid window parameter {name} = {value}: {reason}")]
    WindowParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("chebyshev synthesis left an imaginary residue of {0:e} relative to the peak")]
    ChebyshevResidue(f64),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("invalid design grid: {0}")]
    Grid(String),

    #[error("{0} has no closed-form group delay; use the numerical path")]
    NoClosedForm(WindowKind),

    #[error("window has zero total energy")]
    ZeroEnergy,

    #[error("time {t:e} s lies outside the pulse [{lo:e}, {hi:e}]")]
    TimeOutOfRange { t: f64, lo: f64, hi: f64 },

    #[error("signal needs at least 2 samples, got {0}")]
    SignalTooShort(usize),

    #[error("invalid optimizer configuration: {0}")]
    Optimizer(String),

    #[error("invalid run configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
