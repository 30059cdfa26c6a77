use thiserror::Error;

/// Errors raised by grid construction, spectral operators and the solver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("fields are defined on different grids")]
    GridMismatch,

    #[error("expected {expected} components, found {found}")]
    ComponentMismatch { expected: usize, found: usize },

    #[error("invalid Lebesgue exponent p = {0}")]
    InvalidExponent(f64),

    #[error("invalid Besov index: {0}")]
    InvalidIndex(String),

    #[error("grid too coarse: {0}")]
    Resolution(String),

    #[error("spectral support violation: {0}")]
    SupportViolation(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid solver configuration: {0}")]
    SolverConfig(String),

    #[error("CFL violation at t = {t}: dt = {dt} exceeds limit {limit}")]
    Cfl { t: f64, dt: f64, limit: f64 },

    #[error("blow-up or instability at t = {t}")]
    BlowUp { t: f64 },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("invalid perturbation parameters: {0}")]
    Perturbation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
