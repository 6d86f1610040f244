use thiserror::Error;

/// Errors raised by the numerical operations of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension {0}: only 1 and 2 are supported")]
    InvalidDimension(usize),
    #[error("invalid model parameter: {0}")]
    InvalidModel(String),
    #[error("window too small: reference slope misses the polytope by {gap:.3e} (> {tol:.1e})")]
    WindowTooSmall { gap: f64, tol: f64 },
    #[error("grid mismatch: object belongs to a different model")]
    GridMismatch,
    #[error("length mismatch: expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite value at node {0}")]
    NonFinite(usize),
    #[error("obstacle is +infinity at every node")]
    AllInfinite,
    #[error("empty compact set")]
    EmptySet,
    #[error("mixed Monge-Ampere cell {node} is negative ({value:.3e}); grid too coarse")]
    PolarizationNegativity { node: usize, value: f64 },
    #[error("potential does not have full Monge-Ampere mass (boundary atoms {atoms:.3e})")]
    NotFullMass { atoms: f64 },
    #[error("measure charges the window boundary (atoms {atoms:.3e})")]
    MeasureTouchesBoundary { atoms: f64 },
    #[error("measure mass {mass} differs from 1")]
    MassNotOne { mass: f64 },
    #[error("negative mass {value:.3e} at node {node}")]
    NegativeMass { node: usize, value: f64 },
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("operation requires the anticanonical (degree 2, n = 1) model")]
    WrongDegree,
    #[error("operation is only implemented for n = 1")]
    OneDimensionalOnly,
    #[error("Hermitian form is not positive definite")]
    NotPositiveDefinite,
    #[error("Hermitian form is not radial (diagonal)")]
    NotRadial,
    #[error("Gram quadrature underflow: every entry below 1e-300")]
    QuadratureUnderflow,
    #[error("setting/model mismatch: {0}")]
    SettingMismatch(String),
    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
    #[error("evaluation point {0} lies outside the window")]
    OutsideWindow(f64),
    #[error("measure is not compactly supported in the window")]
    NonCompactSupport,
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
