use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("elliptic modulus out of range: k = {0} (need 0 <= k <= 1)")]
    ModulusOutOfRange(f64),
    #[error("complete elliptic integral diverges as k -> 1")]
    DivergentModulus,
    #[error("non-finite input in {0}")]
    NonFinite(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("step size underflow at t = {t} (h = {h}); stiffness or broken right-hand side")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("integrator exceeded {0} steps")]
    MaxStepsExceeded(usize),
    #[error("quadrature did not converge: requested abs tol {tol}, error estimate {reached}")]
    QuadratureDidNotConverge { tol: f64, reached: f64 },
    #[error("squared radius went negative ({value}) at t = {t}; inconsistent cone data")]
    NegativeRadius { value: f64, t: f64 },
    #[error("grid does not match the expected fundamental domain: {0}")]
    GridDomainMismatch(String),
    #[error("grid too coarse: need at least {min} nodes per direction, got {got}")]
    GridTooCoarse { min: usize, got: usize },
    #[error("m = {m}, n = {n} must be coprime with 1 <= m <= n")]
    BadTorusIndices { m: u32, n: u32 },
    #[error("link fails the Legendrian residual check (max {max_abs:.3e} > tol {tol:.3e}); refusing product construction")]
    LinkNotLegendrian { max_abs: f64, tol: f64 },
    #[error("target {target} outside the attainable range [{lo:.6}, {hi:.6}]")]
    TargetOutOfRange { target: f64, lo: f64, hi: f64 },
    #[error("root bracketing failed in {0}")]
    BracketingFailed(&'static str),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
