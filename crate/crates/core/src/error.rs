use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("matrix is singular (det = 0)")]
    SingularMatrix,

    #[error("matrix must be square with dimension {expected}, got {rows}x{cols}")]
    BadShape { expected: usize, rows: usize, cols: usize },

    #[error("eigenvalue of modulus {modulus} lies within {tolerance} of the unit circle")]
    NonHyperbolic { modulus: f64, tolerance: f64 },

    #[error("unstable dimension {unstable_dim} outside 1..={max}: map has no nontrivial splitting")]
    TrivialSplitting { unstable_dim: usize, max: usize },

    #[error("operation requires a one-dimensional {bundle} bundle, found dimension {dim}")]
    UnsupportedBundleDim { bundle: &'static str, dim: usize },

    #[error("eigen-decomposition residual {residual:e} exceeds {tolerance:e}")]
    EigenResidual { residual: f64, tolerance: f64 },

    #[error("Newton solve for inverse branch {branch} did not converge after {iterations} iterations (residual {residual:e}); perturbation too large")]
    NewtonDiverged { branch: usize, iterations: usize, residual: f64 },

    #[error("pre-histories truncated at different depths ({left} vs {right})")]
    DepthMismatch { left: usize, right: usize },

    #[error("branch {branch} out of range for degree {degree}")]
    BranchOutOfRange { branch: usize, degree: usize },

    #[error("enumeration of {count} pre-histories exceeds the cap {cap}; use sampling mode")]
    EnumerationCap { count: u128, cap: u128 },

    #[error("pre-history depth {depth} below required minimum {min}")]
    DepthTooShallow { depth: usize, min: usize },

    #[error("probe direction lies inside the stable cone (angle {angle} rad to the stable subspace)")]
    ProbeInStableCone { angle: f64 },

    #[error("linear product became ill-conditioned at step {step}; reduce depth")]
    IllConditioned { step: usize },

    #[error("direction field jumps by {angle} rad between integration stages; reduce the step size")]
    FieldDiscontinuity { angle: f64 },

    #[error("leaf segment has only {pairs} sample pairs with separation >= 1 (need {needed})")]
    ShortSegment { pairs: usize, needed: usize },

    #[error("map is not conservative: |det Df| = {found} at {point:?}, expected {expected}")]
    NotConservative { found: f64, expected: f64, point: Vec<f64> },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, LabError>;
