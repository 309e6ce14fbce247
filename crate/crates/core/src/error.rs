//! Error types shared across the crate.

use thiserror::Error;

/// Errors from grid/field construction and spectral operations.
#[derive(Debug, Error)]
pub enum FieldError {
    #[error("complex dimension must be 1 or 2, got {0}")]
    BadDimension(usize),
    #[error("grid size must be a power of two in [4, 8192], got {0}")]
    BadGridSize(usize),
    #[error("value buffer has length {got}, geometry needs {want}")]
    LengthMismatch { got: usize, want: usize },
    #[error("non-finite value {value} at grid index {index} (multi-index {multi:?})")]
    NonFinite {
        index: usize,
        multi: Vec<usize>,
        value: f64,
    },
    #[error("geometries differ: {0}")]
    GeometryMismatch(String),
    #[error("Fourier cutoff {cutoff} out of range [0, {max}]")]
    BadCutoff { cutoff: usize, max: usize },
    #[error("Hölder exponent must lie in (0, 1), got {0}")]
    BadHolderExponent(f64),
    #[error("tensor rank mismatch: expected {expected}, got {got}")]
    RankMismatch { expected: usize, got: usize },
    #[error("tensor declared Hermitian but asymmetry {asymmetry:.3e} exceeds tolerance {tol:.3e} at grid index {index}")]
    NotHermitian {
        index: usize,
        asymmetry: f64,
        tol: f64,
    },
    #[error("trig term wave vector has {got} entries, geometry needs {want}")]
    BadWaveVector { got: usize, want: usize },
    #[error("trig term mode {mode} at or above Nyquist ({nyquist}) for this grid")]
    ModeAboveNyquist { mode: i32, nyquist: i32 },
}

/// Errors from Kähler metric construction.
#[derive(Debug, Error)]
pub enum MetricError {
    #[error("metric not positive definite: min eigenvalue {value:.6e} at grid index {index} (multi-index {multi:?}), floor {floor:.1e}")]
    NotPositive {
        index: usize,
        multi: Vec<usize>,
        value: f64,
        floor: f64,
    },
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Hard failures of the elliptic solvers (non-convergence is reported in the
/// `EllipticReport`, not here).
#[derive(Debug, Error)]
pub enum SolveError {
    #[error("right-hand side density must be strictly positive, found {value:.6e} at grid index {index}")]
    NonPositiveDensity { index: usize, value: f64 },
    #[error("backtracking could not restore metric positivity after {halvings} halvings (Newton iteration {iter})")]
    ConeExit { iter: usize, halvings: usize },
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Errors from monitor evaluation.
#[derive(Debug, Error)]
pub enum MonitorError {
    #[error("snapshot {index} has no interior neighbors for central time differencing")]
    BoundarySnapshot { index: usize },
    #[error("snapshots around {index} are unevenly spaced ({left:.6e} vs {right:.6e})")]
    UnevenSpacing { index: usize, left: f64, right: f64 },
    #[error("monitor requires t > 0, state is at t = {0}")]
    NonPositiveTime(f64),
}

/// Failures of the parabolic flow integrator.
#[derive(Debug, Error)]
pub enum FlowError {
    #[error("positivity breakdown at t = {t:.6e}: min eigenvalue {min_eig:.6e} after {halvings} step halvings")]
    PositivityBreakdown {
        t: f64,
        min_eig: f64,
        halvings: u32,
        /// State from which the failing step was attempted.
        state: Box<crate::flow::FlowState>,
        /// Trajectory accumulated up to the failure (when running, not
        /// single-stepping).
        partial: Option<Box<crate::flow::Trajectory>>,
    },
    #[error("flow configuration invalid: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Field(#[from] FieldError),
}
