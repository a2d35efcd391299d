use num_complex::Complex64;
use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error(
        "domain too short: profile endstate gaps (left {gap_left:.3e}, right {gap_right:.3e}) \
         exceed threshold {threshold:.3e} at half-length {half_length}; \
         try half-length >= {suggested:.1}"
    )]
    DomainTooShort {
        half_length: f64,
        gap_left: f64,
        gap_right: f64,
        threshold: f64,
        suggested: f64,
    },

    #[error("profile decay validation failed: {worst_margin:.3e} at x = {offenders:?}")]
    DecayViolation {
        worst_margin: f64,
        offenders: Vec<f64>,
    },

    #[error("consistent splitting violated at lambda = {lambda}: eigenvalues {eigenvalues:?}")]
    SplittingViolated {
        lambda: Complex64,
        eigenvalues: Vec<Complex64>,
    },

    #[error("eigenvalue continuation ambiguous near lambda = {lambda}: refinement depth exhausted")]
    KatoDepthExceeded { lambda: Complex64 },

    #[error("ODE integration failed at x = {x:.6}: {reason}")]
    Integrator { x: f64, reason: String },

    #[error("|D| = {abs_d:.3e} near zero at contour node lambda = {lambda}; adjust r0 or safety")]
    NearZeroOnContour { lambda: Complex64, abs_d: f64 },

    #[error("winding refinement depth exceeded on segment [{from}, {to}]")]
    RefinementDepthExceeded { from: Complex64, to: Complex64 },

    #[error("contour is not closed or has too few points")]
    BadContour,

    #[error("Newton failed to converge in {iters} iterations (residual {residual:.3e}); reduce dt")]
    NewtonDiverged { iters: usize, residual: f64 },

    #[error("singular block pivot at grid index {index}")]
    SingularJacobian { index: usize },

    #[error("nonpositive specific volume in candidate state at index {index}")]
    NonpositiveVolume { index: usize },

    #[error("numerical blow-up at t = {time:.4}")]
    Blowup { time: f64 },

    #[error("empty dataset for artifact emission")]
    EmptyDataset,

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
