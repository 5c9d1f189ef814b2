use thiserror::Error;

/// Errors raised by the numerical routines and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("eigensolver did not converge after {iterations} iterations (matrix fingerprint {fingerprint:016x}, n = {n})")]
    EigenNoConvergence {
        iterations: usize,
        n: usize,
        fingerprint: u64,
    },

    #[error("quadrature did not converge: {context} (relative delta {delta:.3e})")]
    QuadratureNoConvergence { context: String, delta: f64 },

    #[error("non-finite integrand in {0}")]
    NonFinite(String),

    #[error("saddle point iteration failed at x = {x}: {reason}; last iterates {trail:?}")]
    SaddleNoConvergence {
        x: f64,
        reason: String,
        trail: Vec<(f64, f64)>,
    },

    #[error("point {w} lies within {dist:.1e} of a deformation eigenvalue")]
    TooCloseToPole { w: String, dist: f64 },

    #[error("frequency band {k} lies beyond the grid Nyquist frequency {nyquist:.3}")]
    BeyondNyquist { k: i32, nyquist: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("unknown test function label `{0}`")]
    UnknownFunction(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Numerical failures (as opposed to bad input) map to CLI exit code 3.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::EigenNoConvergence { .. }
                | Error::QuadratureNoConvergence { .. }
                | Error::NonFinite(_)
                | Error::SaddleNoConvergence { .. }
                | Error::TooCloseToPole { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
