use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error("quadrature did not converge on [{a}, {b}]: estimated error {error:e} after {intervals} subintervals")]
    Quadrature {
        a: f64,
        b: f64,
        error: f64,
        intervals: usize,
    },

    #[error("integrand is not finite at x = {x}")]
    NonFiniteIntegrand { x: f64 },

    #[error("sigma_{index} is singular at D = {d_km} km: {detail}")]
    Singularity {
        index: u8,
        d_km: f64,
        detail: &'static str,
    },

    #[error("inverse-CDF fit residual {residual:e} exceeds tolerance {tolerance:e}")]
    FitFailure { residual: f64, tolerance: f64 },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}:{line}:{column}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}
