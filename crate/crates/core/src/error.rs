use num_complex::Complex64;
use thiserror::Error;

use crate::arrays::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("shape mismatch: expected dimension {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("construction failed at k = {k}: {reason}")]
    Construction { k: usize, reason: String },

    #[error("atom count {atoms} exceeds cap {cap}")]
    Capacity { atoms: usize, cap: usize },

    #[error(
        "quadrature did not converge after {subdivisions} panels: \
         estimate {estimate}, error bound {error:e}"
    )]
    Convergence {
        estimate: Complex64,
        error: f64,
        subdivisions: usize,
    },

    #[error("non-finite integrand value at s = {at}")]
    Domain { at: f64 },

    #[error("dimension {dim} unsupported (max {max}); {hint}")]
    UnsupportedDimension {
        dim: usize,
        max: usize,
        hint: &'static str,
    },

    #[error("parse error{}: {message}", location(*.line, *.column))]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("validation failed for {subject}: {}", .report.failures.join("; "))]
    Validation {
        subject: String,
        report: Box<ValidationReport>,
    },
}

fn location(line: usize, column: usize) -> String {
    if line == 0 {
        String::new()
    } else {
        format!(" at line {line}, column {column}")
    }
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
