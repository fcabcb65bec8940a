use serde::{Deserialize, Serialize};

use super::cell::DiscreteCell;
use crate::error::{Error, Result};
use crate::numerics::compensated_sum;

pub const DEFAULT_TOL_MEAN: f64 = 1e-12;
pub const DEFAULT_TOL_COV: f64 = 1e-10;

/// Provenance attached to generated rows.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RowMetadata {
    pub family: String,
    /// First index at which the η-family β/k correction applies, when the
    /// large-α override moved it past k = 1.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub correction_start: Option<usize>,
}

/// Row n of a standard triangular array: n independent cells.
#[derive(Clone, Debug, PartialEq)]
pub struct ArrayRow {
    dim: usize,
    cells: Vec<DiscreteCell>,
    validated: bool,
    metadata: RowMetadata,
}

impl ArrayRow {
    /// Unvalidated row. Cells must share a dimension.
    pub fn new(cells: Vec<DiscreteCell>, metadata: RowMetadata) -> Result<Self> {
        let dim = match cells.first() {
            Some(c) => c.dim(),
            None => return Err(Error::param("row must contain at least one cell")),
        };
        if let Some(bad) = cells.iter().find(|c| c.dim() != dim) {
            return Err(Error::Shape {
                expected: dim,
                got: bad.dim(),
            });
        }
        Ok(Self {
            dim,
            cells,
            validated: false,
            metadata,
        })
    }

    /// Runs [`validate_row`] with default tolerances and returns the row
    /// marked validated, or a validation error embedding the report.
    pub fn into_validated(self) -> Result<Self> {
        self.into_validated_with(DEFAULT_TOL_MEAN, DEFAULT_TOL_COV)
    }

    pub fn into_validated_with(mut self, tol_mean: f64, tol_cov: f64) -> Result<Self> {
        let report = validate_row(&self, tol_mean, tol_cov);
        if report.passed {
            self.validated = true;
            Ok(self)
        } else {
            Err(Error::Validation {
                subject: format!("row n={}", self.n()),
                report: Box::new(report),
            })
        }
    }

    pub fn n(&self) -> usize {
        self.cells.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells(&self) -> &[DiscreteCell] {
        &self.cells
    }

    pub fn is_validated(&self) -> bool {
        self.validated
    }

    pub fn metadata(&self) -> &RowMetadata {
        &self.metadata
    }

    pub fn total_atoms(&self) -> usize {
        self.cells.iter().map(|c| c.atoms().len()).sum()
    }

    /// Σ_k E|Ξ_{n,k}|².
    pub fn second_moment_sum(&self) -> f64 {
        compensated_sum(self.cells.iter().map(DiscreteCell::second_moment))
    }

    pub(crate) fn require_validated(&self) -> Result<()> {
        if self.validated {
            Ok(())
        } else {
            Err(Error::param(format!(
                "row n={} has not been validated",
                self.n()
            )))
        }
    }
}

/// Residuals of the standard-array conditions for one row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub n: usize,
    pub dim: usize,
    pub tol_mean: f64,
    pub tol_cov: f64,
    /// |Σ p − 1| per cell.
    pub prob_sum_residuals: Vec<f64>,
    /// |E[Ξ_{n,k}]| per cell.
    pub mean_residuals: Vec<f64>,
    /// Σ_k cov(Ξ_{n,k}) − I, row-major.
    pub covariance_residual: Vec<f64>,
    pub max_covariance_residual: f64,
    pub second_moment_sum: f64,
    /// |Σ_k E|Ξ_{n,k}|² − N|.
    pub second_moment_residual: f64,
    pub failures: Vec<String>,
    pub passed: bool,
}

impl ValidationReport {
    pub fn max_mean_residual(&self) -> f64 {
        self.mean_residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_prob_sum_residual(&self) -> f64 {
        self.prob_sum_residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Checks mean-zero cells, unit probability mass, and Σ_k cov = I.
///
/// Probability mass and means are held to `tol_mean`; the covariance sum and
/// the second-moment sum to `tol_cov`. Failures are reported, never thrown.
pub fn validate_row(row: &ArrayRow, tol_mean: f64, tol_cov: f64) -> ValidationReport {
    let n = row.n();
    let dim = row.dim();
    let mut failures = Vec::new();

    let mut prob_sum_residuals = Vec::with_capacity(n);
    let mut mean_residuals = Vec::with_capacity(n);
    let mut cov_terms: Vec<Vec<f64>> = vec![Vec::with_capacity(n); dim * dim];
    for (k, cell) in row.cells().iter().enumerate() {
        let p_res = (cell.prob_sum() - 1.0).abs();
        if !(p_res <= tol_mean) {
            failures.push(format!(
                "cell {}: probabilities sum to {} (residual {p_res:e})",
                k + 1,
                cell.prob_sum()
            ));
        }
        prob_sum_residuals.push(p_res);

        let mean = cell.mean();
        let m_res = mean.iter().map(|m| m * m).sum::<f64>().sqrt();
        if !(m_res <= tol_mean) {
            failures.push(format!("cell {}: mean residual {m_res:e}", k + 1));
        }
        mean_residuals.push(m_res);

        for (terms, c) in cov_terms.iter_mut().zip(cell.covariance()) {
            terms.push(c);
        }
    }

    let covariance_residual: Vec<f64> = cov_terms
        .into_iter()
        .enumerate()
        .map(|(i, terms)| {
            let c = compensated_sum(terms);
            if i % (dim + 1) == 0 {
                c - 1.0
            } else {
                c
            }
        })
        .collect();
    let max_covariance_residual = covariance_residual
        .iter()
        .map(|c| c.abs())
        .fold(0.0, f64::max);
    if !(max_covariance_residual <= tol_cov) {
        failures.push(format!(
            "row covariance differs from identity by {max_covariance_residual:e}"
        ));
    }

    let second_moment_sum = row.second_moment_sum();
    let second_moment_residual = (second_moment_sum - dim as f64).abs();
    if !(second_moment_residual <= tol_cov) {
        failures.push(format!(
            "second-moment sum {second_moment_sum} differs from N = {dim}"
        ));
    }

    ValidationReport {
        n,
        dim,
        tol_mean,
        tol_cov,
        prob_sum_residuals,
        mean_residuals,
        covariance_residual,
        max_covariance_residual,
        second_moment_sum,
        second_moment_residual,
        passed: failures.is_empty(),
        failures,
    }
}
