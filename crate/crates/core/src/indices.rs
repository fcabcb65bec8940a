//! Lindeberg sums, the L-quantity and infinitesimality diagnostics.
//!
//! All indicator events use strict inequalities (`> ε`); atoms sitting exactly
//! on a threshold are excluded.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arrays::{ArrayFamily, ArrayRow};
use crate::error::{Error, Result};
use crate::numerics::compensated_sum;
use crate::numerics::linalg::{dot, RealVector};

pub const DEFAULT_TAIL_WINDOW: usize = 3;

/// Whether the event variable is the array itself or an independent copy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CopyMode {
    Same,
    Independent,
}

/// Logarithmic grid from 1 down to 1e-3, four points per decade.
pub fn default_eps_grid() -> Vec<f64> {
    (0..=12).map(|i| 10f64.powf(-(i as f64) / 4.0)).collect()
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!("{name} must be positive and finite, got {v}")))
    }
}

/// Σ_k E[|Ξ_{n,k}|²; |Ξ_{n,k}| > eps].
pub fn lindeberg_sum(row: &ArrayRow, eps: f64) -> Result<f64> {
    row.require_validated()?;
    positive("eps", eps)?;
    Ok(compensated_sum(row.cells().iter().map(|c| {
        c.atoms()
            .iter()
            .filter(|a| a.norm() > eps)
            .map(|a| a.prob * a.norm_sq())
            .sum::<f64>()
    })))
}

/// Finite-grid estimate of sup_ε limsup_n of the Lindeberg sum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexEstimate {
    pub value: f64,
    pub eps_grid: Vec<f64>,
    pub n_grid: Vec<usize>,
    /// `per_point[i][j]` is the Lindeberg sum at `eps_grid[i]`, `n_grid[j]`.
    pub per_point: Vec<Vec<f64>>,
    pub tail_window: usize,
    /// eps attaining the maximum.
    pub argmax_eps: f64,
    /// eps values whose partial sums are not monotone in n.
    pub non_monotone_eps: Vec<f64>,
}

pub(crate) fn check_n_grid(n_grid: &[usize]) -> Result<()> {
    if n_grid.is_empty() {
        return Err(Error::param("n grid must not be empty"));
    }
    if n_grid[0] == 0 || n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("n grid must be strictly increasing positive integers"));
    }
    Ok(())
}

pub(crate) fn tail_range(len: usize, tail_window: usize) -> std::ops::Range<usize> {
    len.saturating_sub(tail_window.max(1))..len
}

pub(crate) fn is_monotone(values: &[f64]) -> bool {
    const SLOP: f64 = 1e-12;
    let up = values.windows(2).all(|w| w[1] >= w[0] - SLOP);
    let down = values.windows(2).all(|w| w[1] <= w[0] + SLOP);
    up || down
}

pub(crate) fn build_rows(family: &ArrayFamily, n_grid: &[usize]) -> Result<Vec<ArrayRow>> {
    n_grid.par_iter().map(|&n| family.row(n)).collect()
}

pub fn lindeberg_index_estimate(
    family: &ArrayFamily,
    eps_grid: &[f64],
    n_grid: &[usize],
    tail_window: usize,
) -> Result<IndexEstimate> {
    if eps_grid.is_empty() {
        return Err(Error::param("eps grid must not be empty"));
    }
    for &e in eps_grid {
        positive("eps", e)?;
    }
    check_n_grid(n_grid)?;
    let rows = build_rows(family, n_grid)?;
    let per_point = eps_grid
        .par_iter()
        .map(|&eps| rows.iter().map(|r| lindeberg_sum(r, eps)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize_index(eps_grid, n_grid, per_point, tail_window, family.dim()))
}

pub(crate) fn summarize_index(
    eps_grid: &[f64],
    n_grid: &[usize],
    per_point: Vec<Vec<f64>>,
    tail_window: usize,
    dim: usize,
) -> IndexEstimate {
    let tail = tail_range(n_grid.len(), tail_window);
    let mut value = 0.0f64;
    let mut argmax_eps = eps_grid[0];
    for (eps, sums) in eps_grid.iter().zip(&per_point) {
        let m = sums[tail.clone()].iter().copied().fold(0.0, f64::max);
        if m > value {
            value = m;
            argmax_eps = *eps;
        }
    }
    let non_monotone_eps = eps_grid
        .iter()
        .zip(&per_point)
        .filter(|(_, s)| !is_monotone(s))
        .map(|(e, _)| *e)
        .collect();
    IndexEstimate {
        value: value.min(dim as f64),
        eps_grid: eps_grid.to_vec(),
        n_grid: n_grid.to_vec(),
        per_point,
        tail_window: tail.len(),
        argmax_eps,
        non_monotone_eps,
    }
}

/// Σ_k E[|Ξ_{n,k}|²; |<H_{n,k}, t>| > threshold] with H the row itself or an
/// independent copy.
pub fn l_sum(row: &ArrayRow, copy: CopyMode, t: &RealVector, threshold: f64) -> Result<f64> {
    row.require_validated()?;
    t.check_dim(row.dim())?;
    positive("threshold", threshold)?;
    let t = t.as_slice();
    let terms = row.cells().iter().map(|c| match copy {
        CopyMode::Same => c
            .atoms()
            .iter()
            .filter(|a| dot(&a.point, t).abs() > threshold)
            .map(|a| a.prob * a.norm_sq())
            .sum::<f64>(),
        CopyMode::Independent => {
            let p: f64 = c
                .atoms()
                .iter()
                .filter(|a| dot(&a.point, t).abs() > threshold)
                .map(|a| a.prob)
                .sum();
            if p == 0.0 {
                0.0
            } else {
                c.second_moment() * p
            }
        }
    });
    Ok(compensated_sum(terms))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfinitesimalityProfile {
    /// max_k P[|Ξ_{n,k}| > eps].
    pub max_prob: f64,
    /// eps⁻² Σ_k E[|Ξ_{n,k}|²; |Ξ_{n,k}| > eps²] + eps².
    pub chebyshev_bound: f64,
}

pub fn infinitesimality_profile(row: &ArrayRow, eps: f64) -> Result<InfinitesimalityProfile> {
    row.require_validated()?;
    positive("eps", eps)?;
    let max_prob = row
        .cells()
        .iter()
        .map(|c| c.tail_prob(eps))
        .fold(0.0, f64::max);
    let chebyshev_bound = lindeberg_sum(row, eps * eps)? / (eps * eps) + eps * eps;
    Ok(InfinitesimalityProfile {
        max_prob,
        chebyshev_bound,
    })
}

/// Both sides of Σ E[|Ξ|²; |<Ξ,t>| > 1] ≤ Σ E[|Ξ|²; |Ξ| > 1/|t|].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domination {
    pub lhs: f64,
    pub rhs: f64,
}

pub fn cauchy_schwarz_domination(row: &ArrayRow, t: &RealVector) -> Result<Domination> {
    if t.is_zero() {
        return Err(Error::param("t must be nonzero"));
    }
    Ok(Domination {
        lhs: l_sum(row, CopyMode::Same, t, 1.0)?,
        rhs: lindeberg_sum(row, 1.0 / t.norm())?,
    })
}
