//! The characteristic-function identity, the truncation bounds built on it,
//! and finite-grid estimates of the asymptotic quantities.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arrays::{ArrayFamily, ArrayRow, DEFAULT_ATOM_CAP};
use crate::charfn::{charfn_gap, gaussian_charfn, row_sum_charfn};
use crate::error::{Error, Result};
use crate::indices::{
    build_rows, check_n_grid, infinitesimality_profile, l_sum, lindeberg_index_estimate, tail_range,
    CopyMode, IndexEstimate,
};
use crate::numerics::linalg::{dot, RealVector};
use crate::numerics::quadrature::{integrate_unit, QuadratureSpec, Singularity};
use crate::stein::cexpm1;

/// Identity checks pass when the residual is within this floor or ten times
/// the quadrature error, whichever is larger.
pub const IDENTITY_FLOOR: f64 = 1e-6;
/// Negative slack below this marks a genuine violation rather than
/// finite-grid truncation noise.
pub const SLACK_FLOOR: f64 = -1e-3;
/// Tail-maximum of max_k P[|Ξ_{n,k}| > ε] below which a family is treated
/// as infinitesimal on the grid.
pub const INFINITESIMAL_TOL: f64 = 0.05;

pub fn default_bound_eps_grid() -> Vec<f64> {
    vec![1.0, 0.5, 0.2, 0.1, 0.05]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub n: usize,
    pub dim: usize,
    pub t: RealVector,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
    pub quadrature_error: f64,
    pub passed: bool,
}

/// E[e_t(Ξ) − e_t(Σ_n)], exact.
pub fn identity_lhs(row: &ArrayRow, t: &RealVector) -> Result<Complex64> {
    Ok(gaussian_charfn(t) - row_sum_charfn(row, t)?)
}

/// R(a) = ∫₀¹ (e^{−ira} − 1) dr.
pub fn r_integral(a: f64) -> Complex64 {
    if a.abs() < 1e-4 {
        let a2 = a * a;
        Complex64::new(-a2 / 6.0 + a2 * a2 / 120.0, -a / 2.0 + a2 * a / 24.0)
    } else {
        // (1 − e^{−ia})/(ia) − 1
        let z = -cexpm1(Complex64::new(0.0, -a));
        z / Complex64::new(0.0, a) - 1.0
    }
}

/// Per-cell (p, <x,t>) pairs.
fn projections(row: &ArrayRow, t: &[f64]) -> Vec<Vec<(f64, f64)>> {
    row.cells()
        .iter()
        .map(|c| c.atoms().iter().map(|a| (a.prob, dot(&a.point, t))).collect())
        .collect()
}

/// Σ_k Π_{j≠k} φ_j(√s t) [Σ p a² R(√s a) − (φ_k(√s t) − 1) Σ p a²].
fn identity_integrand(cells: &[Vec<(f64, f64)>], s: f64) -> Complex64 {
    let rs = s.sqrt();
    let one = Complex64::new(1.0, 0.0);
    let deltas: Vec<Complex64> = cells
        .iter()
        .map(|c| c.iter().map(|&(p, a)| cexpm1(Complex64::new(0.0, -rs * a)) * p).sum())
        .collect();
    let n = cells.len();
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(one);
    for d in &deltas {
        let last = *prefix.last().expect("nonempty");
        prefix.push(last * (one + d));
    }
    let mut suffix = one;
    let mut total = Complex64::new(0.0, 0.0);
    for k in (0..n).rev() {
        let excl = prefix[k] * suffix;
        let mut term1 = Complex64::new(0.0, 0.0);
        let mut m2 = 0.0;
        for &(p, a) in &cells[k] {
            let w = p * a * a;
            m2 += w;
            term1 += r_integral(rs * a) * w;
        }
        total += excl * (term1 - deltas[k] * m2);
        suffix *= one + deltas[k];
    }
    total
}

/// ½ ∫₀¹ Σ_k (...) e^{−½(1−s)|t|²} ds, returned with its error estimate.
pub fn identity_rhs(row: &ArrayRow, t: &RealVector, spec: &QuadratureSpec) -> Result<(Complex64, f64)> {
    row.require_validated()?;
    t.check_dim(row.dim())?;
    if let Some(c) = row.cells().iter().find(|c| c.atoms().len() > DEFAULT_ATOM_CAP) {
        return Err(Error::Capacity {
            atoms: c.atoms().len(),
            cap: DEFAULT_ATOM_CAP,
        });
    }
    if t.is_zero() {
        return Ok((Complex64::new(0.0, 0.0), 0.0));
    }
    let cells = projections(row, t.as_slice());
    let tau = t.norm_sq();
    let r = integrate_unit(
        |s| identity_integrand(&cells, s) * (-0.5 * (1.0 - s) * tau).exp(),
        &spec.with_singularity(Singularity::InverseSqrtAtZero),
    )?;
    Ok((r.value * 0.5, 0.5 * r.error))
}

pub fn decomposition_check(row: &ArrayRow, t: &RealVector, spec: &QuadratureSpec) -> Result<IdentityReport> {
    let lhs = identity_lhs(row, t)?;
    let (rhs, quadrature_error) = identity_rhs(row, t, spec)?;
    let residual = (lhs - rhs).norm();
    Ok(IdentityReport {
        n: row.n(),
        dim: row.dim(),
        t: t.clone(),
        lhs,
        rhs,
        residual,
        quadrature_error,
        passed: residual <= IDENTITY_FLOOR.max(10.0 * quadrature_error),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub passed: bool,
}

/// |e^{−iθ} − 1| = 2|sin(θ/2)|.
#[inline]
fn chord(theta: f64) -> f64 {
    2.0 * (0.5 * theta).sin().abs()
}

fn unit_interval(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::param(format!("{name} must lie in [0, 1], got {v}")))
    }
}

/// Both sides of the truncation estimate
/// Σ E|e_{√s t}(rH) − 1|·|Ξ|² ≤ εN + 2 Σ E[|Ξ|²; |<H,t>| > ε].
pub fn truncation_bound_check(
    row: &ArrayRow,
    t: &RealVector,
    s: f64,
    r: f64,
    eps: f64,
    copy: CopyMode,
) -> Result<TruncationCheck> {
    unit_interval("s", s)?;
    unit_interval("r", r)?;
    let l = l_sum(row, copy, t, eps)?;
    let rs = s.sqrt();
    let t = t.as_slice();
    let lhs: f64 = row
        .cells()
        .iter()
        .map(|c| match copy {
            CopyMode::Same => c
                .atoms()
                .iter()
                .map(|a| a.prob * chord(rs * r * dot(&a.point, t)) * a.norm_sq())
                .sum::<f64>(),
            CopyMode::Independent => {
                let e: f64 = c.atoms().iter().map(|a| a.prob * chord(rs * dot(&a.point, t))).sum();
                e * c.second_moment()
            }
        })
        .sum();
    let rhs = eps * row.dim() as f64 + 2.0 * l;
    Ok(TruncationCheck {
        lhs,
        rhs,
        passed: lhs <= rhs,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n: usize,
    pub dim: usize,
    pub t: RealVector,
    pub eps: f64,
    pub lhs_gap: f64,
    /// 2εN.
    pub term_eps: f64,
    pub term_same: f64,
    pub term_indep: f64,
    /// 1 − e^{−|t|²/2}.
    pub envelope: f64,
    pub rhs: f64,
    pub slack: f64,
    pub passed: bool,
}

/// |φ_Ξ(t) − φ_{Σ_n}(t)| ≤ 2εN + 2(L_same + L_indep)(1 − e^{−|t|²/2}) at
/// finite n, with the L-terms at threshold ε.
pub fn master_bound(row: &ArrayRow, t: &RealVector, eps: f64) -> Result<BoundReport> {
    let term_same = l_sum(row, CopyMode::Same, t, eps)?;
    let term_indep = l_sum(row, CopyMode::Independent, t, eps)?;
    let lhs_gap = charfn_gap(row, t)?;
    let term_eps = 2.0 * eps * row.dim() as f64;
    let envelope = -(-0.5 * t.norm_sq()).exp_m1();
    let rhs = term_eps + 2.0 * (term_same + term_indep) * envelope;
    let slack = rhs - lhs_gap;
    Ok(BoundReport {
        n: row.n(),
        dim: row.dim(),
        t: t.clone(),
        eps,
        lhs_gap,
        term_eps,
        term_same,
        term_indep,
        envelope,
        rhs,
        slack,
        passed: slack >= 0.0,
    })
}

/// [`master_bound`] at the eps in `eps_grid` giving the smallest right side.
pub fn best_master_bound(row: &ArrayRow, t: &RealVector, eps_grid: &[f64]) -> Result<BoundReport> {
    let mut best: Option<BoundReport> = None;
    for &eps in eps_grid {
        let b = master_bound(row, t, eps)?;
        if best.as_ref().is_none_or(|cur| b.rhs < cur.rhs) {
            best = Some(b);
        }
    }
    best.ok_or_else(|| Error::param("eps grid must not be empty"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Theorem,
    Corollary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    /// Small negative slack, consistent with finite-grid truncation.
    Truncation,
    /// Slack below [`SLACK_FLOOR`].
    Violation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundFlag {
    pub t_index: usize,
    pub bound: BoundKind,
    pub slack: f64,
    pub severity: Severity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub family: String,
    pub t_grid: Vec<RealVector>,
    pub n_grid: Vec<usize>,
    pub eps_grid: Vec<f64>,
    pub tail_window: usize,
    /// `gaps[i][j]` is the gap at `t_grid[i]`, `n_grid[j]`.
    pub gaps: Vec<Vec<f64>>,
    pub gap_limsup: Vec<f64>,
    pub l_same: f64,
    pub l_indep: f64,
    pub theorem_rhs: Vec<f64>,
    pub lindeberg: IndexEstimate,
    pub corollary_rhs: f64,
    /// Tail maximum over eps of max_k P[|Ξ_{n,k}| > eps].
    pub infinitesimality: f64,
    pub corollary_applicable: bool,
    pub lambda_f: f64,
    pub flags: Vec<BoundFlag>,
    pub passed: bool,
}

fn check_t_grid(family: &ArrayFamily, t_grid: &[RealVector]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::param("t grid must not be empty"));
    }
    for t in t_grid {
        t.check_dim(family.dim())?;
    }
    Ok(())
}

fn tail_max(values: &[f64], tail_window: usize) -> f64 {
    values[tail_range(values.len(), tail_window)].iter().copied().fold(0.0, f64::max)
}

/// gaps[i][j] for every t in the grid and every row.
fn gap_table(rows: &[ArrayRow], t_grid: &[RealVector]) -> Result<Vec<Vec<f64>>> {
    t_grid
        .par_iter()
        .map(|t| rows.iter().map(|r| charfn_gap(r, t)).collect())
        .collect()
}

pub fn theorem_bound_report(
    family: &ArrayFamily,
    t_grid: &[RealVector],
    n_grid: &[usize],
    eps_grid: &[f64],
    tail_window: usize,
) -> Result<AsymptoticReport> {
    check_t_grid(family, t_grid)?;
    check_n_grid(n_grid)?;
    let lindeberg = lindeberg_index_estimate(family, eps_grid, n_grid, tail_window)?;
    let rows = build_rows(family, n_grid)?;
    let gaps = gap_table(&rows, t_grid)?;
    let gap_limsup: Vec<f64> = gaps.iter().map(|g| tail_max(g, tail_window)).collect();
    let dim = family.dim() as f64;

    // L at threshold 1 for direction t/ε equals the threshold-ε sum at t.
    let l_estimate = |copy: CopyMode| -> Result<f64> {
        let per: Vec<f64> = t_grid
            .par_iter()
            .flat_map_iter(|t| eps_grid.iter().map(move |&e| (t, e)))
            .map(|(t, e)| {
                let sums = rows.iter().map(|r| l_sum(r, copy, t, e)).collect::<Result<Vec<_>>>()?;
                Ok(tail_max(&sums, tail_window))
            })
            .collect::<Result<_>>()?;
        Ok(per.into_iter().fold(0.0, f64::max).min(dim))
    };
    let l_same = l_estimate(CopyMode::Same)?;
    let l_indep = l_estimate(CopyMode::Independent)?;
    let theorem_rhs: Vec<f64> = t_grid
        .iter()
        .map(|t| -2.0 * (-0.5 * t.norm_sq()).exp_m1() * (l_same + l_indep))
        .collect();
    let corollary_rhs = 2.0 * lindeberg.value;

    let max_probs = eps_grid
        .iter()
        .map(|&e| {
            let probs = rows
                .iter()
                .map(|r| Ok(infinitesimality_profile(r, e)?.max_prob))
                .collect::<Result<Vec<_>>>()?;
            Ok(tail_max(&probs, tail_window))
        })
        .collect::<Result<Vec<f64>>>()?;
    let infinitesimality = max_probs.into_iter().fold(0.0, f64::max);
    let corollary_applicable = infinitesimality <= INFINITESIMAL_TOL;

    let mut flags = Vec::new();
    let mut flag = |t_index: usize, bound: BoundKind, slack: f64| {
        if slack < 0.0 {
            flags.push(BoundFlag {
                t_index,
                bound,
                slack,
                severity: if slack < SLACK_FLOOR {
                    Severity::Violation
                } else {
                    Severity::Truncation
                },
            });
        }
    };
    for (i, g) in gap_limsup.iter().enumerate() {
        flag(i, BoundKind::Theorem, theorem_rhs[i] - g);
        if corollary_applicable {
            flag(i, BoundKind::Corollary, corollary_rhs - g);
        }
    }
    let passed = flags.iter().all(|f| f.severity == Severity::Truncation);
    let lambda_f = gap_limsup.iter().copied().fold(0.0, f64::max).clamp(0.0, 2.0);

    Ok(AsymptoticReport {
        family: family.label(),
        t_grid: t_grid.to_vec(),
        n_grid: n_grid.to_vec(),
        eps_grid: eps_grid.to_vec(),
        tail_window: tail_range(n_grid.len(), tail_window).len(),
        gaps,
        gap_limsup,
        l_same,
        l_indep,
        theorem_rhs,
        lindeberg,
        corollary_rhs,
        infinitesimality,
        corollary_applicable,
        lambda_f,
        flags,
        passed,
    })
}

pub const LAMBDA_F_CAVEAT: &str =
    "finite-grid estimate: sup over the t grid of the max over the trailing n window; \
     sup_t limsup_n is not limsup_n sup_t";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaEstimate {
    pub value: f64,
    pub t_grid: Vec<RealVector>,
    pub n_grid: Vec<usize>,
    pub tail_window: usize,
    /// `gaps[i][j]` is the gap at `t_grid[i]`, `n_grid[j]`.
    pub gaps: Vec<Vec<f64>>,
    /// max over the t grid at each n.
    pub per_n_sup: Vec<f64>,
    pub caveat: String,
}

pub fn lambda_f_estimate(
    family: &ArrayFamily,
    t_grid: &[RealVector],
    n_grid: &[usize],
    tail_window: usize,
) -> Result<LambdaEstimate> {
    check_t_grid(family, t_grid)?;
    check_n_grid(n_grid)?;
    let rows = build_rows(family, n_grid)?;
    let gaps = gap_table(&rows, t_grid)?;
    let value = gaps
        .iter()
        .map(|g| tail_max(g, tail_window))
        .fold(0.0, f64::max)
        .clamp(0.0, 2.0);
    let per_n_sup = (0..n_grid.len())
        .map(|j| gaps.iter().map(|g| g[j]).fold(0.0, f64::max))
        .collect();
    Ok(LambdaEstimate {
        value,
        t_grid: t_grid.to_vec(),
        n_grid: n_grid.to_vec(),
        tail_window: tail_range(n_grid.len(), tail_window).len(),
        gaps,
        per_n_sup,
        caveat: LAMBDA_F_CAVEAT.to_string(),
    })
}
