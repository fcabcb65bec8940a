use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::cell::{Atom, DiscreteCell};
use super::row::{ArrayRow, RowMetadata};
use crate::error::{Error, Result};

/// Default cap on atoms per product cell.
pub const DEFAULT_ATOM_CAP: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    EtaAlpha,
    RademacherIid,
    Product,
    Explicit,
}

/// A generator of validated rows for any requested n.
#[derive(Clone, Debug, PartialEq)]
pub enum ArrayFamily {
    EtaAlpha {
        alpha: f64,
        allow_large_alpha: bool,
    },
    RademacherIid,
    /// Coordinatewise independent product of one-dimensional families.
    Product {
        coordinates: Vec<ArrayFamily>,
        atom_cap: usize,
    },
    /// Rows given explicitly for a finite set of n.
    Explicit {
        dim: usize,
        rows: BTreeMap<usize, ArrayRow>,
    },
}

impl ArrayFamily {
    pub fn eta(alpha: f64) -> Self {
        ArrayFamily::EtaAlpha {
            alpha,
            allow_large_alpha: false,
        }
    }

    pub fn rademacher() -> Self {
        ArrayFamily::RademacherIid
    }

    pub fn product(coordinates: Vec<ArrayFamily>) -> Self {
        ArrayFamily::Product {
            coordinates,
            atom_cap: DEFAULT_ATOM_CAP,
        }
    }

    pub fn kind(&self) -> FamilyKind {
        match self {
            ArrayFamily::EtaAlpha { .. } => FamilyKind::EtaAlpha,
            ArrayFamily::RademacherIid => FamilyKind::RademacherIid,
            ArrayFamily::Product { .. } => FamilyKind::Product,
            ArrayFamily::Explicit { .. } => FamilyKind::Explicit,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ArrayFamily::EtaAlpha { .. } | ArrayFamily::RademacherIid => 1,
            ArrayFamily::Product { coordinates, .. } => coordinates.len(),
            ArrayFamily::Explicit { dim, .. } => *dim,
        }
    }

    /// Short human-readable label, also used as row metadata.
    pub fn label(&self) -> String {
        match self {
            ArrayFamily::EtaAlpha { alpha, .. } => format!("eta_alpha(alpha={alpha})"),
            ArrayFamily::RademacherIid => "rademacher_iid".to_string(),
            ArrayFamily::Product { coordinates, .. } => {
                let parts: Vec<String> = coordinates.iter().map(ArrayFamily::label).collect();
                format!("product[{}]", parts.join(","))
            }
            ArrayFamily::Explicit { .. } => "explicit".to_string(),
        }
    }

    pub fn row(&self, n: usize) -> Result<ArrayRow> {
        match self {
            ArrayFamily::EtaAlpha {
                alpha,
                allow_large_alpha,
            } => build_eta_row_with(*alpha, n, *allow_large_alpha),
            ArrayFamily::RademacherIid => build_rademacher_row(n),
            ArrayFamily::Product {
                coordinates,
                atom_cap,
            } => {
                let rows = coordinates
                    .iter()
                    .map(|c| c.row(n))
                    .collect::<Result<Vec<_>>>()?;
                build_product_row_with_cap(&rows, *atom_cap)
            }
            ArrayFamily::Explicit { rows, .. } => rows.get(&n).cloned().ok_or_else(|| {
                Error::Construction {
                    k: 0,
                    reason: format!("explicit family has no row for n = {n}"),
                }
            }),
        }
    }
}

/// β = α / (1 − α).
pub fn eta_beta(alpha: f64) -> f64 {
    alpha / (1.0 - alpha)
}

/// s_n² = n + β Σ_{k=start}^{n} (1 − 1/k).
pub fn eta_s_squared(beta: f64, n: usize, start: usize) -> f64 {
    let tail: f64 = (start.max(1)..=n).map(|k| 1.0 - 1.0 / k as f64).sum();
    n as f64 + beta * tail
}

/// Row n of the η_α array.
///
/// Cell k puts mass ½(1 − β/k) on each of ±1/s_n and ½β/k on each of
/// ±√k/s_n. Requires β ≤ 1 (α ≤ ½); see [`build_eta_row_with`].
pub fn build_eta_row(alpha: f64, n: usize) -> Result<ArrayRow> {
    build_eta_row_with(alpha, n, false)
}

/// Like [`build_eta_row`]; with `allow_large_alpha` the β/k correction starts
/// at k₀ = ⌈β⌉ (cells before it are symmetric ±1/s_n coins) and s_n² is
/// renormalized to match. k₀ is recorded in the row metadata.
pub fn build_eta_row_with(alpha: f64, n: usize, allow_large_alpha: bool) -> Result<ArrayRow> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if n < 1 {
        return Err(Error::param("n must be at least 1"));
    }
    let beta = eta_beta(alpha);
    let start = if beta <= 1.0 {
        1
    } else if allow_large_alpha {
        // β = 0.8/0.2 rounds to 4.000000000000001
        (beta * (1.0 - 1e-12)).ceil() as usize
    } else {
        return Err(Error::Construction {
            k: 1,
            reason: format!(
                "probability ½(1 − β/k) = {} is negative (β = {beta} > 1, alpha > ½); \
                 enable the large-alpha override to start the correction at k = {}",
                0.5 * (1.0 - beta),
                (beta * (1.0 - 1e-12)).ceil()
            ),
        });
    };
    let s = eta_s_squared(beta, n, start).sqrt();
    let small = 1.0 / s;
    let cells = (1..=n)
        .map(|k| {
            if k < start {
                return DiscreteCell::symmetric(vec![small]);
            }
            let kf = k as f64;
            let mut p_small = 0.5 * (1.0 - beta / kf);
            if p_small < 0.0 && p_small > -1e-12 {
                p_small = 0.0;
            }
            let p_big = 0.5 * beta / kf;
            if p_small < 0.0 {
                return Err(Error::Construction {
                    k,
                    reason: format!("negative probability {p_small}"),
                });
            }
            let big = kf.sqrt() / s;
            DiscreteCell::new(
                1,
                vec![
                    Atom::new(vec![-small], p_small),
                    Atom::new(vec![small], p_small),
                    Atom::new(vec![-big], p_big),
                    Atom::new(vec![big], p_big),
                ],
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let metadata = RowMetadata {
        family: ArrayFamily::EtaAlpha {
            alpha,
            allow_large_alpha,
        }
        .label(),
        correction_start: (start > 1).then_some(start),
    };
    ArrayRow::new(cells, metadata)?.into_validated()
}

/// Row n of ξ_k/√n with ξ_k symmetric ±1 coins.
pub fn build_rademacher_row(n: usize) -> Result<ArrayRow> {
    if n < 1 {
        return Err(Error::param("n must be at least 1"));
    }
    let x = 1.0 / (n as f64).sqrt();
    let cell = DiscreteCell::symmetric(vec![x])?;
    let metadata = RowMetadata {
        family: ArrayFamily::RademacherIid.label(),
        correction_start: None,
    };
    ArrayRow::new(vec![cell; n], metadata)?.into_validated()
}

/// Product of N validated one-dimensional rows of equal length.
pub fn build_product_row(coordinate_rows: &[ArrayRow]) -> Result<ArrayRow> {
    build_product_row_with_cap(coordinate_rows, DEFAULT_ATOM_CAP)
}

pub fn build_product_row_with_cap(coordinate_rows: &[ArrayRow], atom_cap: usize) -> Result<ArrayRow> {
    let first = coordinate_rows
        .first()
        .ok_or_else(|| Error::param("product needs at least one coordinate row"))?;
    let n = first.n();
    for row in coordinate_rows {
        if row.dim() != 1 {
            return Err(Error::Shape {
                expected: 1,
                got: row.dim(),
            });
        }
        if row.n() != n {
            return Err(Error::Shape {
                expected: n,
                got: row.n(),
            });
        }
        row.require_validated()?;
    }
    let dim = coordinate_rows.len();
    let mut cells = Vec::with_capacity(n);
    for k in 0..n {
        let count: usize = coordinate_rows
            .iter()
            .map(|r| r.cells()[k].atoms().len())
            .product();
        if count > atom_cap {
            return Err(Error::Capacity {
                atoms: count,
                cap: atom_cap,
            });
        }
        let mut atoms = vec![Atom::new(Vec::with_capacity(dim), 1.0)];
        for row in coordinate_rows {
            let mut next = Vec::with_capacity(atoms.len() * row.cells()[k].atoms().len());
            for partial in &atoms {
                for a in row.cells()[k].atoms() {
                    let mut point = partial.point.clone();
                    point.push(a.point[0]);
                    next.push(Atom::new(point, partial.prob * a.prob));
                }
            }
            atoms = next;
        }
        cells.push(DiscreteCell::new(dim, atoms)?);
    }
    let labels: Vec<String> = coordinate_rows
        .iter()
        .map(|r| r.metadata().family.clone())
        .collect();
    let metadata = RowMetadata {
        family: format!("product[{}]", labels.join(",")),
        correction_start: None,
    };
    ArrayRow::new(cells, metadata)?.into_validated()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrays::row::{validate_row, DEFAULT_TOL_COV, DEFAULT_TOL_MEAN};

    #[test]
    fn eta_n1_is_rademacher() {
        let row = build_eta_row(0.5, 1).unwrap();
        let atoms = row.cells()[0].atoms();
        assert_eq!(atoms, &[Atom::new(vec![-1.0], 0.5), Atom::new(vec![1.0], 0.5)]);
    }

    #[test]
    fn eta_n2_atoms() {
        let row = build_eta_row(0.5, 2).unwrap();
        let s = 2.5f64.sqrt();
        let atoms = row.cells()[1].atoms();
        assert_eq!(atoms.len(), 4);
        let want = [-(2f64.sqrt()) / s, -1.0 / s, 1.0 / s, 2f64.sqrt() / s];
        for (a, w) in atoms.iter().zip(want) {
            assert!((a.point[0] - w).abs() < 1e-15);
            assert!((a.prob - 0.25).abs() < 1e-15);
        }
        assert!((eta_s_squared(1.0, 2, 1) - 2.5).abs() < 1e-15);
    }

    #[test]
    fn eta_second_moments_sum_to_one() {
        for alpha in [0.05, 0.3, 0.5] {
            let row = build_eta_row(alpha, 100).unwrap();
            assert!((row.second_moment_sum() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn eta_parameter_errors() {
        assert!(matches!(build_eta_row(0.0, 3), Err(Error::Parameter(_))));
        assert!(matches!(build_eta_row(1.0, 3), Err(Error::Parameter(_))));
        match build_eta_row(0.8, 3) {
            Err(Error::Construction { k, .. }) => assert_eq!(k, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn eta_large_alpha_override() {
        // α = 0.8 → β = 4, correction starts at k = 4
        let row = build_eta_row_with(0.8, 10, true).unwrap();
        assert_eq!(row.metadata().correction_start, Some(4));
        assert_eq!(row.cells()[2].atoms().len(), 2);
        assert_eq!(row.cells()[3].atoms().len(), 2); // ½(1 − 4/4) = 0 drops the small atoms
        assert_eq!(row.cells()[4].atoms().len(), 4);
        assert!((row.second_moment_sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eta_s_squared_increases() {
        let beta = eta_beta(0.3);
        let mut prev = 0.0;
        let mut s2 = 0.0;
        for n in 1..=100_000usize {
            s2 += 1.0 + beta * (1.0 - 1.0 / n as f64);
            assert!(s2 > prev);
            prev = s2;
        }
        assert!((s2 - eta_s_squared(beta, 100_000, 1)).abs() < 1e-6);
    }

    #[test]
    fn rademacher_rows() {
        let one = build_rademacher_row(1).unwrap();
        assert_eq!(one.cells()[0].atoms(), &[Atom::new(vec![-1.0], 0.5), Atom::new(vec![1.0], 0.5)]);
        let four = build_rademacher_row(4).unwrap();
        assert!(four.cells().iter().all(|c| c.atoms()[1].point == vec![0.5]));
        assert_eq!(four.second_moment_sum(), 1.0);
        let ten = build_rademacher_row(10).unwrap();
        let report = validate_row(&ten, DEFAULT_TOL_MEAN, DEFAULT_TOL_COV);
        assert!(report.max_mean_residual() == 0.0 && report.max_covariance_residual < 1e-15);
        assert!(build_rademacher_row(0).is_err());
    }

    #[test]
    fn product_rows() {
        let r1 = build_rademacher_row(1).unwrap();
        let p = build_product_row(&[r1.clone(), r1]).unwrap();
        let atoms = p.cells()[0].atoms();
        assert_eq!(atoms.len(), 4);
        assert!(atoms.iter().all(|a| a.prob == 0.25 && a.point.iter().all(|c| c.abs() == 1.0)));

        let r = build_rademacher_row(7).unwrap();
        let p = build_product_row(&[r.clone(), r]).unwrap();
        let report = validate_row(&p, DEFAULT_TOL_MEAN, DEFAULT_TOL_COV);
        assert!(report.max_covariance_residual < 1e-12);
        assert!((p.second_moment_sum() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn product_errors() {
        let a = build_rademacher_row(2).unwrap();
        let b = build_rademacher_row(3).unwrap();
        assert!(matches!(build_product_row(&[a.clone(), b]), Err(Error::Shape { .. })));
        let eta = build_eta_row(0.5, 2).unwrap();
        assert!(matches!(
            build_product_row_with_cap(&[eta.clone(), eta], 8),
            Err(Error::Capacity { atoms: 16, cap: 8 })
        ));
        let p = build_product_row(&[a.clone(), a.clone()]).unwrap();
        assert!(matches!(build_product_row(&[p, a]), Err(Error::Shape { .. })));
    }

    #[test]
    fn family_rows() {
        let fam = ArrayFamily::product(vec![ArrayFamily::rademacher(), ArrayFamily::eta(0.3)]);
        assert_eq!(fam.dim(), 2);
        let row = fam.row(5).unwrap();
        assert!(row.is_validated());
        assert_eq!(row.dim(), 2);
        assert_eq!(ArrayFamily::eta(0.5).row(2).unwrap(), build_eta_row(0.5, 2).unwrap());
    }
}
