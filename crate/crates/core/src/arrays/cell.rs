use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::linalg::dot;

/// One support point of a [`DiscreteCell`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    #[serde(rename = "x")]
    pub point: Vec<f64>,
    #[serde(rename = "p")]
    pub prob: f64,
}

impl Atom {
    pub fn new(point: Vec<f64>, prob: f64) -> Self {
        Self { point, prob }
    }

    pub fn norm_sq(&self) -> f64 {
        dot(&self.point, &self.point)
    }

    /// Euclidean norm; exact `|x|` in one dimension.
    pub fn norm(&self) -> f64 {
        match self.point.as_slice() {
            [x] => x.abs(),
            p => dot(p, p).sqrt(),
        }
    }
}

/// A finitely supported distribution on R^N.
///
/// Atoms are kept canonical: distinct points, sorted lexicographically,
/// strictly positive probabilities. Whether probabilities sum to one and the
/// mean vanishes is checked by row validation, not here, so that invalid
/// input can still be reported on.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteCell {
    dim: usize,
    atoms: Vec<Atom>,
    cumulative: Vec<f64>,
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

impl DiscreteCell {
    /// Builds a cell, merging coincident points and dropping zero-probability
    /// atoms.
    pub fn new(dim: usize, atoms: Vec<Atom>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("cell dimension must be at least 1"));
        }
        for atom in &atoms {
            if atom.point.len() != dim {
                return Err(Error::Shape {
                    expected: dim,
                    got: atom.point.len(),
                });
            }
            if atom.point.iter().any(|c| !c.is_finite()) {
                return Err(Error::param("atom coordinates must be finite"));
            }
            if !(atom.prob.is_finite() && (0.0..=1.0).contains(&atom.prob)) {
                return Err(Error::param(format!(
                    "atom probability {} outside [0, 1]",
                    atom.prob
                )));
            }
        }
        let mut atoms: Vec<Atom> = atoms.into_iter().filter(|a| a.prob > 0.0).collect();
        if atoms.is_empty() {
            return Err(Error::param("cell has no atoms with positive probability"));
        }
        atoms.sort_by(|a, b| lex_cmp(&a.point, &b.point));
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for atom in atoms {
            match merged.last_mut() {
                Some(last) if last.point == atom.point => last.prob += atom.prob,
                _ => merged.push(atom),
            }
        }
        let mut acc = 0.0;
        let cumulative = merged
            .iter()
            .map(|a| {
                acc += a.prob;
                acc
            })
            .collect();
        Ok(Self {
            dim,
            atoms: merged,
            cumulative,
        })
    }

    /// Symmetric two-point cell `±x` with probability ½ each.
    pub fn symmetric(point: Vec<f64>) -> Result<Self> {
        let neg = point.iter().map(|c| -c).collect();
        let dim = point.len();
        Self::new(dim, vec![Atom::new(neg, 0.5), Atom::new(point, 0.5)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn prob_sum(&self) -> f64 {
        self.atoms.iter().map(|a| a.prob).sum()
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for a in &self.atoms {
            for (mi, xi) in m.iter_mut().zip(&a.point) {
                *mi += a.prob * xi;
            }
        }
        m
    }

    /// E|X|².
    pub fn second_moment(&self) -> f64 {
        self.atoms.iter().map(|a| a.prob * a.norm_sq()).sum()
    }

    /// Covariance matrix, row-major N×N.
    pub fn covariance(&self) -> Vec<f64> {
        let n = self.dim;
        let mean = self.mean();
        let mut cov = vec![0.0; n * n];
        for a in &self.atoms {
            for l in 0..n {
                for m in 0..n {
                    cov[l * n + m] += a.prob * a.point[l] * a.point[m];
                }
            }
        }
        for l in 0..n {
            for m in 0..n {
                cov[l * n + m] -= mean[l] * mean[m];
            }
        }
        cov
    }

    /// P[|X| > threshold] (strict).
    pub fn tail_prob(&self, threshold: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.norm() > threshold)
            .map(|a| a.prob)
            .sum()
    }

    /// Largest atom norm.
    pub fn max_norm(&self) -> f64 {
        self.atoms.iter().map(Atom::norm).fold(0.0, f64::max)
    }

    /// Inverse-CDF draw for `u` uniform on [0, 1).
    pub fn sample_point(&self, u: f64) -> &[f64] {
        let target = u * self.cumulative[self.cumulative.len() - 1];
        let i = self.cumulative.partition_point(|&c| c <= target);
        &self.atoms[i.min(self.atoms.len() - 1)].point
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form_merges_and_sorts() {
        let cell = DiscreteCell::new(
            1,
            vec![
                Atom::new(vec![1.0], 0.25),
                Atom::new(vec![-1.0], 0.5),
                Atom::new(vec![1.0], 0.25),
                Atom::new(vec![3.0], 0.0),
            ],
        )
        .unwrap();
        assert_eq!(
            cell.atoms(),
            &[Atom::new(vec![-1.0], 0.5), Atom::new(vec![1.0], 0.5)]
        );
    }

    #[test]
    fn moments() {
        let cell = DiscreteCell::new(
            2,
            vec![
                Atom::new(vec![1.0, 0.0], 0.5),
                Atom::new(vec![-1.0, 2.0], 0.5),
            ],
        )
        .unwrap();
        assert_eq!(cell.mean(), vec![0.0, 1.0]);
        assert_eq!(cell.second_moment(), 3.0);
        assert_eq!(cell.covariance(), vec![1.0, -1.0, -1.0, 1.0]);
    }

    #[test]
    fn rejects_bad_atoms() {
        assert!(DiscreteCell::new(1, vec![Atom::new(vec![1.0, 2.0], 1.0)]).is_err());
        assert!(DiscreteCell::new(1, vec![Atom::new(vec![1.0], 1.5)]).is_err());
        assert!(DiscreteCell::new(1, vec![Atom::new(vec![f64::INFINITY], 1.0)]).is_err());
        assert!(DiscreteCell::new(1, vec![]).is_err());
    }

    #[test]
    fn sampling_follows_cumulative() {
        let cell = DiscreteCell::symmetric(vec![0.5]).unwrap();
        assert_eq!(cell.sample_point(0.0), &[-0.5]);
        assert_eq!(cell.sample_point(0.49), &[-0.5]);
        assert_eq!(cell.sample_point(0.5), &[0.5]);
        assert_eq!(cell.sample_point(0.999), &[0.5]);
    }

    #[test]
    fn tail_prob_is_strict() {
        let cell = DiscreteCell::symmetric(vec![0.5]).unwrap();
        assert_eq!(cell.tail_prob(0.5), 0.0);
        assert_eq!(cell.tail_prob(0.4), 1.0);
    }
}
