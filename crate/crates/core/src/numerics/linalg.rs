//! Small dense vectors and matrices.
//!
//! Dimensions here are tiny (N rarely exceeds 4), so everything is stored in
//! flat `Vec`s and operated on with plain loops.

use std::fmt;
use std::ops::{Add, Index, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point in R^N.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RealVector(Vec<f64>);

impl RealVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::param("vector must have at least one coordinate"));
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::param(format!("non-finite coordinate {bad}")));
        }
        Ok(Self(coords))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim.max(1)])
    }

    pub fn scalar(value: f64) -> Self {
        Self(vec![value])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        dot(&self.0, other)
    }

    pub fn norm_sq(&self) -> f64 {
        dot(&self.0, &self.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(self.0.iter().map(|c| c * factor).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }

    pub(crate) fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() == expected {
            Ok(())
        } else {
            Err(Error::Shape {
                expected,
                got: self.dim(),
            })
        }
    }
}

impl Index<usize> for RealVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl fmt::Display for RealVector {
    /// Coordinates joined by `;`, which keeps vectors inside a single CSV field.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut entries = Vec::with_capacity(dim * dim);
        for l in 0..dim {
            for m in 0..dim {
                entries.push(f(l, m));
            }
        }
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.dim).all(|l| (0..l).all(|m| (self.get(l, m) - self.get(m, l)).norm() <= tol))
    }

    /// Bilinear form `<x, M x>` without conjugation.
    pub fn quadratic_form(&self, x: &[f64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for l in 0..self.dim {
            for m in 0..self.dim {
                acc += self.get(l, m) * (x[l] * x[m]);
            }
        }
        acc
    }

    pub fn all_finite(&self) -> bool {
        self.entries.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul<Complex64> for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: Complex64) -> ComplexMatrix {
        self.scale(rhs)
    }
}

/// `t t^τ` as a complex matrix.
pub fn outer_product(t: &RealVector) -> ComplexMatrix {
    let t = t.as_slice();
    ComplexMatrix::from_fn(t.len(), |l, m| Complex64::new(t[l] * t[m], 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn outer_product_examples() {
        let z = outer_product(&RealVector::new(vec![0.0, 0.0]).unwrap());
        assert_eq!(z, ComplexMatrix::zeros(2));

        let e1 = outer_product(&RealVector::new(vec![1.0, 0.0]).unwrap());
        assert_eq!(e1.get(0, 0), Complex64::new(1.0, 0.0));
        assert_eq!(e1.max_abs(), 1.0);
        assert_eq!(e1.get(1, 1), Complex64::new(0.0, 0.0));

        let m = outer_product(&RealVector::new(vec![1.0, 2.0]).unwrap());
        assert_eq!(m.quadratic_form(&[3.0, 4.0]), Complex64::new(121.0, 0.0));
    }

    #[test]
    fn rejects_bad_vectors() {
        assert!(RealVector::new(vec![]).is_err());
        assert!(RealVector::new(vec![1.0, f64::NAN]).is_err());
    }

    proptest! {
        #[test]
        fn outer_product_is_symmetric_psd_with_trace_norm_sq(
            t in prop::collection::vec(-5.0f64..5.0, 1..5),
            x in prop::collection::vec(-5.0f64..5.0, 4),
        ) {
            let n = t.len();
            let tv = RealVector::new(t).unwrap();
            let m = outer_product(&tv);
            prop_assert!(m.is_symmetric(0.0));
            prop_assert!((m.trace().re - tv.norm_sq()).abs() <= 1e-12 * (1.0 + tv.norm_sq()));
            let q = m.quadratic_form(&x[..n]);
            let inner = tv.dot(&x[..n]);
            prop_assert!(q.re >= -1e-12);
            prop_assert!((q.re - inner * inner).abs() <= 1e-10 * (1.0 + inner * inner));
        }
    }
}
