//! Adaptive quadrature of complex-valued integrands over [0, 1].
//!
//! Each panel is integrated with a 20-point Gauss–Legendre rule and the error
//! is estimated by comparing against the embedded-order 10-point rule. The
//! panel with the largest error estimate is bisected until the summed error
//! meets `max(abs_tol, rel_tol * |I|)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const LOW_ORDER: usize = 10;
const HIGH_ORDER: usize = 20;
const MIN_PANEL_WIDTH: f64 = 1e-14;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Singularity {
    #[default]
    None,
    /// Integrand behaves like `s^{-1/2}` near zero. The substitution
    /// `s = u^2` is applied before adaptive integration.
    InverseSqrtAtZero,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub singularity: Singularity,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-9,
            rel_tol: 1e-9,
            singularity: Singularity::None,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureSpec {
    pub fn with_singularity(mut self, singularity: Singularity) -> Self {
        self.singularity = singularity;
        self
    }

    pub fn with_tolerances(mut self, abs_tol: f64, rel_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self.rel_tol = rel_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::param(format!(
                "quadrature tolerances must be positive (abs {}, rel {})",
                self.abs_tol, self.rel_tol
            )));
        }
        if self.max_subdivisions < 1 {
            return Err(Error::param("max_subdivisions must be at least 1"));
        }
        Ok(())
    }
}

/// Result of [`integrate_unit`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: Complex64,
    pub error: f64,
    pub panels: usize,
}

struct Rule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration on the
/// three-term Legendre recurrence.
fn gauss_legendre(order: usize) -> Rule {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let half = order.div_ceil(2);
    for i in 0..half {
        let mut z = (PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
        let mut dp;
        loop {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=order {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            dp = order as f64 * (z * p1 - p0) / (z * z - 1.0);
            let step = p1 / dp;
            z -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[order - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    Rule { nodes, weights }
}

fn rules() -> &'static (Rule, Rule) {
    static RULES: OnceLock<(Rule, Rule)> = OnceLock::new();
    RULES.get_or_init(|| (gauss_legendre(LOW_ORDER), gauss_legendre(HIGH_ORDER)))
}

struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn eval_panel<F>(f: &F, a: f64, b: f64) -> Result<Panel>
where
    F: Fn(f64) -> Complex64,
{
    let (low, high) = rules();
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut hi = Complex64::new(0.0, 0.0);
    for (x, w) in high.nodes.iter().zip(&high.weights) {
        let s = mid + half * x;
        let v = f(s);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::Domain { at: s });
        }
        hi += v * *w;
    }
    let mut lo = Complex64::new(0.0, 0.0);
    for (x, w) in low.nodes.iter().zip(&low.weights) {
        let s = mid + half * x;
        let v = f(s);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::Domain { at: s });
        }
        lo += v * *w;
    }
    let value = hi * half;
    let error = ((hi - lo) * half).norm();
    Ok(Panel { a, b, value, error })
}

fn adaptive<F>(f: &F, spec: &QuadratureSpec) -> Result<Integral>
where
    F: Fn(f64) -> Complex64,
{
    let mut heap = BinaryHeap::new();
    heap.push(eval_panel(f, 0.0, 1.0)?);
    loop {
        let value: Complex64 = heap.iter().map(|p| p.value).sum();
        let error: f64 = heap.iter().map(|p| p.error).sum();
        let target = spec.abs_tol.max(spec.rel_tol * value.norm());
        if error <= target {
            return Ok(Integral {
                value,
                error,
                panels: heap.len(),
            });
        }
        let worst = heap.peek().expect("heap never empty");
        if heap.len() >= spec.max_subdivisions || worst.b - worst.a < MIN_PANEL_WIDTH {
            return Err(Error::Convergence {
                estimate: value,
                error,
                subdivisions: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap never empty");
        let mid = 0.5 * (worst.a + worst.b);
        heap.push(eval_panel(f, worst.a, mid)?);
        heap.push(eval_panel(f, mid, worst.b)?);
    }
}

/// Integrates `f` over [0, 1].
///
/// With [`Singularity::InverseSqrtAtZero`] the integral is rewritten as
/// `∫₀¹ 2u f(u²) du`, which is bounded whenever `f(s)·√s` is. The same
/// substitution makes integrands that are smooth in `√s` (but not in `s`)
/// analytic, so callers use it for those too.
pub fn integrate_unit<F>(f: F, spec: &QuadratureSpec) -> Result<Integral>
where
    F: Fn(f64) -> Complex64,
{
    spec.validate()?;
    match spec.singularity {
        Singularity::None => adaptive(&f, spec),
        Singularity::InverseSqrtAtZero => {
            let g = |u: f64| f(u * u) * (2.0 * u);
            adaptive(&g, spec)
        }
    }
}

/// Integrates a real-valued `f` over [0, 1].
pub fn integrate_unit_real<F>(f: F, spec: &QuadratureSpec) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let r = integrate_unit(|s| Complex64::new(f(s), 0.0), spec)?;
    Ok((r.value.re, r.error))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn legendre_rules_are_exact_for_polynomials() {
        let (low, high) = rules();
        assert!((low.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        assert!((high.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        // degree 2n-1 exactness
        let m: f64 = high.nodes.iter().zip(&high.weights).map(|(x, w)| w * x.powi(38)).sum();
        assert!((m - 2.0 / 39.0).abs() < 1e-14);
    }

    #[test]
    fn constant_integrand() {
        let r = integrate_unit(|_| c(1.0), &QuadratureSpec::default()).unwrap();
        assert!((r.value - c(1.0)).norm() < 1e-14);
    }

    #[test]
    fn inverse_sqrt_with_hint() {
        let spec = QuadratureSpec::default().with_singularity(Singularity::InverseSqrtAtZero);
        let r = integrate_unit(|s| c(0.5 / s.sqrt()), &spec).unwrap();
        assert!((r.value - c(1.0)).norm() < 1e-13);
    }

    #[test]
    fn exponential_against_riemann_oracle() {
        // midpoint Riemann sum with 10^6 points as independent oracle
        let m = 1_000_000;
        let h = 1.0 / m as f64;
        let riemann: f64 = (0..m)
            .map(|i| (-(1.0 - (i as f64 + 0.5) * h) / 2.0).exp() * h)
            .sum();
        let closed = 2.0 * (1.0 - (-0.5f64).exp());
        assert!((riemann - closed).abs() < 1e-10);
        assert!((closed - 0.786_939).abs() < 1e-6);
        let r = integrate_unit(|s| c((-(1.0 - s) / 2.0).exp()), &QuadratureSpec::default()).unwrap();
        assert!((r.value.re - closed).abs() < 1e-12);
        assert_eq!(r.value.im, 0.0);
    }

    #[test]
    fn oscillatory_complex_integrand() {
        // ∫₀¹ e^{-i 40 s} ds = (1 - e^{-40 i}) / (40 i)
        let exact = (c(1.0) - Complex64::new(0.0, -40.0).exp()) / Complex64::new(0.0, 40.0);
        let r = integrate_unit(|s| Complex64::new(0.0, -40.0 * s).exp(), &QuadratureSpec::default())
            .unwrap();
        assert!((r.value - exact).norm() < 1e-10);
    }

    #[test]
    fn non_finite_integrand_is_domain_error() {
        let err = integrate_unit(|_| c(f64::NAN), &QuadratureSpec::default()).unwrap_err();
        assert!(matches!(err, Error::Domain { .. }));
    }

    #[test]
    fn unreachable_tolerance_is_convergence_error() {
        let spec = QuadratureSpec {
            max_subdivisions: 4,
            ..QuadratureSpec::default()
        };
        // 1/√s without the hint: integrable but not resolvable in 4 panels
        let err = integrate_unit(|s| c(1.0 / s.sqrt()), &spec).unwrap_err();
        match err {
            Error::Convergence { estimate, error, .. } => {
                assert!(estimate.re > 1.0 && error > 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_spec() {
        let spec = QuadratureSpec {
            abs_tol: 0.0,
            ..QuadratureSpec::default()
        };
        assert!(matches!(
            integrate_unit(|_| c(1.0), &spec),
            Err(Error::Parameter(_))
        ));
    }

    fn poly(coeffs: &[f64], s: f64) -> f64 {
        coeffs.iter().rev().fold(0.0, |acc, c| acc * s + c)
    }

    proptest! {
        #[test]
        fn linear_in_integrand(
            f in prop::collection::vec(-3.0f64..3.0, 1..8),
            g in prop::collection::vec(-3.0f64..3.0, 1..8),
            a in -2.0f64..2.0,
            b in -2.0f64..2.0,
        ) {
            let spec = QuadratureSpec::default();
            let rf = integrate_unit(|s| c(poly(&f, s)), &spec).unwrap();
            let rg = integrate_unit(|s| c(poly(&g, s)), &spec).unwrap();
            let rfg = integrate_unit(|s| c(a * poly(&f, s) + b * poly(&g, s)), &spec).unwrap();
            let tol = 2.0 * (spec.abs_tol + spec.rel_tol * rfg.value.norm());
            prop_assert!((rfg.value - (rf.value * a + rg.value * b)).norm() <= tol);
        }

        #[test]
        fn inverse_sqrt_weighted_polynomials(p in prop::collection::vec(-3.0f64..3.0, 1..=7)) {
            // ∫₀¹ s^{-1/2} s^j ds = 1/(j + 1/2)
            let exact: f64 = p.iter().enumerate().map(|(j, c)| c / (j as f64 + 0.5)).sum();
            let spec = QuadratureSpec::default().with_singularity(Singularity::InverseSqrtAtZero);
            let r = integrate_unit(|s| c(poly(&p, s) / s.sqrt()), &spec).unwrap();
            prop_assert!((r.value.re - exact).abs() <= spec.abs_tol);
        }
    }
}
