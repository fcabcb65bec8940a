//! Stein-equation machinery for Fourier test functions `h = e_t`.
//!
//! The solution of `<x, ∇f(x)> − Δf(x) = E[h(Ξ)] − h(x)` is
//!
//! ```text
//! f_{e_t}(x) = ∫₀¹ (1/2s) [e^{−|t|²/2} − e^{−i√s<t,x> − (1−s)|t|²/2}] ds
//! ```
//!
//! with gradient `(it/2) ∫₀¹ s^{−1/2} e^{…} ds` and Hessian
//! `½ tt^τ ∫₀¹ e^{…} ds`. Every s-integrand here is analytic in `√s`, so all
//! integrals run through the `s = u²` substitution.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::gauss_hermite_expect;
use crate::numerics::linalg::{dot, outer_product, ComplexMatrix, RealVector};
use crate::numerics::quadrature::{integrate_unit, QuadratureSpec, Singularity};

pub const GRADIENT_FD_STEP: f64 = 1e-5;
pub const HESSIAN_FD_STEP: f64 = 1e-4;
pub const MIN_HERMITE_LEVEL: usize = 20;

/// Tolerance used for the solution values feeding finite differences.
const FD_SPEC_TOL: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteinEval {
    pub t: RealVector,
    pub x: RealVector,
    pub value: Complex64,
    pub est_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteinGradient {
    pub t: RealVector,
    pub x: RealVector,
    pub value: Vec<Complex64>,
    pub est_error: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HessianMethod {
    ClosedForm,
    QuadratureRepresentation,
    FiniteDifference,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HessianEval {
    pub t: RealVector,
    pub x: RealVector,
    pub matrix: ComplexMatrix,
    pub method: HessianMethod,
    pub est_error: f64,
}

/// e^z − 1 without cancellation for small |z|.
pub(crate) fn cexpm1(z: Complex64) -> Complex64 {
    let (s, c) = z.im.sin_cos();
    let half = (0.5 * z.im).sin();
    Complex64::new(
        z.re.exp_m1() * c - 2.0 * half * half,
        z.re.exp() * s,
    )
}

fn check_pair(t: &RealVector, x: &RealVector) -> Result<()> {
    x.check_dim(t.dim())
}

fn hinted(spec: &QuadratureSpec) -> QuadratureSpec {
    spec.with_singularity(Singularity::InverseSqrtAtZero)
}

/// e^{−i√s a − (1−s)τ/2} with a = <t,x>, τ = |t|².
#[inline]
fn kernel(s: f64, a: f64, tau: f64) -> Complex64 {
    Complex64::new(-0.5 * (1.0 - s) * tau, -s.sqrt() * a).exp()
}

pub fn stein_solution(t: &RealVector, x: &RealVector, spec: &QuadratureSpec) -> Result<SteinEval> {
    check_pair(t, x)?;
    let a = t.dot(x.as_slice());
    let tau = t.norm_sq();
    let g = (-0.5 * tau).exp();
    // e^{−τ/2} − e^{−i√s a − (1−s)τ/2} = −e^{−τ/2}·expm1(−i√s a + sτ/2)
    let integral = integrate_unit(
        |s| {
            if s == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let z = Complex64::new(0.5 * s * tau, -s.sqrt() * a);
            -cexpm1(z) * (g / (2.0 * s))
        },
        &hinted(spec),
    )?;
    Ok(SteinEval {
        t: t.clone(),
        x: x.clone(),
        value: integral.value,
        est_error: integral.error,
    })
}

pub fn stein_gradient(t: &RealVector, x: &RealVector, spec: &QuadratureSpec) -> Result<SteinGradient> {
    check_pair(t, x)?;
    let a = t.dot(x.as_slice());
    let tau = t.norm_sq();
    let integral = integrate_unit(|s| kernel(s, a, tau) / s.sqrt(), &hinted(spec))?;
    let scale = Complex64::new(0.0, 0.5) * integral.value;
    let tmax = t.as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(SteinGradient {
        t: t.clone(),
        x: x.clone(),
        value: t.as_slice().iter().map(|&tl| scale * tl).collect(),
        est_error: 0.5 * tmax * integral.error,
    })
}

/// ∫₀¹ e^{−i√s<t,x> − ½(1−s)|t|²} ds.
fn hessian_scalar(t: &RealVector, x: &RealVector, spec: &QuadratureSpec) -> Result<(Complex64, f64)> {
    let a = t.dot(x.as_slice());
    let tau = t.norm_sq();
    let r = integrate_unit(|s| kernel(s, a, tau), &hinted(spec))?;
    Ok((r.value, r.error))
}

pub fn hessian_closed_form(t: &RealVector, x: &RealVector, spec: &QuadratureSpec) -> Result<HessianEval> {
    check_pair(t, x)?;
    let (value, error) = hessian_scalar(t, x, spec)?;
    Ok(HessianEval {
        t: t.clone(),
        x: x.clone(),
        matrix: outer_product(t).scale(value * 0.5),
        method: HessianMethod::ClosedForm,
        est_error: 0.5 * t.norm_sq() * error,
    })
}

/// ½ tt^τ ∫₀¹ e_{√s t}(y)[e_{√s t}(x−y) − 1] e^{−½(1−s)|t|²} ds.
pub fn hessian_difference(
    t: &RealVector,
    x: &RealVector,
    y: &RealVector,
    spec: &QuadratureSpec,
) -> Result<ComplexMatrix> {
    check_pair(t, x)?;
    check_pair(t, y)?;
    let ay = t.dot(y.as_slice());
    let diff: Vec<f64> = x.as_slice().iter().zip(y.as_slice()).map(|(a, b)| a - b).collect();
    let ad = dot(t.as_slice(), &diff);
    let tau = t.norm_sq();
    let r = integrate_unit(
        |s| kernel(s, ay, tau) * cexpm1(Complex64::new(0.0, -s.sqrt() * ad)),
        &hinted(spec),
    )?;
    Ok(outer_product(t).scale(r.value * 0.5))
}

/// Hessian from the general representation
/// `−∫₀¹ 1/(2(1−s)) E[e_t(√s x + √(1−s)Ξ)(ΞΞ^τ − I)] ds`,
/// with the Gaussian expectation taken by Gauss–Hermite.
pub fn hessian_quadrature_representation(
    t: &RealVector,
    x: &RealVector,
    spec: &QuadratureSpec,
    level: usize,
) -> Result<HessianEval> {
    check_pair(t, x)?;
    let dim = t.dim();
    let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
    let mut est_error = 0.0f64;
    for l in 0..dim {
        for m in l..dim {
            let r = integrate_unit(
                |s| {
                    let e = shifted_moment(t, x, s, level, l, m).unwrap_or(Complex64::new(f64::NAN, 0.0));
                    -e / (2.0 * (1.0 - s))
                },
                &hinted(spec),
            )?;
            entries[l * dim + m] = r.value;
            entries[m * dim + l] = r.value;
            est_error = est_error.max(r.error);
        }
    }
    Ok(HessianEval {
        t: t.clone(),
        x: x.clone(),
        matrix: ComplexMatrix::from_fn(dim, |l, m| entries[l * dim + m]),
        method: HessianMethod::QuadratureRepresentation,
        est_error,
    })
}

/// E[e_t(√s x + √(1−s)Ξ)(Ξ_l Ξ_m − δ_lm)] by Gauss–Hermite.
fn shifted_moment(t: &RealVector, x: &RealVector, s: f64, level: usize, l: usize, m: usize) -> Result<Complex64> {
    let (rs, rc) = (s.sqrt(), (1.0 - s).sqrt());
    let tx = t.dot(x.as_slice());
    let t = t.as_slice();
    gauss_hermite_expect(t.len(), level, |xi| {
        let phase = rs * tx + rc * dot(t, xi);
        let (sn, cs) = phase.sin_cos();
        let w = xi[l] * xi[m] - if l == m { 1.0 } else { 0.0 };
        Complex64::new(cs * w, -sn * w)
    })
}

/// Central differences of [`stein_solution`], evaluated with tight
/// quadrature tolerances.
pub fn gradient_finite_difference(
    t: &RealVector,
    x: &RealVector,
    spec: &QuadratureSpec,
    step: f64,
) -> Result<Vec<Complex64>> {
    check_pair(t, x)?;
    check_step(step)?;
    let spec = fd_spec(spec);
    (0..x.dim())
        .map(|i| {
            let fp = stein_solution(t, &shift(x, &[(i, step)]), &spec)?.value;
            let fm = stein_solution(t, &shift(x, &[(i, -step)]), &spec)?.value;
            Ok((fp - fm) / (2.0 * step))
        })
        .collect()
}

pub fn hessian_finite_difference(
    t: &RealVector,
    x: &RealVector,
    spec: &QuadratureSpec,
    step: f64,
) -> Result<HessianEval> {
    check_pair(t, x)?;
    check_step(step)?;
    let spec = fd_spec(spec);
    let dim = x.dim();
    let f = |moves: &[(usize, f64)]| -> Result<Complex64> {
        Ok(stein_solution(t, &shift(x, moves), &spec)?.value)
    };
    let f0 = f(&[])?;
    let h2 = step * step;
    let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
    for l in 0..dim {
        let d = (f(&[(l, step)])? - f0 * 2.0 + f(&[(l, -step)])?) / h2;
        entries[l * dim + l] = d;
        for m in l + 1..dim {
            let pp = f(&[(l, step), (m, step)])?;
            let pm = f(&[(l, step), (m, -step)])?;
            let mp = f(&[(l, -step), (m, step)])?;
            let mm = f(&[(l, -step), (m, -step)])?;
            let v = (pp - pm - mp + mm) / (4.0 * h2);
            entries[l * dim + m] = v;
            entries[m * dim + l] = v;
        }
    }
    Ok(HessianEval {
        t: t.clone(),
        x: x.clone(),
        matrix: ComplexMatrix::from_fn(dim, |l, m| entries[l * dim + m]),
        method: HessianMethod::FiniteDifference,
        est_error: f64::NAN,
    })
}

fn check_step(step: f64) -> Result<()> {
    if step > 0.0 && step.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!("finite-difference step must be positive, got {step}")))
    }
}

fn fd_spec(spec: &QuadratureSpec) -> QuadratureSpec {
    spec.with_tolerances(spec.abs_tol.min(FD_SPEC_TOL), spec.rel_tol.min(FD_SPEC_TOL))
}

fn shift(x: &RealVector, moves: &[(usize, f64)]) -> RealVector {
    let mut v = x.as_slice().to_vec();
    for &(i, d) in moves {
        v[i] += d;
    }
    RealVector::new(v).expect("finite shift of a finite vector")
}

/// Both sides of E[e_t(√s x + √(1−s)Ξ)(ΞΞ^τ − I)] = −(1−s)tt^τ e^{−i√s<t,x> − ½(1−s)|t|²}.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpectationIdentity {
    pub quadrature: ComplexMatrix,
    pub closed_form: ComplexMatrix,
    pub residual: ComplexMatrix,
    pub max_residual: f64,
}

pub fn gaussian_expectation_identity(
    t: &RealVector,
    x: &RealVector,
    s: f64,
    level: usize,
) -> Result<ExpectationIdentity> {
    check_pair(t, x)?;
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::param(format!("s must lie in [0, 1], got {s}")));
    }
    if level < MIN_HERMITE_LEVEL {
        return Err(Error::param(format!(
            "Gauss–Hermite level must be at least {MIN_HERMITE_LEVEL}, got {level}"
        )));
    }
    let dim = t.dim();
    let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
    for l in 0..dim {
        for m in l..dim {
            let v = shifted_moment(t, x, s, level, l, m)?;
            entries[l * dim + m] = v;
            entries[m * dim + l] = v;
        }
    }
    let quadrature = ComplexMatrix::from_fn(dim, |l, m| entries[l * dim + m]);
    let closed_form = outer_product(t).scale(kernel(s, t.dot(x.as_slice()), t.norm_sq()) * -(1.0 - s));
    let residual = &quadrature - &closed_form;
    Ok(ExpectationIdentity {
        max_residual: residual.max_abs(),
        quadrature,
        closed_form,
        residual,
    })
}

/// Residuals of the two completing-the-square identities for
/// α = y + i√(1−s)t.
pub fn alpha_identities(y: &RealVector, t: &RealVector, s: f64) -> Result<(f64, f64)> {
    check_pair(t, y)?;
    let c = Complex64::new(0.0, (1.0 - s).sqrt());
    let (y, t) = (y.as_slice(), t.as_slice());
    let alpha: Vec<Complex64> = y.iter().zip(t).map(|(&yl, &tl)| c * tl + yl).collect();
    let aa: Complex64 = alpha.iter().map(|a| a * a).sum();
    let lhs1 = -c * dot(t, y) - 0.5 * dot(y, y);
    let rhs1 = -0.5 * (1.0 - s) * dot(t, t) - 0.5 * aa;
    let r1 = (lhs1 - rhs1).norm();

    let dim = y.len();
    let mut r2 = 0.0f64;
    for l in 0..dim {
        for m in 0..dim {
            let delta = if l == m { 1.0 } else { 0.0 };
            let lhs = Complex64::new(y[l] * y[m] - delta, 0.0);
            let rhs = alpha[l] * alpha[m] - c * t[l] * alpha[m] - c * alpha[l] * t[m]
                - (1.0 - s) * t[l] * t[m]
                - delta;
            r2 = r2.max((lhs - rhs).norm());
        }
    }
    Ok((r1, r2))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteinResidual {
    /// <x, ∇f> − tr Hess f − (e^{−|t|²/2} − e^{−i<t,x>}) from the analytic forms.
    pub residual: Complex64,
    /// The same with gradient and Laplacian taken by central differences.
    pub fd_residual: Complex64,
    /// Quadrature error bound carried into `residual`.
    pub est_error: f64,
}

pub fn stein_residual(
    t: &RealVector,
    x: &RealVector,
    spec: &QuadratureSpec,
    fd_step: f64,
) -> Result<SteinResidual> {
    check_pair(t, x)?;
    check_step(fd_step)?;
    let rhs = Complex64::new((-0.5 * t.norm_sq()).exp(), 0.0) - crate::charfn::fourier(t.as_slice(), x.as_slice());
    let grad = stein_gradient(t, x, spec)?;
    let hess = hessian_closed_form(t, x, spec)?;
    let xg: Complex64 = x.as_slice().iter().zip(&grad.value).map(|(a, g)| g * a).sum();
    let residual = xg - hess.matrix.trace() - rhs;

    let fd_grad = gradient_finite_difference(t, x, spec, fd_step)?;
    let fd_hess = hessian_finite_difference(t, x, spec, fd_step.max(HESSIAN_FD_STEP))?;
    let fd_xg: Complex64 = x.as_slice().iter().zip(&fd_grad).map(|(a, g)| g * a).sum();
    let fd_residual = fd_xg - fd_hess.matrix.trace() - rhs;

    Ok(SteinResidual {
        residual,
        fd_residual,
        est_error: x.norm() * grad.est_error * (x.dim() as f64).sqrt() + hess.est_error * x.dim() as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(c: &[f64]) -> RealVector {
        RealVector::new(c.to_vec()).unwrap()
    }

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    /// Midpoint rule with 10⁶ panels after s = u², applied to the raw
    /// definition without any expm1 rewriting.
    fn midpoint_solution(t: f64, x: f64) -> Complex64 {
        let m = 1_000_000;
        let g = (-0.5 * t * t).exp();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..m {
            let u = (i as f64 + 0.5) / m as f64;
            let s = u * u;
            let e = Complex64::new(-0.5 * (1.0 - s) * t * t, -u * t * x).exp();
            acc += (Complex64::new(g, 0.0) - e) / u;
        }
        acc / m as f64
    }

    #[test]
    fn cexpm1_matches_exp_away_from_zero() {
        let z = Complex64::new(0.3, -1.2);
        assert!((cexpm1(z) - (z.exp() - 1.0)).norm() < 1e-15);
        let tiny = Complex64::new(1e-12, 1e-12);
        assert!((cexpm1(tiny) - (tiny + tiny * tiny / 2.0)).norm() < 1e-30);
    }

    #[test]
    fn solution_examples() {
        let zero = stein_solution(&v(&[0.0]), &v(&[0.4]), &spec()).unwrap();
        assert_eq!(zero.value, Complex64::new(0.0, 0.0));

        for (t, x) in [(1.0, 0.0), (1.0, 0.7), (2.5, -1.3)] {
            let got = stein_solution(&v(&[t]), &v(&[x]), &spec()).unwrap();
            let want = midpoint_solution(t, x);
            assert!((got.value - want).norm() < 1e-9, "t={t} x={x}: {} vs {want}", got.value);
            assert!(got.est_error >= 0.0);
        }

        let a = stein_solution(&v(&[1.2, -0.4]), &v(&[0.5, 0.9]), &spec()).unwrap();
        let b = stein_solution(&v(&[-1.2, 0.4]), &v(&[0.5, 0.9]), &spec()).unwrap();
        assert!((a.value - b.value.conj()).norm() < 1e-14);
        assert!(stein_solution(&v(&[1.0]), &v(&[1.0, 2.0]), &spec()).is_err());
    }

    #[test]
    fn gradient_examples() {
        let g = stein_gradient(&v(&[0.0, 0.0]), &v(&[1.0, 1.0]), &spec()).unwrap();
        assert!(g.value.iter().all(|z| z.norm() == 0.0));

        let (t, x) = (v(&[1.0]), v(&[0.7]));
        let g = stein_gradient(&t, &x, &spec()).unwrap();
        let fd = gradient_finite_difference(&t, &x, &spec(), GRADIENT_FD_STEP).unwrap();
        assert!((g.value[0] - fd[0]).norm() < 1e-6);

        let t = v(&[0.8, -1.5]);
        let g = stein_gradient(&t, &v(&[0.2, 0.3]), &spec()).unwrap();
        let ratio = g.value[1] / g.value[0];
        assert!((ratio - Complex64::new(-1.5 / 0.8, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn gradient_reduction_matches_hermite() {
        // E[e_t(√s x + √(1−s)Ξ) Ξ] = −i√(1−s) t e^{−i√s<t,x> − (1−s)|t|²/2}
        let (t, x) = (1.7, -0.6);
        for s in [0.0, 0.1, 0.5, 0.9, 1.0] {
            let (rs, rc): (f64, f64) = (f64::sqrt(s), f64::sqrt(1.0 - s));
            let gh = gauss_hermite_expect(1, 60, |xi| {
                Complex64::new(0.0, -(rs * t * x + rc * t * xi[0])).exp() * xi[0]
            })
            .unwrap();
            let closed = Complex64::new(0.0, -rc * t) * kernel(s, t * x, t * t);
            assert!((gh - closed).norm() < 1e-12, "s={s}");
        }
    }

    #[test]
    fn hessian_examples() {
        let h = hessian_closed_form(&v(&[0.0, 0.0]), &v(&[2.0, 1.0]), &spec()).unwrap();
        assert_eq!(h.matrix.max_abs(), 0.0);

        let h = hessian_closed_form(&v(&[1.0]), &v(&[0.0]), &spec()).unwrap();
        assert!((h.matrix.get(0, 0).re - (1.0 - (-0.5f64).exp())).abs() < 1e-12);
        assert!((h.matrix.get(0, 0).re - 0.393_469).abs() < 1e-6);

        let t = v(&[1.5, -2.0]);
        let h = hessian_closed_form(&t, &v(&[0.0, 0.0]), &spec()).unwrap();
        let tau = t.norm_sq();
        let want = outer_product(&t).scale(Complex64::new((1.0 - (-0.5 * tau).exp()) / tau, 0.0));
        assert!((&h.matrix - &want).max_abs() < 1e-12);
        assert!(h.matrix.is_symmetric(0.0));
    }

    #[test]
    fn hessian_matches_finite_difference() {
        for (t, x) in [
            (vec![1.0], vec![0.7]),
            (vec![-2.5], vec![3.0]),
            (vec![1.0, 1.0], vec![0.3, -0.7]),
            (vec![2.0, -3.0], vec![-1.5, 2.5]),
        ] {
            let (t, x) = (v(&t), v(&x));
            let h = hessian_closed_form(&t, &x, &spec()).unwrap();
            let fd = hessian_finite_difference(&t, &x, &spec(), HESSIAN_FD_STEP).unwrap();
            assert!((&h.matrix - &fd.matrix).max_abs() < 1e-5);
        }
    }

    #[test]
    fn hessian_representation_agrees() {
        let (t, x) = (v(&[1.0, -0.5]), v(&[0.4, 0.2]));
        let h = hessian_closed_form(&t, &x, &spec()).unwrap();
        let q = hessian_quadrature_representation(&t, &x, &spec(), 40).unwrap();
        assert!((&h.matrix - &q.matrix).max_abs() < 1e-8);
    }

    #[test]
    fn hessian_difference_examples() {
        let t = v(&[1.0]);
        let d = hessian_difference(&t, &v(&[0.3]), &v(&[0.3]), &spec()).unwrap();
        assert_eq!(d.max_abs(), 0.0);
        let d = hessian_difference(&v(&[0.0]), &v(&[1.0]), &v(&[0.0]), &spec()).unwrap();
        assert_eq!(d.max_abs(), 0.0);

        let d = hessian_difference(&t, &v(&[1.0]), &v(&[0.0]), &spec()).unwrap();
        let hx = hessian_closed_form(&t, &v(&[1.0]), &spec()).unwrap();
        let hy = hessian_closed_form(&t, &v(&[0.0]), &spec()).unwrap();
        assert!((&d - &(&hx.matrix - &hy.matrix)).max_abs() < 1e-8);
    }

    #[test]
    fn expectation_identity_examples() {
        let r = gaussian_expectation_identity(&v(&[1.0]), &v(&[3.0]), 0.0, 60).unwrap();
        assert!((r.closed_form.get(0, 0).re + (-0.5f64).exp()).abs() < 1e-15);
        assert!(r.max_residual < 1e-10);

        let r = gaussian_expectation_identity(&v(&[1.3, -0.2]), &v(&[0.5, 0.5]), 1.0, 20).unwrap();
        assert!(r.max_residual < 1e-14);
        let r = gaussian_expectation_identity(&v(&[0.0, 0.0]), &v(&[0.5, 0.5]), 0.3, 30).unwrap();
        assert!(r.max_residual < 1e-14);

        assert!(gaussian_expectation_identity(&v(&[1.0]), &v(&[1.0]), 0.5, 10).is_err());
        assert!(gaussian_expectation_identity(&v(&[1.0]), &v(&[1.0]), 1.5, 60).is_err());
        assert!(matches!(
            gaussian_expectation_identity(&v(&[1.0; 5]), &v(&[1.0; 5]), 0.5, 20),
            Err(Error::UnsupportedDimension { .. })
        ));
    }

    #[test]
    fn alpha_identity_edges() {
        let (y, t) = (v(&[1.5, -2.0]), v(&[0.3, 0.7]));
        assert_eq!(alpha_identities(&y, &t, 1.0).unwrap(), (0.0, 0.0));
        assert_eq!(alpha_identities(&y, &v(&[0.0, 0.0]), 0.4).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn stein_residual_examples() {
        let t = v(&[1.3]);
        let r = stein_residual(&t, &v(&[0.0]), &spec(), GRADIENT_FD_STEP).unwrap();
        assert!(r.residual.norm() < 1e-8);

        let r = stein_residual(&v(&[0.0, 0.0]), &v(&[1.0, 2.0]), &spec(), GRADIENT_FD_STEP).unwrap();
        assert_eq!(r.residual, Complex64::new(0.0, 0.0));

        let r = stein_residual(&v(&[1.0, 1.0]), &v(&[0.3, -0.7]), &spec(), GRADIENT_FD_STEP).unwrap();
        assert!(r.residual.norm() < 1e-7);
        assert!(r.fd_residual.norm() < 1e-5);
        assert!(stein_residual(&t, &v(&[0.0]), &spec(), 0.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn alpha_identities_hold(
            y in prop::collection::vec(-5.0f64..5.0, 1..=4),
            t in prop::collection::vec(-5.0f64..5.0, 4),
            s in 0.0f64..=1.0,
        ) {
            let t = v(&t[..y.len()]);
            let (r1, r2) = alpha_identities(&v(&y), &t, s).unwrap();
            prop_assert!(r1 < 1e-12 && r2 < 1e-12, "{r1} {r2}");
        }

        #[test]
        fn hessian_difference_is_difference(
            t in -3.0f64..3.0, x in -3.0f64..3.0, y in -3.0f64..3.0,
        ) {
            let (t, x, y) = (v(&[t]), v(&[x]), v(&[y]));
            let d = hessian_difference(&t, &x, &y, &spec()).unwrap();
            let hx = hessian_closed_form(&t, &x, &spec()).unwrap();
            let hy = hessian_closed_form(&t, &y, &spec()).unwrap();
            prop_assert!((&d - &(&hx.matrix - &hy.matrix)).max_abs() < 1e-8);
        }

        #[test]
        fn closed_form_hessian_is_rank_one(
            t in prop::collection::vec(-3.0f64..3.0, 2), x in prop::collection::vec(-3.0f64..3.0, 2),
        ) {
            let h = hessian_closed_form(&v(&t), &v(&x), &spec()).unwrap();
            let m = &h.matrix;
            let det = m.get(0, 0) * m.get(1, 1) - m.get(0, 1) * m.get(1, 0);
            prop_assert!(det.norm() < 1e-12 * (1.0 + m.max_abs().powi(2)));
            prop_assert!(m.is_symmetric(0.0));
        }
    }
}
