//! Characteristic functions `φ_H(t) = E[exp(-i<t, H>)]`.
//!
//! Cell and row-sum characteristic functions are exact finite sums and
//! products. Monte Carlo estimates and the one-dimensional Kolmogorov
//! diagnostic share the chunked counter-based RNG so that results do not
//! depend on the thread count.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::arrays::{ArrayRow, DiscreteCell};
use crate::error::{Error, Result};
use crate::numerics::linalg::{dot, RealVector};
use crate::numerics::rng::{map_chunks, RngSeed};
use crate::numerics::special::normal_cdf;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharfnValue {
    pub value: Complex64,
    /// Zero for exact evaluations.
    pub stderr: f64,
}

/// e_t(x) = exp(-i<t, x>).
#[inline]
pub fn fourier(t: &[f64], x: &[f64]) -> Complex64 {
    let (s, c) = dot(t, x).sin_cos();
    Complex64::new(c, -s)
}

pub(crate) fn cell_charfn_raw(cell: &DiscreteCell, t: &[f64]) -> Complex64 {
    cell.atoms()
        .iter()
        .map(|a| fourier(t, &a.point) * a.prob)
        .sum()
}

pub fn cell_charfn(cell: &DiscreteCell, t: &RealVector) -> Result<Complex64> {
    t.check_dim(cell.dim())?;
    Ok(cell_charfn_raw(cell, t.as_slice()))
}

/// φ_{Σ_n}(t) = Π_k φ_{Ξ_{n,k}}(t), exact by independence.
pub fn row_sum_charfn(row: &ArrayRow, t: &RealVector) -> Result<Complex64> {
    row.require_validated()?;
    t.check_dim(row.dim())?;
    Ok(row
        .cells()
        .iter()
        .map(|c| cell_charfn_raw(c, t.as_slice()))
        .product())
}

/// φ_Ξ(t) = exp(-|t|²/2).
pub fn gaussian_charfn(t: &RealVector) -> Complex64 {
    Complex64::new((-0.5 * t.norm_sq()).exp(), 0.0)
}

/// |φ_Ξ(t) − φ_{Σ_n}(t)|, always in [0, 2].
pub fn charfn_gap(row: &ArrayRow, t: &RealVector) -> Result<f64> {
    Ok((gaussian_charfn(t) - row_sum_charfn(row, t)?).norm())
}

fn draw_sum<R: Rng>(row: &ArrayRow, rng: &mut R, out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    for cell in row.cells() {
        let p = cell.sample_point(rng.random::<f64>());
        for (o, x) in out.iter_mut().zip(p) {
            *o += x;
        }
    }
}

/// Monte Carlo estimate of φ_{Σ_n}(t) from `samples` independent row sums.
pub fn empirical_charfn(
    row: &ArrayRow,
    t: &RealVector,
    samples: usize,
    seed: RngSeed,
) -> Result<CharfnValue> {
    row.require_validated()?;
    t.check_dim(row.dim())?;
    if samples < 1 {
        return Err(Error::param("samples must be at least 1"));
    }
    let dim = row.dim();
    let partials = map_chunks(samples, seed, |rng, count| {
        let mut point = vec![0.0; dim];
        let mut acc = [0.0f64; 4];
        for _ in 0..count {
            draw_sum(row, rng, &mut point);
            let z = fourier(t.as_slice(), &point);
            acc[0] += z.re;
            acc[1] += z.im;
            acc[2] += z.re * z.re;
            acc[3] += z.im * z.im;
        }
        acc
    });
    let mut tot = [0.0f64; 4];
    for p in &partials {
        for (a, b) in tot.iter_mut().zip(p) {
            *a += b;
        }
    }
    let m = samples as f64;
    let value = Complex64::new(tot[0] / m, tot[1] / m);
    let stderr = if samples > 1 {
        let var_re = ((tot[2] - tot[0] * tot[0] / m) / (m - 1.0)).max(0.0);
        let var_im = ((tot[3] - tot[1] * tot[1] / m) / (m - 1.0)).max(0.0);
        ((var_re + var_im) / m).sqrt()
    } else {
        0.0
    };
    Ok(CharfnValue { value, stderr })
}

/// sup_x |F̂_n(x) − Φ(x)| over the empirical distribution of `samples` row
/// sums, evaluated on both sides of every jump.
pub fn kolmogorov_mc(row: &ArrayRow, samples: usize, seed: RngSeed) -> Result<f64> {
    row.require_validated()?;
    if row.dim() != 1 {
        return Err(Error::UnsupportedDimension {
            dim: row.dim(),
            max: 1,
            hint: "the Kolmogorov diagnostic is one-dimensional",
        });
    }
    if samples < 1 {
        return Err(Error::param("samples must be at least 1"));
    }
    let chunks = map_chunks(samples, seed, |rng, count| {
        let mut point = [0.0];
        (0..count)
            .map(|_| {
                draw_sum(row, rng, &mut point);
                point[0]
            })
            .collect::<Vec<f64>>()
    });
    let mut draws: Vec<f64> = chunks.into_iter().flatten().collect();
    draws.sort_by(f64::total_cmp);
    Ok(ecdf_sup_distance(&draws, normal_cdf))
}

/// Two-sided sup distance between the ECDF of sorted `draws` and `cdf`.
pub fn ecdf_sup_distance(draws: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let m = draws.len() as f64;
    let mut sup = 0.0f64;
    let mut i = 0;
    while i < draws.len() {
        let v = draws[i];
        let mut j = i;
        while j < draws.len() && draws[j] == v {
            j += 1;
        }
        let f = cdf(v);
        let left = i as f64 / m;
        let right = j as f64 / m;
        sup = sup.max((left - f).abs()).max((right - f).abs());
        i = j;
    }
    sup
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrays::{build_eta_row, build_rademacher_row, Atom};
    use crate::numerics::compensated_sum;

    fn t1(v: f64) -> RealVector {
        RealVector::scalar(v)
    }

    #[test]
    fn cell_examples() {
        let coin = DiscreteCell::symmetric(vec![1.0]).unwrap();
        assert!((cell_charfn(&coin, &t1(1.0)).unwrap() - Complex64::new(1f64.cos(), 0.0)).norm() < 1e-16);
        assert_eq!(cell_charfn(&coin, &t1(0.0)).unwrap(), Complex64::new(1.0, 0.0));
        let half = DiscreteCell::symmetric(vec![0.5]).unwrap();
        assert!(cell_charfn(&half, &t1(std::f64::consts::PI)).unwrap().norm() < 1e-16);
        assert!(matches!(
            cell_charfn(&coin, &RealVector::new(vec![1.0, 0.0]).unwrap()),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn sign_convention() {
        let cell = DiscreteCell::new(1, vec![Atom::new(vec![1.0], 1.0)]).unwrap();
        let z = cell_charfn(&cell, &t1(0.3)).unwrap();
        assert!((z - Complex64::new(0.0, -0.3).exp()).norm() < 1e-16);
    }

    #[test]
    fn row_examples() {
        let r25 = build_rademacher_row(25).unwrap();
        let v = row_sum_charfn(&r25, &t1(1.0)).unwrap();
        let expect = 0.2f64.cos().powi(25);
        assert!((v.re - expect).abs() < 1e-15 && v.im == 0.0);
        assert!((expect - 0.604_490).abs() < 1e-6);
        assert_eq!(row_sum_charfn(&r25, &t1(0.0)).unwrap(), Complex64::new(1.0, 0.0));

        let eta1 = build_eta_row(0.5, 1).unwrap();
        let v = row_sum_charfn(&eta1, &t1(2.0)).unwrap();
        assert!((v.re - 2f64.cos()).abs() < 1e-15);
    }

    #[test]
    fn row_charfn_matches_exhaustive_enumeration() {
        // all 2^20 sign paths of the n = 20 Rademacher row
        let n = 20;
        let row = build_rademacher_row(n).unwrap();
        let x = 1.0 / (n as f64).sqrt();
        let t = 1.3;
        let terms: Vec<Complex64> = (0u32..(1 << n))
            .map(|mask| {
                let s = (0..n).map(|k| if mask >> k & 1 == 1 { x } else { -x }).sum::<f64>();
                Complex64::new(0.0, -t * s).exp()
            })
            .collect();
        let m = (1u64 << n) as f64;
        let acc = Complex64::new(
            compensated_sum(terms.iter().map(|z| z.re)) / m,
            compensated_sum(terms.iter().map(|z| z.im)) / m,
        );
        let diff = (acc - row_sum_charfn(&row, &t1(t)).unwrap()).norm();
        assert!(diff < 1e-12, "{diff}");
    }

    #[test]
    fn gaussian_examples() {
        assert_eq!(gaussian_charfn(&t1(0.0)).re, 1.0);
        let t = RealVector::new(vec![1.0, 1.0]).unwrap();
        assert!((gaussian_charfn(&t).re - (-1f64).exp()).abs() < 1e-16);
        let gh = crate::numerics::gauss_hermite_expect(1, 40, |x| fourier(&[1.0], x)).unwrap();
        assert!((gaussian_charfn(&t1(1.0)) - gh).norm() < 1e-13);
    }

    #[test]
    fn gap_examples() {
        let r25 = build_rademacher_row(25).unwrap();
        assert_eq!(charfn_gap(&r25, &t1(0.0)).unwrap(), 0.0);
        let g = charfn_gap(&r25, &t1(1.0)).unwrap();
        assert!((g - ((-0.5f64).exp() - 0.2f64.cos().powi(25))).abs() < 1e-15);
        assert!((g - 0.002_040).abs() < 1e-6);
        let r10 = build_rademacher_row(10).unwrap();
        let g = charfn_gap(&r10, &t1(std::f64::consts::PI * 10f64.sqrt())).unwrap();
        assert!((g - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empirical_basics() {
        let r25 = build_rademacher_row(25).unwrap();
        let seed = RngSeed::new(11, 0);
        let zero = empirical_charfn(&r25, &t1(0.0), 1000, seed).unwrap();
        assert_eq!(zero.value, Complex64::new(1.0, 0.0));
        assert_eq!(zero.stderr, 0.0);
        let a = empirical_charfn(&r25, &t1(1.0), 100_000, seed).unwrap();
        let b = empirical_charfn(&r25, &t1(1.0), 100_000, seed).unwrap();
        assert_eq!(a.value.re.to_bits(), b.value.re.to_bits());
        assert_eq!(a.value.im.to_bits(), b.value.im.to_bits());
        let exact = 0.2f64.cos().powi(25);
        assert!((a.value - Complex64::new(exact, 0.0)).norm() < 4.0 * a.stderr);
        assert!(empirical_charfn(&r25, &t1(1.0), 0, seed).is_err());
    }

    #[test]
    fn kolmogorov_coin() {
        let coin = build_rademacher_row(1).unwrap();
        let d = kolmogorov_mc(&coin, 200_000, RngSeed::new(5, 1)).unwrap();
        let exact = normal_cdf(1.0) - 0.5;
        assert!((exact - 0.341_345).abs() < 1e-6);
        assert!((d - exact).abs() < 0.01, "{d}");
    }

    #[test]
    fn kolmogorov_rejects_vectors() {
        let r = build_rademacher_row(2).unwrap();
        let p = crate::arrays::build_product_row(&[r.clone(), r]).unwrap();
        assert!(matches!(
            kolmogorov_mc(&p, 10, RngSeed::default()),
            Err(Error::UnsupportedDimension { .. })
        ));
    }

    #[test]
    fn ecdf_distance_two_point_law() {
        // exact ECDF of a fair coin on ±1
        let draws = [-1.0, 1.0];
        let d = ecdf_sup_distance(&draws, normal_cdf);
        assert!((d - (normal_cdf(1.0) - 0.5)).abs() < 1e-15);
    }
}
