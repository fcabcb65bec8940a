//! Shared numerical machinery: small linear algebra, quadrature, Gaussian
//! expectations, the normal CDF and the reproducible RNG.

pub mod hermite;
pub mod linalg;
pub mod quadrature;
pub mod rng;
pub mod special;

pub use hermite::gauss_hermite_expect;
pub use quadrature::{integrate_unit, Integral};

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
