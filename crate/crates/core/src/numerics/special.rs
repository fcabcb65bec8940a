//! Standard normal distribution function.

/// Φ(x) = ½ erfc(−x/√2), using the deterministic `libm` erfc.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    // 30-digit values from mpmath (ncdf).
    const TABLE: &[(f64, f64)] = &[
        (-8.0, 6.22096057427178412352e-16),
        (-5.0, 2.86651571879193911674e-7),
        (-3.0, 0.00134989803163009452665),
        (-1.96, 0.0249978951482204362128),
        (-1.0, 0.158655253931457051415),
        (-0.5, 0.308537538725986896362),
        (-0.1, 0.460172162722971016331),
        (0.0, 0.5),
        (0.25, 0.598706325682923724241),
        (1.0, 0.841344746068542948585),
        (2.0, 0.9772498680518207928),
        (3.5, 0.999767370920964474964),
        (6.0, 0.999999999013412354962),
    ];

    #[test]
    fn matches_reference_table() {
        for &(x, want) in TABLE {
            let got = normal_cdf(x);
            assert!((got - want).abs() < 1e-12, "Φ({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn symmetry() {
        for i in 0..200 {
            let x = -5.0 + 0.05 * i as f64;
            assert!((normal_cdf(x) + normal_cdf(-x) - 1.0).abs() < 1e-15);
        }
    }
}
