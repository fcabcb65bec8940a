//! Tensor-product Gauss–Hermite expectations against the standard normal
//! N-vector.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest dimension accepted by [`gauss_hermite_expect`].
pub const MAX_DIM: usize = 4;

/// Nodes and weights for E[g(Z)], Z ~ N(0, 1). Weights sum to one.
#[derive(Debug)]
pub struct HermiteRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Newton iteration on the orthonormal Hermite recurrence (weight e^{-x²}),
/// followed by rescaling to the standard normal weight.
fn compute_rule(level: usize) -> HermiteRule {
    const PI_M4: f64 = 0.751_125_544_464_942_5; // π^{-1/4}
    let n = level;
    let nf = n as f64;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z = 0.0f64;
    for i in 0..n.div_ceil(2) {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.855_75 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = PI_M4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let step = p1 / pp;
            z -= step;
            if step.abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    let inv_sqrt_pi = 1.0 / std::f64::consts::PI.sqrt();
    HermiteRule {
        nodes: x.iter().rev().map(|z| z * std::f64::consts::SQRT_2).collect(),
        weights: w.iter().rev().map(|w| w * inv_sqrt_pi).collect(),
    }
}

/// Cached rule for `level` nodes.
pub fn hermite_rule(level: usize) -> Result<Arc<HermiteRule>> {
    if level == 0 {
        return Err(Error::param("Gauss–Hermite level must be at least 1"));
    }
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<HermiteRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    Ok(guard
        .entry(level)
        .or_insert_with(|| Arc::new(compute_rule(level)))
        .clone())
}

/// Tensor-product approximation of E[g(Ξ)] for Ξ standard normal on R^dim.
pub fn gauss_hermite_expect<G>(dim: usize, level: usize, g: G) -> Result<Complex64>
where
    G: Fn(&[f64]) -> Complex64,
{
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::UnsupportedDimension {
            dim,
            max: MAX_DIM,
            hint: "use Monte Carlo (charfn::empirical_charfn) for higher dimensions",
        });
    }
    let rule = hermite_rule(level)?;
    let mut idx = vec![0usize; dim];
    let mut point = vec![0.0; dim];
    let mut acc = Complex64::new(0.0, 0.0);
    loop {
        let mut weight = 1.0;
        for (d, &i) in idx.iter().enumerate() {
            point[d] = rule.nodes[i];
            weight *= rule.weights[i];
        }
        acc += g(&point) * weight;

        let mut d = 0;
        loop {
            idx[d] += 1;
            if idx[d] < level {
                break;
            }
            idx[d] = 0;
            d += 1;
            if d == dim {
                return Ok(acc);
            }
        }
    }
}
