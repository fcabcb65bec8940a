//! Numerical companion to the quantitative multivariate Lindeberg CLT for
//! characteristic functions.
//!
//! The crate builds standard triangular arrays of finitely supported random
//! N-vectors ([`arrays`]), evaluates their characteristic functions exactly
//! ([`charfn`]), computes Lindeberg-type truncated moments ([`indices`]),
//! evaluates the Stein solution for Fourier test functions together with its
//! gradient and closed-form Hessian ([`stein`]), and checks the exact
//! characteristic-function identity plus the finite-n inequalities that drive
//! the asymptotic bound ([`clt`]).
//!
//! Sign convention throughout: `e_t(x) = exp(-i<t, x>)`.

pub mod arrays;
pub mod charfn;
pub mod clt;
pub mod error;
pub mod indices;
pub mod numerics;
pub mod stein;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use numerics::linalg::{outer_product, ComplexMatrix, RealVector};
pub use numerics::quadrature::{QuadratureSpec, Singularity};
pub use numerics::rng::RngSeed;
