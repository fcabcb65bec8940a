//! Standard triangular arrays of finitely supported random N-vectors.
//!
//! Each row is a list of independent, mean-zero cells whose covariances sum
//! to the identity. Builders are provided for the η_α family (Lindeberg
//! index α), the scaled Rademacher family, and coordinatewise products.

mod cell;
mod family;
mod row;
pub mod spec;

pub use cell::{Atom, DiscreteCell};
pub use family::{
    build_eta_row, build_eta_row_with, build_product_row, build_product_row_with_cap,
    build_rademacher_row, eta_beta, eta_s_squared, ArrayFamily, FamilyKind, DEFAULT_ATOM_CAP,
};
pub use row::{validate_row, ArrayRow, RowMetadata, ValidationReport, DEFAULT_TOL_COV, DEFAULT_TOL_MEAN};
pub use spec::{load_row_spec, serialize_family, serialize_row, LoadedSpec, ROW_SCHEMA};
