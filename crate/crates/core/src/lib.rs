//! Exact symbolic engine for star-products on polynomial phase spaces.
//!
//! The crate builds star-products (Moyal, vector-field, natural products on
//! cotangent bundles of flat manifolds, second-order symplectic products) as
//! lists of bidifferential operators with exact Gaussian-rational
//! coefficients, and derives order by order in ħ the unique equivalence
//! morphism `S = id + Σ ħᵏ Sₖ` intertwining the Moyal product with a given
//! product written in quantum canonical coordinates.

pub mod algebra;
pub mod equivalence;
pub mod error;
pub mod geometry;
pub mod operators;
pub mod starproducts;

pub use error::{Error, Result};

/// Version string recorded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
