//! Exact scalars, polynomials and truncated ħ-series.

mod multi_index;
mod parse;
mod poly;
mod scalar;
mod series;

pub use multi_index::MultiIndex;
pub use parse::{parse_poly, parse_scalar, phase_space_names};
pub use poly::Poly;
pub(crate) use poly::WireTerm;
pub use scalar::{rat, GaussianRational, Q};
pub use series::HbarSeries;
