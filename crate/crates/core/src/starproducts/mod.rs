//! Star-product constructors and their validators.

mod checks;
mod closed_form;
mod poisson;
mod product;

pub use checks::{
    associativity_defect, check_axioms, monomials, quantum_canonicity_check, star_bracket, AxiomReport,
    CanonicityEntry, CanonicityReport, CheckEntry,
};
pub(crate) use checks::monomial_poly;
pub use closed_form::ck_coordinate_closed_form;
pub use poisson::PoissonTensor;
pub use product::{ProductKind, StarProduct, VectorFieldFrame, MAX_NATURAL_ORDER};
