//! Derivation and verification of the equivalence morphism to the Moyal product.

mod derive;
mod solvers;
mod tables;
mod verify;

pub use derive::{derive_equivalence, EquivalenceMorphism, OrderRecord, Provenance};
pub use solvers::{eta_from_phi, nested_commutator_solution, rhs_f, rhs_f_parity};
pub use tables::{
    compare_tables, closed_s2_flat, closed_s2_flat_tweaked, closed_s2_symplectic, closed_s4_flat, closed_s4_flat_tweaked,
    CyclConvention, FamilyResult, TableComparison, TableTweak, TensorTable, TermDiff, S2_FLAT, S4_FLAT,
};
pub use verify::{symmetrized_s_on_monomial, verify_intertwining, verify_symmetrization, IntertwiningReport};

#[cfg(test)]
mod tests;
