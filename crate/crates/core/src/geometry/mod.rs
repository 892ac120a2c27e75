//! Affine connections on the base, their cotangent lifts and covariant jets.

mod connection;
mod jets;

pub(crate) use connection::{canonical_sign, flat_index, tuples};
pub use connection::{
    all_zero, flat_connection_from_diffeo, lift_connection, ricci, AffineConnection, Connection, Curvature,
    LiftedConnection, SymplecticConnectionSpec,
};
pub use jets::{covariant_jet, f_tensors, f_tensors_from_zero, CovariantJets, FTensor};
