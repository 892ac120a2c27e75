//! Differential and bidifferential operators with polynomial coefficients.

mod bidiff;
mod diffop;
mod series;
mod wire;

use std::sync::OnceLock;

pub use bidiff::{BiDiffOp, Side};
pub(crate) use diffop::derivative_name;
pub use diffop::{op_equal, DiffOp};
pub use series::OperatorSeries;

/// Default ceiling on the derivative order of any constructed operator.
pub const DEFAULT_MAX_OP_ORDER: u32 = 12;

/// Operator-order guard, read once from `STARQ_MAX_OP_ORDER`.
pub fn max_operator_order() -> u32 {
    static LIMIT: OnceLock<u32> = OnceLock::new();
    *LIMIT.get_or_init(|| {
        std::env::var("STARQ_MAX_OP_ORDER")
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .unwrap_or(DEFAULT_MAX_OP_ORDER)
    })
}
