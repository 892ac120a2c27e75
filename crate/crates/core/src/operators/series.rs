use super::DiffOp;
use crate::algebra::{HbarSeries, Poly};
use crate::error::{check_dim, Error, Result};

/// `S = id + Σ_{k≥1} ħᵏ Sₖ`, truncated after `ħ^order`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperatorSeries {
    ops: Vec<DiffOp>,
}

impl OperatorSeries {
    pub fn identity(dim: usize, order: usize) -> Self {
        let mut ops = vec![DiffOp::zero(dim); order + 1];
        ops[0] = DiffOp::identity(dim);
        Self { ops }
    }

    /// `ops[0]` must be the identity.
    pub fn from_ops(ops: Vec<DiffOp>) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::InvalidInput("empty operator series".into()))?;
        let dim = first.dim();
        if *first != DiffOp::identity(dim) {
            return Err(Error::InvalidInput(
                "zeroth coefficient of an operator series must be the identity".into(),
            ));
        }
        for op in &ops {
            check_dim(dim, op.dim())?;
        }
        Ok(Self { ops })
    }

    pub fn dim(&self) -> usize {
        self.ops[0].dim()
    }

    pub fn order(&self) -> usize {
        self.ops.len() - 1
    }

    pub fn get(&self, k: usize) -> &DiffOp {
        &self.ops[k]
    }

    pub fn ops(&self) -> &[DiffOp] {
        &self.ops
    }

    /// Replace `S_k` (k ≥ 1); used for fault injection in tests and fixtures.
    pub fn with_replaced(&self, k: usize, op: DiffOp) -> Result<Self> {
        if k == 0 || k > self.order() {
            return Err(Error::InvalidInput(format!("cannot replace S_{k}")));
        }
        check_dim(self.dim(), op.dim())?;
        let mut ops = self.ops.clone();
        ops[k] = op;
        Ok(Self { ops })
    }

    /// `S f` as an ħ-series.
    pub fn apply(&self, f: &Poly) -> Result<HbarSeries<Poly>> {
        let coeffs = self.ops.iter().map(|op| op.apply(f)).collect::<Result<_>>()?;
        Ok(HbarSeries::from_coeffs(coeffs))
    }

    /// `S` applied to a series, ħ-linearly.
    pub fn apply_series(&self, f: &HbarSeries<Poly>) -> Result<HbarSeries<Poly>> {
        let dim = self.dim();
        let ops = HbarSeries::from_coeffs(self.ops.clone());
        ops.cauchy(f, || Poly::zero(dim), |acc, op, g| {
            if !g.is_zero() && !op.is_zero() {
                *acc = &*acc + &op.apply(g).expect("dims checked");
            }
        })
    }
}
