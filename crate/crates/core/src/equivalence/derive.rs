use serde::Serialize;

use super::solvers::{eta_from_phi, nested_commutator_solution, rhs_f, rhs_f_parity};
use crate::error::{Error, Result};
use crate::operators::{DiffOp, OperatorSeries};
use crate::starproducts::{quantum_canonicity_check, StarProduct};

/// How a morphism was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Recursion,
    ClosedForm,
}

/// Diagnostics recorded while solving for `S_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderRecord {
    pub k: usize,
    /// Right-hand sides `F^α`.
    pub f: Vec<DiffOp>,
    /// Lemma-formula and nested-commutator solutions coincide.
    pub solvers_agree: bool,
    /// `[S_k, x^α] = F^α` for every α.
    pub defining_relation: bool,
    /// `S_k(1) = S_k(x^α) = 0`.
    pub normalized: bool,
    /// For parity products: the reduced and full right-hand sides agree,
    /// and `S_k = 0` when `k` is odd.
    pub parity_consistent: Option<bool>,
}

impl OrderRecord {
    pub fn passed(&self) -> bool {
        self.solvers_agree && self.defining_relation && self.normalized && self.parity_consistent.unwrap_or(true)
    }
}

/// `S = id + Σ ħᵏ S_k` intertwining the Moyal product with a given product.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalenceMorphism {
    series: OperatorSeries,
    provenance: Provenance,
    records: Vec<OrderRecord>,
}

impl EquivalenceMorphism {
    pub fn from_closed_form(series: OperatorSeries) -> Self {
        Self {
            series,
            provenance: Provenance::ClosedForm,
            records: Vec::new(),
        }
    }

    pub fn series(&self) -> &OperatorSeries {
        &self.series
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn records(&self) -> &[OrderRecord] {
        &self.records
    }

    pub fn order(&self) -> usize {
        self.series.order()
    }

    pub fn s(&self, k: usize) -> &DiffOp {
        self.series.get(k)
    }

    /// Every per-order consistency check passed.
    pub fn all_checks_pass(&self) -> bool {
        self.records.iter().all(OrderRecord::passed)
    }

    /// A copy with `S_k` replaced, for fault injection.
    pub fn with_replaced(&self, k: usize, op: DiffOp) -> Result<Self> {
        Ok(Self {
            series: self.series.with_replaced(k, op)?,
            ..self.clone()
        })
    }
}

/// Solve for `S₁ … S_order` order by order.
///
/// Both solvers run at every order and must agree; parity products use the
/// reduced right-hand side, which is cross-checked against the full one.
pub fn derive_equivalence(s: &StarProduct, order: usize) -> Result<EquivalenceMorphism> {
    if order > s.order() {
        return Err(Error::OrderMismatch {
            left: order,
            right: s.order(),
        });
    }
    let dim = s.dim();
    if order == 0 {
        return Ok(EquivalenceMorphism {
            series: OperatorSeries::identity(dim, 0),
            provenance: Provenance::Recursion,
            records: Vec::new(),
        });
    }
    let canon = quantum_canonicity_check(s)?;
    if !canon.all_passed() {
        let bad: Vec<String> = canon
            .entries
            .iter()
            .filter(|e| !e.passed)
            .map(|e| format!("({}, {})", e.mu, e.nu))
            .collect();
        return Err(Error::NotQuantumCanonical(bad.join(", ")));
    }
    let mut ops = vec![DiffOp::identity(dim)];
    let mut records = Vec::with_capacity(order);
    for k in 1..=order {
        let (f, parity_consistent) = if s.parity() {
            let reduced = rhs_f_parity(s, &ops, k)?;
            let full = rhs_f(s, &ops, k)?;
            (reduced.clone(), Some(reduced == full))
        } else {
            (rhs_f(s, &ops, k)?, None)
        };
        let eta = eta_from_phi(&f)?;
        let nested = nested_commutator_solution(&f)?;
        let mut defining_relation = true;
        for (alpha, fa) in f.iter().enumerate() {
            if &eta.commutator_with_coordinate(alpha)? != fa {
                defining_relation = false;
            }
        }
        let parity_consistent = parity_consistent.map(|ok| ok && (k % 2 == 0 || eta.is_zero()));
        records.push(OrderRecord {
            k,
            f,
            solvers_agree: eta == nested,
            defining_relation,
            normalized: eta.annihilates_affine(),
            parity_consistent,
        });
        ops.push(eta);
    }
    Ok(EquivalenceMorphism {
        series: OperatorSeries::from_ops(ops)?,
        provenance: Provenance::Recursion,
        records,
    })
}
