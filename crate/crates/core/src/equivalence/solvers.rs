use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::algebra::{GaussianRational, MultiIndex};
use crate::error::{Error, Result};
use crate::operators::{max_operator_order, DiffOp, Side};
use crate::starproducts::StarProduct;

fn check_lower_orders(s: &StarProduct, partial: &[DiffOp], k: usize) -> Result<()> {
    if k == 0 || k > s.order() {
        return Err(Error::InvalidInput(format!(
            "right-hand side requested at order {k} for a product of order {}",
            s.order()
        )));
    }
    if partial.len() < k {
        return Err(Error::MissingLowerOrders {
            have: partial.len(),
            need: k,
        });
    }
    Ok(())
}

/// `F^α = ½ Σ_{l=1}^k (C_l(x^α, ·) + C_l(·, x^α)) ∘ S_{k−l}`, one operator per coordinate.
///
/// `partial` holds `S₀ … S_{k−1}`.
pub fn rhs_f(s: &StarProduct, partial: &[DiffOp], k: usize) -> Result<Vec<DiffOp>> {
    check_lower_orders(s, partial, k)?;
    let half = GaussianRational::from_ratio(1, 2);
    (0..s.dim())
        .into_par_iter()
        .map(|alpha| {
            let mut f = DiffOp::zero(s.dim());
            for l in 1..=k {
                let lower = &partial[k - l];
                if lower.is_zero() {
                    continue;
                }
                let c = s.c(l);
                let slice = c.slot_fix(alpha, Side::Left)?.try_add(&c.slot_fix(alpha, Side::Right)?)?;
                f = f.try_add(&slice.compose(lower)?)?;
            }
            Ok(f.scale(&half))
        })
        .collect()
}

/// The same right-hand side for a product with the parity property:
/// `F^α = Σ_{l ≥ 1, 2l ≤ k} C_{2l}(x^α, ·) ∘ S_{k−2l}`.
pub fn rhs_f_parity(s: &StarProduct, partial: &[DiffOp], k: usize) -> Result<Vec<DiffOp>> {
    check_lower_orders(s, partial, k)?;
    (0..s.dim())
        .into_par_iter()
        .map(|alpha| {
            let mut f = DiffOp::zero(s.dim());
            for l in (2..=k).step_by(2) {
                let lower = &partial[k - l];
                if lower.is_zero() {
                    continue;
                }
                f = f.try_add(&s.c(l).slot_fix(alpha, Side::Left)?.compose(lower)?)?;
            }
            Ok(f)
        })
        .collect()
}

fn check_family(f: &[DiffOp]) -> Result<usize> {
    let dim = f.len();
    for (alpha, op) in f.iter().enumerate() {
        if op.dim() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: op.dim(),
            });
        }
        if op.min_order() == Some(0) {
            return Err(Error::IncompatibleFamily { alpha });
        }
    }
    Ok(dim)
}

/// The unique `η` with `[η, x^α] = F^α` and `η(1) = η(x^α) = 0`:
/// `η = Σ_{α,J} φ^{α,J} / (1 + |J|) ∂_α ∂_J` where `F^α = Σ_J φ^{α,J} ∂_J`.
pub fn eta_from_phi(f: &[DiffOp]) -> Result<DiffOp> {
    let dim = check_family(f)?;
    let mut eta = DiffOp::zero(dim);
    for (alpha, op) in f.iter().enumerate() {
        for (j, c) in op.terms() {
            let w = GaussianRational::from_ratio(1, 1 + j.len() as i64);
            eta.add_term(j.increment(alpha), &c.scale(&w));
        }
    }
    if eta.order() > max_operator_order() {
        return Err(Error::OperatorOrderExceeded {
            order: eta.order(),
            limit: max_operator_order(),
        });
    }
    for (alpha, op) in f.iter().enumerate() {
        if &eta.commutator_with_coordinate(alpha)? != op {
            return Err(Error::IncompatibleFamily { alpha });
        }
    }
    Ok(eta)
}

/// `S = Σ_{n≥1} (1/n!) [x^{α₁}, …, [x^{α_{n−1}}, F^{α_n}]] ∂_{α₁} ⋯ ∂_{α_n}`.
///
/// Commutators with coordinates commute with each other, so the outer indices
/// are enumerated as sorted multisets weighted by their number of orderings.
pub fn nested_commutator_solution(f: &[DiffOp]) -> Result<DiffOp> {
    let dim = check_family(f)?;
    let limit = max_operator_order() as usize + 1;
    let mut out = DiffOp::zero(dim);
    // (sorted outer indices) -> per-α nested commutator
    let mut level: BTreeMap<Vec<usize>, Vec<DiffOp>> = BTreeMap::new();
    level.insert(Vec::new(), f.to_vec());
    let mut n = 1usize;
    while !level.is_empty() {
        if n > limit {
            return Err(Error::NonTerminatingNesting);
        }
        let n_fact: i64 = (1..=n as i64).product();
        for (outer, ops) in &level {
            let w = GaussianRational::from_ratio(orderings(outer), n_fact);
            for (alpha, g) in ops.iter().enumerate() {
                if g.is_zero() {
                    continue;
                }
                let mut idx = outer.clone();
                idx.push(alpha);
                let term = g.then_derivative(&MultiIndex::from_indices(dim, &idx))?;
                out = out.try_add(&term.scale(&w))?;
            }
        }
        let mut next = BTreeMap::new();
        for (outer, ops) in &level {
            let start = outer.last().copied().unwrap_or(0);
            for beta in start..dim {
                let lifted: Vec<DiffOp> = ops
                    .iter()
                    .map(|g| g.coordinate_commutator(beta))
                    .collect::<Result<_>>()?;
                if lifted.iter().all(DiffOp::is_zero) {
                    continue;
                }
                let mut key = outer.clone();
                key.push(beta);
                next.insert(key, lifted);
            }
        }
        level = next;
        n += 1;
    }
    Ok(out)
}

/// Number of distinct orderings of a sorted index list.
fn orderings(sorted: &[usize]) -> i64 {
    let fact = |m: usize| (1..=m as i64).product::<i64>();
    let mut denom = 1;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        denom *= fact(j - i);
        i = j;
    }
    fact(sorted.len()) / denom
}
