use super::product::moyal_weight;
use crate::algebra::{GaussianRational, MultiIndex, Poly};
use crate::error::{Error, Result};
use crate::geometry::{f_tensors_from_zero, tuples, Connection, CovariantJets};
use crate::operators::DiffOp;

/// Closed-form `Cₖ(x^α, ·)` of the natural cotangent product, one operator per
/// phase-space coordinate (`q¹…qⁿ` then `p₁…pₙ`), for `k ≥ 1`.
///
/// The `q` rows use iterated covariant derivatives of the base coordinates;
/// the `p` rows are expressed through the tensors `f^l_{i₁…i_r i}`.
pub fn ck_coordinate_closed_form(conn: &Connection, k: usize) -> Result<Vec<DiffOp>> {
    if k == 0 {
        return Err(Error::InvalidInput("closed form defined for k ≥ 1".into()));
    }
    if !conn.is_flat() {
        return Err(Error::NonFlatConnection);
    }
    let n = conn.n();
    let dim = 2 * n;
    let emb = |f: &Poly| f.embed(dim, 0);
    let p_index = |idx: &[usize]| {
        let shifted: Vec<usize> = idx.iter().map(|&i| n + i).collect();
        MultiIndex::from_indices(dim, &shifted)
    };
    let mut out = Vec::with_capacity(dim);

    let base_jets = CovariantJets::new(conn.affine(), k)?;
    let wk = moyal_weight(k);
    for i in 0..n {
        let qi = Poly::var(n, i);
        let mut op = DiffOp::zero(dim);
        for idx in tuples(n, k) {
            let coeff = emb(&base_jets.get(&idx).apply(&qi)?);
            op.add_term(p_index(&idx), &coeff);
        }
        out.push(op.scale(&wk));
    }

    // p rows: k = k' + 1 with the f-tensors of ranks k' and k' + 1.
    let kp = k - 1;
    let fs = f_tensors_from_zero(conn, k);
    let f_lo = &fs[kp];
    let f_hi = &fs[k];
    // (i/2)^k / (k−1)!
    let w_lo = wk.clone() * GaussianRational::from_int(k as i64);
    let kk = GaussianRational::from_int(k as i64);
    for i in 0..n {
        let mut op = DiffOp::zero(dim);
        // (f^l_{i₁…i_k i} − k Γ^l_{j i_k} f^j_{i₁…i_{k−1} i}) p_l ∂_{p_{i₁…i_k}}
        for idx in tuples(n, k) {
            let (head, last) = idx.split_at(kp);
            let last = last[0];
            let mut lower_hi = idx.clone();
            lower_hi.push(i);
            let mut lower_lo = head.to_vec();
            lower_lo.push(i);
            let mut coeff = Poly::zero(dim);
            for l in 0..n {
                let mut c = f_hi.get(l, &lower_hi).clone();
                for j in 0..n {
                    let g = conn.get(l, j, last);
                    if !g.is_zero() {
                        c = &c - &(g * f_lo.get(j, &lower_lo)).scale(&kk);
                    }
                }
                if !c.is_zero() {
                    coeff = &coeff + &(&emb(&c) * &Poly::var(dim, n + l));
                }
            }
            op.add_term(p_index(&idx), &coeff.scale(&wk));
        }
        // − f^l_{i₁…i_{k−1} i} ∂_{q^l} ∂_{p_{i₁…i_{k−1}}}
        // + (f^l_{i₁…i_{k−1} l i} − f^l_{i₁…i_{k−1} i,l} − Γ^l_{lj} f^j_{i₁…i_{k−1} i}) ∂_{p_{i₁…i_{k−1}}}
        for head in tuples(n, kp) {
            let mut lower_lo = head.clone();
            lower_lo.push(i);
            let mut zeroth = Poly::zero(n);
            for l in 0..n {
                let f = f_lo.get(l, &lower_lo);
                let deriv = p_index(&head).add(&MultiIndex::unit(dim, l));
                op.add_term(deriv, &emb(f).scale(&-w_lo.clone()));
                let mut lower_hi = head.clone();
                lower_hi.push(l);
                lower_hi.push(i);
                zeroth = &zeroth + f_hi.get(l, &lower_hi);
                zeroth = &zeroth - &f.diff(l);
                for j in 0..n {
                    zeroth = &zeroth - &(conn.get(l, l, j) * f_lo.get(j, &lower_lo));
                }
            }
            op.add_term(p_index(&head), &emb(&zeroth).scale(&w_lo));
        }
        out.push(op);
    }
    Ok(out)
}
