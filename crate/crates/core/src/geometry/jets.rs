use super::connection::{flat_index, tuples, AffineConnection, Connection};
use crate::algebra::Poly;
use crate::error::{Error, Result};
use crate::operators::{max_operator_order, DiffOp};

/// Iterated covariant derivatives of a scalar as differential operators:
/// `(∇⋯∇ f)_{μ₁…μₖ} = J_k[μ₁…μₖ](f)`.
///
/// Built by `J_{k+1}[μ, ν] = ∂_ν ∘ J_k[μ] − Σ_j Γ^λ_{ν μ_j} J_k[μ₁…λ…μₖ]`.
#[derive(Clone, Debug)]
pub struct CovariantJets {
    dim: usize,
    /// `by_rank[k-1]` holds the `dim^k` operators of rank `k`, row-major.
    by_rank: Vec<Vec<DiffOp>>,
}

impl CovariantJets {
    pub fn new(conn: &AffineConnection, max_rank: usize) -> Result<Self> {
        let limit = max_operator_order() as usize;
        if max_rank > limit {
            return Err(Error::OperatorOrderExceeded {
                order: max_rank as u32,
                limit: limit as u32,
            });
        }
        let d = conn.dim();
        let mut by_rank: Vec<Vec<DiffOp>> = Vec::with_capacity(max_rank);
        if max_rank == 0 {
            return Ok(Self { dim: d, by_rank });
        }
        by_rank.push((0..d).map(|mu| DiffOp::partial(d, mu)).collect());
        for k in 1..max_rank {
            let prev = &by_rank[k - 1];
            let mut next = Vec::with_capacity(prev.len() * d);
            for idx in tuples(d, k + 1) {
                let (mu, nu) = idx.split_at(k);
                let nu = nu[0];
                let mut op = DiffOp::partial(d, nu).compose(&prev[flat_index(mu, d)])?;
                for j in 0..k {
                    let mut shifted = mu.to_vec();
                    for lam in 0..d {
                        let g = conn.get(lam, nu, mu[j]);
                        if g.is_zero() {
                            continue;
                        }
                        shifted[j] = lam;
                        let term = prev[flat_index(&shifted, d)].left_mul(g)?;
                        op = op.try_sub(&term)?;
                    }
                }
                next.push(op);
            }
            by_rank.push(next);
        }
        Ok(Self { dim: d, by_rank })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_rank(&self) -> usize {
        self.by_rank.len()
    }

    /// Operator for the component `indices` (length = rank, 1 ≤ rank ≤ max_rank).
    pub fn get(&self, indices: &[usize]) -> &DiffOp {
        &self.by_rank[indices.len() - 1][flat_index(indices, self.dim)]
    }

    pub fn rank(&self, k: usize) -> &[DiffOp] {
        &self.by_rank[k - 1]
    }
}

/// Components of the `k`-th iterated covariant derivative of `f`, row-major
/// over `k`-tuples of indices.
pub fn covariant_jet(conn: &AffineConnection, k: usize, f: &Poly) -> Result<Vec<Poly>> {
    if k == 0 {
        return Err(Error::InvalidInput("jet rank must be at least 1".into()));
    }
    let jets = CovariantJets::new(conn, k)?;
    jets.rank(k).iter().map(|op| op.apply(f)).collect()
}

/// `f^l_{i₁…iₖ i}` on the base, row-major over `(l, i₁, …, iₖ, i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FTensor {
    n: usize,
    rank: usize,
    comps: Vec<Poly>,
}

impl FTensor {
    fn delta(n: usize) -> Self {
        let mut comps = Vec::with_capacity(n * n);
        for l in 0..n {
            for i in 0..n {
                comps.push(if l == i { Poly::one(n) } else { Poly::zero(n) });
            }
        }
        Self { n, rank: 0, comps }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// `f^l_{lower}` where `lower = (i₁, …, iₖ, i)` has length `rank + 1`.
    pub fn get(&self, l: usize, lower: &[usize]) -> &Poly {
        debug_assert_eq!(lower.len(), self.rank + 1);
        let mut idx = Vec::with_capacity(lower.len() + 1);
        idx.push(l);
        idx.extend_from_slice(lower);
        &self.comps[flat_index(&idx, self.n)]
    }

    /// One step of the recursion
    /// `f^l_{i₁…i_{k+1} i} = ∂_{i_{k+1}} f^l_{i₁…iₖ i} + Γ^l_{i_{k+1} j} f^j_{i₁…iₖ i}
    ///   − Σ_m Γ^j_{i_m i_{k+1}} f^l_{i₁…j…iₖ i}`.
    fn next(&self, c: &Connection) -> Self {
        let n = self.n;
        let k = self.rank;
        let mut comps = Vec::with_capacity(self.comps.len() * n);
        for idx in tuples(n, k + 3) {
            let l = idx[0];
            let inner = &idx[1..=k];
            let new = idx[k + 1];
            let i = idx[k + 2];
            let mut lower: Vec<usize> = inner.to_vec();
            lower.push(i);
            let mut v = self.get(l, &lower).diff(new);
            for j in 0..n {
                v = &v + &(c.get(l, new, j) * self.get(j, &lower));
            }
            for m in 0..k {
                for j in 0..n {
                    let g = c.get(j, inner[m], new);
                    if g.is_zero() {
                        continue;
                    }
                    let mut shifted = lower.clone();
                    shifted[m] = j;
                    v = &v - &(g * self.get(l, &shifted));
                }
            }
            comps.push(v);
        }
        Self {
            n,
            rank: k + 1,
            comps,
        }
    }
}

/// The tensors `f` of ranks `0..=max_rank`; rank 0 is `δ^l_i`, rank 1 is `Γ^l_{i₁ i}`.
pub fn f_tensors_from_zero(c: &Connection, max_rank: usize) -> Vec<FTensor> {
    let mut out = vec![FTensor::delta(c.n())];
    for _ in 0..max_rank {
        let next = out.last().expect("nonempty").next(c);
        out.push(next);
    }
    out
}

/// The tensors `f` of ranks `1..=max_rank`.
pub fn f_tensors(c: &Connection, max_rank: usize) -> Result<Vec<FTensor>> {
    if max_rank == 0 {
        return Err(Error::InvalidInput("f-tensor rank must be at least 1".into()));
    }
    let mut all = f_tensors_from_zero(c, max_rank);
    all.remove(0);
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{parse_poly, MultiIndex};
    use crate::geometry::{flat_connection_from_diffeo, lift_connection};

    fn qnames(n: usize) -> Vec<String> {
        (1..=n).map(|j| format!("q{j}")).collect()
    }

    fn flat2() -> Connection {
        let names = qnames(2);
        flat_connection_from_diffeo(&[
            parse_poly("q1", &names).unwrap(),
            parse_poly("q2 + q1^3", &names).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn rank_one_jet_is_gradient() {
        let lifted = lift_connection(&flat2());
        let f = parse_poly("q1^2*p2 + q2*p1^3", &crate::algebra::phase_space_names(2, 0)).unwrap();
        let grad = covariant_jet(lifted.affine(), 1, &f).unwrap();
        for (mu, g) in grad.iter().enumerate() {
            assert_eq!(g, &f.diff(mu));
        }
    }

    #[test]
    fn second_jet_of_base_coordinate() {
        // (∇̃∇̃ q^i)_{jk} = −Γ^i_{jk}
        let c = flat2();
        let lifted = lift_connection(&c);
        for i in 0..2 {
            let jet = covariant_jet(lifted.affine(), 2, &Poly::var(4, i)).unwrap();
            for j in 0..2 {
                for k in 0..2 {
                    assert_eq!(jet[flat_index(&[j, k], 4)], -&c.get(i, j, k).embed(4, 0));
                }
            }
        }
    }

    #[test]
    fn second_jet_of_momentum_mixed_component() {
        // (∇̃∇̃ p_i)_{l̄ i₁} = f^l_{i₁ i} = Γ^l_{i₁ i}
        let c = flat2();
        let lifted = lift_connection(&c);
        for i in 0..2 {
            let jet = covariant_jet(lifted.affine(), 2, &Poly::var(4, 2 + i)).unwrap();
            for l in 0..2 {
                for i1 in 0..2 {
                    assert_eq!(jet[flat_index(&[2 + l, i1], 4)], c.get(l, i1, i).embed(4, 0));
                }
            }
        }
    }

    #[test]
    fn f_tensor_base_case_and_one_step() {
        let gamma = parse_poly("q1^3 - 2*q1", &qnames(1)).unwrap();
        let c = Connection::one_dimensional(gamma.clone()).unwrap();
        let fs = f_tensors(&c, 2).unwrap();
        assert_eq!(fs[0].get(0, &[0, 0]), &gamma);
        // f¹₁₁₁ = γ′ + γγ − γγ = γ′
        assert_eq!(fs[1].get(0, &[0, 0, 0]), &gamma.diff(0));
    }

    #[test]
    fn f_tensors_vanish_for_zero_connection() {
        let fs = f_tensors(&Connection::zero(2), 3).unwrap();
        assert!(fs.iter().all(|f| f.comps.iter().all(Poly::is_zero)));
    }

    #[test]
    fn jets_of_flat_connection_are_symmetric() {
        let lifted = lift_connection(&flat2());
        let jets = CovariantJets::new(lifted.affine(), 3).unwrap();
        for idx in tuples(4, 3) {
            let mut sorted = idx.clone();
            sorted.sort_unstable();
            assert_eq!(jets.get(&idx), jets.get(&sorted), "{idx:?}");
        }
    }

    #[test]
    fn zero_connection_jets_are_partials() {
        let jets = CovariantJets::new(&AffineConnection::zero(2), 3).unwrap();
        assert_eq!(
            jets.get(&[0, 1, 1]),
            &DiffOp::derivative(MultiIndex::from_exponents(vec![1, 2]))
        );
    }

    #[test]
    fn rank_above_guard_is_rejected() {
        let limit = max_operator_order() as usize;
        assert!(CovariantJets::new(&AffineConnection::zero(1), limit + 1).is_err());
    }
}
