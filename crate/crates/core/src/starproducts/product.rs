use std::collections::HashMap;

use num_traits::Zero;

use super::PoissonTensor;
use crate::algebra::{GaussianRational, HbarSeries, MultiIndex, Poly};
use crate::error::{check_dim, Error, Result};
use crate::geometry::{lift_connection, ricci, Connection, CovariantJets, SymplecticConnectionSpec};
use crate::operators::{BiDiffOp, DiffOp};

/// Highest ħ-order supported for the natural cotangent product.
pub const MAX_NATURAL_ORDER: usize = 4;

/// Which constructor produced a product.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProductKind {
    Moyal,
    VectorField,
    NaturalCotangent,
    SymplecticTruncated,
    /// A product altered after construction.
    Modified,
}

impl ProductKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Moyal => "moyal",
            Self::VectorField => "vector-field",
            Self::NaturalCotangent => "natural-cotangent",
            Self::SymplecticTruncated => "symplectic-truncated",
            Self::Modified => "modified",
        }
    }
}

/// `f ⋆ g = Σ_{k ≤ N} ħᵏ Cₖ(f, g)` with bidifferential `Cₖ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StarProduct {
    kind: ProductKind,
    poisson: PoissonTensor,
    c: Vec<BiDiffOp>,
    parity: bool,
}

/// `(i/2)ᵏ / k!`.
pub(crate) fn moyal_weight(k: usize) -> GaussianRational {
    let fact: i64 = (1..=k as i64).product();
    (GaussianRational::i() * GaussianRational::from_ratio(1, 2)).pow(k as u32) * GaussianRational::from_ratio(1, fact)
}

/// Non-decreasing tuples of length `k` over `0..dim`, each with the number of
/// distinct orderings of its entries.
pub(crate) fn multisets(dim: usize, k: usize) -> Vec<(Vec<usize>, i64)> {
    fn rec(dim: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for j in start..dim {
            cur.push(j);
            rec(dim, k, j, cur, out);
            cur.pop();
        }
    }
    let mut all = Vec::new();
    rec(dim, k, 0, &mut Vec::with_capacity(k), &mut all);
    let fact = |m: usize| (1..=m as i64).product::<i64>();
    all.into_iter()
        .map(|t| {
            let mut denom = 1;
            let mut run = 1;
            for w in t.windows(2) {
                if w[0] == w[1] {
                    run += 1;
                } else {
                    denom *= fact(run);
                    run = 1;
                }
            }
            denom *= fact(run);
            (t, fact(k) / denom)
        })
        .collect()
}

/// Partner of a Darboux index under the canonical matrix, with its sign.
fn partner(n: usize, mu: usize) -> (usize, i64) {
    if mu < n {
        (mu + n, 1)
    } else {
        (mu - n, -1)
    }
}

impl StarProduct {
    /// Assemble a product from raw operators; `c[0]` must be pointwise multiplication.
    pub fn from_parts(kind: ProductKind, poisson: PoissonTensor, c: Vec<BiDiffOp>, parity: bool) -> Result<Self> {
        let dim = poisson.dim();
        if c.is_empty() {
            return Err(Error::InvalidInput("a star-product needs C₀".into()));
        }
        for op in &c {
            check_dim(dim, op.dim())?;
        }
        Ok(Self { kind, poisson, c, parity })
    }

    /// `Cₖ = (1/k!)(i/2)ᵏ P^{μ₁ν₁}⋯P^{μₖνₖ} ∂_{μ₁…μₖ} ⊗ ∂_{ν₁…νₖ}`.
    pub fn moyal(poisson: &PoissonTensor, order: usize) -> Result<Self> {
        if !poisson.is_constant() {
            return Err(Error::NonConstantPoisson);
        }
        let dim = poisson.dim();
        let entries = poisson.constant_entries();
        let mut c = Vec::with_capacity(order + 1);
        c.push(BiDiffOp::pointwise(dim));
        let mut layer: HashMap<(MultiIndex, MultiIndex), GaussianRational> = HashMap::new();
        layer.insert((MultiIndex::zero(dim), MultiIndex::zero(dim)), GaussianRational::from_int(1));
        for k in 1..=order {
            let mut next: HashMap<(MultiIndex, MultiIndex), GaussianRational> = HashMap::new();
            for ((i, j), w) in &layer {
                for (mu, nu, p) in &entries {
                    let key = (i.increment(*mu), j.increment(*nu));
                    let slot = next.entry(key).or_insert_with(GaussianRational::zero);
                    *slot += &(w * p);
                }
            }
            let weight = moyal_weight(k);
            let mut op = BiDiffOp::zero(dim);
            for ((i, j), w) in &next {
                op.add_term(i.clone(), j.clone(), &Poly::constant(dim, w * &weight));
            }
            c.push(op);
            layer = next;
        }
        Ok(Self {
            kind: ProductKind::Moyal,
            poisson: poisson.clone(),
            c,
            parity: true,
        })
    }

    /// `Cₖ = (1/k!)(i/2)ᵏ P^{μ₁ν₁}⋯P^{μₖνₖ} (D_{μ₁}⋯D_{μₖ} ·) ⊗ (D_{ν₁}⋯D_{νₖ} ·)`.
    pub fn vector_field(frame: &VectorFieldFrame, poisson: &PoissonTensor, order: usize) -> Result<Self> {
        frame.validate(poisson)?;
        let dim = poisson.dim();
        let entries = poisson.constant_entries();
        let mut products: HashMap<Vec<usize>, DiffOp> = HashMap::new();
        products.insert(Vec::new(), DiffOp::identity(dim));
        let mut c = Vec::with_capacity(order + 1);
        c.push(BiDiffOp::pointwise(dim));
        let mut tuples: Vec<(Vec<usize>, Vec<usize>, GaussianRational)> =
            vec![(Vec::new(), Vec::new(), GaussianRational::from_int(1))];
        for k in 1..=order {
            let mut next = Vec::with_capacity(tuples.len() * entries.len());
            for (mus, nus, w) in &tuples {
                for (mu, nu, p) in &entries {
                    let mut m = mus.clone();
                    m.push(*mu);
                    let mut v = nus.clone();
                    v.push(*nu);
                    next.push((m, v, w * p));
                }
            }
            let mut op = BiDiffOp::zero(dim);
            for (mus, nus, w) in &next {
                let a = frame.product(mus, &mut products)?;
                let b = frame.product(nus, &mut products)?;
                op = op.try_add(&BiDiffOp::tensor(&a, &b)?.scale(w))?;
            }
            c.push(op.scale(&moyal_weight(k)));
            tuples = next;
        }
        Ok(Self {
            kind: ProductKind::VectorField,
            poisson: poisson.clone(),
            c,
            parity: true,
        })
    }

    /// The natural product on `T*Q` built from iterated covariant derivatives
    /// of the lifted connection, up to `ħ^order` (`order ≤ 4`).
    pub fn natural_cotangent(conn: &Connection, order: usize) -> Result<Self> {
        if order > MAX_NATURAL_ORDER {
            return Err(Error::InvalidInput(format!(
                "natural cotangent product supports order ≤ {MAX_NATURAL_ORDER}, got {order}"
            )));
        }
        if !conn.is_flat() {
            return Err(Error::NonFlatConnection);
        }
        let n = conn.n();
        let dim = 2 * n;
        let lifted = lift_connection(conn);
        let jets = CovariantJets::new(lifted.affine(), order)?;
        let mut c = Vec::with_capacity(order + 1);
        c.push(BiDiffOp::pointwise(dim));
        for k in 1..=order {
            // Jets of a flat torsionless connection are symmetric, so sum over
            // multisets of the left indices with their multiplicities.
            let mut op = BiDiffOp::zero(dim);
            for (mus, mult) in multisets(dim, k) {
                let mut sign = mult;
                let nus: Vec<usize> = mus
                    .iter()
                    .map(|&mu| {
                        let (nu, s) = partner(n, mu);
                        sign *= s;
                        nu
                    })
                    .collect();
                let term = BiDiffOp::tensor(jets.get(&mus), jets.get(&nus))?;
                op = op.try_add(&term.scale(&GaussianRational::from_int(sign)))?;
            }
            c.push(op.scale(&moyal_weight(k)));
        }
        Ok(Self {
            kind: ProductKind::NaturalCotangent,
            poisson: PoissonTensor::canonical(n, 0),
            c,
            parity: true,
        })
    }

    /// The second-order product of a torsionless symplectic connection with
    /// the Ricci term weighted by `a`.
    pub fn symplectic_truncated(spec: &SymplecticConnectionSpec) -> Result<Self> {
        let n = spec.n();
        let dim = 2 * n;
        let conn = spec.raised();
        let jets = CovariantJets::new(&conn, 2)?;
        let ric = ricci(spec);
        let poisson = PoissonTensor::canonical(n, 0);
        let mut c1 = BiDiffOp::zero(dim);
        for mu in 0..dim {
            let (nu, s) = partner(n, mu);
            c1.add_term(
                MultiIndex::unit(dim, mu),
                MultiIndex::unit(dim, nu),
                &Poly::constant(dim, GaussianRational::from_int(s)),
            );
        }
        let mut c2 = BiDiffOp::zero(dim);
        let minus_a = -spec.a().clone();
        for mu1 in 0..dim {
            let (nu1, s1) = partner(n, mu1);
            for mu2 in 0..dim {
                let (nu2, s2) = partner(n, mu2);
                let sign = GaussianRational::from_int(s1 * s2);
                let term = BiDiffOp::tensor(jets.get(&[mu1, mu2]), jets.get(&[nu1, nu2]))?;
                c2 = c2.try_add(&term.scale(&sign))?;
                let r = &ric[mu1 * dim + mu2];
                if !r.is_zero() && !minus_a.is_zero() {
                    c2.add_term(
                        MultiIndex::unit(dim, nu1),
                        MultiIndex::unit(dim, nu2),
                        &r.scale(&(&sign * &minus_a)),
                    );
                }
            }
        }
        Ok(Self {
            kind: ProductKind::SymplecticTruncated,
            poisson,
            c: vec![BiDiffOp::pointwise(dim), c1.scale(&moyal_weight(1)), c2.scale(&moyal_weight(2))],
            parity: true,
        })
    }

    pub fn kind(&self) -> ProductKind {
        self.kind
    }

    pub fn poisson(&self) -> &PoissonTensor {
        &self.poisson
    }

    pub fn dim(&self) -> usize {
        self.poisson.dim()
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn parity(&self) -> bool {
        self.parity
    }

    pub fn c(&self, k: usize) -> &BiDiffOp {
        &self.c[k]
    }

    pub fn operators(&self) -> &[BiDiffOp] {
        &self.c
    }

    /// The first `order + 1` operators.
    pub fn truncated(&self, order: usize) -> Result<Self> {
        if order > self.order() {
            return Err(Error::OrderMismatch {
                left: order,
                right: self.order(),
            });
        }
        Ok(Self {
            c: self.c[..=order].to_vec(),
            ..self.clone()
        })
    }

    /// A copy with `Cₖ` replaced by `Cₖ + delta`; the parity flag is kept as declared.
    pub fn perturbed(&self, k: usize, delta: &BiDiffOp) -> Result<Self> {
        if k > self.order() {
            return Err(Error::InvalidInput(format!("no C_{k} in a product of order {}", self.order())));
        }
        let mut c = self.c.clone();
        c[k] = c[k].try_add(delta)?;
        Ok(Self {
            kind: ProductKind::Modified,
            c,
            ..self.clone()
        })
    }

    /// `f ⋆ g` as an ħ-series of order `N`.
    pub fn star(&self, f: &Poly, g: &Poly) -> Result<HbarSeries<Poly>> {
        let coeffs = self.c.iter().map(|op| op.apply(f, g)).collect::<Result<_>>()?;
        Ok(HbarSeries::from_coeffs(coeffs))
    }

    /// `a ⋆ b` for ħ-series of the product's order.
    pub fn star_series(&self, a: &HbarSeries<Poly>, b: &HbarSeries<Poly>) -> Result<HbarSeries<Poly>> {
        let n = self.order();
        for s in [a, b] {
            if s.order() != n {
                return Err(Error::OrderMismatch {
                    left: s.order(),
                    right: n,
                });
            }
        }
        let dim = self.dim();
        let mut coeffs = vec![Poly::zero(dim); n + 1];
        for (i, ai) in a.coeffs().iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.coeffs().iter().enumerate().take(n + 1 - i) {
                if bj.is_zero() {
                    continue;
                }
                for l in 0..=(n - i - j) {
                    let v = self.c[l].apply(ai, bj)?;
                    coeffs[i + j + l] = &coeffs[i + j + l] + &v;
                }
            }
        }
        Ok(HbarSeries::from_coeffs(coeffs))
    }
}

/// Pairwise commuting vector fields `D_μ` used by the vector-field product.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorFieldFrame {
    fields: Vec<DiffOp>,
}

impl VectorFieldFrame {
    /// Every field must be a pure first-order operator, and all must commute.
    pub fn new(fields: Vec<DiffOp>) -> Result<Self> {
        let dim = fields.len();
        for (mu, d) in fields.iter().enumerate() {
            check_dim(dim, d.dim())?;
            if d.terms().any(|(i, _)| i.len() != 1) {
                return Err(Error::NotAVectorField(mu));
            }
        }
        for a in 0..dim {
            for b in (a + 1)..dim {
                if !fields[a].commutator(&fields[b])?.is_zero() {
                    return Err(Error::NonCommutingFrame(a, b));
                }
            }
        }
        Ok(Self { fields })
    }

    /// `D_μ = ∂_μ`.
    pub fn coordinate(dim: usize) -> Self {
        Self {
            fields: (0..dim).map(|mu| DiffOp::partial(dim, mu)).collect(),
        }
    }

    pub fn fields(&self) -> &[DiffOp] {
        &self.fields
    }

    /// Component `D_μ^a`, the coefficient of `∂_a` in `D_μ`.
    fn component(&self, mu: usize, a: usize) -> Poly {
        let dim = self.fields.len();
        self.fields[mu].coeff(&MultiIndex::unit(dim, a))
    }

    /// `P^{μν} D_μ ⊗ D_ν` must reproduce `P^{ab}` component by component.
    pub fn validate(&self, poisson: &PoissonTensor) -> Result<()> {
        let dim = self.fields.len();
        check_dim(dim, poisson.dim())?;
        if !poisson.is_constant() {
            return Err(Error::NonConstantPoisson);
        }
        let entries = poisson.constant_entries();
        for a in 0..dim {
            for b in 0..dim {
                let mut sum = Poly::zero(dim);
                for (mu, nu, p) in &entries {
                    sum = &sum + &(&self.component(*mu, a) * &self.component(*nu, b)).scale(p);
                }
                if &sum != poisson.get(a, b) {
                    return Err(Error::FrameMismatch(a, b));
                }
            }
        }
        Ok(())
    }

    /// `D_{μ₁} ∘ ⋯ ∘ D_{μₖ}`, memoised by the sorted index list.
    fn product(&self, mus: &[usize], cache: &mut HashMap<Vec<usize>, DiffOp>) -> Result<DiffOp> {
        let mut key = mus.to_vec();
        key.sort_unstable();
        if let Some(op) = cache.get(&key) {
            return Ok(op.clone());
        }
        let (first, rest) = key.split_first().expect("empty key is cached");
        let tail = self.product(rest, cache)?;
        let op = self.fields[*first].compose(&tail)?;
        cache.insert(key, op.clone());
        Ok(op)
    }
}
