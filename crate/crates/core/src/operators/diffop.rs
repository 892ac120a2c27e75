use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{One, Zero};

use super::max_operator_order;
use crate::algebra::{GaussianRational, MultiIndex, Poly};
use crate::error::{check_dim, Error, Result};

/// Differential operator `Σ_I a_I(x) ∂_I` with polynomial coefficients.
///
/// Normal form: coefficients stand to the left of the derivatives, one entry
/// per derivative multi-index, no zero coefficients. Equality is structural
/// on this form, which is unique.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DiffOp {
    dim: usize,
    terms: BTreeMap<MultiIndex, Poly>,
}

impl DiffOp {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::multiplication(Poly::one(dim))
    }

    /// Multiplication by `f`.
    pub fn multiplication(f: Poly) -> Self {
        let dim = f.dim();
        let mut op = Self::zero(dim);
        op.add_term(MultiIndex::zero(dim), &f);
        op
    }

    /// `∂_{x^I}` with unit coefficient.
    pub fn derivative(index: MultiIndex) -> Self {
        let dim = index.dim();
        let mut op = Self::zero(dim);
        op.add_term(index, &Poly::one(dim));
        op
    }

    /// `∂_{x^alpha}`.
    pub fn partial(dim: usize, alpha: usize) -> Self {
        Self::derivative(MultiIndex::unit(dim, alpha))
    }

    /// Build from `(derivative, coefficient)` pairs, combining like terms.
    pub fn from_terms(dim: usize, terms: impl IntoIterator<Item = (MultiIndex, Poly)>) -> Result<Self> {
        let mut op = Self::zero(dim);
        for (i, c) in terms {
            check_dim(dim, i.dim())?;
            check_dim(dim, c.dim())?;
            op.add_term(i, &c);
        }
        op.check_order()?;
        Ok(op)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Poly)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, index: &MultiIndex) -> Poly {
        self.terms
            .get(index)
            .cloned()
            .unwrap_or_else(|| Poly::zero(self.dim))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Highest derivative order present; 0 for the zero operator.
    pub fn order(&self) -> u32 {
        self.terms.keys().map(MultiIndex::len).max().unwrap_or(0)
    }

    /// Lowest derivative order present; `None` for the zero operator.
    pub fn min_order(&self) -> Option<u32> {
        self.terms.keys().map(MultiIndex::len).min()
    }

    pub(crate) fn add_term(&mut self, index: MultiIndex, c: &Poly) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(index) {
            Entry::Vacant(e) => {
                e.insert(c.clone());
            }
            Entry::Occupied(mut e) => {
                let sum = e.get() + c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    fn check_order(&self) -> Result<()> {
        let limit = max_operator_order();
        let order = self.order();
        if order > limit {
            return Err(Error::OperatorOrderExceeded { order, limit });
        }
        Ok(())
    }

    /// `Σ a_I ∂_I f`.
    pub fn apply(&self, f: &Poly) -> Result<Poly> {
        check_dim(self.dim, f.dim())?;
        let mut out = Poly::zero(self.dim);
        for (i, c) in &self.terms {
            let d = f.diff_multi(i)?;
            if !d.is_zero() {
                out = out.try_add(&c.try_mul(&d)?)?;
            }
        }
        Ok(out)
    }

    /// Normal form of `self ∘ other`, by the generalised Leibniz rule
    /// `∂_I (b ∂_K) = Σ_{L ≤ I} C(I, L) (∂_{I−L} b) ∂_{L+K}`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        let mut out = Self::zero(self.dim);
        let mut derived: HashMap<(MultiIndex, MultiIndex), Poly> = HashMap::new();
        for (i, a) in &self.terms {
            for l in i.sub_indices() {
                let rest = i.checked_sub(&l).expect("sub-index");
                let binom = GaussianRational::from_int(i.binomial(&l) as i64);
                for (k, b) in &other.terms {
                    let db = derived
                        .entry((rest.clone(), k.clone()))
                        .or_insert_with(|| b.diff_multi(&rest).expect("dims checked"));
                    if db.is_zero() {
                        continue;
                    }
                    let coeff = (a * &*db).scale(&binom);
                    out.add_term(l.add(k), &coeff);
                }
            }
        }
        out.check_order()?;
        Ok(out)
    }

    /// `self ∘ x^alpha − x^alpha ∘ self`, i.e. `Σ a_I I_α ∂_{I−e_α}`.
    pub fn commutator_with_coordinate(&self, alpha: usize) -> Result<Self> {
        if alpha >= self.dim {
            return Err(Error::IndexOutOfRange {
                index: alpha,
                dim: self.dim,
            });
        }
        let mut out = Self::zero(self.dim);
        for (i, a) in &self.terms {
            if let Some(lower) = i.decrement(alpha) {
                out.add_term(lower, &a.scale(&GaussianRational::from_int(i.get(alpha) as i64)));
            }
        }
        Ok(out)
    }

    /// `[x^alpha, self] = −[self, x^alpha]`.
    pub fn coordinate_commutator(&self, alpha: usize) -> Result<Self> {
        Ok(-&self.commutator_with_coordinate(alpha)?)
    }

    /// `A ∘ B − B ∘ A`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.compose(other)?.try_sub(&other.compose(self)?)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        let mut out = self.clone();
        for (i, c) in &other.terms {
            out.add_term(i.clone(), c);
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        let mut out = self.clone();
        for (i, c) in &other.terms {
            out.add_term(i.clone(), &-c);
        }
        Ok(out)
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        if c.is_zero() {
            return Self::zero(self.dim);
        }
        Self {
            dim: self.dim,
            terms: self.terms.iter().map(|(i, a)| (i.clone(), a.scale(c))).collect(),
        }
    }

    /// `f · self` (multiply every coefficient by `f`).
    pub fn left_mul(&self, f: &Poly) -> Result<Self> {
        check_dim(self.dim, f.dim())?;
        let mut out = Self::zero(self.dim);
        for (i, a) in &self.terms {
            out.add_term(i.clone(), &a.try_mul(f)?);
        }
        Ok(out)
    }

    /// `self ∘ ∂_I`, which in normal form only shifts derivative indices.
    pub fn then_derivative(&self, index: &MultiIndex) -> Result<Self> {
        check_dim(self.dim, index.dim())?;
        let out = Self {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(i, a)| (i.add(index), a.clone()))
                .collect(),
        };
        out.check_order()?;
        Ok(out)
    }

    /// `self(1) = 0` and `self(x^α) = 0` for every coordinate.
    pub fn annihilates_affine(&self) -> bool {
        self.terms.keys().all(|i| i.len() >= 2)
    }

    /// Keep only the terms whose derivative index satisfies `keep`.
    pub fn filter(&self, mut keep: impl FnMut(&MultiIndex, &Poly) -> bool) -> Self {
        Self {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .filter(|(i, a)| keep(i, a))
                .map(|(i, a)| (i.clone(), a.clone()))
                .collect(),
        }
    }

    /// Re-express on a larger space, placing coordinate `j` at `offset + j`.
    pub fn embed(&self, dim: usize, offset: usize) -> Self {
        Self {
            dim,
            terms: self
                .terms
                .iter()
                .map(|(i, a)| (i.embed(dim, offset), a.embed(dim, offset)))
                .collect(),
        }
    }

    pub fn display_with(&self, names: &[String]) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .rev()
            .map(|(i, a)| {
                let d = derivative_name(i, names);
                let c = a.display_with(names);
                match (d.is_empty(), a.num_terms() == 1 && a.constant_term().is_one()) {
                    (true, _) => format!("({c})"),
                    (false, true) => d,
                    (false, false) => format!("({c})*{d}"),
                }
            })
            .collect();
        parts.join(" + ")
    }
}

pub(crate) fn derivative_name(i: &MultiIndex, names: &[String]) -> String {
    i.exponents()
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(j, &e)| {
            let n = names.get(j).cloned().unwrap_or_else(|| format!("x{j}"));
            if e == 1 {
                format!("d[{n}]")
            } else {
                format!("d[{n}]^{e}")
            }
        })
        .collect::<Vec<_>>()
        .join("*")
}

impl std::ops::Neg for &DiffOp {
    type Output = DiffOp;
    fn neg(self) -> DiffOp {
        self.scale(&GaussianRational::from_int(-1))
    }
}

impl fmt::Debug for DiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..self.dim).map(|j| format!("x{j}")).collect();
        write!(f, "{}", self.display_with(&names))
    }
}

/// `op_equal`: structural equality of normal forms (dimensions must agree).
pub fn op_equal(a: &DiffOp, b: &DiffOp) -> Result<bool> {
    check_dim(a.dim(), b.dim())?;
    Ok(a == b)
}
