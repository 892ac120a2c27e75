use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::Zero;

use super::diffop::derivative_name;
use super::DiffOp;
use crate::algebra::{GaussianRational, MultiIndex, Poly};
use crate::error::{check_dim, Error, Result};

/// Which argument of a bidifferential operator is fixed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

/// Bidifferential operator `(f, g) ↦ Σ c_{I,J}(x) (∂_I f)(∂_J g)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BiDiffOp {
    dim: usize,
    terms: BTreeMap<(MultiIndex, MultiIndex), Poly>,
}

impl BiDiffOp {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            terms: BTreeMap::new(),
        }
    }

    /// `(f, g) ↦ f g`.
    pub fn pointwise(dim: usize) -> Self {
        let mut op = Self::zero(dim);
        op.add_term(MultiIndex::zero(dim), MultiIndex::zero(dim), &Poly::one(dim));
        op
    }

    pub fn from_terms(
        dim: usize,
        terms: impl IntoIterator<Item = (MultiIndex, MultiIndex, Poly)>,
    ) -> Result<Self> {
        let mut op = Self::zero(dim);
        for (i, j, c) in terms {
            check_dim(dim, i.dim())?;
            check_dim(dim, j.dim())?;
            check_dim(dim, c.dim())?;
            op.add_term(i, j, &c);
        }
        Ok(op)
    }

    /// `(f, g) ↦ (a f)(b g)`.
    pub fn tensor(a: &DiffOp, b: &DiffOp) -> Result<Self> {
        check_dim(a.dim(), b.dim())?;
        let mut op = Self::zero(a.dim());
        for (i, ca) in a.terms() {
            for (j, cb) in b.terms() {
                op.add_term(i.clone(), j.clone(), &ca.try_mul(cb)?);
            }
        }
        Ok(op)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(MultiIndex, MultiIndex), &Poly)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, left: &MultiIndex, right: &MultiIndex) -> Poly {
        self.terms
            .get(&(left.clone(), right.clone()))
            .cloned()
            .unwrap_or_else(|| Poly::zero(self.dim))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Highest derivative order in each slot.
    pub fn orders(&self) -> (u32, u32) {
        self.terms.keys().fold((0, 0), |(l, r), (i, j)| (l.max(i.len()), r.max(j.len())))
    }

    pub(crate) fn add_term(&mut self, left: MultiIndex, right: MultiIndex, c: &Poly) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry((left, right)) {
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

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        let mut out = self.clone();
        for ((i, j), c) in &other.terms {
            out.add_term(i.clone(), j.clone(), c);
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.scale(&GaussianRational::from_int(-1)))
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        if c.is_zero() {
            return Self::zero(self.dim);
        }
        Self {
            dim: self.dim,
            terms: self.terms.iter().map(|(k, a)| (k.clone(), a.scale(c))).collect(),
        }
    }

    /// The operator `(f, g) ↦ self(g, f)`.
    pub fn swap(&self) -> Self {
        Self {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|((i, j), c)| ((j.clone(), i.clone()), c.clone()))
                .collect(),
        }
    }

    /// True when no term acts on either slot by a zeroth-order derivative, i.e.
    /// `C(1, f) = C(f, 1) = 0` for all `f`.
    pub fn vanishes_on_constants(&self) -> bool {
        self.terms.keys().all(|(i, j)| !i.is_zero() && !j.is_zero())
    }

    /// `Σ c_{I,J} (∂_I f)(∂_J g)`.
    pub fn apply(&self, f: &Poly, g: &Poly) -> Result<Poly> {
        check_dim(self.dim, f.dim())?;
        check_dim(self.dim, g.dim())?;
        let mut df: HashMap<&MultiIndex, Poly> = HashMap::new();
        let mut dg: HashMap<&MultiIndex, Poly> = HashMap::new();
        let mut out = Poly::zero(self.dim);
        for ((i, j), c) in &self.terms {
            let a = df.entry(i).or_insert_with(|| f.diff_multi(i).expect("dims checked"));
            if a.is_zero() {
                continue;
            }
            let b = dg.entry(j).or_insert_with(|| g.diff_multi(j).expect("dims checked"));
            if b.is_zero() {
                continue;
            }
            out = &out + &(&(c * &*a) * &*b);
        }
        Ok(out)
    }

    /// The differential operator `f ↦ C(x^alpha, f)` (side `Left`) or
    /// `f ↦ C(f, x^alpha)` (side `Right`).
    ///
    /// Only derivative indices `0` and `e_alpha` survive on the fixed slot:
    /// `I = 0` contributes `c · x^alpha` and `I = e_alpha` contributes `c`.
    pub fn slot_fix(&self, alpha: usize, side: Side) -> Result<DiffOp> {
        if alpha >= self.dim {
            return Err(Error::IndexOutOfRange {
                index: alpha,
                dim: self.dim,
            });
        }
        let unit = MultiIndex::unit(self.dim, alpha);
        let x = Poly::var(self.dim, alpha);
        let mut out = DiffOp::zero(self.dim);
        for ((i, j), c) in &self.terms {
            let (fixed, free) = match side {
                Side::Left => (i, j),
                Side::Right => (j, i),
            };
            if fixed.is_zero() {
                out.add_term(free.clone(), &(c * &x));
            } else if *fixed == unit {
                out.add_term(free.clone(), c);
            }
        }
        Ok(out)
    }

    /// Keep only the terms with a given left derivative index.
    pub fn left_slice(&self, left: &MultiIndex) -> DiffOp {
        let mut out = DiffOp::zero(self.dim);
        for ((i, j), c) in &self.terms {
            if i == left {
                out.add_term(j.clone(), c);
            }
        }
        out
    }

    pub fn display_with(&self, names: &[String]) -> String {
        if self.is_zero() {
            return "0".into();
        }
        self.terms
            .iter()
            .rev()
            .map(|((i, j), c)| {
                let l = derivative_name(i, names);
                let r = derivative_name(j, names);
                format!(
                    "({})*[{}]⊗[{}]",
                    c.display_with(names),
                    if l.is_empty() { "1" } else { &l },
                    if r.is_empty() { "1" } else { &r }
                )
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

impl fmt::Debug for BiDiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..self.dim).map(|j| format!("x{j}")).collect();
        write!(f, "{}", self.display_with(&names))
    }
}

impl Default for BiDiffOp {
    fn default() -> Self {
        Self::zero(0)
    }
}

impl BiDiffOp {
    /// Scalar coefficient of a constant-coefficient term.
    pub fn constant_coeff(&self, left: &MultiIndex, right: &MultiIndex) -> GaussianRational {
        let c = self.coeff(left, right);
        if c.is_zero() {
            GaussianRational::zero()
        } else {
            c.constant_term()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(e: &[u32]) -> MultiIndex {
        MultiIndex::from_exponents(e.to_vec())
    }

    #[test]
    fn single_term_apply() {
        let c = BiDiffOp::from_terms(2, [(idx(&[1, 0]), idx(&[0, 1]), Poly::one(2))]).unwrap();
        assert_eq!(c.apply(&Poly::var(2, 0), &Poly::var(2, 1)).unwrap(), Poly::one(2));
        assert!(c.vanishes_on_constants());
        assert!(c.apply(&Poly::one(2), &Poly::var(2, 1)).unwrap().is_zero());
    }

    #[test]
    fn slot_fix_includes_coefficient_slot() {
        // C = 1⊗∂_p + ∂_q⊗1; C(q, f) = q ∂_p f + f
        let c = BiDiffOp::from_terms(
            2,
            [
                (idx(&[0, 0]), idx(&[0, 1]), Poly::one(2)),
                (idx(&[1, 0]), idx(&[0, 0]), Poly::one(2)),
            ],
        )
        .unwrap();
        let op = c.slot_fix(0, Side::Left).unwrap();
        let f = &Poly::var(2, 1) * &Poly::var(2, 1);
        assert_eq!(op.apply(&f).unwrap(), c.apply(&Poly::var(2, 0), &f).unwrap());
        assert!(BiDiffOp::zero(2).slot_fix(1, Side::Right).unwrap().is_zero());
        assert!(c.slot_fix(5, Side::Left).is_err());
    }

    #[test]
    fn swap_is_involution() {
        let c = BiDiffOp::from_terms(2, [(idx(&[2, 0]), idx(&[0, 1]), Poly::var(2, 0))]).unwrap();
        assert_eq!(c.swap().swap(), c);
        assert_ne!(c.swap(), c);
    }
}
