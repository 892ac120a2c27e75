use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{GaussianRational, MultiIndex};
use crate::error::{check_dim, Error, Result};

/// Multivariate polynomial over the Gaussian rationals in `dim` coordinates.
///
/// Terms are kept in a `BTreeMap` keyed by monomial, so iteration order is the
/// graded lexicographic order and two polynomials are equal exactly when their
/// term maps are. Zero coefficients are never stored; the zero polynomial is
/// the empty map.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    dim: usize,
    terms: BTreeMap<MultiIndex, GaussianRational>,
}

impl Poly {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, GaussianRational::one())
    }

    pub fn constant(dim: usize, c: GaussianRational) -> Self {
        Self::monomial(dim, MultiIndex::zero(dim), c)
    }

    /// The coordinate function `x^alpha`.
    pub fn var(dim: usize, alpha: usize) -> Self {
        Self::monomial(dim, MultiIndex::unit(dim, alpha), GaussianRational::one())
    }

    pub fn monomial(dim: usize, exps: MultiIndex, c: GaussianRational) -> Self {
        assert_eq!(exps.dim(), dim, "monomial dimension");
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exps, c);
        }
        Self { dim, terms }
    }

    /// Build from arbitrary `(monomial, coefficient)` pairs; like terms are combined.
    pub fn from_terms(
        dim: usize,
        terms: impl IntoIterator<Item = (MultiIndex, GaussianRational)>,
    ) -> Result<Self> {
        let mut p = Self::zero(dim);
        for (m, c) in terms {
            check_dim(dim, m.dim())?;
            p.add_term(m, &c);
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &GaussianRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, m: &MultiIndex) -> GaussianRational {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(MultiIndex::is_zero)
    }

    /// The constant coefficient (value at the origin).
    pub fn constant_term(&self) -> GaussianRational {
        self.coeff(&MultiIndex::zero(self.dim))
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(MultiIndex::len)
    }

    /// Highest exponent of `x^alpha` occurring in any term.
    pub fn degree_in(&self, alpha: usize) -> u32 {
        self.terms.keys().map(|m| m.get(alpha)).max().unwrap_or(0)
    }

    pub fn depends_on(&self, alpha: usize) -> bool {
        self.degree_in(alpha) > 0
    }

    pub(crate) fn add_term(&mut self, m: MultiIndex, c: &GaussianRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c.clone());
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), &-c);
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        let mut out = Self::zero(self.dim);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.add(mb), &(ca * cb));
            }
        }
        Ok(out)
    }

    /// In-place `self += c · other`.
    pub fn add_scaled(&mut self, other: &Self, c: &GaussianRational) {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        if c.is_zero() {
            return;
        }
        for (m, a) in &other.terms {
            self.add_term(m.clone(), &(a * c));
        }
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        if c.is_zero() {
            return Self::zero(self.dim);
        }
        Self {
            dim: self.dim,
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one(self.dim);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// `∂/∂x^alpha`.
    pub fn diff(&self, alpha: usize) -> Self {
        let mut out = Self::zero(self.dim);
        for (m, c) in &self.terms {
            let e = m.get(alpha);
            if e == 0 {
                continue;
            }
            let m2 = m.decrement(alpha).expect("positive exponent");
            out.add_term(m2, &(c * &GaussianRational::from_int(e as i64)));
        }
        out
    }

    /// Iterated partial derivative `∂_{x^I}`.
    pub fn diff_multi(&self, index: &MultiIndex) -> Result<Self> {
        check_dim(self.dim, index.dim())?;
        let mut out = Self::zero(self.dim);
        for (m, c) in &self.terms {
            let Some(rest) = m.checked_sub(index) else {
                continue;
            };
            // falling factorial ∏ m_j! / (m_j - I_j)!
            let mut factor: u64 = 1;
            for (a, b) in m.exponents().iter().zip(index.exponents()) {
                for t in 0..*b {
                    factor *= (*a - t) as u64;
                }
            }
            out.add_term(rest, &(c * &GaussianRational::from_int(factor as i64)));
        }
        Ok(out)
    }

    /// Re-express in `dim` coordinates with old coordinate `j` becoming `offset + j`.
    pub fn embed(&self, dim: usize, offset: usize) -> Self {
        assert!(offset + self.dim <= dim, "embedding does not fit");
        Self {
            dim,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.embed(dim, offset), c.clone()))
                .collect(),
        }
    }

    /// Drop to the first `dim` coordinates; fails if a dropped coordinate occurs.
    pub fn restrict(&self, dim: usize) -> Result<Self> {
        let mut out = Self::zero(dim);
        for (m, c) in &self.terms {
            if m.exponents()[dim..].iter().any(|&e| e > 0) {
                return Err(Error::InvalidInput(format!(
                    "polynomial depends on coordinates beyond the first {dim}"
                )));
            }
            out.add_term(MultiIndex::from_exponents(m.exponents()[..dim].to_vec()), c);
        }
        Ok(out)
    }

    /// Format with the given coordinate names.
    pub fn display_with(&self, names: &[String]) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let mono: Vec<String> = m
                .exponents()
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(j, &e)| {
                    let name = names.get(j).cloned().unwrap_or_else(|| format!("x{j}"));
                    if e == 1 {
                        name
                    } else {
                        format!("{name}^{e}")
                    }
                })
                .collect();
            let (neg, mag) = if c.is_real() && c.re < num_rational::BigRational::zero() {
                (true, -c)
            } else {
                (false, c.clone())
            };
            if k > 0 {
                out.push_str(if neg { " - " } else { " + " });
            } else if neg {
                out.push('-');
            }
            if mono.is_empty() {
                out.push_str(&mag.to_string());
            } else {
                if !mag.is_one() {
                    out.push_str(&mag.to_string());
                    out.push('*');
                }
                out.push_str(&mono.join("*"));
            }
        }
        out
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..self.dim).map(|j| format!("x{j}")).collect();
        write!(f, "{}", self.display_with(&names))
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        self.try_add(rhs).expect("dimension mismatch")
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self.try_sub(rhs).expect("dimension mismatch")
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        self.try_mul(rhs).expect("dimension mismatch")
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&GaussianRational::from_int(-1))
    }
}

#[derive(Serialize, Deserialize)]
pub(crate) struct WireTerm {
    pub monomial: MultiIndex,
    pub coeff: GaussianRational,
}

#[derive(Serialize, Deserialize)]
struct WirePoly {
    dim: usize,
    terms: Vec<WireTerm>,
}

impl Poly {
    pub(crate) fn to_wire(&self) -> Vec<WireTerm> {
        self.terms
            .iter()
            .map(|(m, c)| WireTerm {
                monomial: m.clone(),
                coeff: c.clone(),
            })
            .collect()
    }

    /// Rebuild from wire terms. Rejects zero or repeated monomials so that
    /// only canonical input round-trips.
    pub(crate) fn from_wire(dim: usize, terms: Vec<WireTerm>) -> Result<Self> {
        let mut p = Self::zero(dim);
        for t in terms {
            check_dim(dim, t.monomial.dim())?;
            if t.coeff.is_zero() {
                return Err(Error::InvalidInput("zero coefficient stored".into()));
            }
            if p.terms.insert(t.monomial, t.coeff).is_some() {
                return Err(Error::InvalidInput("repeated monomial".into()));
            }
        }
        Ok(p)
    }
}

impl Serialize for Poly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        WirePoly {
            dim: self.dim,
            terms: self.to_wire(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Poly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = WirePoly::deserialize(d)?;
        Poly::from_wire(w.dim, w.terms).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> Poly {
        Poly::var(2, 0)
    }
    fn p() -> Poly {
        Poly::var(2, 1)
    }

    #[test]
    fn cancellation() {
        let a = &q() + &p();
        let b = &q() - &p();
        assert_eq!(&a + &b, q().scale(&GaussianRational::from_int(2)));
        assert!((&a - &a).is_zero());
    }

    #[test]
    fn product_and_scale() {
        assert_eq!(
            &q() * &p(),
            Poly::monomial(2, MultiIndex::from_exponents(vec![1, 1]), GaussianRational::one())
        );
        let q2p = &(&q() * &q()) * &p();
        let half_i = GaussianRational::imag(crate::algebra::rat(1, 2));
        let scaled = q2p.scale(&half_i);
        assert_eq!(
            scaled.coeff(&MultiIndex::from_exponents(vec![2, 1])),
            half_i
        );
        assert_eq!(scaled.num_terms(), 1);
    }

    #[test]
    fn derivatives() {
        let q2p = &(&q() * &q()) * &p();
        assert_eq!(q2p.diff(0), (&q() * &p()).scale(&GaussianRational::from_int(2)));
        let q2 = &q() * &q();
        assert!(q2
            .diff_multi(&MultiIndex::from_exponents(vec![0, 2]))
            .unwrap()
            .is_zero());
        let q2p2 = &q2 * &(&p() * &p());
        assert_eq!(
            q2p2.diff_multi(&MultiIndex::from_exponents(vec![1, 1])).unwrap(),
            (&q() * &p()).scale(&GaussianRational::from_int(4))
        );
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a = Poly::var(2, 0);
        let b = Poly::var(3, 0);
        assert!(matches!(
            a.try_add(&b),
            Err(Error::DimensionMismatch { left: 2, right: 3 })
        ));
        assert!(a.try_mul(&b).is_err());
    }

    #[test]
    fn zero_is_empty() {
        let z = Poly::zero(2);
        assert!(z.is_zero());
        assert_eq!(z.num_terms(), 0);
        assert_eq!(z.degree(), None);
        assert_eq!(Poly::constant(2, GaussianRational::zero()), z);
    }

    #[test]
    fn display() {
        let names = vec!["q".to_string(), "p".to_string()];
        let f = &(&q() * &q()) - &p().scale(&GaussianRational::from_ratio(1, 2));
        assert_eq!(f.display_with(&names), "q^2 - 1/2*p");
    }
}
