use serde::{Deserialize, Serialize};

use super::Poly;
use crate::error::{check_dim, Error, Result};

/// Power series in ħ truncated after `ħ^order`.
///
/// Always holds exactly `order + 1` coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HbarSeries<T> {
    coeffs: Vec<T>,
}

impl<T> HbarSeries<T> {
    /// Panics if `coeffs` is empty.
    pub fn from_coeffs(coeffs: Vec<T>) -> Self {
        assert!(!coeffs.is_empty(), "a truncated series has at least ħ⁰");
        Self { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> &T {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> HbarSeries<U> {
        HbarSeries {
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    /// Truncated Cauchy product with an arbitrary bilinear `mul`.
    pub fn cauchy<U, V>(
        &self,
        other: &HbarSeries<U>,
        zero: impl Fn() -> V,
        mut acc: impl FnMut(&mut V, &T, &U),
    ) -> Result<HbarSeries<V>> {
        if self.order() != other.order() {
            return Err(Error::OrderMismatch {
                left: self.order(),
                right: other.order(),
            });
        }
        let n = self.order();
        let mut coeffs: Vec<V> = (0..=n).map(|_| zero()).collect();
        for (k, slot) in coeffs.iter_mut().enumerate() {
            for l in 0..=k {
                acc(slot, &self.coeffs[l], &other.coeffs[k - l]);
            }
        }
        Ok(HbarSeries { coeffs })
    }
}

impl HbarSeries<Poly> {
    pub fn zero(dim: usize, order: usize) -> Self {
        Self {
            coeffs: vec![Poly::zero(dim); order + 1],
        }
    }

    /// `f` placed at ħ⁰.
    pub fn constant(f: Poly, order: usize) -> Self {
        let dim = f.dim();
        let mut s = Self::zero(dim, order);
        s.coeffs[0] = f;
        s
    }

    pub fn dim(&self) -> usize {
        self.coeffs[0].dim()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Poly::is_zero)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.try_add(b))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.try_sub(b))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&Poly, &Poly) -> Result<Poly>) -> Result<Self> {
        if self.order() != other.order() {
            return Err(Error::OrderMismatch {
                left: self.order(),
                right: other.order(),
            });
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| f(a, b))
            .collect::<Result<_>>()?;
        Ok(Self { coeffs })
    }

    pub fn scale(&self, c: &super::GaussianRational) -> Self {
        self.map(|p| p.scale(c))
    }

    /// Truncated product with pointwise multiplication of the coefficients.
    pub fn series_mul(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        let dim = self.dim();
        self.cauchy(other, || Poly::zero(dim), |acc, a, b| {
            *acc = acc.try_add(&(a * b)).expect("dims checked");
        })
    }

    /// The same series truncated (or zero-padded) to a new order.
    pub fn with_order(&self, order: usize) -> Self {
        let dim = self.dim();
        let coeffs = (0..=order)
            .map(|k| self.coeffs.get(k).cloned().unwrap_or_else(|| Poly::zero(dim)))
            .collect();
        Self { coeffs }
    }

    /// Index of the first differing coefficient.
    pub fn first_difference(&self, other: &Self) -> Option<usize> {
        (0..=self.order().max(other.order())).find(|&k| self.coeffs.get(k) != other.coeffs.get(k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::GaussianRational;

    fn q() -> Poly {
        Poly::var(2, 0)
    }

    #[test]
    fn conjugate_product() {
        // (1 + ħq)(1 − ħq) = 1 − ħ²q²
        let one = Poly::one(2);
        let a = HbarSeries::from_coeffs(vec![one.clone(), q(), Poly::zero(2)]);
        let b = HbarSeries::from_coeffs(vec![one.clone(), -&q(), Poly::zero(2)]);
        let c = a.series_mul(&b).unwrap();
        assert_eq!(c.coeffs(), &[one, Poly::zero(2), -&(&q() * &q())]);
    }

    #[test]
    fn truncation_drops_high_orders() {
        let z = Poly::zero(2);
        let a = HbarSeries::from_coeffs(vec![z.clone(), z.clone(), Poly::var(2, 1)]);
        let b = HbarSeries::from_coeffs(vec![z.clone(), z.clone(), q()]);
        let c = a.series_mul(&b).unwrap();
        assert_eq!(c.order(), 2);
        assert!(c.is_zero());
    }

    #[test]
    fn one_plus_hbar_squared() {
        // (1+ħ)² at N=1 is 1 + 2ħ
        let one = Poly::one(1);
        let a = HbarSeries::from_coeffs(vec![one.clone(), one.clone()]);
        let c = a.series_mul(&a).unwrap();
        assert_eq!(
            c.coeffs(),
            &[one.clone(), one.scale(&GaussianRational::from_int(2))]
        );
    }

    #[test]
    fn order_mismatch() {
        let a = HbarSeries::zero(1, 1);
        let b = HbarSeries::zero(1, 2);
        assert!(matches!(
            a.series_mul(&b),
            Err(Error::OrderMismatch { left: 1, right: 2 })
        ));
    }
}
