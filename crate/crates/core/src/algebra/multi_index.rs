use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Exponent vector over the coordinates `0..dim`.
///
/// Used both for monomials `x^I` and for derivative multi-indices `∂_I`.
/// Stored densely; the length `|I|` is the sum of the entries.
/// Ordering is graded lexicographic: total degree first, then the exponent
/// vectors compared left to right.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn zero(dim: usize) -> Self {
        Self(vec![0; dim])
    }

    pub fn from_exponents(exps: Vec<u32>) -> Self {
        Self(exps)
    }

    /// `e_α`, the unit multi-index in direction `α`.
    pub fn unit(dim: usize, alpha: usize) -> Self {
        let mut v = vec![0; dim];
        v[alpha] = 1;
        Self(v)
    }

    /// Multi-index counting how often each coordinate occurs in `indices`.
    pub fn from_indices(dim: usize, indices: &[usize]) -> Self {
        let mut v = vec![0; dim];
        for &a in indices {
            v[a] += 1;
        }
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, alpha: usize) -> u32 {
        self.0[alpha]
    }

    pub fn len(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self − other`, or `None` if some entry would go negative.
    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        debug_assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(Self)
    }

    pub fn increment(&self, alpha: usize) -> Self {
        let mut v = self.0.clone();
        v[alpha] += 1;
        Self(v)
    }

    pub fn decrement(&self, alpha: usize) -> Option<Self> {
        if self.0[alpha] == 0 {
            return None;
        }
        let mut v = self.0.clone();
        v[alpha] -= 1;
        Some(Self(v))
    }

    /// Every `L ≤ self` componentwise.
    pub fn sub_indices(&self) -> Vec<Self> {
        let mut out = vec![Vec::with_capacity(self.dim())];
        for &e in &self.0 {
            let mut next = Vec::with_capacity(out.len() * (e as usize + 1));
            for prefix in &out {
                for k in 0..=e {
                    let mut p = prefix.clone();
                    p.push(k);
                    next.push(p);
                }
            }
            out = next;
        }
        out.into_iter().map(Self).collect()
    }

    /// `∏ C(self_j, l_j)`.
    pub fn binomial(&self, l: &Self) -> u64 {
        self.0
            .iter()
            .zip(&l.0)
            .map(|(&n, &k)| binom(n as u64, k as u64))
            .product()
    }

    /// `∏ self_j!`.
    pub fn factorial(&self) -> u64 {
        self.0.iter().map(|&e| (1..=e as u64).product::<u64>()).product()
    }

    /// Embed into a larger coordinate space, placing coordinate `j` at `offset + j`.
    pub fn embed(&self, dim: usize, offset: usize) -> Self {
        let mut v = vec![0; dim];
        v[offset..offset + self.dim()].copy_from_slice(&self.0);
        Self(v)
    }
}

fn binom(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1, |acc, j| acc * (n - j) / (j + 1))
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}
