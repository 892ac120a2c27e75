use crate::algebra::{GaussianRational, Poly};
use crate::error::{check_dim, Error, Result};

/// Poisson bivector `P^{μν}` with polynomial components.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoissonTensor {
    dim: usize,
    comps: Vec<Poly>,
}

impl PoissonTensor {
    /// Row-major components; must be antisymmetric.
    pub fn new(dim: usize, comps: Vec<Poly>) -> Result<Self> {
        if comps.len() != dim * dim {
            return Err(Error::InvalidInput(format!(
                "expected {} Poisson components, got {}",
                dim * dim,
                comps.len()
            )));
        }
        for c in &comps {
            check_dim(dim, c.dim())?;
        }
        for mu in 0..dim {
            for nu in mu..dim {
                if comps[mu * dim + nu] != -&comps[nu * dim + mu] {
                    return Err(Error::NonAntisymmetricPoisson(mu, nu));
                }
            }
        }
        Ok(Self { dim, comps })
    }

    /// The block form on `(q¹…qⁿ, p₁…pₙ, z¹…zᵏ)`: `P^{q_i p_i} = 1`,
    /// `P^{p_i q_i} = −1`, zero on the Casimir block.
    pub fn canonical(n: usize, casimirs: usize) -> Self {
        let dim = 2 * n + casimirs;
        let mut comps = vec![Poly::zero(dim); dim * dim];
        for i in 0..n {
            comps[i * dim + n + i] = Poly::one(dim);
            comps[(n + i) * dim + i] = Poly::constant(dim, GaussianRational::from_int(-1));
        }
        Self { dim, comps }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, mu: usize, nu: usize) -> &Poly {
        &self.comps[mu * self.dim + nu]
    }

    pub fn is_constant(&self) -> bool {
        self.comps.iter().all(Poly::is_constant)
    }

    /// Nonzero constant entries `(μ, ν, P^{μν})`, in row-major order.
    ///
    /// Only meaningful for a constant tensor.
    pub fn constant_entries(&self) -> Vec<(usize, usize, GaussianRational)> {
        let mut out = Vec::new();
        for mu in 0..self.dim {
            for nu in 0..self.dim {
                let c = self.get(mu, nu);
                if !c.is_zero() {
                    out.push((mu, nu, c.constant_term()));
                }
            }
        }
        out
    }

    /// `{f, g} = P^{μν} ∂_μ f ∂_ν g`.
    pub fn bracket(&self, f: &Poly, g: &Poly) -> Result<Poly> {
        check_dim(self.dim, f.dim())?;
        check_dim(self.dim, g.dim())?;
        let mut out = Poly::zero(self.dim);
        for mu in 0..self.dim {
            let df = f.diff(mu);
            if df.is_zero() {
                continue;
            }
            for nu in 0..self.dim {
                let p = self.get(mu, nu);
                if p.is_zero() {
                    continue;
                }
                out = &out + &(&(p * &df) * &g.diff(nu));
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_block_with_casimir() {
        let p = PoissonTensor::canonical(1, 1);
        assert_eq!(p.dim(), 3);
        assert_eq!(p.get(0, 1), &Poly::one(3));
        assert_eq!(p.get(1, 0), &-&Poly::one(3));
        assert!(p.get(2, 0).is_zero() && p.get(0, 2).is_zero() && p.get(2, 2).is_zero());
        assert!(PoissonTensor::new(3, p.comps.clone()).is_ok());
    }

    #[test]
    fn bracket_of_coordinates() {
        let p = PoissonTensor::canonical(1, 0);
        assert_eq!(p.bracket(&Poly::var(2, 0), &Poly::var(2, 1)).unwrap(), Poly::one(2));
    }

    #[test]
    fn rejects_symmetric_entry() {
        let mut comps = vec![Poly::zero(2); 4];
        comps[1] = Poly::one(2);
        comps[2] = Poly::one(2);
        assert_eq!(PoissonTensor::new(2, comps), Err(Error::NonAntisymmetricPoisson(0, 1)));
    }
}
