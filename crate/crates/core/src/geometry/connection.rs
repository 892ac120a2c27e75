use crate::algebra::{GaussianRational, Poly};
use crate::error::{check_dim, Error, Result};

/// Flat index of a tuple in `0..dim` (row-major).
pub(crate) fn flat_index(idx: &[usize], dim: usize) -> usize {
    idx.iter().fold(0, |acc, &i| acc * dim + i)
}

/// All tuples of length `len` over `0..dim`, in row-major order.
pub(crate) fn tuples(dim: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::with_capacity(len)];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..dim).map(move |i| {
                    let mut t = t.clone();
                    t.push(i);
                    t
                })
            })
            .collect();
    }
    out
}

/// Christoffel symbols `Γ^i_{jk}` of a linear connection on a `dim`-dimensional
/// coordinate patch, with polynomial components in the same coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineConnection {
    dim: usize,
    gamma: Vec<Poly>,
}

impl AffineConnection {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            gamma: vec![Poly::zero(dim); dim * dim * dim],
        }
    }

    /// Components in `[upper][lower1][lower2]` row-major order.
    pub fn new(dim: usize, gamma: Vec<Poly>) -> Result<Self> {
        if gamma.len() != dim * dim * dim {
            return Err(Error::InvalidConnection(format!(
                "expected {} components, got {}",
                dim * dim * dim,
                gamma.len()
            )));
        }
        for g in &gamma {
            check_dim(dim, g.dim())?;
        }
        Ok(Self { dim, gamma })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> &Poly {
        &self.gamma[flat_index(&[i, j, k], self.dim)]
    }

    pub(crate) fn set(&mut self, i: usize, j: usize, k: usize, value: Poly) {
        let d = self.dim;
        self.gamma[flat_index(&[i, j, k], d)] = value;
    }

    pub fn components(&self) -> &[Poly] {
        &self.gamma
    }

    pub fn is_zero(&self) -> bool {
        self.gamma.iter().all(Poly::is_zero)
    }

    /// First offending `(i, j, k)` with `Γ^i_{jk} ≠ Γ^i_{kj}`.
    pub fn torsion_violation(&self) -> Option<(usize, usize, usize)> {
        let d = self.dim;
        for i in 0..d {
            for j in 0..d {
                for k in (j + 1)..d {
                    if self.get(i, j, k) != self.get(i, k, j) {
                        return Some((i, j, k));
                    }
                }
            }
        }
        None
    }

    /// `R^ρ_{σμν} = ∂_μΓ^ρ_{νσ} − ∂_νΓ^ρ_{μσ} + Γ^ρ_{μλ}Γ^λ_{νσ} − Γ^ρ_{νλ}Γ^λ_{μσ}`.
    pub fn curvature(&self) -> Curvature {
        let d = self.dim;
        let mut comps = Vec::with_capacity(d.pow(4));
        for rho in 0..d {
            for sigma in 0..d {
                for mu in 0..d {
                    for nu in 0..d {
                        let mut r = &self.get(rho, nu, sigma).diff(mu) - &self.get(rho, mu, sigma).diff(nu);
                        for lam in 0..d {
                            r = &r + &(self.get(rho, mu, lam) * self.get(lam, nu, sigma));
                            r = &r - &(self.get(rho, nu, lam) * self.get(lam, mu, sigma));
                        }
                        comps.push(r);
                    }
                }
            }
        }
        Curvature { dim: d, comps }
    }

    /// `R_{μν} = R^α_{μαν}`.
    pub fn ricci(&self) -> Vec<Poly> {
        let d = self.dim;
        let riemann = self.curvature();
        let mut out = Vec::with_capacity(d * d);
        for mu in 0..d {
            for nu in 0..d {
                let mut r = Poly::zero(d);
                for alpha in 0..d {
                    r = &r + riemann.get(alpha, mu, alpha, nu);
                }
                out.push(r);
            }
        }
        out
    }

    pub fn is_flat(&self) -> bool {
        self.curvature().is_zero()
    }
}

/// Riemann tensor components `R^ρ_{σμν}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Curvature {
    dim: usize,
    comps: Vec<Poly>,
}

impl Curvature {
    pub fn get(&self, rho: usize, sigma: usize, mu: usize, nu: usize) -> &Poly {
        &self.comps[flat_index(&[rho, sigma, mu, nu], self.dim)]
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Poly::is_zero)
    }

    pub fn components(&self) -> &[Poly] {
        &self.comps
    }
}

/// Linear connection on the base manifold `Q` (coordinates `q^1..q^n`).
///
/// Components are symmetric in the lower indices and, living in `n`
/// coordinates, independent of the momenta.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Connection {
    inner: AffineConnection,
}

impl Connection {
    pub fn zero(n: usize) -> Self {
        Self {
            inner: AffineConnection::zero(n),
        }
    }

    pub fn new(n: usize, gamma: Vec<Poly>) -> Result<Self> {
        let inner = AffineConnection::new(n, gamma)?;
        if let Some((i, j, k)) = inner.torsion_violation() {
            return Err(Error::AsymmetricConnection(format!(
                "Γ^{i}_{{{j}{k}}} ≠ Γ^{i}_{{{k}{j}}}"
            )));
        }
        Ok(Self { inner })
    }

    /// One-dimensional base with `Γ¹₁₁ = γ(q)`; always flat.
    pub fn one_dimensional(gamma: Poly) -> Result<Self> {
        check_dim(1, gamma.dim())?;
        Self::new(1, vec![gamma])
    }

    pub fn n(&self) -> usize {
        self.inner.dim()
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> &Poly {
        self.inner.get(i, j, k)
    }

    pub fn affine(&self) -> &AffineConnection {
        &self.inner
    }

    pub fn curvature(&self) -> Curvature {
        self.inner.curvature()
    }

    pub fn is_flat(&self) -> bool {
        self.inner.is_flat()
    }
}

/// The connection `Γ^i_{jk} = (∂x^i/∂y^a) ∂²y^a/∂x^j∂x^k` whose flat
/// coordinates are `y = φ(x)`.
///
/// `φ` must be unit lower triangular: `y^a − x^a` may only depend on
/// `x^1..x^{a−1}`, which makes the inverse Jacobian polynomial.
pub fn flat_connection_from_diffeo(map: &[Poly]) -> Result<Connection> {
    let n = map.len();
    for (a, y) in map.iter().enumerate() {
        check_dim(n, y.dim())?;
        let shift = y - &Poly::var(n, a);
        if let Some(b) = (a..n).find(|&b| shift.depends_on(b)) {
            return Err(Error::NonInvertibleMap(format!(
                "component {} depends on coordinate {} beyond the identity part",
                a + 1,
                b + 1
            )));
        }
    }
    // J = I + L with L strictly lower triangular, so J⁻¹ = Σ_m (−L)^m.
    let jac: Vec<Vec<Poly>> = map
        .iter()
        .map(|y| (0..n).map(|j| y.diff(j)).collect())
        .collect();
    let minus_l: Vec<Vec<Poly>> = (0..n)
        .map(|a| {
            (0..n)
                .map(|j| if a == j { Poly::zero(n) } else { -&jac[a][j] })
                .collect()
        })
        .collect();
    let identity: Vec<Vec<Poly>> = (0..n)
        .map(|a| {
            (0..n)
                .map(|j| if a == j { Poly::one(n) } else { Poly::zero(n) })
                .collect()
        })
        .collect();
    let matmul = |x: &Vec<Vec<Poly>>, y: &Vec<Vec<Poly>>| -> Vec<Vec<Poly>> {
        (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| (0..n).fold(Poly::zero(n), |acc, c| &acc + &(&x[a][c] * &y[c][b])))
                    .collect()
            })
            .collect()
    };
    let mut inv = identity.clone();
    let mut power = identity;
    for _ in 1..n {
        power = matmul(&power, &minus_l);
        for a in 0..n {
            for b in 0..n {
                inv[a][b] = &inv[a][b] + &power[a][b];
            }
        }
    }
    let mut gamma = Vec::with_capacity(n * n * n);
    for inv_row in &inv {
        for j in 0..n {
            for k in 0..n {
                let mut g = Poly::zero(n);
                for (a, row) in jac.iter().enumerate() {
                    let second = row[j].diff(k);
                    if !second.is_zero() {
                        g = &g + &(&inv_row[a] * &second);
                    }
                }
                gamma.push(g);
            }
        }
    }
    Connection::new(n, gamma)
}

/// Symplectic connection on `T*Q` induced by a base connection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftedConnection {
    n: usize,
    inner: AffineConnection,
}

impl LiftedConnection {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn affine(&self) -> &AffineConnection {
        &self.inner
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> &Poly {
        self.inner.get(i, j, k)
    }

    pub fn curvature(&self) -> Curvature {
        self.inner.curvature()
    }
}

/// Christoffel symbols on `T*Q` in Darboux coordinates `(q, p)`, barred index `ī = n + i`:
///
/// ```text
/// Γ̃^i_{jk} = Γ^i_{jk},   Γ̃^ī_{j̄k} = −Γ^j_{ik},   Γ̃^ī_{jk̄} = −Γ^k_{ji},
/// Γ̃^ī_{jk} = p_l (Γ^r_{jk} Γ^l_{ri} + Γ^r_{ik} Γ^l_{rj} − ∂_k Γ^l_{ij}),
/// ```
/// all other components zero.
pub fn lift_connection(c: &Connection) -> LiftedConnection {
    let n = c.n();
    let d = 2 * n;
    let base = |i: usize, j: usize, k: usize| c.get(i, j, k).embed(d, 0);
    let mut lifted = AffineConnection::zero(d);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                lifted.set(i, j, k, base(i, j, k));
                lifted.set(n + i, n + j, k, -&base(j, i, k));
                lifted.set(n + i, j, n + k, -&base(k, j, i));
                let mut g = Poly::zero(d);
                for l in 0..n {
                    let mut coeff = -&base(l, i, j).diff(k);
                    for r in 0..n {
                        coeff = &coeff + &(&base(r, j, k) * &base(l, r, i));
                        coeff = &coeff + &(&base(r, i, k) * &base(l, r, j));
                    }
                    g = &g + &(&coeff * &Poly::var(d, n + l));
                }
                lifted.set(n + i, j, k, g);
            }
        }
    }
    LiftedConnection { n, inner: lifted }
}

/// Constant canonical Poisson matrix on the `2n` symplectic coordinates.
pub(crate) fn canonical_sign(n: usize, mu: usize, nu: usize) -> i64 {
    if mu < n && nu == mu + n {
        1
    } else if mu >= n && nu + n == mu {
        -1
    } else {
        0
    }
}

/// Torsionless symplectic connection on a `2n`-dimensional Darboux chart, given
/// by its fully lowered symbols `Γ̃_{αβγ} = ω_{αδ} Γ̃^δ_{βγ}` and the weight
/// `a` of the Ricci term in the second-order product.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymplecticConnectionSpec {
    n: usize,
    lowered: Vec<Poly>,
    a: GaussianRational,
}

impl SymplecticConnectionSpec {
    /// `lowered` in `[α][β][γ]` row-major order over `0..2n`; must be totally symmetric.
    pub fn new(n: usize, lowered: Vec<Poly>, a: GaussianRational) -> Result<Self> {
        let d = 2 * n;
        if lowered.len() != d * d * d {
            return Err(Error::InvalidConnection(format!(
                "expected {} lowered components, got {}",
                d * d * d,
                lowered.len()
            )));
        }
        for g in &lowered {
            check_dim(d, g.dim())?;
        }
        let get = |a: usize, b: usize, c: usize| &lowered[flat_index(&[a, b, c], d)];
        for x in 0..d {
            for y in 0..d {
                for z in 0..d {
                    if get(x, y, z) != get(y, x, z) || get(x, y, z) != get(x, z, y) {
                        return Err(Error::AsymmetricConnection(format!(
                            "Γ̃_({x},{y},{z}) is not totally symmetric"
                        )));
                    }
                }
            }
        }
        Ok(Self { n, lowered, a })
    }

    /// Lower `Γ̃^δ_{βγ}` with `ω = P⁻¹`; fails unless the result is totally symmetric.
    pub fn from_connection(c: &AffineConnection, a: GaussianRational) -> Result<Self> {
        let d = c.dim();
        if !d.is_multiple_of(2) {
            return Err(Error::InvalidConnection("odd-dimensional symplectic chart".into()));
        }
        let n = d / 2;
        // ω = P⁻¹ = −P for the canonical block matrix
        let mut lowered = Vec::with_capacity(d * d * d);
        for alpha in 0..d {
            for beta in 0..d {
                for gamma in 0..d {
                    let mut g = Poly::zero(d);
                    for delta in 0..d {
                        let s = -canonical_sign(n, alpha, delta);
                        if s != 0 {
                            g = &g + &c.get(delta, beta, gamma).scale(&GaussianRational::from_int(s));
                        }
                    }
                    lowered.push(g);
                }
            }
        }
        Self::new(n, lowered, a)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> &GaussianRational {
        &self.a
    }

    pub fn with_a(&self, a: GaussianRational) -> Self {
        Self { a, ..self.clone() }
    }

    pub fn lowered(&self, alpha: usize, beta: usize, gamma: usize) -> &Poly {
        &self.lowered[flat_index(&[alpha, beta, gamma], 2 * self.n)]
    }

    /// `Γ̃^δ_{βγ} = P^{δα} Γ̃_{αβγ}`.
    pub fn raised(&self) -> AffineConnection {
        let d = 2 * self.n;
        let mut out = AffineConnection::zero(d);
        for delta in 0..d {
            for beta in 0..d {
                for gamma in 0..d {
                    let mut g = Poly::zero(d);
                    for alpha in 0..d {
                        let s = canonical_sign(self.n, delta, alpha);
                        if s != 0 {
                            g = &g + &self.lowered(alpha, beta, gamma).scale(&GaussianRational::from_int(s));
                        }
                    }
                    out.set(delta, beta, gamma, g);
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.lowered.iter().all(Poly::is_zero)
    }
}

/// Ricci tensor `R̃_{μν} = R^α_{μαν}` of the raised symplectic connection,
/// row-major over `0..2n`.
pub fn ricci(spec: &SymplecticConnectionSpec) -> Vec<Poly> {
    spec.raised().ricci()
}

/// Whether every component in `comps` vanishes.
pub fn all_zero(comps: &[Poly]) -> bool {
    comps.iter().all(Poly::is_zero)
}
