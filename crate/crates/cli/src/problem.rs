//! The JSON problem specification and its translation into engine objects.

use serde::Deserialize;
use starq_core::algebra::{parse_poly, parse_scalar, phase_space_names, GaussianRational, MultiIndex, Poly};
use starq_core::equivalence::TableTweak;
use starq_core::geometry::{flat_connection_from_diffeo, lift_connection, Connection, SymplecticConnectionSpec};
use starq_core::operators::{BiDiffOp, DiffOp};
use starq_core::starproducts::{PoissonTensor, StarProduct, VectorFieldFrame, MAX_NATURAL_ORDER};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Moyal,
    VectorField,
    NaturalCotangent,
    SymplecticTruncated,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Moyal => "moyal",
            Kind::VectorField => "vector-field",
            Kind::NaturalCotangent => "natural-cotangent",
            Kind::SymplecticTruncated => "symplectic-truncated",
        }
    }
}

/// `Γ^upper_{lower₀ lower₁}` on the base, 1-based indices.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaEntry {
    pub upper: usize,
    pub lower: [usize; 2],
    pub value: String,
}

/// `Γ̃_{αβγ}` on phase space, 1-based over `(q1..qn, p1..pn)`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoweredEntry {
    pub indices: [usize; 3],
    pub value: String,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationTerm {
    pub left: Vec<u32>,
    pub right: Vec<u32>,
    pub coefficient: String,
}

/// Terms added to `C_order` of the constructed product.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perturbation {
    pub order: usize,
    pub terms: Vec<PerturbationTerm>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TweakSpec {
    pub tensor: String,
    pub term: usize,
    pub delta: i64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub kind: Kind,
    pub n: usize,
    #[serde(default)]
    pub casimirs: usize,
    pub order: usize,
    #[serde(default)]
    pub gamma: Vec<GammaEntry>,
    #[serde(default)]
    pub diffeo: Option<Vec<String>>,
    #[serde(default)]
    pub frame: Option<Vec<Vec<String>>>,
    #[serde(default)]
    pub lowered: Vec<LoweredEntry>,
    #[serde(default)]
    pub a: Option<String>,
    #[serde(default)]
    pub max_degree: Option<u32>,
    #[serde(default)]
    pub perturbation: Option<Perturbation>,
    #[serde(default)]
    pub table_tweak: Option<TweakSpec>,
}

/// Everything a command needs, built from a validated spec.
pub struct Problem {
    pub spec: ProblemSpec,
    pub order: usize,
    pub names: Vec<String>,
    pub product: StarProduct,
    pub connection: Option<Connection>,
    pub symplectic: Option<SymplecticConnectionSpec>,
}

impl Problem {
    pub fn tweak(&self) -> Option<TableTweak> {
        self.spec.table_tweak.as_ref().map(|t| TableTweak {
            tensor: t.tensor.clone(),
            term: t.term,
            delta: t.delta,
        })
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn index(i: usize, bound: usize, what: &str) -> Result<usize, String> {
    if i == 0 || i > bound {
        return Err(format!("{what} index {i} out of range 1..={bound}"));
    }
    Ok(i - 1)
}

fn base_connection(spec: &ProblemSpec) -> Result<Option<Connection>, String> {
    let n = spec.n;
    let qnames: Vec<String> = (1..=n).map(|j| format!("q{j}")).collect();
    if let Some(map) = &spec.diffeo {
        if !spec.gamma.is_empty() {
            return Err("give either `gamma` or `diffeo`, not both".into());
        }
        if map.len() != n {
            return Err(format!("diffeo needs {n} components"));
        }
        let polys = map
            .iter()
            .map(|s| parse_poly(s, &qnames))
            .collect::<Result<Vec<_>, _>>()
            .map_err(err)?;
        return flat_connection_from_diffeo(&polys).map(Some).map_err(err);
    }
    if spec.gamma.is_empty() {
        return Ok(None);
    }
    let mut comps: Vec<Option<Poly>> = vec![None; n * n * n];
    for e in &spec.gamma {
        let i = index(e.upper, n, "gamma")?;
        let j = index(e.lower[0], n, "gamma")?;
        let k = index(e.lower[1], n, "gamma")?;
        let v = parse_poly(&e.value, &qnames).map_err(err)?;
        // the symmetric partner is implied unless given explicitly
        for (a, b) in [(j, k), (k, j)] {
            let slot = &mut comps[(i * n + a) * n + b];
            match slot {
                Some(old) if *old != v && (a, b) == (j, k) => {
                    return Err(format!("gamma[{},{},{}] given twice", e.upper, e.lower[0], e.lower[1]))
                }
                Some(old) if *old != v => {
                    return Err(format!(
                        "gamma[{},{},{}] is not symmetric in its lower indices",
                        e.upper, e.lower[0], e.lower[1]
                    ))
                }
                _ => *slot = Some(v.clone()),
            }
        }
    }
    let comps = comps.into_iter().map(|c| c.unwrap_or_else(|| Poly::zero(n))).collect();
    Connection::new(n, comps).map(Some).map_err(err)
}

fn lowered_spec(spec: &ProblemSpec, names: &[String], a: GaussianRational) -> Result<SymplecticConnectionSpec, String> {
    let d = 2 * spec.n;
    let mut comps: Vec<Option<Poly>> = vec![None; d * d * d];
    for e in &spec.lowered {
        let idx = [
            index(e.indices[0], d, "lowered")?,
            index(e.indices[1], d, "lowered")?,
            index(e.indices[2], d, "lowered")?,
        ];
        let v = parse_poly(&e.value, names).map_err(err)?;
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        for p in perms {
            let slot = &mut comps[(idx[p[0]] * d + idx[p[1]]) * d + idx[p[2]]];
            if slot.as_ref().is_some_and(|old| *old != v) {
                return Err(format!("lowered{:?} conflicts with a symmetric partner", e.indices));
            }
            *slot = Some(v.clone());
        }
    }
    let comps = comps.into_iter().map(|c| c.unwrap_or_else(|| Poly::zero(d))).collect();
    SymplecticConnectionSpec::new(spec.n, comps, a).map_err(err)
}

fn perturbation(p: &Perturbation, names: &[String]) -> Result<BiDiffOp, String> {
    let dim = names.len();
    let mut terms = Vec::with_capacity(p.terms.len());
    for t in &p.terms {
        if t.left.len() != dim || t.right.len() != dim {
            return Err(format!("perturbation multi-indices need {dim} entries"));
        }
        terms.push((
            MultiIndex::from_exponents(t.left.clone()),
            MultiIndex::from_exponents(t.right.clone()),
            parse_poly(&t.coefficient, names).map_err(err)?,
        ));
    }
    BiDiffOp::from_terms(dim, terms).map_err(err)
}

impl ProblemSpec {
    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(err)
    }

    /// Build the product; `order` overrides the spec's order.
    pub fn build(self, order: Option<usize>) -> Result<Problem, String> {
        let order = order.unwrap_or(self.order);
        if self.n == 0 {
            return Err("n must be at least 1".into());
        }
        let geometric = matches!(self.kind, Kind::NaturalCotangent | Kind::SymplecticTruncated);
        if geometric && self.casimirs != 0 {
            return Err(format!("{} products take no Casimir directions", self.kind.as_str()));
        }
        if !matches!(self.kind, Kind::VectorField) && self.frame.is_some() {
            return Err("`frame` is only meaningful for vector-field products".into());
        }
        if !matches!(self.kind, Kind::SymplecticTruncated) && (!self.lowered.is_empty() || self.a.is_some()) {
            return Err("`lowered` and `a` are only meaningful for symplectic-truncated products".into());
        }
        if !geometric && (!self.gamma.is_empty() || self.diffeo.is_some()) {
            return Err("connection data needs a natural-cotangent or symplectic-truncated product".into());
        }
        let names = phase_space_names(self.n, self.casimirs);
        let poisson = PoissonTensor::canonical(self.n, self.casimirs);
        let mut connection = None;
        let mut symplectic = None;
        let product = match self.kind {
            Kind::Moyal => StarProduct::moyal(&poisson, order).map_err(err)?,
            Kind::VectorField => {
                let rows = self.frame.as_ref().ok_or("vector-field products need a `frame`")?;
                let dim = names.len();
                if rows.len() != dim {
                    return Err(format!("frame needs {dim} vector fields"));
                }
                let mut fields = Vec::with_capacity(dim);
                for row in rows {
                    if row.len() != dim {
                        return Err(format!("each frame vector field needs {dim} components"));
                    }
                    let mut terms = Vec::new();
                    for (a, c) in row.iter().enumerate() {
                        terms.push((MultiIndex::unit(dim, a), parse_poly(c, &names).map_err(err)?));
                    }
                    fields.push(DiffOp::from_terms(dim, terms).map_err(err)?);
                }
                let frame = VectorFieldFrame::new(fields).map_err(err)?;
                StarProduct::vector_field(&frame, &poisson, order).map_err(err)?
            }
            Kind::NaturalCotangent => {
                if order > MAX_NATURAL_ORDER {
                    return Err(format!("natural-cotangent products support order ≤ {MAX_NATURAL_ORDER}"));
                }
                let c = base_connection(&self)?.unwrap_or_else(|| Connection::zero(self.n));
                let s = StarProduct::natural_cotangent(&c, order).map_err(err)?;
                connection = Some(c);
                s
            }
            Kind::SymplecticTruncated => {
                if order != 2 {
                    return Err("symplectic-truncated products have order 2".into());
                }
                let a = match &self.a {
                    Some(s) => parse_scalar(s).map_err(err)?,
                    None => GaussianRational::from_int(0),
                };
                let spec = match base_connection(&self)? {
                    Some(c) => {
                        if !self.lowered.is_empty() {
                            return Err("give either a base connection or `lowered`, not both".into());
                        }
                        let lifted = lift_connection(&c);
                        connection = Some(c);
                        SymplecticConnectionSpec::from_connection(lifted.affine(), a).map_err(err)?
                    }
                    None => lowered_spec(&self, &names, a)?,
                };
                let s = StarProduct::symplectic_truncated(&spec).map_err(err)?;
                symplectic = Some(spec);
                s
            }
        };
        let product = match &self.perturbation {
            Some(p) => {
                if p.order == 0 || p.order > order {
                    return Err(format!("perturbation order must lie in 1..={order}"));
                }
                product.perturbed(p.order, &perturbation(p, &names)?).map_err(err)?
            }
            None => product,
        };
        Ok(Problem {
            spec: self,
            order,
            names,
            product,
            connection,
            symplectic,
        })
    }
}
