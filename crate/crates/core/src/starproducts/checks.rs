use rayon::prelude::*;
use serde::Serialize;

use super::{ProductKind, StarProduct};
use crate::algebra::{GaussianRational, HbarSeries, MultiIndex, Poly};
use crate::error::{Error, Result};
use crate::operators::{max_operator_order, BiDiffOp};

/// Outcome of a single named check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckEntry {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckEntry {
    fn new(name: impl Into<String>, passed: bool, detail: Option<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail,
        }
    }
}

/// Per-axiom results, sorted by name.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomReport {
    pub max_degree: u32,
    pub associativity_order: usize,
    pub triples_checked: usize,
    pub entries: Vec<CheckEntry>,
}

impl AxiomReport {
    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn entry(&self, name: &str) -> Option<&CheckEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}

/// All monomials in `dim` variables of total degree ≤ `max_degree`, graded order.
pub fn monomials(dim: usize, max_degree: u32) -> Vec<MultiIndex> {
    fn rec(dim: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if cur.len() == dim {
            out.push(MultiIndex::from_exponents(cur.clone()));
            return;
        }
        for e in 0..=left {
            cur.push(e);
            rec(dim, left - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(dim, max_degree, &mut Vec::with_capacity(dim), &mut out);
    out.sort();
    out
}

pub(crate) fn monomial_poly(m: &MultiIndex) -> Poly {
    Poly::monomial(m.dim(), m.clone(), GaussianRational::from_int(1))
}

/// `i P^{μν} ∂_μ ⊗ ∂_ν`, the bidifferential form of `i{f, g}`.
fn bracket_operator(s: &StarProduct) -> BiDiffOp {
    let dim = s.dim();
    let mut op = BiDiffOp::zero(dim);
    for mu in 0..dim {
        for nu in 0..dim {
            let p = s.poisson().get(mu, nu);
            if !p.is_zero() {
                op.add_term(MultiIndex::unit(dim, mu), MultiIndex::unit(dim, nu), &p.scale(&GaussianRational::i()));
            }
        }
    }
    op
}

/// Check axioms (i)–(v) and, when declared, the parity property.
///
/// Associativity is verified pointwise on every triple of monomials with
/// total degree ≤ `max_degree`, at every ħ-order up to the product's
/// associativity order (2 for the truncated symplectic product).
pub fn check_axioms(s: &StarProduct, max_degree: u32) -> AxiomReport {
    let mut entries = Vec::new();
    let limit = max_operator_order();
    let worst = s.operators().iter().map(|c| {
        let (l, r) = c.orders();
        l.max(r)
    });
    let worst = worst.max().unwrap_or(0);
    entries.push(CheckEntry::new(
        "i_bidifferential",
        worst <= limit,
        Some(format!("max slot order {worst}")),
    ));

    let dim = s.dim();
    entries.push(CheckEntry::new(
        "ii_leading_term",
        *s.c(0) == BiDiffOp::pointwise(dim),
        None,
    ));

    if s.order() >= 1 {
        let c1 = s.c(1);
        let antisym = c1.try_sub(&c1.swap()).expect("same dim");
        let ok = antisym == bracket_operator(s);
        entries.push(CheckEntry::new(
            "iii_commutator",
            ok,
            (!ok).then(|| "C₁(f,g) − C₁(g,f) ≠ i{f,g}".to_string()),
        ));
    }

    let bad: Vec<usize> = (1..=s.order()).filter(|&k| !s.c(k).vanishes_on_constants()).collect();
    entries.push(CheckEntry::new(
        "v_constants",
        bad.is_empty(),
        (!bad.is_empty()).then(|| format!("C_k(·,1) or C_k(1,·) nonzero for k in {bad:?}")),
    ));

    if s.parity() {
        let bad: Vec<usize> = (0..=s.order())
            .filter(|&k| {
                let swapped = s.c(k).swap();
                let expect = if k % 2 == 0 {
                    swapped
                } else {
                    swapped.scale(&GaussianRational::from_int(-1))
                };
                *s.c(k) != expect
            })
            .collect();
        entries.push(CheckEntry::new(
            "parity",
            bad.is_empty(),
            (!bad.is_empty()).then(|| format!("C_k(f,g) ≠ (−1)ᵏC_k(g,f) for k in {bad:?}")),
        ));
    }

    let assoc_order = if s.kind() == ProductKind::SymplecticTruncated {
        s.order().min(2)
    } else {
        s.order()
    };
    let product = s.truncated(assoc_order).expect("order within range");
    let monos = monomials(dim, max_degree);
    let mut triples = Vec::new();
    for (a, f) in monos.iter().enumerate() {
        for (b, g) in monos.iter().enumerate() {
            if f.len() + g.len() > max_degree {
                continue;
            }
            for (c, h) in monos.iter().enumerate() {
                if f.len() + g.len() + h.len() <= max_degree {
                    triples.push((a, b, c));
                }
            }
        }
    }
    let failures: Vec<Option<usize>> = triples
        .par_iter()
        .map(|&(a, b, c)| {
            let (f, g, h) = (monomial_poly(&monos[a]), monomial_poly(&monos[b]), monomial_poly(&monos[c]));
            associativity_defect(&product, &f, &g, &h).expect("dims agree")
        })
        .collect();
    for k in 1..=assoc_order {
        let mut count = 0;
        let mut first = None;
        for (t, fail) in triples.iter().zip(&failures) {
            if *fail == Some(k) {
                count += 1;
                first.get_or_insert(*t);
            }
        }
        let detail = first.map(|(a, b, c)| {
            format!(
                "{count} failing triples; first ({:?}, {:?}, {:?})",
                monos[a].exponents(),
                monos[b].exponents(),
                monos[c].exponents()
            )
        });
        entries.push(CheckEntry::new(format!("iv_associativity_k{k}"), count == 0, detail));
    }

    entries.sort_by(|a, b| a.name.cmp(&b.name));
    AxiomReport {
        max_degree,
        associativity_order: assoc_order,
        triples_checked: triples.len(),
        entries,
    }
}

/// Lowest ħ-order at which `(f ⋆ g) ⋆ h` and `f ⋆ (g ⋆ h)` differ.
pub fn associativity_defect(s: &StarProduct, f: &Poly, g: &Poly, h: &Poly) -> Result<Option<usize>> {
    let n = s.order();
    let fg = s.star(f, g)?;
    let gh = s.star(g, h)?;
    let left = s.star_series(&fg, &HbarSeries::constant(h.clone(), n))?;
    let right = s.star_series(&HbarSeries::constant(f.clone(), n), &gh)?;
    Ok(left.first_difference(&right))
}

/// `⟦f, g⟧ = (f ⋆ g − g ⋆ f) / iħ`, a series of order `N − 1`.
pub fn star_bracket(s: &StarProduct, f: &Poly, g: &Poly) -> Result<HbarSeries<Poly>> {
    if s.order() == 0 {
        return Err(Error::InvalidInput("the star bracket needs a product of order ≥ 1".into()));
    }
    let comm = s.star(f, g)?.try_sub(&s.star(g, f)?)?;
    if !comm.coeff(0).is_zero() {
        return Err(Error::NonvanishingClassicalCommutator);
    }
    let minus_i = -GaussianRational::i();
    Ok(HbarSeries::from_coeffs(
        comm.coeffs()[1..].iter().map(|c| c.scale(&minus_i)).collect(),
    ))
}

/// Per-pair canonicity result `⟦x^μ, x^ν⟧ = P^{μν}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CanonicityEntry {
    pub mu: usize,
    pub nu: usize,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CanonicityReport {
    pub entries: Vec<CanonicityEntry>,
}

impl CanonicityReport {
    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }
}

/// Check `⟦x^μ, x^ν⟧ = P^{μν}` exactly at every ħ-order, for all `μ < ν`.
pub fn quantum_canonicity_check(s: &StarProduct) -> Result<CanonicityReport> {
    let dim = s.dim();
    let mut entries = Vec::new();
    for mu in 0..dim {
        for nu in (mu + 1)..dim {
            let br = star_bracket(s, &Poly::var(dim, mu), &Poly::var(dim, nu))?;
            let expect = HbarSeries::constant(s.poisson().get(mu, nu).clone(), s.order() - 1);
            entries.push(CanonicityEntry {
                mu,
                nu,
                passed: br == expect,
            });
        }
    }
    Ok(CanonicityReport { entries })
}
