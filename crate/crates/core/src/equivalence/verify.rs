use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;

use super::EquivalenceMorphism;
use crate::algebra::{GaussianRational, HbarSeries, MultiIndex, Poly};
use crate::error::{check_dim, Result};
use crate::starproducts::{monomial_poly, monomials, CheckEntry, StarProduct};

/// `(1/r!) Σ_σ x^{σ(α₁)} ⋆ ⋯ ⋆ x^{σ(α_r)}`.
pub fn symmetrized_s_on_monomial(s: &StarProduct, indices: &[usize]) -> Result<HbarSeries<Poly>> {
    let dim = s.dim();
    let n = s.order();
    let r = indices.len();
    if r == 0 {
        return Ok(HbarSeries::constant(Poly::one(dim), n));
    }
    let mut total = HbarSeries::zero(dim, n);
    for perm in indices.iter().permutations(r) {
        let mut acc = HbarSeries::constant(Poly::var(dim, *perm[0]), n);
        for &&alpha in &perm[1..] {
            acc = s.star_series(&acc, &HbarSeries::constant(Poly::var(dim, alpha), n))?;
        }
        total = total.try_add(&acc)?;
    }
    let r_fact: i64 = (1..=r as i64).product();
    Ok(total.scale(&GaussianRational::from_ratio(1, r_fact)))
}

/// Results of the intertwining checks, sorted by name.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IntertwiningReport {
    pub max_degree: u32,
    pub order: usize,
    pub pairs_checked: usize,
    pub entries: Vec<CheckEntry>,
}

impl IntertwiningReport {
    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn entry(&self, name: &str) -> Option<&CheckEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}

fn summarize(name: &str, outcomes: &[(String, Option<usize>)]) -> CheckEntry {
    let failing: Vec<&(String, Option<usize>)> = outcomes.iter().filter(|(_, k)| k.is_some()).collect();
    CheckEntry {
        name: name.to_string(),
        passed: failing.is_empty(),
        detail: failing.first().map(|(what, k)| {
            format!(
                "{} of {} cases fail; first {} at ħ^{}",
                failing.len(),
                outcomes.len(),
                what,
                k.expect("failing")
            )
        }),
    }
}

/// Check `S(f ⋆_M g) = Sf ⋆ Sg` on monomial pairs of total degree ≤ `max_degree`,
/// together with the one-sided relations `S(x^α ⋆_M f) = x^α ⋆ Sf` and
/// `S(f ⋆_M x^α) = Sf ⋆ x^α`.
pub fn verify_intertwining(
    morphism: &EquivalenceMorphism,
    s: &StarProduct,
    max_degree: u32,
) -> Result<IntertwiningReport> {
    check_dim(morphism.series().dim(), s.dim())?;
    let n = morphism.order();
    let product = s.truncated(n)?;
    let moyal = StarProduct::moyal(s.poisson(), n)?;
    let series = morphism.series();
    let dim = s.dim();
    let monos = monomials(dim, max_degree);
    let images: Vec<HbarSeries<Poly>> = monos
        .par_iter()
        .map(|m| series.apply(&monomial_poly(m)))
        .collect::<Result<_>>()?;
    let mut pairs = Vec::new();
    for a in 0..monos.len() {
        for b in 0..monos.len() {
            if monos[a].len() + monos[b].len() <= max_degree {
                pairs.push((a, b));
            }
        }
    }
    let label = |m: &MultiIndex| format!("{:?}", m.exponents());
    let full: Vec<(String, Option<usize>)> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let (f, g) = (monomial_poly(&monos[a]), monomial_poly(&monos[b]));
            let lhs = series.apply_series(&moyal.star(&f, &g)?)?;
            let rhs = product.star_series(&images[a], &images[b])?;
            Ok((format!("pair ({}, {})", label(&monos[a]), label(&monos[b])), lhs.first_difference(&rhs)))
        })
        .collect::<Result<_>>()?;

    let mut one_sided = Vec::new();
    for alpha in 0..dim {
        for (a, m) in monos.iter().enumerate() {
            if m.len() < max_degree {
                one_sided.push((alpha, a));
            }
        }
    }
    let sided = |left: bool| -> Result<Vec<(String, Option<usize>)>> {
        one_sided
            .par_iter()
            .map(|&(alpha, a)| {
                let x = Poly::var(dim, alpha);
                let f = monomial_poly(&monos[a]);
                let xs = HbarSeries::constant(x.clone(), n);
                let (lhs, rhs) = if left {
                    (series.apply_series(&moyal.star(&x, &f)?)?, product.star_series(&xs, &images[a])?)
                } else {
                    (series.apply_series(&moyal.star(&f, &x)?)?, product.star_series(&images[a], &xs)?)
                };
                Ok((format!("x{} with {}", alpha, label(&monos[a])), lhs.first_difference(&rhs)))
            })
            .collect()
    };
    let mut entries = vec![
        summarize("intertwining", &full),
        summarize("one_sided_left", &sided(true)?),
        summarize("one_sided_right", &sided(false)?),
    ];
    entries.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(IntertwiningReport {
        max_degree,
        order: n,
        pairs_checked: pairs.len(),
        entries,
    })
}

/// Check `S(m) = (1/r!) Σ_σ x^{σ(α₁)} ⋆ ⋯ ⋆ x^{σ(α_r)}` for every monomial of
/// degree ≤ `max_degree`.
pub fn verify_symmetrization(
    morphism: &EquivalenceMorphism,
    s: &StarProduct,
    max_degree: u32,
) -> Result<CheckEntry> {
    let n = morphism.order();
    let product = s.truncated(n)?;
    let monos = monomials(s.dim(), max_degree);
    let outcomes: Vec<(String, Option<usize>)> = monos
        .par_iter()
        .map(|m| {
            let indices: Vec<usize> = m
                .exponents()
                .iter()
                .enumerate()
                .flat_map(|(alpha, &e)| std::iter::repeat_n(alpha, e as usize))
                .collect();
            let direct = morphism.series().apply(&monomial_poly(m))?;
            let sym = symmetrized_s_on_monomial(&product, &indices)?;
            Ok((format!("monomial {:?}", m.exponents()), direct.first_difference(&sym)))
        })
        .collect::<Result<_>>()?;
    Ok(summarize("symmetrization", &outcomes))
}
