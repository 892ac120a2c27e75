//! Engine results against independently computed values.

use proptest::prelude::*;
use starq_core::algebra::{parse_poly, phase_space_names, GaussianRational, HbarSeries, MultiIndex, Poly};
use starq_core::equivalence::derive_equivalence;
use starq_core::geometry::Connection;
use starq_core::starproducts::{PoissonTensor, StarProduct};

fn p(src: &str) -> Poly {
    parse_poly(src, &phase_space_names(1, 0)).unwrap()
}

fn binomial(n: u32, k: u32) -> i64 {
    (0..k).fold(1i64, |acc, j| acc * (n - j) as i64 / (j + 1) as i64)
}

fn factorial(n: u32) -> i64 {
    (1..=n as i64).product()
}

/// `f ⋆ g = Σ_k (iħ/2)^k / k! Σ_j C(k,j) (−1)^j (∂_q^{k−j}∂_p^j f)(∂_q^j ∂_p^{k−j} g)` in one degree of freedom.
fn moyal_by_binomials(f: &Poly, g: &Poly, order: usize) -> HbarSeries<Poly> {
    let half_i = GaussianRational::from_ratio(1, 2) * GaussianRational::i();
    let coeffs = (0..=order as u32)
        .map(|k| {
            let mut total = Poly::zero(2);
            for j in 0..=k {
                let df = f.diff_multi(&MultiIndex::from_exponents(vec![k - j, j])).unwrap();
                let dg = g.diff_multi(&MultiIndex::from_exponents(vec![j, k - j])).unwrap();
                let sign = if j % 2 == 0 { 1 } else { -1 };
                let w = GaussianRational::from_ratio(sign * binomial(k, j), factorial(k));
                total = &total + &(&df * &dg).scale(&w);
            }
            total.scale(&half_i.pow(k))
        })
        .collect();
    HbarSeries::from_coeffs(coeffs)
}

fn arb_poly() -> impl Strategy<Value = Poly> {
    prop::collection::vec((0u32..=3, 0u32..=3, -4i64..=4, 1i64..=3), 0..4).prop_map(|terms| {
        Poly::from_terms(
            2,
            terms
                .into_iter()
                .map(|(a, b, n, d)| (MultiIndex::from_exponents(vec![a, b]), GaussianRational::from_ratio(n, d))),
        )
        .unwrap()
    })
}

#[test]
fn position_momentum_product() {
    // q ⋆ p = qp + iħ/2
    let s = StarProduct::moyal(&PoissonTensor::canonical(1, 0), 3).unwrap();
    let got = s.star(&p("q1"), &p("p1")).unwrap();
    assert_eq!(got, HbarSeries::from_coeffs(vec![p("q1*p1"), p("i/2"), p("0"), p("0")]));
}

#[test]
fn unit_is_neutral_for_every_product() {
    let s = StarProduct::natural_cotangent(&Connection::one_dimensional(p("q1").restrict(1).unwrap()).unwrap(), 4)
        .unwrap();
    let f = p("q1^3*p1^2 - 2*p1");
    let expected = HbarSeries::constant(f.clone(), 4);
    assert_eq!(s.star(&f, &Poly::one(2)).unwrap(), expected);
    assert_eq!(s.star(&Poly::one(2), &f).unwrap(), expected);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn moyal_matches_binomial_expansion(f in arb_poly(), g in arb_poly()) {
        let s = StarProduct::moyal(&PoissonTensor::canonical(1, 0), 4).unwrap();
        prop_assert_eq!(s.star(&f, &g).unwrap(), moyal_by_binomials(&f, &g, 4));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn derived_morphism_intertwines_on_polynomials(
        c0 in -2i64..=2,
        c1 in -2i64..=2,
        f in arb_poly(),
        g in arb_poly(),
    ) {
        let gamma = Poly::from_terms(
            1,
            [(0u32, c0), (1, c1)]
                .into_iter()
                .map(|(e, c)| (MultiIndex::from_exponents(vec![e]), GaussianRational::from_int(c))),
        )
        .unwrap();
        let natural = StarProduct::natural_cotangent(&Connection::one_dimensional(gamma).unwrap(), 4).unwrap();
        let moyal = StarProduct::moyal(&PoissonTensor::canonical(1, 0), 4).unwrap();
        let m = derive_equivalence(&natural, 4).unwrap();
        let s = m.series();
        let lhs = s.apply_series(&moyal.star(&f, &g).unwrap()).unwrap();
        let rhs = natural.star_series(&s.apply(&f).unwrap(), &s.apply(&g).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}
