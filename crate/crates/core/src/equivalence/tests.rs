use proptest::prelude::*;

use super::*;
use crate::algebra::{parse_poly, phase_space_names, GaussianRational, MultiIndex, Poly};
use crate::error::Error;
use crate::geometry::{flat_connection_from_diffeo, Connection, SymplecticConnectionSpec};
use crate::operators::{BiDiffOp, DiffOp, Side};
use crate::starproducts::{PoissonTensor, StarProduct};

fn qnames(n: usize) -> Vec<String> {
    (1..=n).map(|j| format!("q{j}")).collect()
}

fn gamma1(src: &str) -> Connection {
    Connection::one_dimensional(parse_poly(src, &qnames(1)).unwrap()).unwrap()
}

/// Flat connection pulled back along `(q1, q2) ↦ (q1, q2 + q1²)`.
fn flat2() -> Connection {
    let names = qnames(2);
    flat_connection_from_diffeo(&[
        parse_poly("q1", &names).unwrap(),
        parse_poly("q2 + q1^2", &names).unwrap(),
    ])
    .unwrap()
}

fn op(src: &[(&[u32], &str)], names: &[String]) -> DiffOp {
    DiffOp::from_terms(
        names.len(),
        src.iter()
            .map(|(e, c)| (MultiIndex::from_exponents(e.to_vec()), parse_poly(c, names).unwrap())),
    )
    .unwrap()
}

fn derived(c: &Connection, order: usize) -> (StarProduct, EquivalenceMorphism) {
    let s = StarProduct::natural_cotangent(c, order).unwrap();
    let m = derive_equivalence(&s, order).unwrap();
    (s, m)
}

fn spec_1d(g: [&str; 4], a: GaussianRational) -> SymplecticConnectionSpec {
    let names = phase_space_names(1, 0);
    let g: Vec<Poly> = g.iter().map(|s| parse_poly(s, &names).unwrap()).collect();
    let mut lowered = Vec::new();
    for x in 0..2 {
        for y in 0..2 {
            for z in 0..2 {
                lowered.push(g[x + y + z].clone());
            }
        }
    }
    SymplecticConnectionSpec::new(1, lowered, a).unwrap()
}

#[test]
fn solvers_on_single_derivative_family() {
    // F^α = δ^{α,0} ∂₀ has the unique solution ½∂₀².
    let f = vec![DiffOp::partial(2, 0), DiffOp::zero(2)];
    let expected = DiffOp::derivative(MultiIndex::from_exponents(vec![2, 0])).scale(&GaussianRational::from_ratio(1, 2));
    assert_eq!(eta_from_phi(&f).unwrap(), expected);
    assert_eq!(nested_commutator_solution(&f).unwrap(), expected);
}

#[test]
fn poisson_family_has_no_solution() {
    // F^α = P^{αβ}∂_β: the formula gives ½P^{αβ}∂_α∂_β = 0, whose commutators
    // vanish, so no η reproduces F and the family is reported as incompatible.
    let f = vec![DiffOp::partial(2, 1), DiffOp::partial(2, 0).scale(&GaussianRational::from_int(-1))];
    assert!(matches!(eta_from_phi(&f), Err(Error::IncompatibleFamily { alpha: 0 })));
    assert!(nested_commutator_solution(&f).unwrap().is_zero());
}

#[test]
fn zero_family_gives_zero() {
    let zero = vec![DiffOp::zero(2); 2];
    assert!(eta_from_phi(&zero).unwrap().is_zero());
    assert!(nested_commutator_solution(&zero).unwrap().is_zero());
}

#[test]
fn incompatible_family_is_reported() {
    let f = vec![DiffOp::partial(2, 1), DiffOp::zero(2)];
    assert!(matches!(eta_from_phi(&f), Err(Error::IncompatibleFamily { .. })));
    let with_constant = vec![DiffOp::identity(2), DiffOp::zero(2)];
    assert!(matches!(eta_from_phi(&with_constant), Err(Error::IncompatibleFamily { alpha: 0 })));
}

#[test]
fn first_order_rhs_is_symmetrized_c1() {
    let c = gamma1("q1");
    let s = StarProduct::natural_cotangent(&c, 2).unwrap();
    let f = rhs_f(&s, &[DiffOp::identity(2)], 1).unwrap();
    for (alpha, fa) in f.iter().enumerate() {
        let l = s.c(1).slot_fix(alpha, Side::Left).unwrap();
        let r = s.c(1).slot_fix(alpha, Side::Right).unwrap();
        let expected = l.try_add(&r).unwrap().scale(&GaussianRational::from_ratio(1, 2));
        assert_eq!(fa, &expected);
        // parity product: C₁ is antisymmetric, so F vanishes
        assert!(fa.is_zero());
    }
}

#[test]
fn missing_lower_orders_are_rejected() {
    let s = StarProduct::moyal(&PoissonTensor::canonical(1, 0), 3).unwrap();
    assert!(matches!(
        rhs_f(&s, &[DiffOp::identity(2)], 3),
        Err(Error::MissingLowerOrders { have: 1, need: 3 })
    ));
}

#[test]
fn moyal_is_equivalent_to_itself_by_identity() {
    for casimirs in [0, 1] {
        let s = StarProduct::moyal(&PoissonTensor::canonical(1, casimirs), 4).unwrap();
        let m = derive_equivalence(&s, 4).unwrap();
        assert!(m.all_checks_pass());
        assert_eq!(m.s(0), &DiffOp::identity(s.dim()));
        for k in 1..=4 {
            assert!(m.s(k).is_zero(), "S_{k}");
        }
    }
}

#[test]
fn order_zero_is_bare_identity() {
    let s = StarProduct::natural_cotangent(&gamma1("q1"), 2).unwrap();
    let m = derive_equivalence(&s, 0).unwrap();
    assert_eq!(m.order(), 0);
    assert!(m.records().is_empty());
    assert!(matches!(derive_equivalence(&s, 3), Err(Error::OrderMismatch { .. })));
}

#[test]
fn non_canonical_product_is_rejected() {
    let s = StarProduct::moyal(&PoissonTensor::canonical(1, 0), 2).unwrap();
    let names = phase_space_names(1, 0);
    let bad = BiDiffOp::tensor(&op(&[(&[1, 0], "1")], &names), &op(&[(&[0, 1], "1")], &names)).unwrap();
    let s = s.perturbed(1, &bad).unwrap();
    assert!(matches!(derive_equivalence(&s, 2), Err(Error::NotQuantumCanonical(_))));
}

#[test]
fn constant_gamma_second_order() {
    // γ = c: S₂ = (c/8)∂_q∂_p² + (c²/8)∂_p² + (c²/12) p∂_p³
    let names = phase_space_names(1, 0);
    let (_, m) = derived(&gamma1("3/2"), 2);
    let expected = op(&[(&[1, 2], "3/16"), (&[0, 2], "9/32"), (&[0, 3], "3/16*p1")], &names);
    assert_eq!(m.s(2), &expected);
    assert!(m.all_checks_pass());
}

#[test]
fn parity_products_have_vanishing_odd_orders() {
    for c in [gamma1("q1"), gamma1("1 + q1^2"), flat2()] {
        let (s, m) = derived(&c, 4);
        assert!(s.parity());
        assert!(m.s(1).is_zero());
        assert!(m.s(3).is_zero());
        assert!(!m.s(2).is_zero());
        assert!(m.records().iter().all(|r| r.parity_consistent == Some(true)));
    }
}

#[test]
fn derived_orders_are_normalized() {
    let (_, m) = derived(&flat2(), 4);
    for k in 1..=4 {
        assert!(m.s(k).annihilates_affine(), "S_{k}");
    }
}

#[test]
fn second_order_table_matches_recursion() {
    for c in [gamma1("q1"), gamma1("1 + q1^2"), flat2()] {
        let (_, m) = derived(&c, 2);
        let names = phase_space_names(c.n(), 0);
        let cmp = compare_tables(&closed_s2_flat(&c).unwrap(), m.s(2), &names).unwrap();
        assert!(cmp.matches, "{:?}", cmp.diff);
    }
}

#[test]
fn fourth_order_table_needs_full_symmetrization() {
    for c in [gamma1("q1"), gamma1("1 + q1^2"), flat2()] {
        let (_, m) = derived(&c, 4);
        let names = phase_space_names(c.n(), 0);
        let full = closed_s4_flat(&c, CyclConvention::FullSymmetrization).unwrap();
        assert_eq!(&full, m.s(4));
        let cyclic = compare_tables(&closed_s4_flat(&c, CyclConvention::Cyclic).unwrap(), m.s(4), &names).unwrap();
        assert!(!cyclic.matches);
    }
}

#[test]
fn cyclic_and_symmetrized_readings_differ_by_factorial_in_one_dimension() {
    // With one index value every permutation is a cyclic shift repeated,
    // so full symmetrization is (r−1)! times the cyclic sum.
    let c = gamma1("q1");
    let cyc = closed_s4_flat(&c, CyclConvention::Cyclic).unwrap();
    let full = closed_s4_flat(&c, CyclConvention::FullSymmetrization).unwrap();
    assert_eq!(cyc.num_terms(), full.num_terms());
    for (d, coeff) in full.terms() {
        // the number of listed j indices is the ∂_p count
        let r = d.get(1) as i64;
        let factor: i64 = (1..r).product();
        assert_eq!(&cyc.coeff(d).scale(&GaussianRational::from_int(factor)), coeff, "{d:?}");
    }
}

#[test]
fn tables_vanish_for_zero_connection() {
    let c = Connection::zero(2);
    assert!(closed_s2_flat(&c).unwrap().is_zero());
    for conv in CyclConvention::ALL {
        assert!(closed_s4_flat(&c, conv).unwrap().is_zero());
    }
}

#[test]
fn altered_table_coefficient_is_located() {
    let c = gamma1("q1");
    let (_, m) = derived(&c, 2);
    let tweak = TableTweak {
        tensor: "S2_jk".into(),
        term: 0,
        delta: 1,
    };
    let cmp = compare_tables(&closed_s2_flat_tweaked(&c, &tweak).unwrap(), m.s(2), &phase_space_names(1, 0)).unwrap();
    assert!(!cmp.matches);
    assert_eq!(cmp.diff.len(), 1);
    assert_eq!(cmp.diff[0].derivative, "d[p1]^2");
    assert_eq!(cmp.diff[0].monomial, "q1^2");
    assert_eq!(cmp.diff[0].closed_form, GaussianRational::from_ratio(1, 4));
    assert_eq!(cmp.diff[0].derived, GaussianRational::from_ratio(1, 8));
    let failing: Vec<&str> = cmp.families.iter().filter(|f| !f.matches).map(|f| f.family.as_str()).collect();
    assert_eq!(failing, ["p^0 dq^0 dp^2"]);
    let unknown = TableTweak {
        tensor: "nope".into(),
        term: 0,
        delta: 1,
    };
    assert!(closed_s2_flat_tweaked(&c, &unknown).is_err());
}

#[test]
fn symplectic_second_order_matches_closed_form() {
    for a in [GaussianRational::from_int(0), GaussianRational::from_ratio(1, 3)] {
        let spec = spec_1d(["q1^2 + p1", "2*q1*p1 - 1", "p1^2 + 3*q1", "q1 - 1/2"], a);
        let s = StarProduct::symplectic_truncated(&spec).unwrap();
        let m = derive_equivalence(&s, 2).unwrap();
        let closed = closed_s2_symplectic(&spec);
        assert_eq!(m.s(2), &closed);
        for alpha in 0..2 {
            assert_eq!(
                closed.commutator_with_coordinate(alpha).unwrap(),
                s.c(2).slot_fix(alpha, Side::Left).unwrap()
            );
        }
    }
}

#[test]
fn symplectic_closed_form_depends_on_a_through_ricci() {
    let g = ["q1^2 + p1", "2*q1*p1 - 1", "p1^2 + 3*q1", "q1 - 1/2"];
    let s0 = closed_s2_symplectic(&spec_1d(g, GaussianRational::from_int(0)));
    let s1 = closed_s2_symplectic(&spec_1d(g, GaussianRational::from_int(1)));
    let spec = spec_1d(g, GaussianRational::from_int(0));
    let ric = crate::geometry::ricci(&spec);
    // ∂^q = ∂_p, ∂^p = −∂_q
    let up = [(1usize, 1i64), (0, -1)];
    let mut expected = DiffOp::zero(2);
    for a in 0..2 {
        for b in 0..2 {
            let idx = MultiIndex::from_indices(2, &[up[a].0, up[b].0]);
            let w = GaussianRational::from_ratio(up[a].1 * up[b].1, 16);
            expected = expected
                .try_add(&DiffOp::from_terms(2, [(idx, ric[a * 2 + b].scale(&w))]).unwrap())
                .unwrap();
        }
    }
    assert_eq!(s1.try_sub(&s0).unwrap(), expected);
    assert!(!expected.is_zero());
    assert!(closed_s2_symplectic(&spec_1d(["0", "0", "0", "0"], GaussianRational::from_int(2))).is_zero());
}

#[test]
fn intertwining_and_fault_injection() {
    let (s, m) = derived(&gamma1("q1"), 4);
    let report = verify_intertwining(&m, &s, 4).unwrap();
    assert!(report.all_passed(), "{:?}", report.entries);
    let names = phase_space_names(1, 0);
    let bumped = m.s(2).try_add(&op(&[(&[0, 2], "1")], &names)).unwrap();
    let broken = m.with_replaced(2, bumped).unwrap();
    let report = verify_intertwining(&broken, &s, 4).unwrap();
    let entry = report.entry("intertwining").unwrap();
    assert!(!entry.passed);
    assert!(entry.detail.as_deref().unwrap().contains("ħ^2"), "{:?}", entry.detail);
}

#[test]
fn identity_intertwines_moyal() {
    let s = StarProduct::moyal(&PoissonTensor::canonical(1, 0), 3).unwrap();
    let m = EquivalenceMorphism::from_closed_form(crate::operators::OperatorSeries::identity(2, 3));
    assert_eq!(m.provenance(), Provenance::ClosedForm);
    assert!(verify_intertwining(&m, &s, 3).unwrap().all_passed());
}

#[test]
fn symmetrization_agrees_with_derived_morphism() {
    let (s, m) = derived(&gamma1("q1"), 4);
    let entry = verify_symmetrization(&m, &s, 4).unwrap();
    assert!(entry.passed, "{:?}", entry.detail);
}

#[test]
fn symmetrized_products_of_coordinates() {
    let s = StarProduct::moyal(&PoissonTensor::canonical(1, 0), 2).unwrap();
    let qp = symmetrized_s_on_monomial(&s, &[0, 1]).unwrap();
    assert_eq!(qp, crate::algebra::HbarSeries::constant(&Poly::var(2, 0) * &Poly::var(2, 1), 2));
    let q = symmetrized_s_on_monomial(&s, &[0]).unwrap();
    assert_eq!(q, crate::algebra::HbarSeries::constant(Poly::var(2, 0), 2));
}

fn arb_eta() -> impl Strategy<Value = DiffOp> {
    // Operators of order ≥ 2 with polynomial coefficients: these are exactly
    // the normalized solutions.
    prop::collection::vec(
        (
            prop::collection::vec(0u32..=2, 2).prop_filter("order ≥ 2", |e| e.iter().sum::<u32>() >= 2),
            prop::collection::vec(0u32..=2, 2),
            -4i64..=4,
        ),
        0..4,
    )
    .prop_map(|terms| {
        DiffOp::from_terms(
            2,
            terms.into_iter().map(|(d, m, c)| {
                (
                    MultiIndex::from_exponents(d),
                    Poly::monomial(2, MultiIndex::from_exponents(m), GaussianRational::from_int(c)),
                )
            }),
        )
        .unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn solvers_recover_any_normalized_operator(eta in arb_eta()) {
        let f: Vec<DiffOp> = (0..2).map(|a| eta.commutator_with_coordinate(a).unwrap()).collect();
        prop_assert_eq!(&eta_from_phi(&f).unwrap(), &eta);
        prop_assert_eq!(&nested_commutator_solution(&f).unwrap(), &eta);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn derivations_pass_every_internal_check(c0 in -3i64..=3, c1 in -3i64..=3, c2 in -2i64..=2) {
        let gamma = Poly::from_terms(
            1,
            [(0u32, c0), (1, c1), (2, c2)]
                .into_iter()
                .map(|(e, c)| (MultiIndex::from_exponents(vec![e]), GaussianRational::from_int(c))),
        )
        .unwrap();
        let c = Connection::one_dimensional(gamma).unwrap();
        let (_, m) = derived(&c, 4);
        prop_assert!(m.all_checks_pass());
        prop_assert_eq!(&closed_s2_flat(&c).unwrap(), m.s(2));
        prop_assert_eq!(&closed_s4_flat(&c, CyclConvention::FullSymmetrization).unwrap(), m.s(4));
    }
}
