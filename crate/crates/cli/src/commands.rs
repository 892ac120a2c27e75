use serde::Serialize;
use serde_json::{json, Value};
use starq_core::algebra::{parse_poly, HbarSeries, Poly};
use starq_core::equivalence::{
    compare_tables, derive_equivalence, closed_s2_flat, closed_s2_flat_tweaked, closed_s2_symplectic, closed_s4_flat,
    closed_s4_flat_tweaked, verify_intertwining, verify_symmetrization, CyclConvention, EquivalenceMorphism,
    TableComparison, S2_FLAT, S4_FLAT,
};
use starq_core::operators::{DiffOp, Side};
use starq_core::starproducts::{check_axioms, quantum_canonicity_check, star_bracket, CheckEntry};

use crate::problem::{Kind, Problem};
use crate::{Check, Outcome};

/// The convention under which the fourth-order table is judged.
const ADOPTED: CyclConvention = CyclConvention::FullSymmetrization;

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("engine types serialize")
}

fn op_json(op: &DiffOp, names: &[String]) -> Value {
    json!({
        "operator": to_value(op),
        "display": op.display_with(names),
        "term_count": op.num_terms(),
    })
}

fn series_json(s: &HbarSeries<Poly>, names: &[String]) -> Value {
    Value::Array(
        s.coeffs()
            .iter()
            .enumerate()
            .map(|(k, c)| json!({ "order": k, "poly": to_value(c), "display": c.display_with(names) }))
            .collect(),
    )
}

fn entry_check(prefix: &str, e: &CheckEntry) -> Check {
    Check::new(format!("{prefix}{}", e.name), e.passed, e.detail.clone())
}

fn canonicity_check(p: &Problem) -> Result<(Check, Value), String> {
    let canon = quantum_canonicity_check(&p.product).map_err(|e| e.to_string())?;
    let bad: Vec<String> = canon
        .entries
        .iter()
        .filter(|e| !e.passed)
        .map(|e| format!("[{}, {}]", p.names[e.mu], p.names[e.nu]))
        .collect();
    let detail = (!bad.is_empty()).then(|| format!("bracket differs from the Poisson tensor for {}", bad.join(", ")));
    Ok((Check::new("canonicity", canon.all_passed(), detail), to_value(&canon)))
}

pub fn validate(p: &Problem, max_degree: u32) -> Result<Outcome, String> {
    let axioms = check_axioms(&p.product, max_degree);
    let mut checks: Vec<Check> = axioms.entries.iter().map(|e| entry_check("axiom:", e)).collect();
    let (canon_check, canon) = canonicity_check(p)?;
    checks.push(canon_check);
    let product: Vec<Value> = p
        .product
        .operators()
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| json!({ "order": k, "operator": to_value(c), "display": c.display_with(&p.names) }))
        .collect();
    Ok(Outcome {
        checks,
        body: json!({
            "product_kind": p.product.kind().as_str(),
            "parity": p.product.parity(),
            "axioms": to_value(&axioms),
            "canonicity": canon,
            "product": product,
        }),
    })
}

fn morphism_json(m: &EquivalenceMorphism, names: &[String]) -> Value {
    let orders: Vec<Value> = (1..=m.order())
        .map(|k| {
            let mut v = op_json(m.s(k), names);
            if let Some(r) = m.records().iter().find(|r| r.k == k) {
                v["solvers_agree"] = json!(r.solvers_agree);
                v["defining_relation"] = json!(r.defining_relation);
                v["normalized"] = json!(r.normalized);
                v["parity_consistent"] = json!(r.parity_consistent);
            }
            v["order"] = json!(k);
            v
        })
        .collect();
    json!({ "provenance": to_value(&m.provenance()), "orders": orders })
}

fn record_checks(m: &EquivalenceMorphism) -> Vec<Check> {
    m.records()
        .iter()
        .map(|r| {
            let mut failed = Vec::new();
            if !r.solvers_agree {
                failed.push("solvers disagree");
            }
            if !r.defining_relation {
                failed.push("defining relation violated");
            }
            if !r.normalized {
                failed.push("not normalized");
            }
            if r.parity_consistent == Some(false) {
                failed.push("parity inconsistent");
            }
            let detail = (!failed.is_empty()).then(|| failed.join(", "));
            Check::new(format!("recursion:S{}", r.k), r.passed(), detail)
        })
        .collect()
}

fn symplectic_checks(p: &Problem, m: &EquivalenceMorphism) -> Result<(Vec<Check>, Value), String> {
    let spec = p.symplectic.as_ref().expect("symplectic problems carry their connection");
    let closed = closed_s2_symplectic(spec);
    let mut per_alpha = Vec::new();
    for alpha in 0..p.product.dim() {
        let lhs = closed.commutator_with_coordinate(alpha).map_err(|e| e.to_string())?;
        let rhs = p.product.c(2).slot_fix(alpha, Side::Left).map_err(|e| e.to_string())?;
        per_alpha.push((alpha, lhs == rhs));
    }
    let bad: Vec<&str> = per_alpha.iter().filter(|(_, ok)| !ok).map(|(a, _)| p.names[*a].as_str()).collect();
    let identity = Check::new(
        "commutator_identity",
        bad.is_empty(),
        (!bad.is_empty()).then(|| format!("[S2, x] differs from C2(x, ·) for x = {}", bad.join(", "))),
    );
    let cmp = compare_tables(&closed, m.s(2), &p.names).map_err(|e| e.to_string())?;
    let table = table_check("table:S2-symplectic", &cmp);
    let body = json!({
        "closed_form": op_json(&closed, &p.names),
        "commutator_identity": per_alpha.iter().map(|(a, ok)| json!({ "coordinate": p.names[*a], "passed": ok })).collect::<Vec<_>>(),
        "comparison": to_value(&cmp),
    });
    Ok((vec![identity, table], body))
}

pub fn derive(p: &Problem, max_degree: u32) -> Result<Outcome, String> {
    let m = match derive_equivalence(&p.product, p.order) {
        Ok(m) => m,
        Err(e) => {
            return Ok(Outcome {
                checks: vec![Check::new("derivation", false, Some(e.to_string()))],
                body: json!({ "error": e.to_string() }),
            })
        }
    };
    let mut checks = record_checks(&m);
    if p.product.parity() {
        let odd: Vec<usize> = (1..=m.order()).step_by(2).filter(|&k| !m.s(k).is_zero()).collect();
        checks.push(Check::new(
            "parity:odd_orders_vanish",
            odd.is_empty(),
            (!odd.is_empty()).then(|| format!("nonzero S at orders {odd:?}")),
        ));
    }
    let inter = verify_intertwining(&m, &p.product, max_degree).map_err(|e| e.to_string())?;
    checks.extend(inter.entries.iter().map(|e| entry_check("", e)));
    let sym = verify_symmetrization(&m, &p.product, max_degree).map_err(|e| e.to_string())?;
    checks.push(entry_check("", &sym));
    let mut body = json!({
        "morphism": morphism_json(&m, &p.names),
        "intertwining": to_value(&inter),
        "symmetrization": to_value(&sym),
    });
    if p.spec.kind == Kind::SymplecticTruncated {
        let (extra, value) = symplectic_checks(p, &m)?;
        checks.extend(extra);
        body["symplectic"] = value;
    }
    Ok(Outcome { checks, body })
}

fn table_check(name: &str, cmp: &TableComparison) -> Check {
    let detail = cmp.diff.first().map(|d| {
        format!(
            "{} differing terms; first {} * {}: closed form {}, recursion {}",
            cmp.diff.len(),
            d.monomial,
            d.derivative,
            d.closed_form,
            d.derived
        )
    });
    Check::new(name, cmp.matches, detail)
}

pub fn verify_tables(p: &Problem, _max_degree: u32) -> Result<Outcome, String> {
    match p.spec.kind {
        Kind::NaturalCotangent | Kind::SymplecticTruncated => {}
        other => return Err(format!("verify-tables needs a natural-cotangent or symplectic-truncated spec, got {}", other.as_str())),
    }
    if p.order < 2 {
        return Err("verify-tables needs order ≥ 2".into());
    }
    let tweak = p.tweak();
    if p.spec.kind == Kind::SymplecticTruncated && tweak.is_some() {
        return Err("table tweaks apply to the flat-connection tables only".into());
    }
    let m = match derive_equivalence(&p.product, p.order) {
        Ok(m) => m,
        Err(e) => {
            return Ok(Outcome {
                checks: vec![Check::new("derivation", false, Some(e.to_string()))],
                body: json!({ "error": e.to_string() }),
            })
        }
    };
    let mut checks = record_checks(&m);
    if p.spec.kind == Kind::SymplecticTruncated {
        let (extra, value) = symplectic_checks(p, &m)?;
        checks.extend(extra);
        return Ok(Outcome {
            checks,
            body: json!({ "morphism": morphism_json(&m, &p.names), "symplectic": value }),
        });
    }

    let c = p.connection.as_ref().expect("natural problems carry their connection");
    let in_s2 = tweak.as_ref().is_some_and(|t| S2_FLAT.iter().any(|tab| tab.name == t.tensor));
    let in_s4 = tweak.as_ref().is_some_and(|t| S4_FLAT.iter().any(|tab| tab.name == t.tensor));
    if let Some(t) = tweak.as_ref().filter(|_| !in_s2 && !in_s4) {
        return Err(format!("unknown table tensor {}", t.tensor));
    }
    if in_s4 && p.order < 4 {
        return Err("a fourth-order table tweak needs order 4".into());
    }
    let err = |e: starq_core::Error| e.to_string();
    let s2 = match (&tweak, in_s2) {
        (Some(t), true) => closed_s2_flat_tweaked(c, t).map_err(err)?,
        _ => closed_s2_flat(c).map_err(err)?,
    };
    let cmp2 = compare_tables(&s2, m.s(2), &p.names).map_err(err)?;
    checks.push(table_check("table:S2", &cmp2));
    let mut tables = vec![json!({ "table": "S2", "convention": Value::Null, "comparison": to_value(&cmp2) })];
    if p.order >= 4 {
        for conv in CyclConvention::ALL {
            let s4 = match (&tweak, in_s4) {
                (Some(t), true) => closed_s4_flat_tweaked(c, conv, t).map_err(err)?,
                _ => closed_s4_flat(c, conv).map_err(err)?,
            };
            let cmp4 = compare_tables(&s4, m.s(4), &p.names).map_err(err)?;
            if conv == ADOPTED {
                checks.push(table_check("table:S4", &cmp4));
            }
            tables.push(json!({
                "table": "S4",
                "convention": conv.as_str(),
                "adopted": conv == ADOPTED,
                "comparison": to_value(&cmp4),
            }));
        }
    }
    Ok(Outcome {
        checks,
        body: json!({
            "adopted_convention": ADOPTED.as_str(),
            "morphism": morphism_json(&m, &p.names),
            "tables": tables,
        }),
    })
}

pub fn apply(p: &Problem, f: &str, g: &str) -> Result<Outcome, String> {
    let f_poly = parse_poly(f, &p.names).map_err(|e| format!("--f: {e}"))?;
    let g_poly = parse_poly(g, &p.names).map_err(|e| format!("--g: {e}"))?;
    let err = |e: starq_core::Error| e.to_string();
    let star = p.product.star(&f_poly, &g_poly).map_err(err)?;
    let mut body = json!({
        "f": f_poly.display_with(&p.names),
        "g": g_poly.display_with(&p.names),
        "star": series_json(&star, &p.names),
    });
    if p.order >= 1 {
        let bracket = star_bracket(&p.product, &f_poly, &g_poly).map_err(err)?;
        body["bracket"] = series_json(&bracket, &p.names);
    }
    match derive_equivalence(&p.product, p.order) {
        Ok(m) => {
            let sf = m.series().apply(&f_poly).map_err(err)?;
            body["morphism_f"] = series_json(&sf, &p.names);
        }
        Err(e) => body["morphism_error"] = json!(e.to_string()),
    }
    Ok(Outcome { checks: Vec::new(), body })
}
