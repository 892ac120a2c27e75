use std::collections::{BTreeMap, HashMap};

use itertools::Itertools;
use serde::Serialize;

use crate::algebra::{GaussianRational, MultiIndex, Poly};
use crate::error::{check_dim, Error, Result};
use crate::geometry::{canonical_sign, flat_index, ricci, tuples, Connection, SymplecticConnectionSpec};
use crate::operators::DiffOp;

/// How `cycl(j₁, …, j_r)` in the fourth-order tables is expanded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CyclConvention {
    /// Sum over the `r` cyclic shifts of the listed indices.
    Cyclic,
    /// Sum over all `r!` permutations of the listed indices.
    FullSymmetrization,
}

impl CyclConvention {
    pub const ALL: [CyclConvention; 2] = [CyclConvention::Cyclic, CyclConvention::FullSymmetrization];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Cyclic => "cyclic",
            Self::FullSymmetrization => "full-symmetrization",
        }
    }
}

/// One coefficient tensor of a closed-form operator.
///
/// Terms are written as `coeff G[up|lo lo|d d …] G[…] …`, where
/// `G[l|j2 j3|j4 k]` stands for `Γ^l_{j2 j3, j4 k}`. Index names listed in
/// `p_up`, `q_up` or `js` are free; every other name is summed over `0..n`.
/// The operator contribution is
/// `num/den · S̃^{p_up q_up}_{js} · Π p_{p_up} · Π ∂_{q^{q_up}} · Π ∂_{p_{js}}`.
#[derive(Clone, Copy, Debug)]
pub struct TensorTable {
    pub name: &'static str,
    pub num: i64,
    pub den: i64,
    pub p_up: &'static [&'static str],
    pub q_up: &'static [&'static str],
    pub js: &'static [&'static str],
    pub cycl: bool,
    pub terms: &'static [&'static str],
}

/// Second-order flat-connection table.
pub const S2_FLAT: [TensorTable; 3] = [
    TensorTable {
        name: "S2^i_jk",
        num: 1,
        den: 8,
        p_up: &[],
        q_up: &["i"],
        js: &["j", "k"],
        cycl: false,
        terms: &["1 G[i|j k]"],
    },
    TensorTable {
        name: "S2_jk",
        num: 1,
        den: 8,
        p_up: &[],
        q_up: &[],
        js: &["j", "k"],
        cycl: false,
        terms: &["1 G[i|l j] G[l|i k]"],
    },
    TensorTable {
        name: "S2^r_jkl",
        num: 1,
        den: 24,
        p_up: &["i"],
        q_up: &[],
        js: &["j", "k", "l"],
        cycl: false,
        terms: &["2 G[i|n l] G[n|j k]", "-1 G[i|j k|l]"],
    },
];

/// Fourth-order flat-connection table.
pub const S4_FLAT: [TensorTable; 6] = [
    TensorTable {
        name: "S4_j1j2j3j4",
        num: 1,
        den: 384 * 24,
        p_up: &[],
        q_up: &[],
        js: &["j1", "j2", "j3", "j4"],
        cycl: true,
        terms: &[
            "-3 G[k|j1 l] G[l|j2 j3|j4 k]",
            "-1 G[k|j1 l] G[l|k j2|j3 j4]",
            "-1 G[k|n j1] G[l|j2 j3] G[n|k l|j4]",
            "-3 G[k|l n] G[l|k j1] G[n|j2 j3|j4]",
            "3 G[k|n j1] G[l|k j2] G[n|l j3|j4]",
            "3 G[k|n j1] G[l|k j2] G[n|j3 j4|l]",
            "3 G[k|n j1] G[l|j2 j3] G[n|l j4|k]",
            "7 G[k|n j1] G[l|j2 j3] G[n|k j4|l]",
            "3 G[k|n j1] G[l|m j2] G[n|k l] G[m|j3 j4]",
            "3 G[k|l j1] G[l|k j2] G[n|m j3] G[m|n j4]",
            "-1 G[k|n j1] G[l|k j2] G[n|m j3] G[m|l j4]",
        ],
    },
    TensorTable {
        name: "S4^i_j1j2j3j4",
        num: 1,
        den: 384 * 24,
        p_up: &[],
        q_up: &["i"],
        js: &["j1", "j2", "j3", "j4"],
        cycl: true,
        terms: &[
            "-1 G[i|j1 j2|j3 j4]",
            "4 G[k|j1 j2] G[i|j3 j4|k]",
            "1 G[k|j1 j2] G[i|k j3|j4]",
            "-2 G[i|k j1] G[k|j2 j3|j4]",
            "6 G[k|l j1] G[l|k j2] G[i|j3 j4]",
            "1 G[k|l j1] G[l|j2 j3] G[i|k j4]",
            "1 G[k|j1 j2] G[l|j3 j4] G[i|k l]",
        ],
    },
    TensorTable {
        name: "S4^i1i2_j1j2j3j4",
        num: 1,
        den: 128 * 24,
        p_up: &[],
        q_up: &["i1", "i2"],
        js: &["j1", "j2", "j3", "j4"],
        cycl: true,
        terms: &["1 G[i1|j1 j2] G[i2|j3 j4]"],
    },
    TensorTable {
        name: "S4^r_j1j2j3j4j5",
        num: 1,
        den: 1920 * 120,
        p_up: &["r"],
        q_up: &[],
        js: &["j1", "j2", "j3", "j4", "j5"],
        cycl: true,
        terms: &[
            "1 G[r|j1 j2|j3 j4 j5]",
            "-7 G[k|j1 j2] G[r|j3 j4|j5 k]",
            "-2 G[k|j1 j2] G[r|k j3|j4 j5]",
            "-2 G[r|k j1] G[k|j2 j3|j4 j5]",
            "2 G[r|k j1|j2] G[k|j3 j4|j5]",
            "1 G[r|j1 j2|k] G[k|j3 j4|j5]",
            "-8 G[r|k j1] G[k|l j2] G[l|j3 j4|j5]",
            "-6 G[r|k l] G[k|j1 j2] G[l|j3 j4|j5]",
            "10 G[r|l j1] G[k|j2 j3] G[l|j4 j5|k]",
            "4 G[r|l j1] G[k|j2 j3] G[l|k j4|j5]",
            "-10 G[k|l j1] G[l|k j2] G[r|j3 j4|j5]",
            "-2 G[k|l j1] G[l|j2 j3] G[r|j4 j5|k]",
            "-2 G[k|j1 j2] G[l|j3 j4] G[r|k l|j5]",
            "10 G[k|j1 j2] G[l|j3 j4] G[r|k j5|l]",
            "20 G[r|k j1] G[k|j2 j3] G[l|n j4] G[n|l j5]",
            "8 G[r|k n] G[k|j1 j2] G[l|j3 j4] G[n|l j5]",
            "8 G[r|k j1] G[k|n j2] G[l|j3 j4] G[n|l j5]",
        ],
    },
    TensorTable {
        name: "S4^ri_j1j2j3j4j5",
        num: 1,
        den: 192 * 120,
        p_up: &["r"],
        q_up: &["i"],
        js: &["j1", "j2", "j3", "j4", "j5"],
        cycl: true,
        terms: &["-1 G[i|j1 j2] G[r|j3 j4|j5]", "2 G[r|k j1] G[k|j2 j3] G[i|j4 j5]"],
    },
    TensorTable {
        name: "S4^rs_j1j2j3j4j5j6",
        num: 1,
        den: 1152 * 720,
        p_up: &["r", "s"],
        q_up: &[],
        js: &["j1", "j2", "j3", "j4", "j5", "j6"],
        cycl: true,
        terms: &[
            "1 G[r|j1 j2|j3] G[s|j4 j5|j6]",
            "-4 G[r|k j1] G[k|j2 j3] G[s|j4 j5|j6]",
            "4 G[r|k j1] G[s|l j2] G[k|j3 j4] G[l|j5 j6]",
        ],
    },
];

/// A deliberate change to one printed coefficient, used to exercise the diff report.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableTweak {
    pub tensor: String,
    pub term: usize,
    pub delta: i64,
}

#[derive(Clone, Debug)]
struct Factor {
    up: usize,
    lo: [usize; 2],
    derivs: Vec<usize>,
}

#[derive(Clone, Debug)]
struct Term {
    coeff: i64,
    factors: Vec<Factor>,
    /// Slots of the summed indices appearing in this term.
    dummies: Vec<usize>,
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse { pos: 0, msg: msg.into() }
}

/// Parse the terms of a table; index slot `s < free.len()` is `free[s]`,
/// larger slots are dummies.
fn parse_terms(table: &TensorTable, free: &[&str]) -> Result<Vec<Term>> {
    let mut names: Vec<String> = free.iter().map(|s| s.to_string()).collect();
    let slot = |name: &str, names: &mut Vec<String>| -> usize {
        if let Some(p) = names.iter().position(|x| x == name) {
            p
        } else {
            names.push(name.to_string());
            names.len() - 1
        }
    };
    let mut out = Vec::with_capacity(table.terms.len());
    for src in table.terms {
        let (coeff, rest) = src
            .trim()
            .split_once(' ')
            .ok_or_else(|| parse_err(format!("term without factors: {src}")))?;
        let coeff: i64 = coeff.parse().map_err(|_| parse_err(format!("bad coefficient in {src}")))?;
        let mut factors = Vec::new();
        for piece in rest.split("G[").skip(1) {
            let body = piece
                .trim()
                .strip_suffix(']')
                .ok_or_else(|| parse_err(format!("unterminated factor in {src}")))?;
            let parts: Vec<&str> = body.split('|').collect();
            if parts.len() < 2 || parts.len() > 3 {
                return Err(parse_err(format!("factor needs up|lo[|derivs]: {body}")));
            }
            let lo: Vec<&str> = parts[1].split_whitespace().collect();
            if lo.len() != 2 {
                return Err(parse_err(format!("factor needs two lower indices: {body}")));
            }
            let derivs = parts
                .get(2)
                .map(|d| d.split_whitespace().map(|x| slot(x, &mut names)).collect())
                .unwrap_or_default();
            factors.push(Factor {
                up: slot(parts[0].trim(), &mut names),
                lo: [slot(lo[0], &mut names), slot(lo[1], &mut names)],
                derivs,
            });
        }
        let mut dummies: Vec<usize> = factors
            .iter()
            .flat_map(|f| std::iter::once(f.up).chain(f.lo).chain(f.derivs.iter().copied()))
            .filter(|&s| s >= free.len())
            .collect();
        dummies.sort_unstable();
        dummies.dedup();
        out.push(Term { coeff, factors, dummies });
    }
    Ok(out)
}

/// Memoised `Γ^i_{jk, d₁ d₂ …}` on the base.
struct GammaCache<'a> {
    conn: &'a Connection,
    cache: HashMap<(usize, usize, usize, Vec<usize>), Poly>,
}

impl<'a> GammaCache<'a> {
    fn new(conn: &'a Connection) -> Self {
        Self {
            conn,
            cache: HashMap::new(),
        }
    }

    fn get(&mut self, i: usize, j: usize, k: usize, derivs: &[usize]) -> Poly {
        let mut d = derivs.to_vec();
        d.sort_unstable();
        let key = (i, j, k, d);
        if let Some(p) = self.cache.get(&key) {
            return p.clone();
        }
        let n = self.conn.n();
        let mi = MultiIndex::from_indices(n, &key.3);
        let v = self.conn.get(i, j, k).diff_multi(&mi).expect("same dim");
        self.cache.insert(key, v.clone());
        v
    }
}

/// Evaluate one tensor table as an operator on the `2n` phase-space coordinates.
fn table_operator(
    table: &TensorTable,
    conn: &Connection,
    gammas: &mut GammaCache,
    convention: CyclConvention,
    tweak: Option<&TableTweak>,
) -> Result<DiffOp> {
    let n = conn.n();
    let dim = 2 * n;
    let free: Vec<&str> = table.p_up.iter().chain(table.q_up).chain(table.js).copied().collect();
    let nf = free.len();
    let mut terms = parse_terms(table, &free)?;
    if let Some(t) = tweak.filter(|t| t.tensor == table.name) {
        let term = terms
            .get_mut(t.term)
            .ok_or_else(|| Error::InvalidInput(format!("{} has no term {}", table.name, t.term)))?;
        term.coeff += t.delta;
    }

    // Base values T(free assignment), before the cycl expansion.
    let mut base: Vec<Poly> = Vec::with_capacity(n.pow(nf as u32));
    let max_slot = terms
        .iter()
        .flat_map(|t| t.dummies.iter().copied())
        .max()
        .map_or(nf, |m| m + 1);
    let mut values = vec![0usize; max_slot];
    for assign in tuples(n, nf) {
        values[..nf].copy_from_slice(&assign);
        let mut total = Poly::zero(n);
        for term in &terms {
            for dummy in tuples(n, term.dummies.len()) {
                for (slot, v) in term.dummies.iter().zip(&dummy) {
                    values[*slot] = *v;
                }
                let mut prod = Poly::constant(n, GaussianRational::from_int(term.coeff));
                for f in &term.factors {
                    let derivs: Vec<usize> = f.derivs.iter().map(|&s| values[s]).collect();
                    let g = gammas.get(values[f.up], values[f.lo[0]], values[f.lo[1]], &derivs);
                    if g.is_zero() {
                        prod = Poly::zero(n);
                        break;
                    }
                    prod = &prod * &g;
                }
                total = &total + &prod;
            }
        }
        base.push(total);
    }

    let r = table.js.len();
    let perms: Vec<Vec<usize>> = if !table.cycl {
        vec![(0..r).collect()]
    } else {
        match convention {
            CyclConvention::Cyclic => (0..r).map(|c| (0..r).map(|t| (t + c) % r).collect()).collect(),
            CyclConvention::FullSymmetrization => (0..r).permutations(r).collect(),
        }
    };
    let pre = GaussianRational::from_ratio(table.num, table.den);
    let head = nf - r;
    let mut op = DiffOp::zero(dim);
    for assign in tuples(n, nf) {
        let mut value = Poly::zero(n);
        let mut permuted = assign.clone();
        for perm in &perms {
            for (t, &src) in perm.iter().enumerate() {
                permuted[head + t] = assign[head + src];
            }
            value = &value + &base[flat_index(&permuted, n)];
        }
        if value.is_zero() {
            continue;
        }
        let mut coeff = value.embed(dim, 0).scale(&pre);
        for &r_idx in &assign[..table.p_up.len()] {
            coeff = &coeff * &Poly::var(dim, n + r_idx);
        }
        let mut deriv: Vec<usize> = assign[table.p_up.len()..head].to_vec();
        deriv.extend(assign[head..].iter().map(|&j| n + j));
        op.add_term(MultiIndex::from_indices(dim, &deriv), &coeff);
    }
    Ok(op)
}

fn sum_tables(
    tables: &[TensorTable],
    conn: &Connection,
    convention: CyclConvention,
    tweak: Option<&TableTweak>,
) -> Result<DiffOp> {
    if let Some(t) = tweak {
        if !tables.iter().any(|tab| tab.name == t.tensor) {
            return Err(Error::InvalidInput(format!("unknown table tensor {}", t.tensor)));
        }
    }
    let mut gammas = GammaCache::new(conn);
    let mut op = DiffOp::zero(2 * conn.n());
    for table in tables {
        op = op.try_add(&table_operator(table, conn, &mut gammas, convention, tweak)?)?;
    }
    Ok(op)
}

/// The tabulated closed form of `S₂` for a flat base connection.
pub fn closed_s2_flat(conn: &Connection) -> Result<DiffOp> {
    sum_tables(&S2_FLAT, conn, CyclConvention::Cyclic, None)
}

/// [`closed_s2_flat`] with one coefficient altered.
pub fn closed_s2_flat_tweaked(conn: &Connection, tweak: &TableTweak) -> Result<DiffOp> {
    sum_tables(&S2_FLAT, conn, CyclConvention::Cyclic, Some(tweak))
}

/// The tabulated closed form of `S₄` for a flat base connection.
pub fn closed_s4_flat(conn: &Connection, convention: CyclConvention) -> Result<DiffOp> {
    sum_tables(&S4_FLAT, conn, convention, None)
}

/// [`closed_s4_flat`] with one coefficient altered.
pub fn closed_s4_flat_tweaked(conn: &Connection, convention: CyclConvention, tweak: &TableTweak) -> Result<DiffOp> {
    sum_tables(&S4_FLAT, conn, convention, Some(tweak))
}

/// `S₂ = −(1/24) Γ̃_{αβγ} ∂^α∂^β∂^γ + (1/16)(Γ̃^μ_{να}Γ̃^ν_{μβ} + a R̃_{αβ}) ∂^α∂^β`
/// with `∂^α = P^{αβ}∂_β`.
pub fn closed_s2_symplectic(spec: &SymplecticConnectionSpec) -> DiffOp {
    let n = spec.n();
    let dim = 2 * n;
    let raised = spec.raised();
    let ric = ricci(spec);
    // ∂^α = sign · ∂_{partner}
    let up = |alpha: usize| -> (usize, i64) {
        (0..dim)
            .find_map(|b| {
                let s = canonical_sign(n, alpha, b);
                (s != 0).then_some((b, s))
            })
            .expect("canonical matrix is invertible")
    };
    let mut op = DiffOp::zero(dim);
    let cubic = GaussianRational::from_ratio(-1, 24);
    for a in 0..dim {
        for b in 0..dim {
            for c in 0..dim {
                let g = spec.lowered(a, b, c);
                if g.is_zero() {
                    continue;
                }
                let ((pa, sa), (pb, sb), (pc, sc)) = (up(a), up(b), up(c));
                let w = &cubic * &GaussianRational::from_int(sa * sb * sc);
                op.add_term(MultiIndex::from_indices(dim, &[pa, pb, pc]), &g.scale(&w));
            }
        }
    }
    let quad = GaussianRational::from_ratio(1, 16);
    for a in 0..dim {
        for b in 0..dim {
            let mut coeff = ric[a * dim + b].scale(spec.a());
            for mu in 0..dim {
                for nu in 0..dim {
                    coeff = &coeff + &(raised.get(mu, nu, a) * raised.get(nu, mu, b));
                }
            }
            if coeff.is_zero() {
                continue;
            }
            let ((pa, sa), (pb, sb)) = (up(a), up(b));
            let w = &quad * &GaussianRational::from_int(sa * sb);
            op.add_term(MultiIndex::from_indices(dim, &[pa, pb]), &coeff.scale(&w));
        }
    }
    op
}

/// One differing coefficient between a closed form and a derived operator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TermDiff {
    pub derivative: String,
    pub monomial: String,
    pub closed_form: GaussianRational,
    pub derived: GaussianRational,
}

/// Agreement of one structural family of terms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyResult {
    pub family: String,
    pub matches: bool,
    pub mismatched_terms: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TableComparison {
    pub matches: bool,
    pub families: Vec<FamilyResult>,
    pub diff: Vec<TermDiff>,
}

/// Family label of a term: number of `∂_q` and degree of the coefficient in `p`.
fn family(n: usize, deriv: &MultiIndex, mono: &MultiIndex) -> String {
    let dq: u32 = deriv.exponents()[..n].iter().sum();
    let dp: u32 = deriv.exponents()[n..].iter().sum();
    let pdeg: u32 = mono.exponents()[n..].iter().sum();
    format!("p^{pdeg} dq^{dq} dp^{dp}")
}

fn scalar_terms(op: &DiffOp) -> BTreeMap<(MultiIndex, MultiIndex), GaussianRational> {
    let mut out = BTreeMap::new();
    for (d, c) in op.terms() {
        for (m, v) in c.terms() {
            out.insert((d.clone(), m.clone()), v.clone());
        }
    }
    out
}

/// Term-by-term comparison on normal forms, grouped into families.
///
/// `names` labels the `2n` coordinates (`q…` then `p…`).
pub fn compare_tables(closed: &DiffOp, derived: &DiffOp, names: &[String]) -> Result<TableComparison> {
    check_dim(closed.dim(), derived.dim())?;
    let dim = closed.dim();
    let n = dim / 2;
    let a = scalar_terms(closed);
    let b = scalar_terms(derived);
    let mut families: BTreeMap<String, (bool, usize)> = BTreeMap::new();
    let mut diff = Vec::new();
    let zero = GaussianRational::from_int(0);
    for key in a.keys().chain(b.keys()).sorted().dedup() {
        let fam = family(n, &key.0, &key.1);
        let pa = a.get(key).unwrap_or(&zero);
        let pb = b.get(key).unwrap_or(&zero);
        let entry = families.entry(fam).or_insert((true, 0));
        if pa != pb {
            entry.0 = false;
            entry.1 += 1;
            diff.push(TermDiff {
                derivative: crate::operators::derivative_name(&key.0, names),
                monomial: Poly::monomial(dim, key.1.clone(), GaussianRational::from_int(1)).display_with(names),
                closed_form: pa.clone(),
                derived: pb.clone(),
            });
        }
    }
    Ok(TableComparison {
        matches: diff.is_empty(),
        families: families
            .into_iter()
            .map(|(family, (matches, mismatched_terms))| FamilyResult {
                family,
                matches,
                mismatched_terms,
            })
            .collect(),
        diff,
    })
}
