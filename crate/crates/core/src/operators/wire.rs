//! Canonical JSON shape for operators:
//!
//! ```json
//! {"dim": 2, "terms": [{"derivative": [0, 2], "coefficient": [{"monomial": [1, 0], "coeff": {"re": "1/8", "im": "0"}}]}]}
//! ```
//!
//! Bidifferential operators use `"left"`/`"right"` in place of `"derivative"`.
//! Terms appear in normal-form order so serialization is bit-exact.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{BiDiffOp, DiffOp};
use crate::algebra::{MultiIndex, Poly, WireTerm};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct WireDiffTerm {
    derivative: MultiIndex,
    coefficient: Vec<WireTerm>,
}

#[derive(Serialize, Deserialize)]
struct WireDiffOp {
    dim: usize,
    terms: Vec<WireDiffTerm>,
}

#[derive(Serialize, Deserialize)]
struct WireBiTerm {
    left: MultiIndex,
    right: MultiIndex,
    coefficient: Vec<WireTerm>,
}

#[derive(Serialize, Deserialize)]
struct WireBiDiffOp {
    dim: usize,
    terms: Vec<WireBiTerm>,
}

impl Serialize for DiffOp {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        WireDiffOp {
            dim: self.dim(),
            terms: self
                .terms()
                .map(|(i, c)| WireDiffTerm {
                    derivative: i.clone(),
                    coefficient: c.to_wire(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

fn diffop_from_wire(w: WireDiffOp) -> Result<DiffOp> {
    let mut op = DiffOp::zero(w.dim);
    let mut last: Option<MultiIndex> = None;
    for t in w.terms {
        let c = Poly::from_wire(w.dim, t.coefficient)?;
        if c.is_zero() {
            return Err(Error::InvalidInput("zero operator coefficient".into()));
        }
        if last.as_ref().is_some_and(|l| *l >= t.derivative) {
            return Err(Error::InvalidInput("operator terms out of canonical order".into()));
        }
        last = Some(t.derivative.clone());
        op.add_term(t.derivative, &c);
    }
    DiffOp::from_terms(w.dim, op.terms().map(|(i, c)| (i.clone(), c.clone())))
}

impl<'de> Deserialize<'de> for DiffOp {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        diffop_from_wire(WireDiffOp::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

impl Serialize for BiDiffOp {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        WireBiDiffOp {
            dim: self.dim(),
            terms: self
                .terms()
                .map(|((i, j), c)| WireBiTerm {
                    left: i.clone(),
                    right: j.clone(),
                    coefficient: c.to_wire(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

fn bidiff_from_wire(w: WireBiDiffOp) -> Result<BiDiffOp> {
    let mut op = BiDiffOp::zero(w.dim);
    let mut last: Option<(MultiIndex, MultiIndex)> = None;
    for t in w.terms {
        let c = Poly::from_wire(w.dim, t.coefficient)?;
        if c.is_zero() {
            return Err(Error::InvalidInput("zero operator coefficient".into()));
        }
        let key = (t.left, t.right);
        if last.as_ref().is_some_and(|l| *l >= key) {
            return Err(Error::InvalidInput("operator terms out of canonical order".into()));
        }
        if key.0.dim() != w.dim || key.1.dim() != w.dim {
            return Err(Error::DimensionMismatch {
                left: w.dim,
                right: key.0.dim().max(key.1.dim()),
            });
        }
        last = Some(key.clone());
        op.add_term(key.0, key.1, &c);
    }
    Ok(op)
}

impl<'de> Deserialize<'de> for BiDiffOp {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        bidiff_from_wire(WireBiDiffOp::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}
