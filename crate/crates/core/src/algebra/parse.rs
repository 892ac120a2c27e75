//! Minimal polynomial expression grammar:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*        division only by constants
//! unary  := '-' unary | '+' unary | power
//! power  := atom ('^' integer)?
//! atom   := integer | 'i' | name | '(' expr ')'
//! ```

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::{GaussianRational, Poly};
use crate::error::{Error, Result};

/// Coordinate names of the phase space `(q1..qn, p1..pn, z1..zk)`.
pub fn phase_space_names(n: usize, casimirs: usize) -> Vec<String> {
    (1..=n)
        .map(|j| format!("q{j}"))
        .chain((1..=n).map(|j| format!("p{j}")))
        .chain((1..=casimirs).map(|j| format!("z{j}")))
        .collect()
}

pub fn parse_poly(src: &str, names: &[String]) -> Result<Poly> {
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
        names,
    };
    let out = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    names: &'a [String],
}

impl Parser<'_> {
    fn dim(&self) -> usize {
        self.names.len()
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Poly> {
        let mut acc = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if c == b'+' { &acc + &rhs } else { &acc - &rhs };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Poly> {
        let mut acc = self.unary()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            if c == b'*' {
                acc = &acc * &rhs;
            } else {
                if !rhs.is_constant() || rhs.is_zero() {
                    return Err(self.err("division only by nonzero constants"));
                }
                let inv = rhs.constant_term().inv().expect("nonzero");
                acc = acc.scale(&inv);
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Poly> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-&self.unary()?)
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Poly> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let e = self.integer()?;
            let e: u32 = e
                .try_into()
                .ok()
                .filter(|&e| e <= 64)
                .ok_or_else(|| self.err("exponent too large"))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<BigInt> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected an integer"));
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        Ok(s.parse().expect("digits"))
    }

    fn atom(&mut self) -> Result<Poly> {
        let dim = self.dim();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.integer()?;
                Ok(Poly::constant(
                    dim,
                    GaussianRational::real(BigRational::from_integer(n)),
                ))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let ident = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                if ident == "i" {
                    return Ok(Poly::constant(dim, GaussianRational::i()));
                }
                match self.names.iter().position(|n| n == ident) {
                    Some(j) => Ok(Poly::var(dim, j)),
                    None => {
                        self.pos = start;
                        Err(self.err(format!("unknown identifier {ident:?}")))
                    }
                }
            }
            Some(c) => Err(self.err(format!("unexpected character {:?}", c as char))),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

/// Parse a rational or Gaussian-rational constant such as `-3/7` or `1/2*i`.
pub fn parse_scalar(src: &str) -> Result<GaussianRational> {
    let p = parse_poly(src, &[])?;
    if p.is_zero() {
        return Ok(GaussianRational::zero());
    }
    Ok(p.constant_term())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::MultiIndex;

    fn names() -> Vec<String> {
        phase_space_names(1, 0)
    }

    #[test]
    fn parses_polynomials() {
        let f = parse_poly("q1^2*p1 - 3/7*q1 + i", &names()).unwrap();
        assert_eq!(f.num_terms(), 3);
        assert_eq!(
            f.coeff(&MultiIndex::from_exponents(vec![1, 0])),
            GaussianRational::from_ratio(-3, 7)
        );
        assert_eq!(f.constant_term(), GaussianRational::i());
    }

    #[test]
    fn parenthesised_powers() {
        let f = parse_poly("(q1 + p1)^2", &names()).unwrap();
        let g = parse_poly("q1^2 + 2*q1*p1 + p1^2", &names()).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn errors_carry_positions() {
        match parse_poly("q1 + r2", &names()) {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("{other:?}"),
        }
        assert!(parse_poly("q1 +", &names()).is_err());
        assert!(parse_poly("q1 / p1", &names()).is_err());
        assert!(parse_poly("q1 )", &names()).is_err());
    }

    #[test]
    fn scalars() {
        assert_eq!(parse_scalar("-3/7").unwrap(), GaussianRational::from_ratio(-3, 7));
        assert_eq!(parse_scalar("0").unwrap(), GaussianRational::zero());
    }
}
