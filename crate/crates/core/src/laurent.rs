//! Sparse integer Laurent polynomials in `N` variables.
//!
//! Text grammar: terms joined by `+`/`-`; a term is an optional integer
//! followed by `*`-separated variables `X<i>` with an optional `^<int>`
//! exponent, e.g. `X1 + X1^-1 + X2 + X2^-1 + 5`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Exponent = Vec<i64>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LaurentPoly {
    arity: usize,
    terms: BTreeMap<Exponent, BigInt>,
}

impl LaurentPoly {
    pub fn zero(arity: usize) -> Self {
        LaurentPoly {
            arity,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(arity: usize, c: impl Into<BigInt>) -> Self {
        let mut p = LaurentPoly::zero(arity);
        p.add_term(vec![0; arity], c.into());
        p
    }

    pub fn from_terms<I, C>(arity: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Exponent, C)>,
        C: Into<BigInt>,
    {
        let mut p = LaurentPoly::zero(arity);
        for (e, c) in terms {
            if e.len() != arity {
                return Err(Error::ArityMismatch {
                    expected: arity,
                    found: e.len(),
                });
            }
            p.add_term(e, c.into());
        }
        Ok(p)
    }

    fn add_term(&mut self, e: Exponent, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e).or_default();
        *slot += c;
        if slot.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &BigInt)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// The monomial support `M(f)`.
    pub fn support(&self) -> Vec<Exponent> {
        self.terms.keys().cloned().collect()
    }

    pub fn coeff(&self, e: &[i64]) -> BigInt {
        self.terms.get(e).cloned().unwrap_or_default()
    }

    /// Sum of absolute values of the coefficients.
    pub fn l1_norm(&self) -> BigInt {
        self.terms.values().map(|c| c.abs()).sum()
    }

    /// Value at `(1, ..., 1)`.
    pub fn value_at_one(&self) -> BigInt {
        self.terms.values().sum()
    }

    pub fn add(&self, other: &LaurentPoly) -> Result<LaurentPoly> {
        self.check_arity(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn mul(&self, other: &LaurentPoly) -> Result<LaurentPoly> {
        self.check_arity(other)?;
        let mut out = LaurentPoly::zero(self.arity);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &BigInt) -> LaurentPoly {
        let mut out = LaurentPoly::zero(self.arity);
        for (e, v) in &self.terms {
            out.add_term(e.clone(), v * c);
        }
        out
    }

    /// Substitutes `X_i -> prod_k W_k^{P[i][k]}`, giving a polynomial in
    /// `P[i].len()` variables.
    pub fn compose_monomial(&self, param: &[Vec<i64>]) -> Result<LaurentPoly> {
        if param.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: param.len(),
            });
        }
        let r = param.first().map_or(0, |row| row.len());
        if param.iter().any(|row| row.len() != r) {
            return Err(Error::InvalidInput("ragged parametrization matrix".into()));
        }
        let mut out = LaurentPoly::zero(r);
        for (e, c) in &self.terms {
            let img = (0..r)
                .map(|k| e.iter().zip(param).map(|(ei, row)| ei * row[k]).sum())
                .collect();
            out.add_term(img, c.clone());
        }
        Ok(out)
    }

    /// Re-reads the polynomial in a larger number of variables.
    pub fn with_arity(&self, arity: usize) -> Result<LaurentPoly> {
        if arity < self.arity
            && self
                .terms
                .keys()
                .any(|e| e[arity..].iter().any(|&x| x != 0))
        {
            return Err(Error::ArityMismatch {
                expected: arity,
                found: self.arity,
            });
        }
        let mut out = LaurentPoly::zero(arity);
        for (e, c) in &self.terms {
            let mut e2 = vec![0; arity];
            for (i, x) in e.iter().enumerate().take(arity) {
                e2[i] = *x;
            }
            out.add_term(e2, c.clone());
        }
        Ok(out)
    }

    fn check_arity(&self, other: &LaurentPoly) -> Result<()> {
        if self.arity != other.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: other.arity,
            });
        }
        Ok(())
    }

    /// Parses with an explicit arity; variables beyond it are rejected.
    pub fn parse_with_arity(text: &str, arity: usize) -> Result<LaurentPoly> {
        let p: LaurentPoly = text.parse()?;
        p.with_arity(arity)
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if c.is_negative() { " - " } else { " + " })?;
            }
            first = false;
            let vars: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &x)| x != 0)
                .map(|(i, &x)| {
                    if x == 1 {
                        format!("X{}", i + 1)
                    } else {
                        format!("X{}^{}", i + 1, x)
                    }
                })
                .collect();
            match (vars.is_empty(), mag.is_one()) {
                (true, _) => write!(f, "{mag}")?,
                (false, true) => f.write_str(&vars.join("*"))?,
                (false, false) => write!(f, "{mag}*{}", vars.join("*"))?,
            }
        }
        Ok(())
    }
}

struct Lexer<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn digits(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        (self.pos > start).then(|| std::str::from_utf8(&self.s[start..self.pos]).unwrap())
    }

    fn signed_int(&mut self) -> Result<i64> {
        let neg = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                true
            }
            Some(b'+') => {
                self.pos += 1;
                false
            }
            _ => false,
        };
        let Some(d) = self.digits() else {
            return self.err("expected integer exponent");
        };
        let v: i64 = match d.parse() {
            Ok(v) => v,
            Err(_) => return self.err("exponent out of range"),
        };
        Ok(if neg { -v } else { v })
    }
}

impl FromStr for LaurentPoly {
    type Err = Error;

    /// The arity is the largest variable index that appears (at least 1).
    fn from_str(text: &str) -> Result<Self> {
        let mut lx = Lexer {
            s: text.as_bytes(),
            pos: 0,
        };
        let mut raw: Vec<(BTreeMap<usize, i64>, BigInt)> = Vec::new();
        let mut first = true;
        loop {
            let sign = match lx.peek() {
                None if first => return lx.err("empty polynomial"),
                None => break,
                Some(b'+') => {
                    lx.pos += 1;
                    1
                }
                Some(b'-') => {
                    lx.pos += 1;
                    -1
                }
                Some(_) if first => 1,
                Some(c) => return lx.err(format!("expected '+' or '-', found '{}'", c as char)),
            };
            first = false;
            let mut coeff = BigInt::from(sign);
            let mut vars: BTreeMap<usize, i64> = BTreeMap::new();
            if let Some(d) = lx.digits() {
                coeff *= d.parse::<BigInt>().expect("digits parse");
                if lx.peek() == Some(b'*') {
                    lx.pos += 1;
                } else {
                    raw.push((vars, coeff));
                    continue;
                }
            }
            loop {
                match lx.peek() {
                    Some(b'X') | Some(b'x') => lx.pos += 1,
                    _ => return lx.err("expected variable X<i>"),
                }
                let Some(d) = lx.digits() else {
                    return lx.err("expected variable index");
                };
                let idx: usize = match d.parse() {
                    Ok(i) if i >= 1 => i,
                    _ => return lx.err("variable index must be >= 1"),
                };
                let exp = if lx.peek() == Some(b'^') {
                    lx.pos += 1;
                    lx.signed_int()?
                } else {
                    1
                };
                *vars.entry(idx).or_default() += exp;
                if lx.peek() == Some(b'*') {
                    lx.pos += 1;
                } else {
                    break;
                }
            }
            raw.push((vars, coeff));
        }
        let arity = raw
            .iter()
            .flat_map(|(v, _)| v.keys().copied())
            .max()
            .unwrap_or(1);
        let mut p = LaurentPoly::zero(arity);
        for (vars, c) in raw {
            let mut e = vec![0; arity];
            for (i, x) in vars {
                e[i - 1] += x;
            }
            p.add_term(e, c);
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_spec_grammar() {
        let p: LaurentPoly = "X1 + X1^-1 + X2 + X2^-1 + 5".parse().unwrap();
        assert_eq!(p.arity(), 2);
        assert_eq!(p.num_terms(), 5);
        assert_eq!(p.coeff(&[-1, 0]), BigInt::from(1));
        assert_eq!(p.coeff(&[0, 0]), BigInt::from(5));

        let q: LaurentPoly = "2*X1 - 1".parse().unwrap();
        assert_eq!(q.arity(), 1);
        assert_eq!(q.coeff(&[1]), BigInt::from(2));
        assert_eq!(q.coeff(&[0]), BigInt::from(-1));

        let r: LaurentPoly = "-3*X1^2*X3^-1 + X2".parse().unwrap();
        assert_eq!(r.arity(), 3);
        assert_eq!(r.coeff(&[2, 0, -1]), BigInt::from(-3));
    }

    #[test]
    fn cancelling_terms_vanish() {
        let p: LaurentPoly = "X1 - X1 + 2".parse().unwrap();
        assert_eq!(p.num_terms(), 1);
        let z: LaurentPoly = "X1 - X1".parse().unwrap();
        assert!(z.is_zero());
        assert_eq!(z.to_string(), "0");
    }

    #[test]
    fn rejects_malformed() {
        for bad in ["", "X", "2*", "X0", "X1^", "X1 X2", "3 4", "X1 + * 2", "Y1"] {
            assert!(
                matches!(bad.parse::<LaurentPoly>(), Err(Error::Parse { .. })),
                "{bad:?} should not parse"
            );
        }
    }

    #[test]
    fn canonical_text() {
        let p: LaurentPoly = "-4 + X1 - X2".parse().unwrap();
        assert_eq!(p.to_string(), "X1 - X2 - 4");
        let q: LaurentPoly = "5 + X2^-1 + X1^-1 + X2 + X1".parse().unwrap();
        assert_eq!(q.to_string(), "X1 + X2 + 5 + X2^-1 + X1^-1");
        assert_eq!(q.to_string().parse::<LaurentPoly>().unwrap(), q);
    }

    #[test]
    fn composition_with_parametrization() {
        let f: LaurentPoly = "X1 - X2 - 4".parse().unwrap();
        let diag = f.compose_monomial(&[vec![1], vec![1]]).unwrap();
        assert_eq!(diag, LaurentPoly::constant(1, -4));
        let g: LaurentPoly = "X1 + X2".parse().unwrap();
        let anti = g.compose_monomial(&[vec![1], vec![-1]]).unwrap();
        assert_eq!(anti.to_string(), "X1 + X1^-1");
    }
}
