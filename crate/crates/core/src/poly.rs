//! Dense univariate polynomials over the integers.
//!
//! Coefficients are stored lowest degree first. The zero polynomial is the
//! empty vector and a non-zero polynomial never has a trailing zero.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct ZPoly {
    coeffs: Vec<BigInt>,
}

impl ZPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        ZPoly { coeffs }
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        ZPoly::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        ZPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        ZPoly::constant(BigInt::one())
    }

    pub fn constant(c: BigInt) -> Self {
        ZPoly::new(vec![c])
    }

    /// `c * x^k`.
    pub fn monomial(c: BigInt, k: usize) -> Self {
        let mut v = vec![BigInt::zero(); k + 1];
        v[k] = c;
        ZPoly::new(v)
    }

    /// `x^n - 1`.
    pub fn x_pow_minus_one(n: usize) -> Self {
        let mut v = vec![BigInt::zero(); n + 1];
        v[0] = BigInt::from(-1);
        v[n] += 1;
        ZPoly::new(v)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree with the zero polynomial mapped to 0; only for places where
    /// zero has already been excluded.
    fn deg(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    pub fn lead(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    pub fn scale(&self, c: &BigInt) -> ZPoly {
        ZPoly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn content(&self) -> BigInt {
        self.coeffs
            .iter()
            .fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// Primitive part with positive leading coefficient.
    pub fn primitive_part(&self) -> ZPoly {
        if self.is_zero() {
            return ZPoly::zero();
        }
        let mut g = self.content();
        if self.lead().is_negative() {
            g = -g;
        }
        ZPoly::new(self.coeffs.iter().map(|c| c / &g).collect())
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    /// `p(a*x + b)`.
    pub fn compose_affine(&self, a: &BigInt, b: &BigInt) -> ZPoly {
        let lin = ZPoly::new(vec![b.clone(), a.clone()]);
        self.coeffs.iter().rev().fold(ZPoly::zero(), |acc, c| {
            &(&acc * &lin) + &ZPoly::constant(c.clone())
        })
    }

    pub fn pow(&self, e: u32) -> ZPoly {
        let mut acc = ZPoly::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Pseudo-remainder: `lc(b)^(deg a - deg b + 1) * a mod b`.
    pub fn pseudo_rem(&self, b: &ZPoly) -> ZPoly {
        assert!(!b.is_zero(), "pseudo-remainder by zero polynomial");
        if self.is_zero() || self.deg() < b.deg() {
            return self.clone();
        }
        let db = b.deg();
        let lb = b.lead();
        let mut r = self.coeffs.clone();
        let mut steps = self.deg() - db + 1;
        while r.len() > db && !r.is_empty() {
            let top = r.len() - 1;
            let lr = r[top].clone();
            for c in r.iter_mut() {
                *c *= &lb;
            }
            let shift = top - db;
            for (j, bc) in b.coeffs.iter().enumerate() {
                r[shift + j] -= &lr * bc;
            }
            r.pop();
            while r.last().is_some_and(|c| c.is_zero()) {
                r.pop();
            }
            steps -= 1;
        }
        let mut out = ZPoly::new(r);
        if steps > 0 {
            out = out.scale(&num_traits::pow(lb, steps));
        }
        out
    }

    /// Exact quotient over the integers; fails when `d` does not divide `self`.
    pub fn div_exact(&self, d: &ZPoly) -> Result<ZPoly> {
        if d.is_zero() {
            return Err(Error::InvalidInput("division by zero polynomial".into()));
        }
        if self.is_zero() {
            return Ok(ZPoly::zero());
        }
        if self.deg() < d.deg() {
            return Err(Error::NotDivisible);
        }
        let dd = d.deg();
        let ld = d.lead();
        let mut r = self.coeffs.clone();
        let mut q = vec![BigInt::zero(); self.deg() - dd + 1];
        for k in (0..q.len()).rev() {
            let top = &r[k + dd];
            if top.is_zero() {
                continue;
            }
            let (qk, rem) = top.div_rem(&ld);
            if !rem.is_zero() {
                return Err(Error::NotDivisible);
            }
            for (j, dc) in d.coeffs.iter().enumerate() {
                r[k + j] -= &qk * dc;
            }
            q[k] = qk;
        }
        if r.iter().any(|c| !c.is_zero()) {
            return Err(Error::NotDivisible);
        }
        Ok(ZPoly::new(q))
    }

    /// Greatest common divisor, primitive with positive leading coefficient
    /// times the gcd of the contents.
    pub fn gcd(&self, other: &ZPoly) -> ZPoly {
        if self.is_zero() {
            return other.normalized_sign();
        }
        if other.is_zero() {
            return self.normalized_sign();
        }
        let c = self.content().gcd(&other.content());
        let (mut a, mut b) = (self.primitive_part(), other.primitive_part());
        if a.deg() < b.deg() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            let r = a.pseudo_rem(&b);
            a = b;
            b = r.primitive_part();
        }
        a.primitive_part().scale(&c)
    }

    fn normalized_sign(&self) -> ZPoly {
        if self.lead().is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    /// Resultant by the subresultant polynomial remainder sequence.
    pub fn resultant(&self, other: &ZPoly) -> BigInt {
        if self.is_zero() || other.is_zero() {
            return BigInt::zero();
        }
        let (da, db) = (self.deg(), other.deg());
        if da == 0 {
            return num_traits::pow(self.lead(), db);
        }
        if db == 0 {
            return num_traits::pow(other.lead(), da);
        }
        let ca = self.content();
        let cb = other.content();
        let mut a = ZPoly::new(self.coeffs.iter().map(|c| c / &ca).collect());
        let mut b = ZPoly::new(other.coeffs.iter().map(|c| c / &cb).collect());
        let t = num_traits::pow(ca, db) * num_traits::pow(cb, da);
        let mut s = BigInt::one();
        if a.deg() < b.deg() {
            std::mem::swap(&mut a, &mut b);
            if a.deg() % 2 == 1 && b.deg() % 2 == 1 {
                s = -s;
            }
        }
        let mut g = BigInt::one();
        let mut h = BigInt::one();
        loop {
            let delta = a.deg() - b.deg();
            if a.deg() % 2 == 1 && b.deg() % 2 == 1 {
                s = -s;
            }
            let r = a.pseudo_rem(&b);
            if r.is_zero() {
                return BigInt::zero();
            }
            a = b;
            let denom = &g * num_traits::pow(h.clone(), delta);
            b = ZPoly::new(r.coeffs.iter().map(|c| c / &denom).collect());
            g = a.lead();
            h = match delta {
                0 => h,
                1 => g.clone(),
                d => num_traits::pow(g.clone(), d) / num_traits::pow(h, d - 1),
            };
            if b.deg() == 0 {
                break;
            }
        }
        let da = a.deg();
        let lb = b.lead();
        let h = if da == 1 {
            lb
        } else {
            num_traits::pow(lb, da) / num_traits::pow(h, da - 1)
        };
        s * t * h
    }

    /// Exact square root in `Q[x]`, returned with integer coefficients.
    ///
    /// The root is normalized to a positive leading coefficient.
    pub fn sqrt(&self) -> Result<ZPoly> {
        if self.is_zero() {
            return Ok(ZPoly::zero());
        }
        let n = self.deg();
        if n % 2 == 1 {
            return Err(Error::NotSquare);
        }
        let lead = self.lead();
        if lead.is_negative() {
            return Err(Error::NotSquare);
        }
        let lr = lead.sqrt();
        if &lr * &lr != lead {
            return Err(Error::NotSquare);
        }
        let m = n / 2;
        let p: Vec<BigRational> = self
            .coeffs
            .iter()
            .map(|c| BigRational::from_integer(c.clone()))
            .collect();
        // q_m = sqrt(lead); q_{m-k} from the coefficient of x^(n-k).
        let mut q = vec![BigRational::zero(); m + 1];
        q[m] = BigRational::from_integer(lr);
        let two_lead = &q[m] * BigRational::from_integer(BigInt::from(2));
        for k in 1..=m {
            let mut acc = p[n - k].clone();
            for i in 1..k {
                acc -= &q[m - i] * &q[m - (k - i)];
            }
            q[m - k] = acc / &two_lead;
        }
        if q.iter().any(|c| !c.is_integer()) {
            return Err(Error::NotSquare);
        }
        let root = ZPoly::new(q.into_iter().map(|c| c.to_integer()).collect());
        if &(&root * &root) != self {
            return Err(Error::NotSquare);
        }
        Ok(root)
    }

    pub fn display_in(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if out.is_empty() {
                if c.is_negative() {
                    out.push('-');
                }
            } else {
                out.push_str(if c.is_negative() { " - " } else { " + " });
            }
            let body = match i {
                0 => mag.to_string(),
                _ => {
                    let v = if i == 1 {
                        var.to_string()
                    } else {
                        format!("{var}^{i}")
                    };
                    if mag.is_one() {
                        v
                    } else {
                        format!("{mag}*{v}")
                    }
                }
            };
            out.push_str(&body);
        }
        out
    }
}

impl fmt::Display for ZPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_in("x"))
    }
}

impl<'a> Add<&'a ZPoly> for &'a ZPoly {
    type Output = ZPoly;
    fn add(self, rhs: &ZPoly) -> ZPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        ZPoly::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl<'a> Sub<&'a ZPoly> for &'a ZPoly {
    type Output = ZPoly;
    fn sub(self, rhs: &ZPoly) -> ZPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        ZPoly::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl<'a> Mul<&'a ZPoly> for &'a ZPoly {
    type Output = ZPoly;
    fn mul(self, rhs: &ZPoly) -> ZPoly {
        if self.is_zero() || rhs.is_zero() {
            return ZPoly::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        ZPoly::new(out)
    }
}

impl Neg for &ZPoly {
    type Output = ZPoly;
    fn neg(self) -> ZPoly {
        ZPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Sylvester determinant by fraction-free elimination; independent of the
    /// subresultant path.
    fn sylvester_resultant(a: &ZPoly, b: &ZPoly) -> BigInt {
        let (m, n) = (a.deg(), b.deg());
        let size = m + n;
        let mut mat = vec![vec![BigInt::zero(); size]; size];
        for i in 0..n {
            for (j, c) in a.coeffs.iter().rev().enumerate() {
                mat[i][i + j] = c.clone();
            }
        }
        for i in 0..m {
            for (j, c) in b.coeffs.iter().rev().enumerate() {
                mat[n + i][i + j] = c.clone();
            }
        }
        bareiss_det(mat)
    }

    fn bareiss_det(mut a: Vec<Vec<BigInt>>) -> BigInt {
        let n = a.len();
        if n == 0 {
            return BigInt::one();
        }
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                    Some(r) => {
                        a.swap(k, r);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                    a[i][j] = v;
                }
            }
            prev = a[k][k].clone();
        }
        sign * a[n - 1][n - 1].clone()
    }

    #[test]
    fn resultant_matches_sylvester() {
        let cases = [
            (vec![1, 0, -2], vec![-3, 1]),
            (vec![-1, 0, 0, 0, 1], vec![-1, 2]),
            (vec![3, -1, 4, 1, -5, 9], vec![2, 6, -5, 3]),
            (vec![0, 0, 1], vec![5, 7, 0, 2]),
            (vec![6, 5, 1], vec![2, 3, 1]),
            (vec![4, 0, 2], vec![8, 0, 0, 6]),
        ];
        for (a, b) in cases {
            let (a, b) = (ZPoly::from_i64s(&a), ZPoly::from_i64s(&b));
            assert_eq!(a.resultant(&b), sylvester_resultant(&a, &b), "{a} / {b}");
            assert_eq!(b.resultant(&a), sylvester_resultant(&b, &a), "{b} / {a}");
        }
    }

    #[test]
    fn resultant_of_common_root_is_zero() {
        let a = ZPoly::from_i64s(&[-1, 0, 1]);
        let b = ZPoly::from_i64s(&[-1, 1]);
        assert!(a.resultant(&b).is_zero());
    }

    #[test]
    fn gcd_and_exact_division() {
        let a = ZPoly::from_i64s(&[-1, 0, 0, 0, 0, 0, 1]);
        let b = ZPoly::from_i64s(&[-1, 0, 0, 0, 1]);
        let g = a.gcd(&b);
        assert_eq!(g, ZPoly::from_i64s(&[-1, 0, 1]));
        let q = a.div_exact(&g).unwrap();
        assert_eq!(&q * &g, a);
        assert_eq!(
            ZPoly::from_i64s(&[1, 1]).div_exact(&ZPoly::from_i64s(&[0, 2])),
            Err(Error::NotDivisible)
        );
    }

    #[test]
    fn sqrt_exact_and_failure() {
        let q = ZPoly::from_i64s(&[3, -2, 5]);
        assert_eq!((&q * &q).sqrt().unwrap(), q);
        assert_eq!(ZPoly::from_i64s(&[1, 0, 2]).sqrt(), Err(Error::NotSquare));
        assert_eq!(ZPoly::from_i64s(&[1, 1]).sqrt(), Err(Error::NotSquare));
    }

    #[test]
    fn compose_affine_shifts() {
        // (x + 1)^2 at 2x + 4 -> (2x + 5)^2
        let p = ZPoly::from_i64s(&[1, 2, 1]);
        let r = p.compose_affine(&BigInt::from(2), &BigInt::from(4));
        assert_eq!(r, ZPoly::from_i64s(&[25, 20, 4]));
    }

    #[test]
    fn display_is_readable() {
        assert_eq!(ZPoly::from_i64s(&[1, -1, 0, 3]).display_in("T"), "3*T^3 - T + 1");
        assert_eq!(ZPoly::zero().to_string(), "0");
    }
}
