//! Arithmetic in `Z[x]/(Phi_m(x))` and evaluation at torsion points.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::lattice::{divisors, euler_phi, TorsionPoint};
use crate::laurent::LaurentPoly;
use crate::poly::ZPoly;

fn moebius(n: u64) -> i32 {
    let mut n = n;
    let mut sign = 1;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return 0;
            }
            sign = -sign;
        }
        p += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

fn cache() -> &'static Mutex<HashMap<u64, Arc<ZPoly>>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<ZPoly>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `Phi_m = prod_{d | m} (x^d - 1)^{mu(m/d)}`.
pub fn cyclotomic_poly(m: u64) -> Arc<ZPoly> {
    assert!(m >= 1, "cyclotomic index must be positive");
    if let Some(p) = cache().lock().expect("cache poisoned").get(&m) {
        return p.clone();
    }
    let mut num = ZPoly::one();
    let mut den = ZPoly::one();
    for d in divisors(m) {
        match moebius(m / d) {
            1 => num = &num * &ZPoly::x_pow_minus_one(d as usize),
            -1 => den = &den * &ZPoly::x_pow_minus_one(d as usize),
            _ => {}
        }
    }
    let phi = Arc::new(num.div_exact(&den).expect("cyclotomic quotient is exact"));
    cache()
        .lock()
        .expect("cache poisoned")
        .insert(m, phi.clone());
    phi
}

/// An element of `Z[w_m]`, stored on the power basis `1, x, ..., x^(phi(m)-1)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CyclotomicInt {
    m: u64,
    c: Vec<BigInt>,
}

/// Reduces a coefficient vector modulo the monic `phi` in place.
fn reduce(mut v: Vec<BigInt>, phi: &ZPoly) -> Vec<BigInt> {
    let d = phi.degree().expect("non-zero modulus");
    let pc = phi.coeffs();
    for i in (d..v.len()).rev() {
        if v[i].is_zero() {
            continue;
        }
        let c = std::mem::take(&mut v[i]);
        for j in 0..d {
            if !pc[j].is_zero() {
                v[i - d + j] -= &c * &pc[j];
            }
        }
    }
    v.resize(d, BigInt::zero());
    v
}

impl CyclotomicInt {
    fn reduced(m: u64, v: Vec<BigInt>) -> Self {
        let phi = cyclotomic_poly(m);
        CyclotomicInt {
            m,
            c: reduce(v, &phi),
        }
    }

    pub fn from_int(m: u64, n: impl Into<BigInt>) -> Self {
        let mut c = vec![BigInt::zero(); euler_phi(m) as usize];
        c[0] = n.into();
        CyclotomicInt { m, c }
    }

    pub fn zero(m: u64) -> Self {
        Self::from_int(m, 0)
    }

    pub fn one(m: u64) -> Self {
        Self::from_int(m, 1)
    }

    /// `w_m^j`.
    pub fn root(m: u64, j: u64) -> Self {
        let mut v = vec![BigInt::zero(); m as usize];
        v[(j % m) as usize] = BigInt::one();
        Self::reduced(m, v)
    }

    /// The class of an integer polynomial in `x`.
    pub fn from_poly(m: u64, p: &ZPoly) -> Self {
        let mut v = p.coeffs().to_vec();
        if v.len() < euler_phi(m) as usize {
            v.resize(euler_phi(m) as usize, BigInt::zero());
        }
        Self::reduced(m, v)
    }

    pub fn conductor(&self) -> u64 {
        self.m
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.c
    }

    pub fn to_poly(&self) -> ZPoly {
        ZPoly::new(self.c.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(Zero::is_zero)
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.m != other.m {
            return Err(Error::ConductorMismatch(self.m, other.m));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(CyclotomicInt {
            m: self.m,
            c: self.c.iter().zip(&other.c).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        CyclotomicInt {
            m: self.m,
            c: self.c.iter().map(|a| -a).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let n = self.c.len();
        let mut v = vec![BigInt::zero(); 2 * n - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.c.iter().enumerate() {
                if !b.is_zero() {
                    v[i + j] += a * b;
                }
            }
        }
        Ok(Self::reduced(self.m, v))
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        CyclotomicInt {
            m: self.m,
            c: self.c.iter().map(|a| a * k).collect(),
        }
    }

    /// `sigma_k : w -> w^k`.
    pub fn galois_apply(&self, k: u64) -> Result<Self> {
        let m = self.m;
        if k.gcd(&m) != 1 && m > 1 {
            return Err(Error::NotAUnit { k, m });
        }
        let mut v = vec![BigInt::zero(); m as usize];
        for (j, a) in self.c.iter().enumerate() {
            let t = ((j as u128 * k as u128) % m as u128) as usize;
            v[t] += a;
        }
        Ok(Self::reduced(m, v))
    }

    /// The value when `self` is a rational integer.
    pub fn as_integer(&self) -> Option<BigInt> {
        self.c[1..]
            .iter()
            .all(Zero::is_zero)
            .then(|| self.c[0].clone())
    }

    /// The field norm to `Q`, as the product of all conjugates.
    pub fn norm_direct(&self) -> Result<BigInt> {
        let mut acc = CyclotomicInt::one(self.m);
        for k in crate::lattice::units_mod(self.m) {
            acc = acc.mul(&self.galois_apply(k.max(1))?)?;
        }
        acc.as_integer()
            .ok_or_else(|| Error::Invariant("norm is not rational".into()))
    }

    /// The field norm to `Q`, as `Res(Phi_m, alpha)`.
    pub fn norm(&self) -> BigInt {
        let a = self.to_poly();
        if a.is_zero() {
            return BigInt::zero();
        }
        cyclotomic_poly(self.m).resultant(&a)
    }
}

/// `f(xi)` in conductor `ord(xi)`.
pub fn eval_at(f: &LaurentPoly, xi: &TorsionPoint) -> Result<CyclotomicInt> {
    if f.arity() != xi.arity() {
        return Err(Error::ArityMismatch {
            expected: f.arity(),
            found: xi.arity(),
        });
    }
    let m = xi.order();
    let mut v = vec![BigInt::zero(); m as usize];
    for (e, c) in f.terms() {
        v[xi.pair(e) as usize] += c;
    }
    Ok(CyclotomicInt::reduced(m, v))
}

/// Writes a one-variable Laurent polynomial as `x^-e * g(x)` with `g` a
/// polynomial; returns `(g, e)`.
pub fn to_univariate(g: &LaurentPoly) -> Result<(ZPoly, u64)> {
    if g.arity() != 1 {
        return Err(Error::ArityMismatch {
            expected: 1,
            found: g.arity(),
        });
    }
    let low = g.terms().map(|(e, _)| e[0]).min().unwrap_or(0).min(0);
    let high = g.terms().map(|(e, _)| e[0]).max().unwrap_or(0);
    let mut c = vec![BigInt::zero(); (high - low + 1) as usize];
    for (e, v) in g.terms() {
        c[(e[0] - low) as usize] += v;
    }
    Ok((ZPoly::new(c), (-low) as u64))
}

/// `prod_{z^n = 1} g(z)`, optionally omitting the factors with `g(z) = 0`.
pub fn product_over_roots(g: &LaurentPoly, n: u64, skip_zeros: bool) -> Result<BigInt> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    if g.is_zero() {
        return Err(Error::InvalidInput("zero polynomial".into()));
    }
    let (gt, e) = to_univariate(g)?;
    let xn = ZPoly::x_pow_minus_one(n as usize);
    let (a, root_prod) = if skip_zeros {
        let h = xn.gcd(&gt);
        let a = xn.div_exact(&h)?;
        let deg = a.degree().expect("non-zero quotient");
        let sign = if deg % 2 == 0 { 1 } else { -1 };
        let rp = a.coeff(0) * sign;
        (a, rp)
    } else {
        let rp = if n % 2 == 1 { 1 } else { -1 };
        (xn, BigInt::from(rp))
    };
    // a is monic up to sign
    let lead = a.lead();
    let a = if lead.is_negative() { -&a } else { a };
    let res = if a.degree() == Some(0) {
        BigInt::one()
    } else {
        a.resultant(&gt)
    };
    // the product of the roots is a unit, so its inverse is itself
    Ok(res * num_traits::pow(root_prod, e as usize))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> LaurentPoly {
        s.parse().unwrap()
    }

    #[test]
    fn small_cyclotomics() {
        assert_eq!(*cyclotomic_poly(1), ZPoly::from_i64s(&[-1, 1]));
        assert_eq!(*cyclotomic_poly(6), ZPoly::from_i64s(&[1, -1, 1]));
        assert_eq!(*cyclotomic_poly(12), ZPoly::from_i64s(&[1, 0, -1, 0, 1]));
        // the first cyclotomic polynomial with a coefficient of -2
        assert!(cyclotomic_poly(105).coeffs().iter().any(|x| *x == BigInt::from(-2)));
    }

    #[test]
    fn cyclotomic_product_identity() {
        for m in 1..=100u64 {
            let mut prod = ZPoly::one();
            for d in divisors(m) {
                prod = &prod * &cyclotomic_poly(d);
            }
            assert_eq!(prod, ZPoly::x_pow_minus_one(m as usize), "m={m}");
            assert_eq!(cyclotomic_poly(m).degree(), Some(euler_phi(m) as usize));
        }
    }

    #[test]
    fn ring_examples() {
        let x4 = CyclotomicInt::root(4, 1);
        assert_eq!(x4.mul(&x4).unwrap(), CyclotomicInt::from_int(4, -1));
        let a = CyclotomicInt::root(7, 3).add(&CyclotomicInt::from_int(7, 5)).unwrap();
        assert!(a.add(&a.neg()).unwrap().is_zero());
        let x5 = CyclotomicInt::root(5, 1);
        let x53 = CyclotomicInt::root(5, 3);
        let prod = x5.mul(&x53).unwrap();
        assert_eq!(prod, CyclotomicInt::root(5, 4));
        assert_eq!(prod.as_integer(), None);
        assert_eq!(
            x4.add(&x5),
            Err(Error::ConductorMismatch(4, 5))
        );
    }

    #[test]
    fn eval_examples() {
        let xi = TorsionPoint::new(2, vec![1, 0]).unwrap();
        let v = eval_at(&p("X1 - X2 - 4"), &xi).unwrap();
        assert_eq!(v.as_integer(), Some(BigInt::from(-6)));
        let v = eval_at(&p("2*X1 - 1"), &TorsionPoint::identity(1)).unwrap();
        assert_eq!(v.as_integer(), Some(BigInt::from(1)));
        let i = TorsionPoint::new(4, vec![1]).unwrap();
        assert_eq!(eval_at(&p("X1^2"), &i).unwrap().as_integer(), Some(BigInt::from(-1)));
        assert!(eval_at(&p("X1 + X2"), &i).is_err());
    }

    #[test]
    fn galois_examples() {
        let a = CyclotomicInt::root(9, 2).add(&CyclotomicInt::from_int(9, 3)).unwrap();
        assert_eq!(a.galois_apply(1).unwrap(), a);
        let x4 = CyclotomicInt::root(4, 1);
        assert_eq!(x4.galois_apply(3).unwrap(), x4.neg());
        assert_eq!(
            CyclotomicInt::root(5, 1).galois_apply(2).unwrap(),
            CyclotomicInt::root(5, 2)
        );
        assert_eq!(x4.galois_apply(2), Err(Error::NotAUnit { k: 2, m: 4 }));
    }

    #[test]
    fn as_integer_examples() {
        assert_eq!(CyclotomicInt::from_int(8, 3).as_integer(), Some(BigInt::from(3)));
        let x4 = CyclotomicInt::root(4, 1);
        assert_eq!(x4.as_integer(), None);
        assert_eq!(x4.mul(&x4.neg()).unwrap().as_integer(), Some(BigInt::from(1)));
    }

    #[test]
    fn product_over_roots_examples() {
        // the sign is (-1)^(n+1) times a^n - b^n
        assert_eq!(product_over_roots(&p("2*X1 - 1"), 4, false).unwrap(), BigInt::from(-15));
        assert_eq!(product_over_roots(&p("2*X1 - 1"), 5, false).unwrap(), BigInt::from(31));
        assert_eq!(product_over_roots(&p("X1 - 1"), 3, true).unwrap(), BigInt::from(3));
        assert_eq!(product_over_roots(&p("X1 - 1"), 3, false).unwrap(), BigInt::zero());
        assert_eq!(product_over_roots(&p("X1 - 2"), 1, false).unwrap(), BigInt::from(-1));
        assert_eq!(product_over_roots(&p("X1 + X1^-1"), 4, true).unwrap(), BigInt::from(-4));
        assert!(product_over_roots(&LaurentPoly::zero(1), 3, false).is_err());
    }

    fn direct_product(g: &LaurentPoly, n: u64, skip: bool) -> BigInt {
        let mut acc = CyclotomicInt::one(n);
        for j in 0..n {
            let xi = TorsionPoint::new(n, vec![j]).unwrap();
            let v = eval_at(g, &xi).unwrap();
            if v.is_zero() && skip {
                continue;
            }
            acc = acc.mul(&CyclotomicInt::from_poly(n, &lift_poly(&v, n))).unwrap();
        }
        acc.as_integer().unwrap()
    }

    /// Rewrites an element of conductor `d | n` in terms of `w_n = w_d^(1/(n/d))`.
    fn lift_poly(v: &CyclotomicInt, n: u64) -> ZPoly {
        let s = (n / v.conductor()) as usize;
        let mut c = vec![BigInt::zero(); v.coeffs().len() * s + 1];
        for (j, a) in v.coeffs().iter().enumerate() {
            c[j * s] = a.clone();
        }
        ZPoly::new(c)
    }

    fn arb_poly(arity: usize) -> impl Strategy<Value = LaurentPoly> {
        prop::collection::vec(
            (prop::collection::vec(-3i64..=3, arity), -9i64..=9),
            1..=5,
        )
        .prop_map(move |terms| {
            LaurentPoly::from_terms(arity, terms.into_iter().map(|(e, c)| (e, BigInt::from(c))))
                .unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn galois_commutes_with_evaluation(
            f in arb_poly(2),
            m in 1u64..=24,
            a in prop::collection::vec(0u64..24, 2),
        ) {
            let xi = TorsionPoint::new(m, a).unwrap();
            let base = eval_at(&f, &xi).unwrap();
            let k_mod = xi.order();
            for k in crate::lattice::units_mod(k_mod) {
                let k = k.max(1);
                prop_assert_eq!(base.galois_apply(k).unwrap(), eval_at(&f, &xi.pow(k as i64)).unwrap());
            }
        }

        #[test]
        fn norms_descend_and_agree(f in arb_poly(1), m in 1u64..=24, j in 0u64..24) {
            let xi = TorsionPoint::new(m, vec![j]).unwrap();
            let v = eval_at(&f, &xi).unwrap();
            let direct = v.norm_direct().unwrap();
            prop_assert_eq!(direct, v.norm());
        }

        #[test]
        fn resultant_path_matches_direct(g in arb_poly(1), n in 1u64..=30, skip in any::<bool>()) {
            prop_assume!(!g.is_zero());
            prop_assert_eq!(product_over_roots(&g, n, skip).unwrap(), direct_product(&g, n, skip));
        }
    }
}
