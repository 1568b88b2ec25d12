//! `W_f(Lambda) mod p` computed in `F_{p^k}`, `k` the order of `p` modulo
//! the exponent of `Lambda`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::config::Limits;
use crate::cyclo::eval_at;
use crate::dd;
use crate::error::{Error, Result};
use crate::factor::is_probable_prime;
use crate::laurent::LaurentPoly;
use crate::lattice::{prime_factors, FiniteSubgroup};

/// Multiplicative order of `p` modulo `n`; `gcd(p, n) = 1`.
pub fn mult_order(p: u64, n: u64) -> u64 {
    if n == 1 {
        return 1;
    }
    let (p, n128) = (p as u128 % n as u128, n as u128);
    let mut x = p;
    let mut k = 1;
    while x != 1 {
        x = x * p % n128;
        k += 1;
    }
    k
}

/// Polynomials over `F_p`, little-endian, no trailing zeros.
type Fp = Vec<u64>;

fn trim(mut a: Fp) -> Fp {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn inv(a: u64, p: u64) -> u64 {
    BigUint::from(a).modpow(&BigUint::from(p - 2), &BigUint::from(p)).to_u64().expect("below p")
}

fn poly_mul(a: &[u64], b: &[u64], p: u64) -> Fp {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u128; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x as u128 * y as u128) % p as u128;
        }
    }
    trim(out.into_iter().map(|v| v as u64).collect())
}

fn poly_rem(a: &[u64], m: &[u64], p: u64) -> Fp {
    let mut r = trim(a.to_vec());
    let dm = m.len() - 1;
    let lead_inv = inv(m[dm], p);
    while r.len() > dm {
        let c = (*r.last().expect("non-empty") as u128 * lead_inv as u128 % p as u128) as u64;
        let shift = r.len() - 1 - dm;
        for (i, &mi) in m.iter().enumerate() {
            let sub = (c as u128 * mi as u128 % p as u128) as u64;
            r[shift + i] = (r[shift + i] + p - sub) % p;
        }
        r = trim(r);
    }
    r
}

fn poly_gcd(a: &[u64], b: &[u64], p: u64) -> Fp {
    let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
    while !b.is_empty() {
        let r = poly_rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

fn poly_powmod(base: &[u64], e: &BigUint, m: &[u64], p: u64) -> Fp {
    let mut acc: Fp = vec![1];
    for i in (0..e.bits()).rev() {
        acc = poly_rem(&poly_mul(&acc, &acc, p), m, p);
        if e.bit(i) {
            acc = poly_rem(&poly_mul(&acc, base, p), m, p);
        }
    }
    acc
}

fn has_root(g: &[u64], p: u64) -> bool {
    (0..p).any(|x| g.iter().rev().fold(0u128, |acc, &c| (acc * x as u128 + c as u128) % p as u128) == 0)
}

/// Rabin's test for a monic `g` of degree `k`.
fn is_irreducible(g: &[u64], p: u64) -> bool {
    let k = g.len() - 1;
    let pb = BigUint::from(p);
    // frob[j] = x^{p^j} mod g
    let mut frob = vec![poly_rem(&[0, 1], g, p)];
    for j in 0..k {
        let next = poly_powmod(&frob[j], &pb, g, p);
        frob.push(next);
    }
    let x = poly_rem(&[0, 1], g, p);
    if frob[k] != x {
        return false;
    }
    prime_factors(k as u64).into_iter().all(|q| {
        let h = &frob[k / q as usize];
        let mut diff = h.clone();
        diff.resize(diff.len().max(2), 0);
        diff[1] = (diff[1] + p - 1) % p;
        poly_gcd(g, &trim(diff), p).len() == 1
    })
}

/// `F_{p^k}` as `F_p[x]/(g)`.
#[derive(Clone, Debug)]
pub struct FieldExt {
    p: u64,
    k: usize,
    modulus: Fp,
}

impl FieldExt {
    /// The field with `p^k` elements; `g` is the first irreducible monic
    /// polynomial in base-`p` counting order.
    pub fn new(p: u64, k: usize) -> Result<Self> {
        if !is_probable_prime(&BigUint::from(p)) || p > u32::MAX as u64 {
            return Err(Error::InvalidInput(format!("{p} is not a prime below 2^32")));
        }
        if k == 0 {
            return Err(Error::InvalidInput("extension degree must be positive".into()));
        }
        if k == 1 {
            return Ok(FieldExt { p, k, modulus: vec![0, 1] });
        }
        let mut counter = BigUint::zero();
        loop {
            let mut g: Fp = Vec::with_capacity(k + 1);
            let mut c = counter.clone();
            for _ in 0..k {
                let (q, r) = c.div_rem(&BigUint::from(p));
                g.push(r.to_u64().expect("below p"));
                c = q;
            }
            g.push(1);
            if !has_root(&g, p) && is_irreducible(&g, p) {
                return Ok(FieldExt { p, k, modulus: g });
            }
            counter += 1u32;
        }
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn is_one(&self, a: &[u64]) -> bool {
        a.len() == 1 && a[0].is_one()
    }

    pub fn from_int(&self, n: &BigInt) -> Fp {
        trim(vec![n.mod_floor(&BigInt::from(self.p)).to_u64().expect("below p")])
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> Fp {
        let mut out = vec![0; a.len().max(b.len())];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (a.get(i).copied().unwrap_or(0) + b.get(i).copied().unwrap_or(0)) % self.p;
        }
        trim(out)
    }

    pub fn mul(&self, a: &[u64], b: &[u64]) -> Fp {
        poly_rem(&poly_mul(a, b, self.p), &self.modulus, self.p)
    }

    pub fn pow(&self, a: &[u64], e: &BigUint) -> Fp {
        poly_powmod(a, e, &self.modulus, self.p)
    }

    /// `p^k - 1`.
    pub fn group_order(&self) -> BigUint {
        num_traits::pow(BigUint::from(self.p), self.k) - 1u32
    }

    /// An element of exact multiplicative order `e`; `e | p^k - 1`.
    pub fn root_of_unity(&self, e: u64) -> Result<Fp> {
        let ord = self.group_order();
        if !(&ord % e).is_zero() {
            return Err(Error::InvalidInput(format!("{e} does not divide p^k - 1")));
        }
        let cof = &ord / e;
        let primes = prime_factors(e);
        // constants rarely have order e, so start at x
        let mut c = if self.k == 1 { BigUint::one() } else { BigUint::from(self.p) };
        while c <= ord {
            let mut cand: Fp = Vec::with_capacity(self.k);
            let mut rest = c.clone();
            for _ in 0..self.k {
                let (q, r) = rest.div_rem(&BigUint::from(self.p));
                cand.push(r.to_u64().expect("below p"));
                rest = q;
            }
            c += 1u32;
            let w = self.pow(&trim(cand), &cof);
            if primes.iter().all(|&q| !self.is_one(&self.pow(&w, &BigUint::from(e / q)))) {
                return Ok(w);
            }
        }
        Err(Error::Invariant("no root of unity found".into()))
    }
}

type RootTable = Arc<(FieldExt, Vec<Fp>)>;

/// The field containing `mu_e` and the powers `w^0, ..., w^{e-1}` of a
/// fixed primitive root, memoized per `(p, e)`.
fn root_table(p: u64, e: u64) -> Result<RootTable> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u64), RootTable>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.lock().expect("cache lock").get(&(p, e)) {
        return Ok(t.clone());
    }
    let field = FieldExt::new(p, mult_order(p, e) as usize)?;
    let omega = field.root_of_unity(e)?;
    let mut powers: Vec<Fp> = Vec::with_capacity(e as usize);
    let mut x: Fp = vec![1];
    for _ in 0..e {
        powers.push(x.clone());
        x = field.mul(&x, &omega);
    }
    let t = Arc::new((field, powers));
    cache.lock().expect("cache lock").insert((p, e), t.clone());
    Ok(t)
}

/// Fast path: requires `p` not dividing the order of the group.
pub fn w_mod_p_fast(f: &LaurentPoly, group: &FiniteSubgroup, p: u64, limits: &Limits) -> Result<u64> {
    let e = group.exponent();
    if e.is_multiple_of(p) {
        return Err(Error::InvalidInput(format!("{p} divides the group order")));
    }
    let table = root_table(p, e)?;
    let (field, powers) = (&table.0, &table.1);
    let coeffs: Vec<(Vec<i64>, Fp)> = f.terms().map(|(m, c)| (m.clone(), field.from_int(c))).collect();
    let mut acc: Fp = vec![1];
    for class in group.cyclic_subgroups(limits)? {
        // vanishing is constant on Galois orbits
        if eval_at(f, &class.generator)?.is_zero() {
            continue;
        }
        for g in class.subgroup.generators(limits)? {
            let scale = e / g.order();
            let value = coeffs.iter().fold(Vec::new(), |s, (m, c)| {
                let idx = (g.pair(m) * scale % e) as usize;
                field.add(&s, &field.mul(c, &powers[idx]))
            });
            acc = field.mul(&acc, &value);
        }
    }
    match acc.len() {
        0 => Ok(0),
        1 => Ok(acc[0]),
        _ => Err(Error::Invariant("product over a subgroup left F_p".into())),
    }
}

/// Exact big-integer `W` reduced modulo `p`.
pub fn w_mod_p_exact(f: &LaurentPoly, group: &FiniteSubgroup, p: u64, limits: &Limits) -> Result<u64> {
    let w = dd::w(f, group, limits)?;
    Ok(w.mod_floor(&BigInt::from(p)).to_u64().expect("below p"))
}

/// Fast path when `p` does not divide `|Lambda|`, exact otherwise.
pub fn w_mod_p(f: &LaurentPoly, group: &FiniteSubgroup, p: u64, limits: &Limits) -> Result<u64> {
    if group.exponent().is_multiple_of(p) {
        w_mod_p_exact(f, group, p, limits)
    } else {
        w_mod_p_fast(f, group, p, limits)
    }
}

/// `true` when `p` is prime; used to validate scan inputs.
pub fn is_prime(p: u64) -> bool {
    is_probable_prime(&BigUint::from(p))
}
