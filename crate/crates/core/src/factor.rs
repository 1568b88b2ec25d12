//! Integers kept as `sign * prod p^e * remainder`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactoredProduct {
    sign: i8,
    factors: BTreeMap<BigUint, u32>,
    /// Cofactor left composite and unfactored; 1 when factoring completed.
    remainder: BigUint,
    /// Primes certified only by Miller-Rabin.
    probable: BTreeSet<BigUint>,
}

fn primes_up_to(bound: u64) -> Vec<u64> {
    let n = bound as usize;
    let mut sieve = vec![true; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if sieve[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
    }
    out
}

/// Trial division never goes past this bound.
pub const TRIAL_CEILING: u64 = 1_000_000;

fn small_primes(bound: u64) -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    let all = PRIMES.get_or_init(|| primes_up_to(TRIAL_CEILING));
    let end = all.partition_point(|&p| p <= bound.min(TRIAL_CEILING));
    &all[..end]
}

/// Miller-Rabin with the first twenty primes as bases; deterministic below
/// `3.3 * 10^24`.
pub fn is_probable_prime(n: &BigUint) -> bool {
    let two = BigUint::from(2u32);
    if *n < two {
        return false;
    }
    const BASES: [u32; 20] = [
        2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71,
    ];
    for &b in &BASES {
        let b = BigUint::from(b);
        if *n == b {
            return true;
        }
        if (n % &b).is_zero() {
            return false;
        }
    }
    let n1 = n - 1u32;
    let s = n1.trailing_zeros().expect("n > 1");
    let d = &n1 >> s;
    'outer: for &b in &BASES {
        let mut x = BigUint::from(b).modpow(&d, n);
        if x.is_one() || x == n1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

impl FactoredProduct {
    /// Trial division by primes up to `trial_bound`, then a primality test
    /// on the cofactor.
    pub fn factor(n: &BigInt, trial_bound: u64) -> Self {
        let sign = match n.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        };
        let mut out = FactoredProduct {
            sign,
            factors: BTreeMap::new(),
            remainder: BigUint::one(),
            probable: BTreeSet::new(),
        };
        if sign == 0 {
            return out;
        }
        let mut rest = n.magnitude().clone();
        for &p in small_primes(trial_bound) {
            let pb = BigUint::from(p);
            if &pb * &pb > rest {
                break;
            }
            let mut e = 0;
            loop {
                let (q, r) = rest.div_rem(&pb);
                if !r.is_zero() {
                    break;
                }
                rest = q;
                e += 1;
            }
            if e > 0 {
                out.factors.insert(pb, e);
            }
        }
        if rest.is_one() {
            return out;
        }
        let b = BigUint::from(trial_bound.min(TRIAL_CEILING));
        if rest <= &b * &b {
            out.factors.entry(rest).and_modify(|e| *e += 1).or_insert(1);
        } else if is_probable_prime(&rest) {
            out.probable.insert(rest.clone());
            out.factors.insert(rest, 1);
        } else {
            out.remainder = rest;
        }
        out
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn factors(&self) -> &BTreeMap<BigUint, u32> {
        &self.factors
    }

    pub fn remainder(&self) -> &BigUint {
        &self.remainder
    }

    pub fn is_complete(&self) -> bool {
        self.remainder.is_one()
    }

    pub fn probable_primes(&self) -> &BTreeSet<BigUint> {
        &self.probable
    }

    /// Exponent of `p` in the factored part.
    pub fn exponent_of(&self, p: u64) -> u32 {
        self.factors.get(&BigUint::from(p)).copied().unwrap_or(0)
    }

    pub fn value(&self) -> BigInt {
        if self.sign == 0 {
            return BigInt::zero();
        }
        let mag = self
            .factors
            .iter()
            .fold(self.remainder.clone(), |acc, (p, &e)| acc * num_traits::pow(p.clone(), e as usize));
        let s = if self.sign < 0 { Sign::Minus } else { Sign::Plus };
        BigInt::from_biguint(s, mag)
    }

    pub fn to_json(&self) -> Value {
        let num = |x: &BigUint| match x.to_u64() {
            Some(v) => json!(v),
            None => json!(x.to_string()),
        };
        json!({
            "sign": self.sign,
            "factors": self.factors.iter().map(|(p, e)| json!([num(p), e])).collect::<Vec<_>>(),
            "remainder": num(&self.remainder),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = || Error::InvalidInput("malformed factored product".into());
        let num = |x: &Value| -> Result<BigUint> {
            match x {
                Value::Number(n) => n.as_u64().map(BigUint::from).ok_or_else(bad),
                Value::String(s) => s.parse().map_err(|_| bad()),
                _ => Err(bad()),
            }
        };
        let sign = v["sign"].as_i64().filter(|s| (-1..=1).contains(s)).ok_or_else(bad)? as i8;
        let mut factors = BTreeMap::new();
        for pair in v["factors"].as_array().ok_or_else(bad)? {
            let p = num(&pair[0])?;
            let e = pair[1].as_u64().ok_or_else(bad)? as u32;
            factors.insert(p, e);
        }
        Ok(FactoredProduct {
            sign,
            factors,
            remainder: num(&v["remainder"])?,
            probable: BTreeSet::new(),
        })
    }
}

impl fmt::Display for FactoredProduct {
    /// `2^6 * 3`, `-1 * 3 * 5`, `0`, `1`; an unfactored cofactor is shown
    /// as `C[<digits>]`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sign == 0 {
            return f.write_str("0");
        }
        let mut parts: Vec<String> = Vec::new();
        if self.sign < 0 {
            parts.push("-1".into());
        }
        for (p, &e) in &self.factors {
            parts.push(if e == 1 { p.to_string() } else { format!("{p}^{e}") });
        }
        if !self.remainder.is_one() {
            parts.push(format!("C[{}]", self.remainder));
        }
        if parts.is_empty() {
            parts.push("1".into());
        }
        f.write_str(&parts.join(" * "))
    }
}
