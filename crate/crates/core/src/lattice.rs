//! Finite subgroups of the torsion of the N-torus.
//!
//! A subgroup of exponent `m` is a submodule of `(Z/mZ)^N`: the vector `a`
//! stands for the point `(w^a_1, ..., w^a_N)` with `w = exp(2 pi i / m)`.
//! Subgroups are kept as generator rows in Howell form, which makes equality
//! of subgroups equality of representations.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::config::Limits;
use crate::error::{Error, Result};

pub(crate) fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

pub(crate) fn lcm(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}

fn xgcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i128, 0i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

fn modm(x: i128, m: u64) -> u64 {
    x.rem_euclid(m as i128) as u64
}

/// Inverse of `a` modulo `m`, if it exists.
pub(crate) fn inv_mod(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let (g, s, _) = xgcd(a as i128, m as i128);
    (g == 1).then(|| modm(s, m))
}

/// A unit `u` modulo `m` with `u * a = gcd(a, m) (mod m)`.
fn normalizing_unit(a: u64, m: u64) -> u64 {
    let g = gcd(a, m);
    let mp = m / g;
    let base = inv_mod((a / g) % mp, mp).unwrap_or(0);
    let mut u = base;
    loop {
        if gcd(u % m, m) == 1 {
            return u % m;
        }
        u += mp;
    }
}

/// Units of `Z/nZ` in increasing order.
pub fn units_mod(n: u64) -> Vec<u64> {
    if n == 1 {
        return vec![0];
    }
    (1..n).filter(|&k| gcd(k, n) == 1).collect()
}

pub fn euler_phi(n: u64) -> u64 {
    prime_factors(n)
        .iter()
        .fold(n, |acc, &p| acc / p * (p - 1))
}

/// Distinct prime factors in increasing order.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// A torsion point `(w_m^{a_1}, ..., w_m^{a_N})`.
///
/// Canonical form has `gcd(m, a_1, ..., a_N) = 1`, so `m` is the order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TorsionPoint {
    m: u64,
    a: Vec<u64>,
}

impl TorsionPoint {
    pub fn new(m: u64, a: Vec<u64>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInput("modulus must be positive".into()));
        }
        let a: Vec<u64> = a.into_iter().map(|x| x % m).collect();
        let g = a.iter().fold(m, |g, &x| gcd(g, x));
        Ok(TorsionPoint {
            m: m / g,
            a: a.into_iter().map(|x| x / g).collect(),
        })
    }

    pub fn identity(arity: usize) -> Self {
        TorsionPoint {
            m: 1,
            a: vec![0; arity],
        }
    }

    pub fn order(&self) -> u64 {
        self.m
    }

    pub fn exponents(&self) -> &[u64] {
        &self.a
    }

    pub fn arity(&self) -> usize {
        self.a.len()
    }

    pub fn is_identity(&self) -> bool {
        self.m == 1
    }

    /// `xi^k`.
    pub fn pow(&self, k: i64) -> TorsionPoint {
        let m = self.m as i128;
        let a = self
            .a
            .iter()
            .map(|&x| ((x as i128 * k as i128).rem_euclid(m)) as u64)
            .collect();
        TorsionPoint::new(self.m, a).expect("positive modulus")
    }

    /// The exponent `<e, a> mod m` of the root of unity `xi^e`.
    pub fn pair(&self, e: &[i64]) -> u64 {
        let m = self.m as i128;
        let s: i128 = e
            .iter()
            .zip(&self.a)
            .map(|(&ei, &ai)| ei as i128 * ai as i128)
            .sum();
        s.rem_euclid(m) as u64
    }

    /// The vector of this point read in `(Z/eZ)^N`; `None` if the order
    /// does not divide `e`.
    pub fn lift(&self, e: u64) -> Option<Vec<u64>> {
        e.is_multiple_of(self.m).then(|| self.a.iter().map(|&x| x * (e / self.m)).collect())
    }

    pub fn cyclic_subgroup(&self) -> FiniteSubgroup {
        FiniteSubgroup::canonicalize(self.arity(), self.m, std::slice::from_ref(&self.a))
            .expect("valid torsion point")
    }
}

impl fmt::Display for TorsionPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.a.iter().map(u64::to_string).collect();
        write!(f, "{}:({})", self.m, parts.join(","))
    }
}

/// Row-style Howell form of the span of `rows` in `(Z/mZ)^ncols`.
pub fn howell_form(rows: &[Vec<u64>], ncols: usize, m: u64) -> Vec<Vec<u64>> {
    if m == 1 {
        return Vec::new();
    }
    let mut rows: Vec<Vec<u64>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| x % m).collect::<Vec<_>>())
        .filter(|r: &Vec<u64>| r.iter().any(|&x| x != 0))
        .collect();
    let mut r = 0usize;
    for j in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| rows[i][j] != 0) else {
            continue;
        };
        rows.swap(r, p);
        for i in r + 1..rows.len() {
            if rows[i][j] == 0 {
                continue;
            }
            let a = rows[r][j] as i128;
            let b = rows[i][j] as i128;
            let (g, s, t) = xgcd(a, b);
            let (u, v) = (a / g, b / g);
            for k in 0..ncols {
                let x = rows[r][k] as i128;
                let y = rows[i][k] as i128;
                rows[r][k] = modm(s * x + t * y, m);
                rows[i][k] = modm(u * y - v * x, m);
            }
        }
        let unit = normalizing_unit(rows[r][j], m);
        for x in rows[r].iter_mut() {
            *x = modm(*x as i128 * unit as i128, m);
        }
        let pivot = rows[r][j];
        for i in 0..r {
            let q = rows[i][j] / pivot;
            if q != 0 {
                for k in 0..ncols {
                    rows[i][k] = modm(rows[i][k] as i128 - q as i128 * rows[r][k] as i128, m);
                }
            }
        }
        let ann = m / pivot;
        let extra: Vec<u64> = rows[r]
            .iter()
            .map(|&x| modm(x as i128 * ann as i128, m))
            .collect();
        if extra.iter().any(|&x| x != 0) {
            rows.push(extra);
        }
        r += 1;
    }
    rows.truncate(r);
    rows
}

/// Diagonal of the Smith normal form (non-negative, each dividing the next).
pub fn smith_diagonal(mut a: Vec<Vec<BigInt>>) -> Vec<BigInt> {
    let nr = a.len();
    let nc = a.first().map_or(0, |r| r.len());
    let mut diag = Vec::new();
    for t in 0..nr.min(nc) {
        loop {
            // smallest non-zero entry of the trailing block becomes the pivot
            let mut best: Option<(usize, usize)> = None;
            for i in t..nr {
                for j in t..nc {
                    if !a[i][j].is_zero()
                        && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs())
                    {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else {
                diag.resize(nr.min(nc), BigInt::zero());
                return diag;
            };
            a.swap(t, bi);
            for row in a.iter_mut() {
                row.swap(t, bj);
            }
            let mut clean = true;
            for i in t + 1..nr {
                let q = a[i][t].div_floor(&a[t][t]);
                if !q.is_zero() {
                    for j in t..nc {
                        let v = &a[t][j] * &q;
                        a[i][j] -= v;
                    }
                }
                if !a[i][t].is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..nc {
                let q = a[t][j].div_floor(&a[t][t]);
                if !q.is_zero() {
                    for i in t..nr {
                        let v = &a[i][t] * &q;
                        a[i][j] -= v;
                    }
                }
                if !a[t][j].is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // the pivot must divide the rest of the block
            let bad = (t + 1..nr)
                .flat_map(|i| (t + 1..nc).map(move |j| (i, j)))
                .find(|&(i, j)| !a[i][j].is_multiple_of(&a[t][t]));
            match bad {
                Some((i, _)) => {
                    for j in t..nc {
                        let v = a[i][j].clone();
                        a[t][j] += v;
                    }
                }
                None => break,
            }
        }
        diag.push(a[t][t].abs());
    }
    diag
}

/// A finite subgroup of `mu_inf^N` in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FiniteSubgroup {
    arity: usize,
    order: u64,
    exponent: u64,
    rows: Vec<Vec<u64>>,
}

impl FiniteSubgroup {
    /// The subgroup generated by the given vectors of `(Z/mZ)^N`.
    pub fn canonicalize(arity: usize, m: u64, gens: &[Vec<u64>]) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInput("modulus must be positive".into()));
        }
        if let Some(g) = gens.iter().find(|g| g.len() != arity) {
            return Err(Error::ArityMismatch {
                expected: arity,
                found: g.len(),
            });
        }
        let e = gens.iter().fold(1u64, |acc, g| {
            let c = g.iter().fold(m, |c, &x| gcd(c, x % m));
            lcm(acc, m / c)
        });
        let shrink = m / e;
        let reduced: Vec<Vec<u64>> = gens
            .iter()
            .map(|g| g.iter().map(|&x| (x % m) / shrink).collect())
            .collect();
        let rows = howell_form(&reduced, arity, e);
        let order = smith_order(arity, e, &rows);
        debug_assert_eq!(order, howell_order(e, &rows));
        Ok(FiniteSubgroup {
            arity,
            order,
            exponent: e,
            rows,
        })
    }

    pub fn trivial(arity: usize) -> Self {
        FiniteSubgroup {
            arity,
            order: 1,
            exponent: 1,
            rows: Vec::new(),
        }
    }

    /// The full group `mu_n^N`.
    pub fn mu_n(arity: usize, n: u64) -> Result<Self> {
        let gens: Vec<Vec<u64>> = (0..arity)
            .map(|i| (0..arity).map(|j| u64::from(i == j)).collect())
            .collect();
        FiniteSubgroup::canonicalize(arity, n, &gens)
    }

    pub fn from_points(arity: usize, points: &[TorsionPoint]) -> Result<Self> {
        let e = points.iter().fold(1, |acc, p| lcm(acc, p.order()));
        let gens: Vec<Vec<u64>> = points
            .iter()
            .map(|p| {
                if p.arity() != arity {
                    Err(Error::ArityMismatch {
                        expected: arity,
                        found: p.arity(),
                    })
                } else {
                    Ok(p.lift(e).expect("order divides lcm"))
                }
            })
            .collect::<Result<_>>()?;
        FiniteSubgroup::canonicalize(arity, e, &gens)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.rows
    }

    pub fn is_trivial(&self) -> bool {
        self.order == 1
    }

    pub fn is_cyclic(&self) -> bool {
        self.exponent == self.order
    }

    fn check_cap(&self, limits: &Limits) -> Result<()> {
        if self.order > limits.max_elements {
            return Err(Error::cap(
                "element enumeration",
                self.order as u128,
                limits.max_elements as u128,
            ));
        }
        Ok(())
    }

    /// Element vectors in `(Z/eZ)^N`, `e` the exponent.
    pub fn element_vectors(&self, limits: &Limits) -> Result<Vec<Vec<u64>>> {
        self.check_cap(limits)?;
        let e = self.exponent;
        let radices: Vec<u64> = self
            .rows
            .iter()
            .map(|r| {
                let pivot = r.iter().copied().find(|&x| x != 0).unwrap_or(e);
                e / pivot
            })
            .collect();
        let mut out = Vec::with_capacity(self.order as usize);
        let mut counter = vec![0u64; self.rows.len()];
        loop {
            let mut v = vec![0u64; self.arity];
            for (c, row) in counter.iter().zip(&self.rows) {
                for (x, r) in v.iter_mut().zip(row) {
                    *x = (*x + c * r) % e;
                }
            }
            out.push(v);
            let mut i = self.rows.len();
            loop {
                if i == 0 {
                    return Ok(out);
                }
                i -= 1;
                counter[i] += 1;
                if counter[i] < radices[i] {
                    break;
                }
                counter[i] = 0;
            }
        }
    }

    pub fn elements(&self, limits: &Limits) -> Result<Vec<TorsionPoint>> {
        Ok(self
            .element_vectors(limits)?
            .into_iter()
            .map(|v| TorsionPoint::new(self.exponent, v).expect("positive modulus"))
            .collect())
    }

    fn contains_vector(&self, v: &[u64]) -> bool {
        let e = self.exponent;
        let mut v: Vec<u64> = v.iter().map(|&x| x % e).collect();
        for row in &self.rows {
            let Some(j) = row.iter().position(|&x| x != 0) else {
                continue;
            };
            if v[..j].iter().any(|&x| x != 0) {
                return false;
            }
            let p = row[j];
            if !v[j].is_multiple_of(p) {
                return false;
            }
            let q = v[j] / p;
            for (x, r) in v.iter_mut().zip(row) {
                *x = modm(*x as i128 - q as i128 * *r as i128, e);
            }
        }
        v.iter().all(|&x| x == 0)
    }

    pub fn contains_point(&self, p: &TorsionPoint) -> bool {
        p.arity() == self.arity && p.lift(self.exponent).is_some_and(|v| self.contains_vector(&v))
    }

    /// `other` is a subgroup of `self`.
    pub fn contains(&self, other: &FiniteSubgroup) -> Result<bool> {
        self.check_arity(other)?;
        if other.exponent == 0 || !self.exponent.is_multiple_of(other.exponent) {
            return Ok(false);
        }
        let scale = self.exponent / other.exponent;
        Ok(other
            .rows
            .iter()
            .all(|r| self.contains_vector(&r.iter().map(|&x| x * scale).collect::<Vec<_>>())))
    }

    fn check_arity(&self, other: &FiniteSubgroup) -> Result<()> {
        if self.arity != other.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: other.arity,
            });
        }
        Ok(())
    }

    fn rows_at(&self, l: u64) -> Vec<Vec<u64>> {
        let s = l / self.exponent;
        self.rows
            .iter()
            .map(|r| r.iter().map(|&x| x * s).collect())
            .collect()
    }

    /// The subgroup generated by both.
    pub fn join(&self, other: &FiniteSubgroup) -> Result<FiniteSubgroup> {
        self.check_arity(other)?;
        let l = lcm(self.exponent, other.exponent);
        let mut gens = self.rows_at(l);
        gens.extend(other.rows_at(l));
        FiniteSubgroup::canonicalize(self.arity, l, &gens)
    }

    pub fn intersection(&self, other: &FiniteSubgroup) -> Result<FiniteSubgroup> {
        self.check_arity(other)?;
        let n = self.arity;
        let l = lcm(self.exponent, other.exponent);
        let mut block = Vec::new();
        for r in self.rows_at(l) {
            let mut row = r.clone();
            row.extend(r);
            block.push(row);
        }
        for r in other.rows_at(l) {
            let mut row = r;
            row.extend(std::iter::repeat_n(0, n));
            block.push(row);
        }
        let gens = zero_prefix_tail(&howell_form(&block, 2 * n, l), n);
        FiniteSubgroup::canonicalize(n, l, &gens)
    }

    /// Some generator of a cyclic group.
    pub fn generator(&self, limits: &Limits) -> Result<TorsionPoint> {
        if !self.is_cyclic() {
            return Err(Error::NotCyclic);
        }
        if self.is_trivial() {
            return Ok(TorsionPoint::identity(self.arity));
        }
        // a cyclic Howell form has a single row when the pivot is a unit,
        // otherwise fall back to a search over elements
        if self.rows.len() == 1 {
            return TorsionPoint::new(self.exponent, self.rows[0].clone());
        }
        self.elements(limits)?
            .into_iter()
            .find(|p| p.order() == self.exponent)
            .ok_or_else(|| Error::Invariant("cyclic group without generator".into()))
    }

    /// All generators `xi^k`, `k` a unit, sorted.
    pub fn generators(&self, limits: &Limits) -> Result<Vec<TorsionPoint>> {
        let g = self.generator(limits)?;
        let mut out: Vec<TorsionPoint> = units_mod(self.exponent)
            .into_iter()
            .map(|k| g.pow(k as i64))
            .collect();
        out.sort();
        out.dedup();
        Ok(out)
    }

    /// The cyclic subgroups of `self`, each with a canonical generator (the
    /// smallest generator in point order), sorted by subgroup.
    pub fn cyclic_subgroups(&self, limits: &Limits) -> Result<Vec<CyclicClass>> {
        let e = self.exponent;
        let mut seen: HashSet<Vec<u64>> = HashSet::new();
        let mut out = Vec::new();
        for v in self.element_vectors(limits)? {
            if seen.contains(&v) {
                continue;
            }
            let c = v.iter().fold(e, |c, &x| gcd(c, x));
            let d = e / c;
            let mut rep: Option<TorsionPoint> = None;
            for k in units_mod(d) {
                let w: Vec<u64> = v.iter().map(|&x| ((x as u128 * k as u128) % e as u128) as u64).collect();
                let p = TorsionPoint::new(e, w.clone())?;
                if rep.as_ref().is_none_or(|r| p < *r) {
                    rep = Some(p);
                }
                seen.insert(w);
            }
            let rep = rep.expect("non-empty unit group");
            out.push(CyclicClass {
                subgroup: rep.cyclic_subgroup(),
                generator: rep,
            });
        }
        out.sort_by(|a, b| a.subgroup.cmp(&b.subgroup));
        Ok(out)
    }

    /// Every subgroup of `self`, sorted.
    pub fn subgroups(&self, limits: &Limits) -> Result<Vec<FiniteSubgroup>> {
        let cyclic: Vec<FiniteSubgroup> = self
            .cyclic_subgroups(limits)?
            .into_iter()
            .map(|c| c.subgroup)
            .collect();
        let mut found: BTreeSet<FiniteSubgroup> = BTreeSet::new();
        found.insert(FiniteSubgroup::trivial(self.arity));
        let mut frontier = vec![FiniteSubgroup::trivial(self.arity)];
        while let Some(h) = frontier.pop() {
            for c in &cyclic {
                if h.contains(c)? {
                    continue;
                }
                let j = h.join(c)?;
                if found.insert(j.clone()) {
                    if found.len() > limits.max_subgroups {
                        return Err(Error::cap(
                            "subgroup listing",
                            found.len() as u128,
                            limits.max_subgroups as u128,
                        ));
                    }
                    frontier.push(j);
                }
            }
        }
        Ok(found.into_iter().collect())
    }

    /// `<xi^q>` for each prime `q` dividing the order of a cyclic group.
    pub fn maximal_subgroups_cyclic(&self, limits: &Limits) -> Result<Vec<FiniteSubgroup>> {
        let g = self.generator(limits)?;
        Ok(prime_factors(self.order)
            .into_iter()
            .map(|q| g.pow(q as i64).cyclic_subgroup())
            .collect())
    }

    /// Canonical serialization, parseable back with `FromStr`.
    pub fn key(&self) -> String {
        self.to_string()
    }
}

/// A cyclic subgroup with its canonical generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclicClass {
    pub subgroup: FiniteSubgroup,
    pub generator: TorsionPoint,
}

fn zero_prefix_tail(rows: &[Vec<u64>], n: usize) -> Vec<Vec<u64>> {
    rows.iter()
        .filter(|r| r[..n].iter().all(|&x| x == 0))
        .map(|r| r[n..].to_vec())
        .collect()
}

fn howell_order(e: u64, rows: &[Vec<u64>]) -> u64 {
    rows.iter()
        .map(|r| e / r.iter().copied().find(|&x| x != 0).unwrap_or(e))
        .product()
}

/// `m^N / prod d_i` with `d_i` the elementary divisors of `[G | mI]`.
fn smith_order(arity: usize, m: u64, rows: &[Vec<u64>]) -> u64 {
    let ncols = rows.len() + arity;
    let mat: Vec<Vec<BigInt>> = (0..arity)
        .map(|i| {
            let mut r: Vec<BigInt> = rows.iter().map(|g| BigInt::from(g[i])).collect();
            r.resize(ncols, BigInt::zero());
            r[rows.len() + i] = BigInt::from(m);
            r
        })
        .collect();
    let det: BigInt = smith_diagonal(mat).into_iter().product();
    let full = num_traits::pow(BigInt::from(m), arity);
    (full / det).to_u64().expect("group order fits in u64")
}

impl fmt::Display for FiniteSubgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "N={};m={};gens=", self.arity, self.exponent)?;
        for r in &self.rows {
            let parts: Vec<String> = r.iter().map(u64::to_string).collect();
            write!(f, "({})", parts.join(","))?;
        }
        Ok(())
    }
}

impl FromStr for FiniteSubgroup {
    type Err = Error;

    /// Parses `N=<n>;m=<mod>;gens=(a1,...,aN)(b1,...,bN)...`.
    fn from_str(s: &str) -> Result<Self> {
        let perr = |msg: &str| Error::Parse {
            pos: 0,
            msg: format!("group literal: {msg}"),
        };
        let mut arity = None;
        let mut modulus = None;
        let mut gens_text = None;
        for part in s.split(';') {
            let (k, v) = part.split_once('=').ok_or_else(|| perr("expected key=value"))?;
            match k.trim() {
                "N" => arity = Some(v.trim().parse::<usize>().map_err(|_| perr("bad N"))?),
                "m" => modulus = Some(v.trim().parse::<u64>().map_err(|_| perr("bad m"))?),
                "gens" => gens_text = Some(v.trim().to_string()),
                other => return Err(perr(&format!("unknown key {other}"))),
            }
        }
        let arity = arity.ok_or_else(|| perr("missing N"))?;
        let m = modulus.ok_or_else(|| perr("missing m"))?;
        if arity == 0 {
            return Err(perr("N must be positive"));
        }
        let mut gens = Vec::new();
        let mut rest = gens_text.unwrap_or_default();
        rest.retain(|c| !c.is_whitespace());
        let mut rest = rest.as_str();
        while !rest.is_empty() {
            let body = rest
                .strip_prefix('(')
                .and_then(|r| r.split_once(')'))
                .ok_or_else(|| perr("expected (a1,...,aN)"))?;
            let v: Vec<u64> = body
                .0
                .split(',')
                .map(|x| x.parse::<i64>().map(|y| y.rem_euclid(m.max(1) as i64) as u64))
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| perr("bad generator entry"))?;
            gens.push(v);
            rest = body.1;
        }
        FiniteSubgroup::canonicalize(arity, m, &gens)
    }
}

/// `nu_N(n)`, the number of subgroups of order `n`, by the convolution
/// `nu_1 = 1`, `nu_N = (d -> d^(N-1)) * nu_(N-1)`.
pub fn nu(arity: usize, n: u64) -> u64 {
    assert!(arity >= 1 && n >= 1);
    if arity == 1 {
        return 1;
    }
    divisors(n)
        .into_iter()
        .map(|d| d.pow(arity as u32 - 1) * nu(arity - 1, n / d))
        .sum()
}

/// All subgroups of order exactly `n`, via row Hermite normal forms of
/// index-`n` sublattices of `Z^N` and their annihilators.
pub fn subgroups_of_order(arity: usize, n: u64, limits: &Limits) -> Result<Vec<FiniteSubgroup>> {
    if n == 0 || arity == 0 {
        return Err(Error::InvalidInput("order and arity must be positive".into()));
    }
    let expected = nu(arity, n);
    if expected as usize > limits.max_subgroups {
        return Err(Error::cap(
            "subgroup listing",
            expected as u128,
            limits.max_subgroups as u128,
        ));
    }
    let mut out = BTreeSet::new();
    for diag in ordered_factorizations(n, arity) {
        let mut h = vec![vec![0u64; arity]; arity];
        for (i, &d) in diag.iter().enumerate() {
            h[i][i] = d;
        }
        // entries above the diagonal range over [0, d_j)
        let slots: Vec<(usize, usize)> = (0..arity)
            .flat_map(|j| (0..j).map(move |i| (i, j)))
            .collect();
        let mut counter = vec![0u64; slots.len()];
        loop {
            for (&(i, j), &c) in slots.iter().zip(&counter) {
                h[i][j] = c;
            }
            out.insert(annihilator(&h, n)?);
            let mut k = slots.len();
            let done = loop {
                if k == 0 {
                    break true;
                }
                k -= 1;
                counter[k] += 1;
                if counter[k] < diag[slots[k].1] {
                    break false;
                }
                counter[k] = 0;
            };
            if done {
                break;
            }
        }
    }
    let out: Vec<FiniteSubgroup> = out.into_iter().collect();
    if let Some(bad) = out.iter().find(|g| g.order() != n) {
        return Err(Error::Invariant(format!("annihilator {bad} has wrong order")));
    }
    Ok(out)
}

fn ordered_factorizations(n: u64, k: usize) -> Vec<Vec<u64>> {
    if k == 1 {
        return vec![vec![n]];
    }
    let mut out = Vec::new();
    for d in divisors(n) {
        for mut rest in ordered_factorizations(n / d, k - 1) {
            rest.insert(0, d);
            out.push(rest);
        }
    }
    out
}

/// `{a in (Z/nZ)^N : B a = 0 mod n}` for the lattice with basis rows `B`.
fn annihilator(basis: &[Vec<u64>], n: u64) -> Result<FiniteSubgroup> {
    let arity = basis.len();
    let block: Vec<Vec<u64>> = (0..arity)
        .map(|k| {
            let mut row: Vec<u64> = basis.iter().map(|b| b[k] % n).collect();
            row.extend((0..arity).map(|j| u64::from(j == k)));
            row
        })
        .collect();
    let gens = zero_prefix_tail(&howell_form(&block, 2 * arity, n), arity);
    FiniteSubgroup::canonicalize(arity, n, &gens)
}

/// Values of the subgroup-poset Moebius function `mu(H, top)` for every
/// subgroup `H` of `top`.
#[derive(Clone, Debug)]
pub struct MobiusTable {
    pub top: FiniteSubgroup,
    pub entries: Vec<(FiniteSubgroup, i64)>,
}

impl MobiusTable {
    pub fn new(top: &FiniteSubgroup, limits: &Limits) -> Result<Self> {
        let subs = top.subgroups(limits)?;
        let entries = mobius_over(&subs, top)?;
        Ok(MobiusTable {
            top: top.clone(),
            entries,
        })
    }

    pub fn get(&self, h: &FiniteSubgroup) -> Option<i64> {
        self.entries.iter().find(|(g, _)| g == h).map(|(_, v)| *v)
    }
}

fn mobius_over(subs: &[FiniteSubgroup], top: &FiniteSubgroup) -> Result<Vec<(FiniteSubgroup, i64)>> {
    // `subs` is sorted by order, so every proper supergroup comes later
    let mut values = vec![0i64; subs.len()];
    for i in (0..subs.len()).rev() {
        if subs[i] == *top {
            values[i] = 1;
            continue;
        }
        let mut acc = 0i64;
        for j in i + 1..subs.len() {
            if subs[j].contains(&subs[i])? {
                acc += values[j];
            }
        }
        values[i] = -acc;
    }
    Ok(subs.iter().cloned().zip(values).collect())
}

/// `mu(lower, upper)` on the subgroup lattice.
pub fn mobius(lower: &FiniteSubgroup, upper: &FiniteSubgroup, limits: &Limits) -> Result<i64> {
    if !upper.contains(lower)? {
        return Err(Error::NotContained);
    }
    let interval: Vec<FiniteSubgroup> = upper
        .subgroups(limits)?
        .into_iter()
        .filter(|h| h.contains(lower).unwrap_or(false))
        .collect();
    let table = mobius_over(&interval, upper)?;
    Ok(table
        .into_iter()
        .find(|(h, _)| h == lower)
        .map(|(_, v)| v)
        .expect("lower bound is in its own interval"))
}

/// Subgroup counts keyed by order, for reporting.
pub fn order_histogram(groups: &[FiniteSubgroup]) -> HashMap<u64, usize> {
    let mut h = HashMap::new();
    for g in groups {
        *h.entry(g.order()).or_default() += 1;
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lim() -> Limits {
        Limits::default()
    }

    fn grp(n: usize, m: u64, gens: &[&[u64]]) -> FiniteSubgroup {
        let gens: Vec<Vec<u64>> = gens.iter().map(|g| g.to_vec()).collect();
        FiniteSubgroup::canonicalize(n, m, &gens).unwrap()
    }

    /// Closure of the generators under addition, by brute force.
    fn brute_elements(n: usize, m: u64, gens: &[Vec<u64>]) -> BTreeSet<TorsionPoint> {
        let mut set: BTreeSet<Vec<u64>> = BTreeSet::new();
        set.insert(vec![0; n]);
        loop {
            let mut grew = false;
            let cur: Vec<Vec<u64>> = set.iter().cloned().collect();
            for v in &cur {
                for g in gens {
                    let w: Vec<u64> = v.iter().zip(g).map(|(a, b)| (a + b) % m).collect();
                    grew |= set.insert(w);
                }
            }
            if !grew {
                break;
            }
        }
        set.into_iter()
            .map(|v| TorsionPoint::new(m, v).unwrap())
            .collect()
    }

    #[test]
    fn canonicalize_examples() {
        let g = grp(2, 4, &[&[2, 0], &[0, 2]]);
        assert_eq!(g.exponent(), 2);
        assert_eq!(g.order(), 4);
        assert_eq!(g, FiniteSubgroup::mu_n(2, 2).unwrap());
        let brute = brute_elements(2, 4, &[vec![2, 0], vec![0, 2]]);
        assert_eq!(brute.len(), 4);

        let h = grp(1, 6, &[&[2]]);
        assert_eq!((h.exponent(), h.order()), (3, 3));
        assert_eq!(h, FiniteSubgroup::mu_n(1, 3).unwrap());

        let t = FiniteSubgroup::canonicalize(3, 1, &[]).unwrap();
        assert_eq!(t.order(), 1);
        assert!(t.is_trivial());
    }

    #[test]
    fn canonicalize_rejects_bad_input() {
        assert!(matches!(
            FiniteSubgroup::canonicalize(2, 0, &[]),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            FiniteSubgroup::canonicalize(2, 3, &[vec![1]]),
            Err(Error::ArityMismatch { .. })
        ));
    }

    #[test]
    fn order_examples() {
        assert_eq!(grp(2, 4, &[&[1, 2]]).order(), 4);
        assert_eq!(FiniteSubgroup::mu_n(2, 6).unwrap().order(), 36);
        let brute = brute_elements(2, 4, &[vec![1, 2]]);
        assert_eq!(brute.len(), 4);
    }

    #[test]
    fn elements_match_brute_force() {
        let cases: Vec<(usize, u64, Vec<Vec<u64>>)> = vec![
            (2, 12, vec![vec![3, 4], vec![6, 0]]),
            (2, 8, vec![vec![2, 6], vec![4, 4], vec![0, 2]]),
            (3, 6, vec![vec![1, 2, 3], vec![0, 3, 3]]),
            (2, 9, vec![vec![3, 3], vec![0, 6]]),
            (1, 10, vec![vec![4], vec![5]]),
        ];
        for (n, m, gens) in cases {
            let g = FiniteSubgroup::canonicalize(n, m, &gens).unwrap();
            let got: BTreeSet<TorsionPoint> = g.elements(&lim()).unwrap().into_iter().collect();
            let brute = brute_elements(n, m, &gens);
            assert_eq!(got, brute, "{g}");
            assert_eq!(g.order() as usize, brute.len());
        }
    }

    #[test]
    fn elements_of_small_groups() {
        let t = FiniteSubgroup::trivial(2);
        assert_eq!(t.elements(&lim()).unwrap(), vec![TorsionPoint::identity(2)]);
        let mu3 = FiniteSubgroup::mu_n(1, 3).unwrap();
        let pts = mu3.elements(&lim()).unwrap();
        let want: BTreeSet<_> = [
            TorsionPoint::new(1, vec![0]).unwrap(),
            TorsionPoint::new(3, vec![1]).unwrap(),
            TorsionPoint::new(3, vec![2]).unwrap(),
        ]
        .into_iter()
        .collect();
        assert_eq!(pts.into_iter().collect::<BTreeSet<_>>(), want);
        let d = grp(2, 2, &[&[1, 1]]);
        let pts: BTreeSet<_> = d.elements(&lim()).unwrap().into_iter().collect();
        assert_eq!(pts.len(), 2);
        assert!(pts.contains(&TorsionPoint::new(2, vec![1, 1]).unwrap()));
    }

    #[test]
    fn enumeration_cap_is_an_error() {
        let g = FiniteSubgroup::mu_n(2, 10).unwrap();
        let small = Limits {
            max_elements: 50,
            ..Limits::default()
        };
        assert!(matches!(g.elements(&small), Err(Error::ResourceCap { .. })));
    }

    #[test]
    fn nu_values() {
        for n in 1..20 {
            assert_eq!(nu(1, n), 1);
        }
        assert_eq!(nu(2, 6), 12);
        assert_eq!(nu(3, 2), 7);
        assert_eq!(nu(2, 4), 7);
    }

    #[test]
    fn subgroups_of_order_examples() {
        assert_eq!(subgroups_of_order(2, 2, &lim()).unwrap().len(), 3);
        assert_eq!(subgroups_of_order(2, 4, &lim()).unwrap().len(), 7);
        let five = subgroups_of_order(1, 5, &lim()).unwrap();
        assert_eq!(five, vec![FiniteSubgroup::mu_n(1, 5).unwrap()]);
    }

    #[test]
    fn subgroups_of_order_match_brute_force() {
        // every subgroup of order n sits inside mu_n^N
        for (n_ar, n) in [(2usize, 4u64), (2, 6), (2, 8), (3, 4), (2, 9)] {
            let full = FiniteSubgroup::mu_n(n_ar, n).unwrap();
            let brute: Vec<FiniteSubgroup> = full
                .subgroups(&lim())
                .unwrap()
                .into_iter()
                .filter(|g| g.order() == n)
                .collect();
            let fast = subgroups_of_order(n_ar, n, &lim()).unwrap();
            assert_eq!(fast, brute, "N={n_ar} n={n}");
        }
    }

    #[test]
    fn subgroups_of_examples() {
        let v4 = FiniteSubgroup::mu_n(2, 2).unwrap();
        assert_eq!(v4.subgroups(&lim()).unwrap().len(), 5);
        let mu6 = FiniteSubgroup::mu_n(1, 6).unwrap();
        let orders: Vec<u64> = mu6.subgroups(&lim()).unwrap().iter().map(|g| g.order()).collect();
        assert_eq!(orders, vec![1, 2, 3, 6]);
        assert_eq!(FiniteSubgroup::trivial(3).subgroups(&lim()).unwrap().len(), 1);
    }

    #[test]
    fn containment_and_intersection() {
        let mu4 = FiniteSubgroup::mu_n(1, 4).unwrap();
        let mu6 = FiniteSubgroup::mu_n(1, 6).unwrap();
        assert_eq!(mu4.intersection(&mu6).unwrap(), FiniteSubgroup::mu_n(1, 2).unwrap());
        let d = grp(2, 2, &[&[1, 1]]);
        let x = grp(2, 2, &[&[1, 0]]);
        assert!(d.intersection(&x).unwrap().is_trivial());
        let v4 = FiniteSubgroup::mu_n(2, 2).unwrap();
        assert!(v4.contains(&d).unwrap());
        assert!(!d.contains(&v4).unwrap());
        assert!(matches!(mu4.contains(&v4), Err(Error::ArityMismatch { .. })));
    }

    #[test]
    fn intersection_matches_elementwise() {
        let a = grp(2, 12, &[&[1, 2]]);
        let b = grp(2, 12, &[&[2, 4], &[0, 6]]);
        let got: BTreeSet<_> = a.intersection(&b).unwrap().elements(&lim()).unwrap().into_iter().collect();
        let want: BTreeSet<_> = a
            .elements(&lim())
            .unwrap()
            .into_iter()
            .filter(|p| b.contains_point(p))
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn cyclicity_and_generators() {
        assert!(grp(2, 4, &[&[1, 2]]).is_cyclic());
        assert!(!FiniteSubgroup::mu_n(2, 2).unwrap().is_cyclic());
        let gens = FiniteSubgroup::mu_n(1, 4).unwrap().generators(&lim()).unwrap();
        assert_eq!(
            gens,
            vec![
                TorsionPoint::new(4, vec![1]).unwrap(),
                TorsionPoint::new(4, vec![3]).unwrap()
            ]
        );
        assert_eq!(
            FiniteSubgroup::mu_n(2, 2).unwrap().generators(&lim()),
            Err(Error::NotCyclic)
        );
        // a cyclic group whose Howell form has two rows
        let c = grp(2, 6, &[&[2, 3]]);
        assert!(c.is_cyclic());
        assert_eq!(c.generators(&lim()).unwrap().len(), 2);
    }

    #[test]
    fn mobius_examples() {
        let v4 = FiniteSubgroup::mu_n(2, 2).unwrap();
        let triv = FiniteSubgroup::trivial(2);
        assert_eq!(mobius(&v4, &v4, &lim()).unwrap(), 1);
        assert_eq!(mobius(&triv, &v4, &lim()).unwrap(), 2);
        for p in [2, 3, 5, 7] {
            let mup = FiniteSubgroup::mu_n(1, p).unwrap();
            assert_eq!(mobius(&FiniteSubgroup::trivial(1), &mup, &lim()).unwrap(), -1);
        }
        let mu2 = FiniteSubgroup::mu_n(1, 2).unwrap();
        let mu3 = FiniteSubgroup::mu_n(1, 3).unwrap();
        assert_eq!(mobius(&mu2, &mu3, &lim()), Err(Error::NotContained));
    }

    #[test]
    fn literal_round_trip() {
        let g: FiniteSubgroup = "N=2;m=4;gens=(2,0)(0,2)".parse().unwrap();
        assert_eq!(g, FiniteSubgroup::mu_n(2, 2).unwrap());
        assert_eq!(g.key().parse::<FiniteSubgroup>().unwrap(), g);
        let t: FiniteSubgroup = "N=3;m=1;gens=".parse().unwrap();
        assert!(t.is_trivial());
        assert!("N=2;m=4;gens=(1)".parse::<FiniteSubgroup>().is_err());
        assert!("N=2;gens=(1,0)".parse::<FiniteSubgroup>().is_err());
    }

    #[test]
    fn smith_diagonal_small() {
        let m = |v: &[&[i64]]| -> Vec<Vec<BigInt>> {
            v.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
        };
        let d = smith_diagonal(m(&[&[2, 4, 4], &[-6, 6, 12], &[10, -4, -16]]));
        assert_eq!(d, vec![BigInt::from(2), BigInt::from(6), BigInt::from(12)]);
        let d = smith_diagonal(m(&[&[1, 2, 4, 0], &[2, 0, 0, 4]]));
        assert_eq!(d, vec![BigInt::from(1), BigInt::from(4)]);
    }
}
