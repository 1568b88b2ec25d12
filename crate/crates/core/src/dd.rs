//! `W_f`, `V_f` and `C_f` over the integers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::config::Limits;
use crate::cyclo::{eval_at, product_over_roots, CyclotomicInt};
use crate::error::{Error, Result};
use crate::factor::FactoredProduct;
use crate::lattice::{euler_phi, gcd, lcm, units_mod, CyclicClass, FiniteSubgroup, MobiusTable, TorsionPoint};
use crate::laurent::LaurentPoly;
use crate::par;

fn check_input(f: &LaurentPoly, arity: usize) -> Result<()> {
    if f.is_zero() {
        return Err(Error::InvalidInput("f must be non-zero".into()));
    }
    if f.arity() != arity {
        return Err(Error::ArityMismatch {
            expected: f.arity(),
            found: arity,
        });
    }
    Ok(())
}

/// `prod_k f(xi^k)` over units `k`, i.e. `V_f(<xi>)`; vanishing orbits give 1.
pub fn orbit_norm(f: &LaurentPoly, xi: &TorsionPoint) -> Result<BigInt> {
    let v = eval_at(f, xi)?;
    Ok(if v.is_zero() { BigInt::one() } else { v.norm() })
}

/// `W_f(Lambda) = prod_{zeta in Lambda, f(zeta) != 0} f(zeta)`, one Galois
/// norm per cyclic subgroup.
pub fn w(f: &LaurentPoly, group: &FiniteSubgroup, limits: &Limits) -> Result<BigInt> {
    check_input(f, group.arity())?;
    let classes = group.cyclic_subgroups(limits)?;
    let norms = par::try_map(limits.exec, &classes, |c| orbit_norm(f, &c.generator))?;
    Ok(norms.into_iter().product())
}

/// `W_f(Lambda)` as one product of all non-zero values in `Z[w_e]`.
pub fn w_direct(f: &LaurentPoly, group: &FiniteSubgroup, limits: &Limits) -> Result<BigInt> {
    check_input(f, group.arity())?;
    let e = group.exponent();
    let mut acc = CyclotomicInt::one(e);
    for v in group.element_vectors(limits)? {
        let xi = TorsionPoint::new(e, v)?;
        let val = eval_in(f, &xi, e)?;
        if !val.is_zero() {
            acc = acc.mul(&val)?;
        }
    }
    acc.as_integer()
        .ok_or_else(|| Error::Invariant("W is not rational".into()))
}

/// `f(xi)` written in conductor `e`, a multiple of the order of `xi`.
fn eval_in(f: &LaurentPoly, xi: &TorsionPoint, e: u64) -> Result<CyclotomicInt> {
    let v = eval_at(f, xi)?;
    let s = e / xi.order();
    let mut c = vec![BigInt::zero(); v.coeffs().len() * s as usize + 1];
    for (j, a) in v.coeffs().iter().enumerate() {
        c[j * s as usize] = a.clone();
    }
    Ok(CyclotomicInt::from_poly(e, &crate::poly::ZPoly::new(c)))
}

/// `W_n(f) = W_f(mu_n^N)`.
pub fn w_n(f: &LaurentPoly, n: u64, limits: &Limits) -> Result<BigInt> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    if f.arity() == 1 && !f.is_zero() {
        return product_over_roots(f, n, true);
    }
    let g = FiniteSubgroup::mu_n(f.arity(), n)?;
    w(f, &g, limits)
}

/// `V_f(Lambda)`: the product over generators, 1 for non-cyclic groups.
pub fn v(f: &LaurentPoly, group: &FiniteSubgroup, limits: &Limits) -> Result<BigInt> {
    check_input(f, group.arity())?;
    let out = if group.is_cyclic() {
        orbit_norm(f, &group.generator(limits)?)?
    } else {
        BigInt::one()
    };
    if cfg!(debug_assertions) && group.order() <= 16 {
        debug_assert_eq!(out, v_mobius(f, group, limits)?);
    }
    Ok(out)
}

/// `V_f(<xi>)` as the literal product of `f` over the generator list.
pub fn v_generators(f: &LaurentPoly, group: &FiniteSubgroup, limits: &Limits) -> Result<BigInt> {
    check_input(f, group.arity())?;
    if !group.is_cyclic() {
        return Ok(BigInt::one());
    }
    let e = group.exponent();
    let mut acc = CyclotomicInt::one(e);
    for g in group.generators(limits)? {
        let val = eval_in(f, &g, e)?;
        if !val.is_zero() {
            acc = acc.mul(&val)?;
        }
    }
    acc.as_integer()
        .ok_or_else(|| Error::Invariant("V is not rational".into()))
}

/// `V_f(Lambda) = prod_{Lambda' <= Lambda} W_f(Lambda')^{mu(Lambda', Lambda)}`.
pub fn v_mobius(f: &LaurentPoly, group: &FiniteSubgroup, limits: &Limits) -> Result<BigInt> {
    check_input(f, group.arity())?;
    let table = MobiusTable::new(group, limits)?;
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for (h, mu) in &table.entries {
        if *mu == 0 {
            continue;
        }
        let wh = w(f, h, &limits.with_exec(crate::config::Execution::Sequential))?;
        let p = num_traits::pow(wh, mu.unsigned_abs() as usize);
        if *mu > 0 {
            num *= p;
        } else {
            den *= p;
        }
    }
    let (q, r) = num.div_rem(&den);
    if !r.is_zero() {
        return Err(Error::Invariant("Moebius product is not an integer".into()));
    }
    Ok(q)
}

/// `(d, |S|)`: `d` the order of `<xi^m : m in M>` and
/// `S = {k unit mod n : k = 1 mod d}`.
pub fn stabilizer_index(xi: &TorsionPoint, support: &[Vec<i64>]) -> (u64, u64) {
    let n = xi.order();
    let d = support.iter().fold(1u64, |acc, e| {
        let t = xi.pair(e);
        lcm(acc, n / gcd(n, t))
    });
    (d, euler_phi(n) / euler_phi(d))
}

/// Representatives of `(Z/n)^* / S`, one per unit class mod `d`.
fn coset_reps(n: u64, d: u64) -> Vec<u64> {
    let mut reps = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for k in units_mod(n) {
        if seen.insert(k % d) {
            reps.push(k);
        }
    }
    reps
}

/// `C_f(xi) = prod_tau tau(f(xi))` over `Gal(Q(xi^M)/Q)`; 0 exactly when
/// `f(xi) = 0`.
pub fn c(f: &LaurentPoly, xi: &TorsionPoint) -> Result<BigInt> {
    check_input(f, xi.arity())?;
    let val = eval_at(f, xi)?;
    let (d, _) = stabilizer_index(xi, &f.support());
    let n = xi.order();
    let mut acc = CyclotomicInt::one(n);
    for k in coset_reps(n, d) {
        acc = acc.mul(&val.galois_apply(k.max(1))?)?;
    }
    acc.as_integer()
        .ok_or_else(|| Error::Invariant("C does not descend to Z".into()))
}

/// One factor of `W_f(Lambda)`: the cyclic subgroup, its canonical
/// generator, `C_f` there and the exponent `|S|`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorRow {
    pub subgroup: FiniteSubgroup,
    pub generator: TorsionPoint,
    pub c: BigInt,
    pub exponent: u64,
    /// `f` vanishes on the orbit, so the row is left out of `W`.
    pub vanishes: bool,
}

/// `W_f(Lambda) = prod C_f(xi)^{|S|}` over cyclic subgroups, checked
/// against `w`.
pub fn factor_w(f: &LaurentPoly, group: &FiniteSubgroup, limits: &Limits) -> Result<Vec<FactorRow>> {
    check_input(f, group.arity())?;
    let classes: Vec<CyclicClass> = group.cyclic_subgroups(limits)?;
    let rows = par::try_map(limits.exec, &classes, |cl| -> Result<FactorRow> {
        let cv = c(f, &cl.generator)?;
        let (_, s) = stabilizer_index(&cl.generator, &f.support());
        Ok(FactorRow {
            subgroup: cl.subgroup.clone(),
            generator: cl.generator.clone(),
            vanishes: cv.is_zero(),
            c: cv,
            exponent: s,
        })
    })?;
    let prod: BigInt = rows
        .iter()
        .filter(|r| !r.vanishes)
        .map(|r| num_traits::pow(r.c.clone(), r.exponent as usize))
        .product();
    let total = w(f, group, limits)?;
    if prod != total {
        return Err(Error::Invariant(format!(
            "C-factorization gives {prod}, W is {total}"
        )));
    }
    Ok(rows)
}

/// `W_f(Lambda') | W_f(Lambda)` for `Lambda' <= Lambda`.
pub fn divides_check(
    f: &LaurentPoly,
    lower: &FiniteSubgroup,
    upper: &FiniteSubgroup,
    limits: &Limits,
) -> Result<bool> {
    if !upper.contains(lower)? {
        return Err(Error::NotContained);
    }
    let a = w(f, lower, limits)?;
    let b = w(f, upper, limits)?;
    Ok((b % a).is_zero())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrongDivReport {
    pub holds: bool,
    pub w1: BigInt,
    pub w2: BigInt,
    pub gcd: FactoredProduct,
    pub w_meet: FactoredProduct,
    pub meet: FiniteSubgroup,
}

/// Compares `gcd(W(Lambda_1), W(Lambda_2))` with `|W(Lambda_1 cap Lambda_2)|`.
pub fn strong_div_check(
    f: &LaurentPoly,
    g1: &FiniteSubgroup,
    g2: &FiniteSubgroup,
    limits: &Limits,
) -> Result<StrongDivReport> {
    let meet = g1.intersection(g2)?;
    let w1 = w(f, g1, limits)?;
    let w2 = w(f, g2, limits)?;
    let wm = w(f, &meet, limits)?;
    let g = w1.gcd(&w2);
    Ok(StrongDivReport {
        holds: g == wm.abs(),
        gcd: FactoredProduct::factor(&g, limits.trial_bound),
        w_meet: FactoredProduct::factor(&wm, limits.trial_bound),
        w1,
        w2,
        meet,
    })
}

/// `factor_W` rows re-expressed as a factored value.
pub fn factor_value(value: &BigInt, limits: &Limits) -> FactoredProduct {
    FactoredProduct::factor(value, limits.trial_bound)
}
