//! Generic coefficients and the `P_T` family.
//!
//! `f_M = sum_{m in M} a_m X^m` with independent indeterminates `a_m`;
//! values on torsion points are products of linear forms in the `a_m` with
//! root-of-unity coefficients, expanded in `Z[w_n][a]` and descended to `Z[a]`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::config::Limits;
use crate::cyclo::CyclotomicInt;
use crate::dd::stabilizer_index;
use crate::error::{Error, Result};
use crate::lattice::{lcm, units_mod, FiniteSubgroup, TorsionPoint};
use crate::poly::ZPoly;

/// A Laurent polynomial with rational coefficients in named variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymPoly {
    vars: Vec<String>,
    terms: BTreeMap<Vec<i64>, BigRational>,
}

impl SymPoly {
    pub fn zero(vars: Vec<String>) -> Self {
        SymPoly {
            vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: Vec<String>, c: BigRational) -> Self {
        let n = vars.len();
        let mut p = SymPoly::zero(vars);
        p.add_term(vec![0; n], c);
        p
    }

    pub fn one(vars: Vec<String>) -> Self {
        SymPoly::constant(vars, BigRational::one())
    }

    /// The variable with index `i`.
    pub fn var(vars: Vec<String>, i: usize) -> Self {
        let mut e = vec![0; vars.len()];
        e[i] = 1;
        let mut p = SymPoly::zero(vars);
        p.add_term(e, BigRational::one());
        p
    }

    pub fn from_terms(vars: Vec<String>, terms: impl IntoIterator<Item = (Vec<i64>, BigRational)>) -> Result<Self> {
        let mut p = SymPoly::zero(vars);
        for (e, c) in terms {
            if e.len() != p.vars.len() {
                return Err(Error::ArityMismatch {
                    expected: p.vars.len(),
                    found: e.len(),
                });
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    /// An integer polynomial in the single variable `name`.
    pub fn from_univariate(name: &str, p: &ZPoly) -> Self {
        SymPoly::from_terms(
            vec![name.to_string()],
            p.coeffs()
                .iter()
                .enumerate()
                .map(|(i, c)| (vec![i as i64], BigRational::from_integer(c.clone()))),
        )
        .expect("one variable")
    }

    fn add_term(&mut self, e: Vec<i64>, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn terms(&self) -> &BTreeMap<Vec<i64>, BigRational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn has_integer_coeffs(&self) -> bool {
        self.terms.values().all(|c| c.is_integer())
    }

    fn check(&self, other: &SymPoly) -> Result<()> {
        if self.vars != other.vars {
            return Err(Error::InvalidInput(format!(
                "variable lists differ: {:?} vs {:?}",
                self.vars, other.vars
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &SymPoly) -> Result<SymPoly> {
        self.check(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> SymPoly {
        SymPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &SymPoly) -> Result<SymPoly> {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &BigRational) -> SymPoly {
        let mut out = SymPoly::zero(self.vars.clone());
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c * k);
        }
        out
    }

    pub fn mul(&self, other: &SymPoly) -> Result<SymPoly> {
        self.check(other)?;
        let mut out = SymPoly::zero(self.vars.clone());
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<i64> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: u64) -> SymPoly {
        let mut acc = SymPoly::one(self.vars.clone());
        for _ in 0..k {
            acc = acc.mul(self).expect("same variables");
        }
        acc
    }

    /// Total degree (largest exponent sum over terms).
    pub fn total_degree(&self) -> Option<i64> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// Value at a rational point; variables with negative exponents must
    /// take non-zero values.
    pub fn eval(&self, point: &[BigRational]) -> Result<BigRational> {
        if point.len() != self.vars.len() {
            return Err(Error::ArityMismatch {
                expected: self.vars.len(),
                found: point.len(),
            });
        }
        let mut acc = BigRational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (x, &k) in point.iter().zip(e) {
                if k < 0 && x.is_zero() {
                    return Err(Error::InvalidInput("negative power of zero".into()));
                }
                t *= num_traits::pow(x.clone(), k.unsigned_abs() as usize).pow(k.signum() as i32);
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Substitutes every variable `v_i` by the monomial `prod_j w_j^{img[i][j]}`
    /// in the new variables `w`.
    pub fn substitute_monomials(&self, new_vars: Vec<String>, images: &[Vec<i64>]) -> Result<SymPoly> {
        if images.len() != self.vars.len() || images.iter().any(|r| r.len() != new_vars.len()) {
            return Err(Error::InvalidInput("substitution shape mismatch".into()));
        }
        let mut out = SymPoly::zero(new_vars.clone());
        for (e, c) in &self.terms {
            let img: Vec<i64> = (0..new_vars.len())
                .map(|j| e.iter().zip(images).map(|(ei, row)| ei * row[j]).sum())
                .collect();
            out.add_term(img, c.clone());
        }
        Ok(out)
    }

    /// The integer polynomial in the only variable.
    pub fn to_univariate(&self) -> Result<ZPoly> {
        if self.vars.len() != 1 || !self.has_integer_coeffs() || self.terms.keys().any(|e| e[0] < 0) {
            return Err(Error::InvalidInput("not an integer polynomial in one variable".into()));
        }
        let deg = self.terms.keys().map(|e| e[0]).max().unwrap_or(0) as usize;
        let mut c = vec![BigInt::zero(); deg + 1];
        for (e, v) in &self.terms {
            c[e[0] as usize] = v.to_integer();
        }
        Ok(ZPoly::new(c))
    }
}

impl fmt::Display for SymPoly {
    /// Terms in descending exponent order, e.g. `a(2)^2 - a(2)*a(0) + 3`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (e, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if i == 0 {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            let factors: Vec<String> = e
                .iter()
                .zip(&self.vars)
                .filter(|(k, _)| **k != 0)
                .map(|(k, v)| if *k == 1 { v.clone() } else { format!("{v}^{k}") })
                .collect();
            if factors.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                f.write_str(&factors.join("*"))?;
            } else {
                write!(f, "{mag}*{}", factors.join("*"))?;
            }
        }
        Ok(())
    }
}

/// Polynomials in the `a_m` over `Z[w_n]`, used while expanding products
/// of linear forms.
#[derive(Clone, Debug)]
struct CycPoly {
    n: u64,
    terms: BTreeMap<Vec<i64>, CyclotomicInt>,
}

impl CycPoly {
    fn one(n: u64, nvars: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![0; nvars], CyclotomicInt::one(n));
        CycPoly { n, terms }
    }

    /// `sum_i w_n^{roots[i]} a_i`.
    fn linear(n: u64, roots: &[u64]) -> Self {
        let mut terms = BTreeMap::new();
        for (i, &r) in roots.iter().enumerate() {
            let mut e = vec![0; roots.len()];
            e[i] = 1;
            terms.insert(e, CyclotomicInt::root(n, r));
        }
        CycPoly { n, terms }
    }

    fn mul(&self, other: &CycPoly) -> Result<CycPoly> {
        let mut terms: BTreeMap<Vec<i64>, CyclotomicInt> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<i64> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                let prod = c1.mul(c2)?;
                match terms.get_mut(&e) {
                    Some(slot) => *slot = slot.add(&prod)?,
                    None => {
                        terms.insert(e, prod);
                    }
                }
            }
        }
        terms.retain(|_, c| !c.is_zero());
        Ok(CycPoly { n: self.n, terms })
    }

    fn descend(&self, vars: Vec<String>) -> Result<SymPoly> {
        let mut out = SymPoly::zero(vars);
        for (e, c) in &self.terms {
            let v = c
                .as_integer()
                .ok_or_else(|| Error::Invariant("product of conjugates is not rational".into()))?;
            out.add_term(e.clone(), BigRational::from_integer(v));
        }
        Ok(out)
    }
}

/// A normalized monomial support `M` with its coefficient names `a(m)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Support {
    arity: usize,
    monomials: Vec<Vec<i64>>,
}

impl Support {
    pub fn new(arity: usize, monomials: &[Vec<i64>]) -> Result<Self> {
        if monomials.is_empty() {
            return Err(Error::InvalidInput("empty support".into()));
        }
        if let Some(m) = monomials.iter().find(|m| m.len() != arity) {
            return Err(Error::ArityMismatch {
                expected: arity,
                found: m.len(),
            });
        }
        let set: BTreeSet<Vec<i64>> = monomials.iter().cloned().collect();
        Ok(Support {
            arity,
            monomials: set.into_iter().collect(),
        })
    }

    pub fn monomials(&self) -> &[Vec<i64>] {
        &self.monomials
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn contains_zero(&self) -> bool {
        self.monomials.iter().any(|m| m.iter().all(|&x| x == 0))
    }

    /// Names `a(m1,...,mN)` in support order.
    pub fn var_names(&self) -> Vec<String> {
        self.monomials
            .iter()
            .map(|m| {
                let parts: Vec<String> = m.iter().map(i64::to_string).collect();
                format!("a({})", parts.join(","))
            })
            .collect()
    }

    pub fn index_of(&self, m: &[i64]) -> Option<usize> {
        self.monomials.iter().position(|x| x == m)
    }

    /// Exponents `<m, a> mod n` of the coefficients of `f_M(xi)`.
    fn roots(&self, xi: &TorsionPoint) -> Vec<u64> {
        self.monomials.iter().map(|m| xi.pair(m)).collect()
    }

    fn check(&self, xi_arity: usize) -> Result<()> {
        if xi_arity != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: xi_arity,
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenericC {
    pub poly: SymPoly,
    /// `0` is missing from `M`, so the factor may be reducible.
    pub may_be_reducible: bool,
}

fn coset_reps(n: u64, d: u64) -> Vec<u64> {
    let mut seen = BTreeSet::new();
    units_mod(n)
        .into_iter()
        .filter(|k| seen.insert(k % d))
        .map(|k| k.max(1))
        .collect()
}

/// `C_{f_M}(xi)` expanded in `Z[a_m]`.
pub fn generic_c(support: &Support, xi: &TorsionPoint) -> Result<GenericC> {
    support.check(xi.arity())?;
    let n = xi.order();
    let (d, _) = stabilizer_index(xi, support.monomials());
    let base = support.roots(xi);
    let mut acc = CycPoly::one(n, support.len());
    for k in coset_reps(n, d) {
        let roots: Vec<u64> = base.iter().map(|r| (r * k) % n).collect();
        acc = acc.mul(&CycPoly::linear(n, &roots))?;
    }
    Ok(GenericC {
        poly: acc.descend(support.var_names())?,
        may_be_reducible: !support.contains_zero(),
    })
}

/// `V_{f_M}(Lambda) = C_{f_M}(xi)^{|S|}`; 1 for non-cyclic groups.
pub fn generic_v(support: &Support, group: &FiniteSubgroup, limits: &Limits) -> Result<SymPoly> {
    support.check(group.arity())?;
    if !group.is_cyclic() {
        return Ok(SymPoly::one(support.var_names()));
    }
    let xi = group.generator(limits)?;
    let (_, s) = stabilizer_index(&xi, support.monomials());
    Ok(generic_c(support, &xi)?.poly.pow(s))
}

/// `V_{f_M}(<xi>)` as the literal product over all generators.
pub fn generic_v_direct(support: &Support, group: &FiniteSubgroup, limits: &Limits) -> Result<SymPoly> {
    support.check(group.arity())?;
    if !group.is_cyclic() {
        return Ok(SymPoly::one(support.var_names()));
    }
    let e = group.exponent();
    let mut acc = CycPoly::one(e, support.len());
    for g in group.generators(limits)? {
        let roots: Vec<u64> = support.roots(&g).iter().map(|r| r * (e / g.order())).collect();
        acc = acc.mul(&CycPoly::linear(e, &roots))?;
    }
    acc.descend(support.var_names())
}

/// One factor of the generic `W_{f_M}(Lambda)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitFactor {
    pub subgroup: FiniteSubgroup,
    pub generator: TorsionPoint,
    pub c: SymPoly,
    pub exponent: u64,
}

/// `W_{f_M}(Lambda)` as `prod C^{|S|}`, one factor per cyclic subgroup.
pub fn generic_w_factored(support: &Support, group: &FiniteSubgroup, limits: &Limits) -> Result<Vec<OrbitFactor>> {
    support.check(group.arity())?;
    group
        .cyclic_subgroups(limits)?
        .into_iter()
        .map(|cl| {
            let (_, s) = stabilizer_index(&cl.generator, support.monomials());
            Ok(OrbitFactor {
                c: generic_c(support, &cl.generator)?.poly,
                exponent: s,
                subgroup: cl.subgroup,
                generator: cl.generator,
            })
        })
        .collect()
}

pub fn expand(factors: &[OrbitFactor], vars: Vec<String>) -> Result<SymPoly> {
    factors
        .iter()
        .try_fold(SymPoly::one(vars), |acc, f| acc.mul(&f.c.pow(f.exponent)))
}

/// `W_{f_M}(Lambda)` as the product of `f_M` over every element.
pub fn generic_w_direct(support: &Support, group: &FiniteSubgroup, limits: &Limits) -> Result<SymPoly> {
    support.check(group.arity())?;
    let e = group.exponent();
    let mut acc = CycPoly::one(e, support.len());
    for v in group.element_vectors(limits)? {
        let xi = TorsionPoint::new(e, v)?;
        let roots: Vec<u64> = support.roots(&xi).iter().map(|r| r * (e / xi.order())).collect();
        acc = acc.mul(&CycPoly::linear(e, &roots))?;
    }
    acc.descend(support.var_names())
}

/// The linear forms `f_M(xi^k)` for all generators, each as coefficient
/// root exponents over `L` shifted so that the first entry is 0.
fn normalized_forms(support: &Support, group: &FiniteSubgroup, l: u64, limits: &Limits) -> Result<BTreeSet<Vec<u64>>> {
    if !group.is_cyclic() {
        return Ok(BTreeSet::new());
    }
    let mut out = BTreeSet::new();
    for g in group.generators(limits)? {
        let s = l / g.order();
        let roots: Vec<u64> = support.roots(&g).iter().map(|r| (r * s) % l).collect();
        let shift = roots[0];
        out.insert(roots.iter().map(|r| (r + l - shift) % l).collect());
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coprimality {
    pub coprime: bool,
    pub note: Option<String>,
}

/// `gcd(V(Lambda_1), V(Lambda_2)) = 1`, decided by comparing the linear
/// forms up to a root-of-unity scalar.
pub fn coprimality_check(
    support: &Support,
    g1: &FiniteSubgroup,
    g2: &FiniteSubgroup,
    limits: &Limits,
) -> Result<Coprimality> {
    support.check(g1.arity())?;
    support.check(g2.arity())?;
    if g1 == g2 {
        return Ok(Coprimality {
            coprime: false,
            note: Some("the two subgroups are equal".into()),
        });
    }
    let l = lcm(g1.exponent(), g2.exponent());
    let f1 = normalized_forms(support, g1, l, limits)?;
    let f2 = normalized_forms(support, g2, l, limits)?;
    let shared = f1.intersection(&f2).next().is_some();
    Ok(Coprimality {
        coprime: !shared,
        note: shared.then(|| "a linear form is shared up to a unit".into()),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrongDivSymbolic {
    pub holds: bool,
    /// Cyclic subgroups of `Lambda_1` and of `Lambda_2`, outside the
    /// intersection, whose `V` values share a factor.
    pub offending: Vec<(FiniteSubgroup, FiniteSubgroup)>,
}

/// `gcd(W(Lambda_1), W(Lambda_2)) = W(Lambda_1 cap Lambda_2)` at the level
/// of `V` factors.
pub fn strong_div_symbolic(
    support: &Support,
    g1: &FiniteSubgroup,
    g2: &FiniteSubgroup,
    limits: &Limits,
) -> Result<StrongDivSymbolic> {
    if support.len() < 2 {
        return Err(Error::InvalidInput("f_M must not be a monomial".into()));
    }
    let meet = g1.intersection(g2)?;
    let c1: BTreeSet<FiniteSubgroup> = g1.cyclic_subgroups(limits)?.into_iter().map(|c| c.subgroup).collect();
    let c2: BTreeSet<FiniteSubgroup> = g2.cyclic_subgroups(limits)?.into_iter().map(|c| c.subgroup).collect();
    let cm: BTreeSet<FiniteSubgroup> = meet.cyclic_subgroups(limits)?.into_iter().map(|c| c.subgroup).collect();
    let common: BTreeSet<FiniteSubgroup> = c1.intersection(&c2).cloned().collect();
    if common != cm {
        return Err(Error::Invariant("common cyclic subgroups differ from those of the meet".into()));
    }
    let mut offending = Vec::new();
    for a in c1.difference(&c2) {
        for b in c2.difference(&c1) {
            if !coprimality_check(support, a, b, limits)?.coprime {
                offending.push((a.clone(), b.clone()));
            }
        }
    }
    Ok(StrongDivSymbolic {
        holds: offending.is_empty(),
        offending,
    })
}

/// `Phi_n(U, V) = V^phi(n) Phi_n(U/V)` in the variables `[u, v]`.
pub fn homogenized_cyclotomic(n: u64, vars: Vec<String>) -> SymPoly {
    let phi = crate::cyclo::cyclotomic_poly(n);
    let deg = phi.degree().expect("non-zero") as i64;
    let mut p = SymPoly::zero(vars);
    for (j, c) in phi.coeffs().iter().enumerate() {
        p.add_term(vec![j as i64, deg - j as i64], BigRational::from_integer(c.clone()));
    }
    p
}

/// Which constant term the `P_T` family uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PtVariant {
    T,
    TwoTPlus4,
}

impl PtVariant {
    /// `(alpha, beta)` with constant term `alpha*T + beta`.
    fn affine(self) -> (i64, i64) {
        match self {
            PtVariant::T => (1, 0),
            PtVariant::TwoTPlus4 => (2, 4),
        }
    }
}

pub fn pt_vars() -> Vec<String> {
    vec!["X1".into(), "X2".into(), "T".into()]
}

/// `X + X^-1 + Y + Y^-1 + T` (or `... + 2T + 4`) in variables `X1, X2, T`.
pub fn pt_poly(variant: PtVariant) -> SymPoly {
    let (a, b) = variant.affine();
    let q = |v: i64| BigRational::from_integer(BigInt::from(v));
    SymPoly::from_terms(
        pt_vars(),
        [
            (vec![1, 0, 0], q(1)),
            (vec![-1, 0, 0], q(1)),
            (vec![0, 1, 0], q(1)),
            (vec![0, -1, 0], q(1)),
            (vec![0, 0, 1], q(a)),
            (vec![0, 0, 0], q(b)),
        ],
    )
    .expect("three variables")
}

/// The eight images of `(i, j)` under the dihedral symmetries of `P_T`.
pub fn d4_orbit(i: u64, j: u64, n: u64) -> BTreeSet<(u64, u64)> {
    let neg = |x: u64| (n - x % n) % n;
    [
        (i, j),
        (neg(i), j),
        (i, neg(j)),
        (neg(i), neg(j)),
        (j, i),
        (neg(j), i),
        (j, neg(i)),
        (neg(j), neg(i)),
    ]
    .into_iter()
    .map(|(a, b)| (a % n, b % n))
    .collect()
}

fn check_pt_cap(n: u64, limits: &Limits) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    if n > limits.max_pt_n {
        return Err(Error::cap("P_T family size", n as u128, limits.max_pt_n as u128));
    }
    Ok(())
}

/// `prod (alpha*T + beta + c(i, j))` over the given exponent pairs, with
/// `c(i, j) = w^i + w^-i + w^j + w^-j`, descended to `Z[T]`.
fn pt_product(n: u64, points: &[(u64, u64)], variant: PtVariant) -> Result<ZPoly> {
    let (a, b) = variant.affine();
    let mut acc: Vec<CyclotomicInt> = vec![CyclotomicInt::one(n)];
    for &(i, j) in points {
        let c = [i, n - i, j, n - j]
            .iter()
            .try_fold(CyclotomicInt::from_int(n, b), |s, &k| s.add(&CyclotomicInt::root(n, k % n)))?;
        // multiply acc by (a*T + c)
        let mut next = vec![CyclotomicInt::zero(n); acc.len() + 1];
        for (k, coeff) in acc.iter().enumerate() {
            next[k] = next[k].add(&coeff.mul(&c)?)?;
            next[k + 1] = next[k + 1].add(&coeff.scale(&BigInt::from(a)))?;
        }
        acc = next;
    }
    let coeffs = acc
        .iter()
        .map(|c| {
            c.as_integer()
                .ok_or_else(|| Error::Invariant("P_T product is not in Z[T]".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ZPoly::new(coeffs))
}

/// `W_n(P_T)` (or `W_n(P_{2T+4})`) in `Z[T]`.
pub fn pt_w(n: u64, variant: PtVariant, limits: &Limits) -> Result<ZPoly> {
    check_pt_cap(n, limits)?;
    let points: Vec<(u64, u64)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    pt_product(n, &points, variant)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitCount {
    pub n: u64,
    /// Points of `mu_n^2` whose orbit has all eight elements.
    pub free_points: u64,
    /// Number of those orbits, `free_points / 8`.
    pub free_orbits: u64,
    pub nonfree_points: u64,
    /// `n^2 - 4n + 3` for odd `n`, `n^2 - 6n + 8` for even `n`.
    pub closed_form: i64,
}

pub fn pt_orbit_count(n: u64) -> Result<OrbitCount> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    let mut free = 0;
    for i in 0..n {
        for j in 0..n {
            if d4_orbit(i, j, n).len() == 8 {
                free += 1;
            }
        }
    }
    let ni = n as i64;
    let closed_form = if n % 2 == 1 { ni * ni - 4 * ni + 3 } else { ni * ni - 6 * ni + 8 };
    Ok(OrbitCount {
        n,
        free_points: free,
        free_orbits: free / 8,
        nonfree_points: n * n - free,
        closed_form,
    })
}

/// Representatives of the free orbits, smallest pair of each orbit.
pub fn free_orbit_reps(n: u64) -> Vec<(u64, u64)> {
    let mut seen = BTreeSet::new();
    let mut reps = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if seen.contains(&(i, j)) {
                continue;
            }
            let orb = d4_orbit(i, j, n);
            if orb.len() == 8 {
                reps.push((i, j));
            }
            seen.extend(orb);
        }
    }
    reps
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EighthPower {
    pub w: ZPoly,
    pub a: ZPoly,
    pub b: ZPoly,
    pub deg_b: usize,
    /// `(n-1)(n-3)/8` for odd `n`, `(n-2)(n-4)/8` for even `n`.
    pub deg_b_formula: i64,
}

pub fn deg_b_formula(n: u64) -> i64 {
    let n = n as i64;
    if n % 2 == 1 {
        (n - 1) * (n - 3) / 8
    } else {
        (n - 2) * (n - 4) / 8
    }
}

/// `W_n(P_T) = A_n B_n^8` with `B_n` the product over free orbit
/// representatives.
pub fn pt_eighth_power(n: u64, limits: &Limits) -> Result<EighthPower> {
    let w = pt_w(n, PtVariant::T, limits)?;
    let b = pt_product(n, &free_orbit_reps(n), PtVariant::T)?;
    let a = w.div_exact(&b.pow(8))?;
    Ok(EighthPower {
        deg_b: b.degree().unwrap_or(0),
        deg_b_formula: deg_b_formula(n),
        w,
        a,
        b,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PtGcd {
    pub gcd: ZPoly,
    pub degree: usize,
    /// `2n - 1` for odd `n`, `2n - 2` for even `n`.
    pub bound: usize,
}

/// `gcd(W_n(P_{2T+4}), W_n(P_T))`, primitive with positive leading term.
pub fn pt_gcd_check(n: u64, limits: &Limits) -> Result<PtGcd> {
    let w1 = pt_w(n, PtVariant::TwoTPlus4, limits)?;
    let w0 = pt_w(n, PtVariant::T, limits)?;
    let g = w1.gcd(&w0).primitive_part();
    let bound = if n % 2 == 1 { 2 * n - 1 } else { 2 * n - 2 } as usize;
    Ok(PtGcd {
        degree: g.degree().unwrap_or(0),
        gcd: g,
        bound,
    })
}

/// `P_{2T+4}(Z, Z) - 2 P_T(1, Z)`, which should vanish.
pub fn pt_identity_residual() -> SymPoly {
    let zt = vec!["Z".to_string(), "T".to_string()];
    let diag = pt_poly(PtVariant::TwoTPlus4)
        .substitute_monomials(zt.clone(), &[vec![1, 0], vec![1, 0], vec![0, 1]])
        .expect("shapes match");
    let edge = pt_poly(PtVariant::T)
        .substitute_monomials(zt, &[vec![0, 0], vec![1, 0], vec![0, 1]])
        .expect("shapes match");
    let two = BigRational::from_integer(BigInt::from(2));
    diag.sub(&edge.scale(&two)).expect("same variables")
}

/// The eight monomial substitutions generated by `(X,Y) -> (Y,X)` and
/// `(X,Y) -> (Y^-1,X)`, as images of `X1, X2` (and `T` fixed).
pub fn d4_substitutions() -> Vec<Vec<Vec<i64>>> {
    let mut out = Vec::new();
    for (sx, sy, swap) in [
        (1, 1, false),
        (-1, 1, false),
        (1, -1, false),
        (-1, -1, false),
        (1, 1, true),
        (-1, 1, true),
        (1, -1, true),
        (-1, -1, true),
    ] {
        let (x, y) = if swap { (vec![0, sx, 0], vec![sy, 0, 0]) } else { (vec![sx, 0, 0], vec![0, sy, 0]) };
        out.push(vec![x, y, vec![0, 0, 1]]);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FourthPower {
    /// The quotient and its fourth root.
    Yes { quotient: ZPoly, root: ZPoly },
    NotDivisible,
    NotSquare,
}

/// `A_n / W_1` (odd `n`) or `A_n / W_2` (even `n`) is a fourth power.
pub fn pt_fourth_power_check(n: u64, limits: &Limits) -> Result<FourthPower> {
    let ep = pt_eighth_power(n, limits)?;
    let base = pt_w(if n % 2 == 1 { 1 } else { 2 }, PtVariant::T, limits)?;
    let q = match ep.a.div_exact(&base) {
        Ok(q) => q,
        Err(Error::NotDivisible) => return Ok(FourthPower::NotDivisible),
        Err(e) => return Err(e),
    };
    let r = match q.sqrt().and_then(|s| s.sqrt()) {
        Ok(r) => r,
        Err(Error::NotSquare) => return Ok(FourthPower::NotSquare),
        Err(e) => return Err(e),
    };
    // sqrt normalizes to a positive leading term
    if r.pow(4) != q {
        return Ok(FourthPower::NotSquare);
    }
    Ok(FourthPower::Yes { quotient: q, root: r })
}

/// Whether the shifted exponents `m - m_0` generate `Z^N`, which makes
/// `xi -> (xi^m)_m` injective up to a common scalar.
pub fn separates_points(support: &Support) -> bool {
    let base = &support.monomials[0];
    let diffs: Vec<Vec<i64>> = support.monomials[1..]
        .iter()
        .map(|m| m.iter().zip(base).map(|(a, b)| a - b).collect())
        .collect();
    if diffs.len() < support.arity {
        return false;
    }
    let mat: Vec<Vec<BigInt>> = (0..support.arity)
        .map(|i| diffs.iter().map(|d| BigInt::from(d[i])).collect())
        .collect();
    let diag = crate::lattice::smith_diagonal(mat);
    diag.len() == support.arity && diag.iter().all(|d| d.is_one())
}
