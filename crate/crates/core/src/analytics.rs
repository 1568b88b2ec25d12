//! Mahler measures, growth tables, ranks of apparition, Zsigmondy scans and
//! the Romanoff-sum audit.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::f64::consts::PI;

use num_bigint::{BigInt, Sign};
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Pow, Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::config::{Execution, Limits};
use crate::cyclo::{eval_at, to_univariate};
use crate::dd;
use crate::error::{Error, Result};
use crate::factor::FactoredProduct;
use crate::ffield::{is_prime, w_mod_p};
use crate::laurent::LaurentPoly;
use crate::lattice::{nu, prime_factors, subgroups_of_order, FiniteSubgroup};
use crate::par;

fn ser_group<S: Serializer>(g: &FiniteSubgroup, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&g.key())
}

fn ser_big<S: Serializer>(b: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&b.to_string())
}

fn ser_factored<S: Serializer>(f: &FactoredProduct, s: S) -> std::result::Result<S::Ok, S::Error> {
    f.to_json().serialize(s)
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

/// Natural log of `|n|` from the bit length and the leading 64 bits.
pub fn log_abs(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    let shift = bits.saturating_sub(64);
    let head = (n.magnitude() >> shift).to_f64().expect("fits in 64 bits");
    head.ln() + shift as f64 * std::f64::consts::LN_2
}

// ---------------------------------------------------------------- Mahler

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MahlerConfig {
    pub refinement: u32,
    /// Largest accepted difference of `log M` between successive levels.
    pub tolerance: f64,
    pub exec: Execution,
}

impl Default for MahlerConfig {
    fn default() -> Self {
        MahlerConfig {
            refinement: 2,
            tolerance: 1e-3,
            exec: Execution::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MahlerEstimate {
    pub value: f64,
    pub log_value: f64,
    /// Grid nodes or Monte Carlo samples at the final level.
    pub nodes: u64,
    /// `|log M(level) - log M(level - 1)|`, or the standard error for Monte Carlo.
    pub error_indicator: f64,
    pub converged: bool,
    pub method: &'static str,
    /// `|lead| prod max(1, |root|)` for one variable.
    pub root_formula: Option<f64>,
}

/// Values below this are treated as zeros of `f` on the grid.
pub const SINGULAR_THRESHOLD: f64 = 1e-12;

fn float_terms(f: &LaurentPoly) -> Vec<(Vec<i64>, f64)> {
    f.terms()
        .map(|(m, c)| (m.clone(), c.to_f64().expect("finite coefficient")))
        .collect()
}

fn eval_angles(terms: &[(Vec<i64>, f64)], theta: &[f64]) -> Complex64 {
    terms
        .iter()
        .map(|(m, c)| {
            let phase: f64 = m.iter().zip(theta).map(|(&k, t)| k as f64 * t).sum();
            Complex64::from_polar(*c, phase)
        })
        .sum()
}

fn axis_nodes(arity: usize, level: u32) -> usize {
    let base = match arity {
        1 => 10,
        2 => 7,
        _ => 4,
    };
    1usize << (base + level).min(24)
}

/// Mean of `log|f|` on the `k^N` tensor grid; zero nodes are moved by half
/// a grid step in every coordinate.
fn grid_mean_log(terms: &[(Vec<i64>, f64)], arity: usize, k: usize, exec: Execution) -> f64 {
    let h = 2.0 * PI / k as f64;
    let table: Vec<Complex64> = (0..k).map(|t| Complex64::from_polar(1.0, t as f64 * h)).collect();
    let reduced: Vec<(Vec<usize>, f64)> = terms
        .iter()
        .map(|(m, c)| (m.iter().map(|&e| e.rem_euclid(k as i64) as usize).collect(), *c))
        .collect();
    let inner = k.pow(arity as u32 - 1);
    let rows: Vec<usize> = (0..k).collect();
    let sums = par::map(exec, &rows, |&i0| {
        let mut idx = vec![0usize; arity];
        idx[0] = i0;
        let mut s = 0.0;
        for mut r in 0..inner {
            for slot in idx.iter_mut().skip(1) {
                *slot = r % k;
                r /= k;
            }
            let v: Complex64 = reduced
                .iter()
                .map(|(m, c)| {
                    let t = m.iter().zip(&idx).map(|(a, b)| a * b).sum::<usize>() % k;
                    table[t] * *c
                })
                .sum();
            let mut a = v.norm();
            if a < SINGULAR_THRESHOLD {
                let theta: Vec<f64> = idx.iter().map(|&i| (i as f64 + 0.5) * h).collect();
                a = eval_angles(terms, &theta).norm().max(SINGULAR_THRESHOLD);
            }
            s += a.ln();
        }
        s
    });
    sums.iter().sum::<f64>() / (k as f64).powi(arity as i32)
}

fn monte_carlo_mean_log(terms: &[(Vec<i64>, f64)], arity: usize, samples: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6d61_686c);
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..samples {
        let theta: Vec<f64> = (0..arity).map(|_| rng.gen::<f64>() * 2.0 * PI).collect();
        let l = eval_angles(terms, &theta).norm().max(SINGULAR_THRESHOLD).ln();
        s += l;
        s2 += l * l;
    }
    let n = samples as f64;
    let mean = s / n;
    (mean, ((s2 / n - mean * mean).max(0.0) / n).sqrt())
}

/// Roots of `sum c_i z^i` by Aberth iteration; `c` has a non-zero top entry.
pub fn poly_roots(c: &[f64]) -> Vec<Complex64> {
    let deg = c.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    let lead = c[deg];
    let radius = 1.0 + c[..deg].iter().map(|x| (x / lead).abs()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..deg)
        .map(|j| Complex64::from_polar(radius * 0.5, 2.0 * PI * (j as f64 + 0.25) / deg as f64))
        .collect();
    let eval = |x: Complex64| {
        let mut p = Complex64::new(c[deg], 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &a in c[..deg].iter().rev() {
            dp = dp * x + p;
            p = p * x + a;
        }
        (p, dp)
    };
    for _ in 0..2000 {
        let mut moved: f64 = 0.0;
        for i in 0..deg {
            let (p, dp) = eval(z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulse: Complex64 = (0..deg).filter(|&j| j != i).map(|j| (z[i] - z[j]).inv()).sum();
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * repulse);
            if w.is_finite() {
                z[i] -= w;
                moved = moved.max(w.norm() / (1.0 + z[i].norm()));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

/// `M(f)` for one variable as `|lead| prod max(1, |root|)`.
pub fn mahler_roots(f: &LaurentPoly) -> Result<f64> {
    if f.arity() != 1 || f.is_zero() {
        return Err(Error::InvalidInput("root formula needs a non-zero polynomial in one variable".into()));
    }
    let (g, _) = to_univariate(f)?;
    let c: Vec<f64> = g.coeffs().iter().map(|x| x.to_f64().expect("finite")).collect();
    let lead = c.last().expect("non-zero").abs();
    Ok(poly_roots(&c).iter().fold(lead, |acc, r| acc * r.norm().max(1.0)))
}

/// `exp` of the mean of `log|f|` over the real torus.
pub fn mahler(f: &LaurentPoly, cfg: &MahlerConfig) -> Result<MahlerEstimate> {
    if f.is_zero() {
        return Err(Error::InvalidInput("f must be non-zero".into()));
    }
    let terms = float_terms(f);
    let arity = f.arity();
    let root_formula = if arity == 1 { Some(mahler_roots(f)?) } else { None };
    if arity == 0 || f.terms().all(|(m, _)| m.iter().all(|&e| e == 0)) {
        let c = f.value_at_one().abs().to_f64().expect("finite");
        return Ok(MahlerEstimate {
            value: c,
            log_value: c.ln(),
            nodes: 1,
            error_indicator: 0.0,
            converged: true,
            method: "constant",
            root_formula,
        });
    }
    let (log_value, nodes, err, method) = if arity >= 4 {
        let samples = 1u64 << (14 + cfg.refinement.min(10));
        let (m, se) = monte_carlo_mean_log(&terms, arity, samples);
        (m, samples, se, "monte-carlo")
    } else {
        let k = axis_nodes(arity, cfg.refinement);
        let fine = grid_mean_log(&terms, arity, k, cfg.exec);
        let coarse = grid_mean_log(&terms, arity, k / 2, cfg.exec);
        (fine, (k as u64).pow(arity as u32), (fine - coarse).abs(), "grid")
    };
    Ok(MahlerEstimate {
        value: log_value.exp(),
        log_value,
        nodes,
        error_indicator: err,
        converged: err <= cfg.tolerance,
        method,
        root_formula,
    })
}

/// Mahler measure over the subtorus `z_i = prod_j w_j^{param[i][j]}`.
pub fn mahler_on_subgroup(f: &LaurentPoly, param: &[Vec<i64>], cfg: &MahlerConfig) -> Result<MahlerEstimate> {
    mahler(&f.compose_monomial(param)?, cfg)
}

// ---------------------------------------------------------------- growth

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthRow {
    pub n: u64,
    pub sign: i8,
    pub bits: u64,
    pub log_abs_w: f64,
    /// `log|W_n| / n^N`.
    pub normalized: f64,
    /// `|W_n|^{1/n^N}`.
    pub estimate: f64,
    pub reference_log_m: f64,
    pub residual: f64,
    /// Some point of `mu_n^N` is a zero of `f`, so a factor was skipped.
    pub vanishing: bool,
    /// Prime factors below 1000, with `...` for the rest.
    pub head: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthReport {
    pub reference: MahlerEstimate,
    pub rows: Vec<GrowthRow>,
}

impl GrowthReport {
    pub const CSV_COLUMNS: [&'static str; 10] = [
        "n", "sign", "bits", "log_abs_w", "normalized", "estimate", "reference_log_m", "residual", "vanishing", "head",
    ];

    pub fn to_csv(&self) -> String {
        csv_string(
            &Self::CSV_COLUMNS,
            self.rows.iter().map(|r| {
                vec![
                    r.n.to_string(),
                    r.sign.to_string(),
                    r.bits.to_string(),
                    format!("{:.6}", r.log_abs_w),
                    format!("{:.6}", r.normalized),
                    format!("{:.6}", r.estimate),
                    format!("{:.6}", r.reference_log_m),
                    format!("{:.6}", r.residual),
                    r.vanishing.to_string(),
                    r.head.clone(),
                ]
            }),
        )
    }
}

fn factored_head(w: &BigInt) -> String {
    let fp = FactoredProduct::factor(w, 1000);
    let mut parts: Vec<String> = fp
        .factors()
        .iter()
        .filter(|(p, _)| **p < 1000u32.into())
        .map(|(p, &e)| if e == 1 { p.to_string() } else { format!("{p}^{e}") })
        .collect();
    let covered = fp
        .factors()
        .iter()
        .filter(|(p, _)| **p < 1000u32.into())
        .fold(BigInt::one(), |acc, (p, &e)| acc * BigInt::from(p.clone()).pow(e));
    if covered != w.abs() {
        parts.push("...".into());
    }
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join(" * ")
    }
}

fn has_zero_on(f: &LaurentPoly, group: &FiniteSubgroup, limits: &Limits) -> Result<bool> {
    for class in group.cyclic_subgroups(limits)? {
        if eval_at(f, &class.generator)?.is_zero() {
            return Ok(true);
        }
    }
    Ok(false)
}

/// `(n, log|W_n|/n^N)` for `n = 1..=n_max` against `log M(f)`.
pub fn growth_experiment(f: &LaurentPoly, n_max: u64, cfg: &MahlerConfig, limits: &Limits) -> Result<GrowthReport> {
    let reference = mahler(f, cfg)?;
    let ns: Vec<u64> = (1..=n_max).collect();
    let rows = par::try_map(limits.exec, &ns, |&n| -> Result<GrowthRow> {
        let w = dd::w_n(f, n, limits)?;
        let vanishing = has_zero_on(f, &FiniteSubgroup::mu_n(f.arity(), n)?, limits)?;
        let log_abs_w = log_abs(&w);
        let normalized = log_abs_w / (n as f64).powi(f.arity() as i32);
        Ok(GrowthRow {
            n,
            sign: match w.sign() {
                Sign::Minus => -1,
                Sign::NoSign => 0,
                Sign::Plus => 1,
            },
            bits: w.bits(),
            log_abs_w,
            normalized,
            estimate: normalized.exp(),
            reference_log_m: reference.log_value,
            residual: normalized - reference.log_value,
            vanishing,
            head: factored_head(&w),
        })
    })?;
    Ok(GrowthReport { reference, rows })
}

// ---------------------------------------------------------------- subgroup lattices

/// Subgroups of order at most `bound` with their maximal proper subgroups.
#[derive(Clone, Debug)]
pub struct SubgroupLattice {
    pub groups: Vec<FiniteSubgroup>,
    /// Indices into `groups` of the subgroups of prime index.
    pub maximal: Vec<Vec<usize>>,
}

impl SubgroupLattice {
    pub fn new(arity: usize, bound: u64, cyclic_only: bool, limits: &Limits) -> Result<Self> {
        let mut groups = Vec::new();
        for n in 1..=bound {
            for g in subgroups_of_order(arity, n, limits)? {
                if !cyclic_only || g.is_cyclic() {
                    groups.push(g);
                }
            }
            if groups.len() > limits.max_subgroups {
                return Err(Error::cap("subgroups", groups.len() as u128, limits.max_subgroups as u128));
            }
        }
        let mut by_order: HashMap<u64, Vec<usize>> = HashMap::new();
        for (i, g) in groups.iter().enumerate() {
            by_order.entry(g.order()).or_default().push(i);
        }
        let maximal = par::try_map(limits.exec, &groups, |g| -> Result<Vec<usize>> {
            let mut out = Vec::new();
            for q in prime_factors(g.order()) {
                for &j in by_order.get(&(g.order() / q)).into_iter().flatten() {
                    if g.contains(&groups[j])? {
                        out.push(j);
                    }
                }
            }
            Ok(out)
        })?;
        Ok(SubgroupLattice { groups, maximal })
    }
}

// ---------------------------------------------------------------- ranks of apparition

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ApparitionRecord {
    pub p: u64,
    #[serde(serialize_with = "ser_group")]
    pub subgroup: FiniteSubgroup,
    pub order: u64,
    pub cyclic: bool,
}

pub const RA_CSV_COLUMNS: [&str; 4] = ["p", "order", "cyclic", "group"];

pub fn apparition_csv(records: &[ApparitionRecord]) -> String {
    csv_string(
        &RA_CSV_COLUMNS,
        records
            .iter()
            .map(|r| vec![r.p.to_string(), r.order.to_string(), r.cyclic.to_string(), r.subgroup.key()]),
    )
}

/// Minimal subgroups of order at most `bound` whose `W` is divisible by `p`,
/// taken from a precomputed lattice. Every record is checked against `p | V`.
pub fn ra_scan_lattice(
    f: &LaurentPoly,
    p: u64,
    bound: u64,
    lattice: &SubgroupLattice,
    limits: &Limits,
) -> Result<Vec<ApparitionRecord>> {
    if !is_prime(p) {
        return Err(Error::InvalidInput(format!("{p} is not prime")));
    }
    let idx: Vec<usize> = (0..lattice.groups.len())
        .filter(|&i| lattice.groups[i].order() <= bound)
        .collect();
    let residues = par::try_map(limits.exec, &idx, |&i| w_mod_p(f, &lattice.groups[i], p, limits))?;
    let divisible: BTreeSet<usize> = idx
        .iter()
        .zip(&residues)
        .filter(|(_, r)| **r == 0)
        .map(|(i, _)| *i)
        .collect();
    let mut out = Vec::new();
    for &i in &divisible {
        if lattice.maximal[i].iter().any(|j| divisible.contains(j)) {
            continue;
        }
        let g = &lattice.groups[i];
        let v = dd::v(f, g, limits)?;
        if !v.is_multiple_of(&BigInt::from(p)) {
            return Err(Error::Invariant(format!("{p} is primitive for {g} but does not divide V = {v}")));
        }
        out.push(ApparitionRecord {
            p,
            subgroup: g.clone(),
            order: g.order(),
            cyclic: g.is_cyclic(),
        });
    }
    out.sort_by(|a, b| a.subgroup.cmp(&b.subgroup));
    Ok(out)
}

/// Ranks of apparition of `p` among cyclic subgroups of order at most `bound`.
pub fn ra_scan(f: &LaurentPoly, p: u64, bound: u64, limits: &Limits) -> Result<Vec<ApparitionRecord>> {
    let lattice = SubgroupLattice::new(f.arity(), bound, true, limits)?;
    ra_scan_lattice(f, p, bound, &lattice, limits)
}

/// As `ra_scan`, but over every subgroup, cyclic or not.
pub fn ra_scan_full(f: &LaurentPoly, p: u64, bound: u64, limits: &Limits) -> Result<Vec<ApparitionRecord>> {
    let lattice = SubgroupLattice::new(f.arity(), bound, false, limits)?;
    ra_scan_lattice(f, p, bound, &lattice, limits)
}

// ---------------------------------------------------------------- Zsigmondy

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ZsigRecord {
    #[serde(serialize_with = "ser_group")]
    pub subgroup: FiniteSubgroup,
    pub order: u64,
    #[serde(serialize_with = "ser_big")]
    pub w: BigInt,
    #[serde(serialize_with = "ser_factored")]
    pub primitive_part: FactoredProduct,
    pub in_zsigmondy_set: bool,
}

pub const ZSIG_CSV_COLUMNS: [&str; 5] = ["order", "group", "w", "primitive_part", "in_zsigmondy_set"];

pub fn zsig_csv(records: &[ZsigRecord]) -> String {
    csv_string(
        &ZSIG_CSV_COLUMNS,
        records.iter().map(|r| {
            vec![
                r.order.to_string(),
                r.subgroup.key(),
                r.w.to_string(),
                r.primitive_part.to_string(),
                r.in_zsigmondy_set.to_string(),
            ]
        }),
    )
}

/// `W` with every prime shared with some `W` of a maximal subgroup removed.
pub fn primitive_part(w: &BigInt, lower: &[&BigInt]) -> BigInt {
    let mut rest = w.clone();
    for l in lower {
        loop {
            let g = rest.gcd(l);
            if g.is_one() {
                break;
            }
            rest /= g;
        }
    }
    rest.abs()
}

/// Primitive parts of `W` over cyclic subgroups of order at most `bound`.
pub fn zsig_scan(f: &LaurentPoly, bound: u64, limits: &Limits) -> Result<Vec<ZsigRecord>> {
    let lattice = SubgroupLattice::new(f.arity(), bound, true, limits)?;
    zsig_scan_lattice(f, &lattice, limits)
}

fn zsig_scan_lattice(f: &LaurentPoly, lattice: &SubgroupLattice, limits: &Limits) -> Result<Vec<ZsigRecord>> {
    let ws = par::try_map(limits.exec, &lattice.groups, |g| dd::w(f, g, limits))?;
    let idx: Vec<usize> = (0..lattice.groups.len()).collect();
    Ok(par::map(limits.exec, &idx, |&i| {
        let lower: Vec<&BigInt> = lattice.maximal[i].iter().map(|&j| &ws[j]).collect();
        let prim = primitive_part(&ws[i], &lower);
        ZsigRecord {
            subgroup: lattice.groups[i].clone(),
            order: lattice.groups[i].order(),
            w: ws[i].clone(),
            in_zsigmondy_set: prim.is_one(),
            primitive_part: FactoredProduct::factor(&prim, limits.trial_bound),
        }
    }))
}

// ---------------------------------------------------------------- Romanoff audit

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RomanoffReport {
    pub arity: usize,
    pub x_bound: u64,
    pub eps: f64,
    #[serde(serialize_with = "ser_big")]
    pub l1_norm: BigInt,
    /// `log sum |a_m|`, an upper bound for `sup log|f|` on the torus.
    pub c_prime_bound: f64,
    pub subgroup_count: usize,
    /// `sum_{n <= x} n nu_N(n)`.
    pub nu_weight: u64,
    /// `sum |Lambda|` over the enumerated subgroups.
    pub enumerated_weight: u64,
    pub log_abs_a: f64,
    pub log_rhs: f64,
    /// `|A_f(x)| <= (sum |a_m|)^{nu_weight}`, compared exactly.
    pub inequality_holds: bool,
    /// `|W_f(Lambda)| <= (sum |a_m|)^{|Lambda|}` for every enumerated subgroup.
    pub per_subgroup_holds: bool,
    /// `D_f(x)` counting a prime once per rank of apparition.
    pub d_with_multiplicity: f64,
    /// `D_f(x)` counting each prime once.
    pub d_distinct_primes: f64,
    pub loglog_a: Option<f64>,
    pub romanoff_partial: f64,
    pub romanoff_bound: f64,
    /// `max(0, partial - (N+1)/eps)`.
    pub empirical_c: f64,
    pub incomplete_factorizations: usize,
}

impl RomanoffReport {
    pub fn to_csv(&self) -> String {
        let v = serde_json::to_value(self).expect("serializable");
        let rows = v
            .as_object()
            .expect("struct")
            .iter()
            .map(|(k, x)| vec![k.clone(), x.to_string().trim_matches('"').to_string()])
            .collect::<Vec<_>>();
        csv_string(&["key", "value"], rows)
    }
}

pub fn romanoff_audit(f: &LaurentPoly, x_bound: u64, eps: f64, limits: &Limits) -> Result<RomanoffReport> {
    if f.is_zero() {
        return Err(Error::InvalidInput("f must be non-zero".into()));
    }
    if eps <= 0.0 {
        return Err(Error::InvalidInput("eps must be positive".into()));
    }
    let arity = f.arity();
    let l1 = f.l1_norm();
    let all = SubgroupLattice::new(arity, x_bound, false, limits)?;
    let ws = par::try_map(limits.exec, &all.groups, |g| dd::w(f, g, limits))?;
    let a: BigInt = ws.iter().product();
    let nu_weight: u64 = (1..=x_bound).map(|n| n * nu(arity, n)).sum();
    let enumerated_weight: u64 = all.groups.iter().map(FiniteSubgroup::order).sum();
    let rhs = Pow::pow(&l1, nu_weight);
    let inequality_holds = a.abs() <= rhs;
    let per_subgroup_holds = all
        .groups
        .iter()
        .zip(&ws)
        .all(|(g, w)| w.abs() <= Pow::pow(&l1, g.order()));

    let cyclic: Vec<usize> = (0..all.groups.len()).filter(|&i| all.groups[i].is_cyclic()).collect();
    let mut d_mult = 0.0;
    let mut partial = 0.0;
    let mut primes: BTreeMap<BigInt, f64> = BTreeMap::new();
    let mut incomplete = 0;
    for &i in &cyclic {
        let lower: Vec<&BigInt> = all.maximal[i].iter().map(|&j| &ws[j]).collect();
        let prim = FactoredProduct::factor(&primitive_part(&ws[i], &lower), limits.trial_bound);
        if !prim.is_complete() {
            incomplete += 1;
        }
        let d: f64 = prim
            .factors()
            .keys()
            .map(|p| {
                let pb = BigInt::from(p.clone());
                let t = log_abs(&pb) / pb.to_f64().expect("finite");
                primes.insert(pb, t);
                t
            })
            .sum();
        d_mult += d;
        partial += d / (all.groups[i].order() as f64).powf(eps);
    }
    let log_abs_a = log_abs(&a);
    let bound = (arity as f64 + 1.0) / eps;
    Ok(RomanoffReport {
        arity,
        x_bound,
        eps,
        c_prime_bound: log_abs(&l1),
        l1_norm: l1.clone(),
        subgroup_count: all.groups.len(),
        nu_weight,
        enumerated_weight,
        log_abs_a,
        log_rhs: nu_weight as f64 * log_abs(&l1),
        inequality_holds,
        per_subgroup_holds,
        d_with_multiplicity: d_mult,
        d_distinct_primes: primes.values().sum(),
        loglog_a: (log_abs_a > 0.0).then(|| log_abs_a.ln()),
        romanoff_partial: partial,
        romanoff_bound: bound,
        empirical_c: (partial - bound).max(0.0),
        incomplete_factorizations: incomplete,
    })
}

// ---------------------------------------------------------------- density

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityRow {
    pub p: u64,
    /// Smallest order of a rank of apparition within `p^theta`, if any.
    pub min_order: Option<u64>,
    /// `sum log q / q` over qualifying primes `q <= p`.
    pub partial_sum: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityReport {
    pub theta: f64,
    pub p_bound: u64,
    pub order_bound: u64,
    pub rows: Vec<DensityRow>,
    pub partial_sum: f64,
    /// `(N+1) theta`.
    pub density_bound: f64,
}

impl DensityReport {
    pub fn primes(&self) -> Vec<u64> {
        self.rows.iter().filter(|r| r.min_order.is_some()).map(|r| r.p).collect()
    }

    pub fn to_csv(&self) -> String {
        csv_string(
            &["p", "min_order", "partial_sum"],
            self.rows.iter().map(|r| {
                vec![
                    r.p.to_string(),
                    r.min_order.map(|o| o.to_string()).unwrap_or_default(),
                    format!("{:.6}", r.partial_sum),
                ]
            }),
        )
    }
}

/// Primes `p <= p_bound` with a rank of apparition of order at most
/// `min(p^theta, order_bound)`.
pub fn density_report(
    f: &LaurentPoly,
    theta: f64,
    p_bound: u64,
    order_bound: u64,
    limits: &Limits,
) -> Result<DensityReport> {
    if theta < 0.0 {
        return Err(Error::InvalidInput("theta must be non-negative".into()));
    }
    let lattice = SubgroupLattice::new(f.arity(), order_bound, true, limits)?;
    let primes: Vec<u64> = (2..=p_bound).filter(|&p| is_prime(p)).collect();
    let mins = par::try_map(limits.exec, &primes, |&p| -> Result<Option<u64>> {
        let cap = ((p as f64).powf(theta) + 1e-9).floor() as u64;
        let recs = ra_scan_lattice(f, p, cap.min(order_bound), &lattice, limits)?;
        Ok(recs.iter().map(|r| r.order).min())
    })?;
    let mut running = 0.0;
    let rows = primes
        .iter()
        .zip(mins)
        .map(|(&p, min_order)| {
            if min_order.is_some() {
                running += (p as f64).ln() / p as f64;
            }
            DensityRow {
                p,
                min_order,
                partial_sum: running,
            }
        })
        .collect();
    Ok(DensityReport {
        theta,
        p_bound,
        order_bound,
        rows,
        partial_sum: running,
        density_bound: (f.arity() as f64 + 1.0) * theta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffield::mult_order;
    use proptest::prelude::*;

    fn lim() -> Limits {
        Limits::default()
    }

    fn poly(s: &str) -> LaurentPoly {
        s.parse().unwrap()
    }

    /// `L(chi_{-3}, 2)` by direct summation with a tail estimate.
    fn l_chi3_2() -> f64 {
        let mut s = 0.0;
        for n in 1..2_000_000u64 {
            let chi = match n % 3 {
                1 => 1.0,
                2 => -1.0,
                _ => 0.0,
            };
            s += chi / (n as f64 * n as f64);
        }
        s
    }

    #[test]
    fn log_abs_matches_float() {
        let n = BigInt::from(3).pow(200u32);
        assert!((log_abs(&n) - 200.0 * 3f64.ln()).abs() < 1e-9);
        assert_eq!(log_abs(&BigInt::from(-1)), 0.0);
    }

    #[test]
    fn mahler_examples() {
        let cfg = MahlerConfig::default();
        let m = mahler(&poly("X1 - 2"), &cfg).unwrap();
        assert!((m.value - 2.0).abs() < 1e-9 && m.converged);
        assert!((m.root_formula.unwrap() - 2.0).abs() < 1e-9);
        let m = mahler(&poly("X1 - X2 - 4"), &cfg).unwrap();
        assert!((m.value - 4.0).abs() < 1e-9);
        // 3 sqrt(3) / (4 pi) L(chi_{-3}, 2)
        let smyth = (3.0 * 3f64.sqrt() / (4.0 * PI) * l_chi3_2()).exp();
        let m = mahler(&poly("1 + X1 + X2"), &cfg).unwrap();
        assert!((m.value - smyth).abs() < 1e-4, "{} vs {}", m.value, smyth);
        assert!((smyth - 1.3814).abs() < 1e-4);
    }

    #[test]
    fn mahler_root_formula_agreement() {
        for s in ["X1^2 - X1 - 1", "X1 - 1", "3*X1^3 + X1 - 7", "X1^4 + X1^3 + X1^2 + X1 + 1", "2*X1 - 1"] {
            let m = mahler(&poly(s), &MahlerConfig::default()).unwrap();
            assert!((m.value - m.root_formula.unwrap()).abs() < 1e-3, "{s}: {m:?}");
        }
    }

    #[test]
    fn mahler_subgroup_examples() {
        let cfg = MahlerConfig::default();
        let m = mahler_on_subgroup(&poly("X1 - X2 - 4"), &[vec![1], vec![1]], &cfg).unwrap();
        assert!((m.value - 4.0).abs() < 1e-12);
        let m = mahler_on_subgroup(&poly("X1 + X2"), &[vec![1], vec![-1]], &cfg).unwrap();
        assert!((m.value - 1.0).abs() < 1e-3);
        let full = mahler_on_subgroup(&poly("1 + X1 + X2"), &[vec![1, 0], vec![0, 1]], &cfg).unwrap();
        assert_eq!(full, mahler(&poly("1 + X1 + X2"), &cfg).unwrap());
    }

    #[test]
    fn monte_carlo_for_four_variables() {
        let m = mahler(&poly("X1 + X2 + X3 + X4 + 9"), &MahlerConfig::default()).unwrap();
        assert_eq!(m.method, "monte-carlo");
        // |X1 + X2 + X3 + X4| <= 4 < 9, so log M = log 9 by the mean value property
        assert!((m.value - 9.0).abs() < 0.05, "{m:?}");
    }

    #[test]
    fn growth_examples() {
        let cfg = MahlerConfig::default();
        let g = growth_experiment(&poly("X1 - 2"), 30, &cfg, &lim()).unwrap();
        let last = g.rows.last().unwrap();
        assert!((last.estimate - 2.0).abs() / 2.0 < 0.01);
        let g = growth_experiment(&poly("X1 - X2 - 4"), 8, &cfg, &lim()).unwrap();
        assert_eq!(g.rows[1].head, "2^6 * 3");
        assert!(g.to_csv().starts_with("n,sign,bits"));
        let lind = growth_experiment(&poly("X1 + X2 + X1^-1 + X2^-1 - 3"), 6, &cfg, &lim()).unwrap();
        assert_eq!(lind.rows.len(), 6);
    }

    #[test]
    fn ra_examples() {
        let f = poly("2*X1 - 1");
        let r = ra_scan(&f, 7, 20, &lim()).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].order, 3);
        assert!(ra_scan(&f, 2, 20, &lim()).unwrap().is_empty());
        assert!(ra_scan(&f, 8, 20, &lim()).is_err());
    }

    #[test]
    fn ra_orders_match_multiplicative_order() {
        let f = poly("2*X1 - 1");
        for p in [3u64, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47] {
            let r = ra_scan(&f, p, 30, &lim()).unwrap();
            let ord = mult_order(2, p);
            if ord <= 30 {
                assert_eq!(r.iter().map(|x| x.order).collect::<Vec<_>>(), vec![ord], "p={p}");
            } else {
                assert!(r.is_empty());
            }
        }
    }

    #[test]
    fn full_scan_records_are_cyclic() {
        let f = poly("X1 - X2 - 4");
        for p in [2u64, 3, 5, 7, 13] {
            for r in ra_scan_full(&f, p, 12, &lim()).unwrap() {
                assert!(r.cyclic, "{r:?}");
            }
        }
    }

    #[test]
    fn zsig_examples() {
        let f = poly("2*X1 - 1");
        let z = zsig_scan(&f, 12, &lim()).unwrap();
        let by_order: BTreeMap<u64, bool> = z.iter().map(|r| (r.order, r.in_zsigmondy_set)).collect();
        assert!(by_order[&6]);
        assert!(!by_order[&5]);
        assert!(by_order[&1]);
        for r in &z {
            assert_eq!(r.in_zsigmondy_set, r.primitive_part.value().abs().is_one());
        }
    }

    #[test]
    fn primitive_primes_are_ranks_of_apparition() {
        let f = poly("2*X1 - 1");
        let z = zsig_scan(&f, 20, &lim()).unwrap();
        for q in [3u64, 5, 7, 11, 13, 17, 31, 41, 43, 73, 127, 151, 241, 257, 331] {
            for r in &z {
                let divides = r.primitive_part.exponent_of(q) > 0;
                let ra = ra_scan(&f, q, r.order, &lim()).unwrap();
                assert_eq!(divides, ra.iter().any(|x| x.subgroup == r.subgroup), "q={q} n={}", r.order);
                // classical oracle: q is primitive for mu_n iff ord_q(2) = n
                assert_eq!(divides, mult_order(2, q) == r.order);
            }
        }
    }

    #[test]
    fn romanoff_examples() {
        let f = poly("X1 - X2 - 4");
        let r = romanoff_audit(&f, 4, 1.0, &lim()).unwrap();
        assert!((r.c_prime_bound - 6f64.ln()).abs() < 1e-12);
        assert!(r.inequality_holds && r.per_subgroup_holds);
        assert_eq!(r.nu_weight, r.enumerated_weight);
        assert_eq!(r.romanoff_bound, 3.0);
        assert!(r.d_with_multiplicity >= r.d_distinct_primes);
        assert!(r.to_csv().contains("inequality_holds,true"));
    }

    #[test]
    fn density_examples() {
        let f = poly("2*X1 - 1");
        let d = density_report(&f, 1.0, 50, 50, &lim()).unwrap();
        let odd: Vec<u64> = (3..=50).filter(|&p| is_prime(p)).collect();
        assert_eq!(d.primes(), odd);
        // theta = 0: only primes dividing f(1) = 1, so none
        assert!(density_report(&f, 0.0, 50, 50, &lim()).unwrap().primes().is_empty());
        let g = poly("X1 - X2 - 4");
        let d0 = density_report(&g, 0.0, 30, 4, &lim()).unwrap();
        assert_eq!(d0.primes(), vec![2]);
        let small = density_report(&g, 0.5, 20, 10, &lim()).unwrap();
        let big = density_report(&g, 0.5, 40, 10, &lim()).unwrap();
        assert!(small.partial_sum <= big.partial_sum);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn quadrature_matches_roots(c in prop::collection::vec(-6i64..=6, 2..6)) {
            prop_assume!(*c.last().unwrap() != 0);
            let f = LaurentPoly::from_terms(1, c.iter().enumerate().map(|(i, &v)| (vec![i as i64], v))).unwrap();
            let m = mahler(&f, &MahlerConfig::default()).unwrap();
            let r = m.root_formula.unwrap();
            // zeros on the circle slow the grid down; compare logs
            prop_assert!((m.log_value - r.ln()).abs() < 5e-3, "{} vs {}", m.value, r);
        }

        #[test]
        fn zsig_flag_matches_primitive_part(a in 1i64..6, b in -5i64..6) {
            prop_assume!(b != 0 && a != b);
            let f = LaurentPoly::from_terms(1, [(vec![1], a), (vec![0], -b)]).unwrap();
            for r in zsig_scan(&f, 10, &lim()).unwrap() {
                prop_assert_eq!(r.in_zsigmondy_set, r.primitive_part.value().abs().is_one());
                prop_assert!(r.w.is_multiple_of(&r.primitive_part.value()));
            }
        }
    }
}
