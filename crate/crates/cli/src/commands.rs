//! Rendering of every subcommand to a single output string.

use std::fmt::Write as _;

use ddseq::analytics::{self, MahlerConfig};
use ddseq::lattice::{nu, subgroups_of_order};
use ddseq::symbolic::{self, FourthPower, PtVariant, Support};
use ddseq::{dd, Error, FactoredProduct, FiniteSubgroup, LaurentPoly, Limits, Result};
use serde_json::{json, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Csv,
    Json,
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn csv_line(fields: &[String]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(fields).expect("in-memory write");
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

/// `v = factored`, or just `v` when both read the same.
fn value_line(fp: &FactoredProduct) -> String {
    let v = fp.value().to_string();
    let f = fp.to_string();
    if v == f {
        v
    } else {
        format!("{v} = {f}")
    }
}

/// Rows `a,b;c,d` of an integer matrix.
pub fn parse_matrix(text: &str) -> Result<Vec<Vec<i64>>> {
    let bad = |msg: &str| Error::Parse {
        pos: 0,
        msg: format!("integer matrix: {msg}"),
    };
    let rows: Vec<Vec<i64>> = text
        .split(';')
        .map(|row| {
            row.split(',')
                .map(|x| x.trim().parse::<i64>().map_err(|_| bad(&format!("bad entry {x:?}"))))
                .collect()
        })
        .collect::<Result<_>>()?;
    if rows.is_empty() || rows.iter().any(|r| r.len() != rows[0].len()) {
        return Err(bad("rows must have equal length"));
    }
    Ok(rows)
}

pub fn w(f: &LaurentPoly, g: &FiniteSubgroup, fmt: Format, limits: &Limits) -> Result<String> {
    let value = dd::w(f, g, limits)?;
    let fp = dd::factor_value(&value, limits);
    Ok(match fmt {
        Format::Json => pretty(&json!({
            "group": g.key(),
            "value": value.to_string(),
            "factored": fp.to_json(),
        })),
        Format::Csv => csv_line(&["group".into(), "value".into(), "factored".into()])
            + &csv_line(&[g.key(), value.to_string(), fp.to_string()]),
        Format::Text => value_line(&fp) + "\n",
    })
}

/// CSV columns of `factor`.
pub const FACTOR_COLUMNS: [&str; 6] = ["order", "group", "generator", "c", "exponent", "vanishes"];

pub fn factor(f: &LaurentPoly, g: &FiniteSubgroup, fmt: Format, limits: &Limits) -> Result<String> {
    let rows = dd::factor_w(f, g, limits)?;
    let total = dd::w(f, g, limits)?;
    let fp = dd::factor_value(&total, limits);
    Ok(match fmt {
        Format::Json => pretty(&json!({
            "group": g.key(),
            "rows": rows.iter().map(|r| json!({
                "order": r.subgroup.order(),
                "group": r.subgroup.key(),
                "generator": r.generator.to_string(),
                "c": r.c.to_string(),
                "exponent": r.exponent,
                "vanishes": r.vanishes,
            })).collect::<Vec<_>>(),
            "w": total.to_string(),
            "factored": fp.to_json(),
        })),
        Format::Csv => {
            let mut out = csv_line(&FACTOR_COLUMNS.map(String::from));
            for r in &rows {
                out += &csv_line(&[
                    r.subgroup.order().to_string(),
                    r.subgroup.key(),
                    r.generator.to_string(),
                    r.c.to_string(),
                    r.exponent.to_string(),
                    r.vanishes.to_string(),
                ]);
            }
            out
        }
        Format::Text => {
            let mut out = String::from("order\tgenerator\tC\t|S|\n");
            for r in &rows {
                let mark = if r.vanishes { "\t(vanishes)" } else { "" };
                let _ = writeln!(out, "{}\t{}\t{}\t{}{mark}", r.subgroup.order(), r.generator, r.c, r.exponent);
            }
            let _ = writeln!(out, "W = {}", value_line(&fp));
            out
        }
    })
}

pub fn ra(f: &LaurentPoly, p: u64, max_order: u64, all: bool, fmt: Format, limits: &Limits) -> Result<String> {
    let recs = if all {
        analytics::ra_scan_full(f, p, max_order, limits)?
    } else {
        analytics::ra_scan(f, p, max_order, limits)?
    };
    Ok(match fmt {
        Format::Json => pretty(&serde_json::to_value(&recs).expect("serializable")),
        _ => analytics::apparition_csv(&recs),
    })
}

pub fn zsig(f: &LaurentPoly, max_order: u64, fmt: Format, limits: &Limits) -> Result<String> {
    let recs = analytics::zsig_scan(f, max_order, limits)?;
    Ok(match fmt {
        Format::Json => pretty(&serde_json::to_value(&recs).expect("serializable")),
        _ => analytics::zsig_csv(&recs),
    })
}

pub fn growth(f: &LaurentPoly, n_max: u64, cfg: &MahlerConfig, fmt: Format, limits: &Limits) -> Result<String> {
    let rep = analytics::growth_experiment(f, n_max, cfg, limits)?;
    Ok(match fmt {
        Format::Json => pretty(&serde_json::to_value(&rep).expect("serializable")),
        _ => rep.to_csv(),
    })
}

pub fn mahler(f: &LaurentPoly, param: Option<&str>, cfg: &MahlerConfig, fmt: Format) -> Result<String> {
    let est = match param {
        Some(text) => analytics::mahler_on_subgroup(f, &parse_matrix(text)?, cfg)?,
        None => analytics::mahler(f, cfg)?,
    };
    Ok(match fmt {
        Format::Json => pretty(&serde_json::to_value(&est).expect("serializable")),
        Format::Csv => {
            csv_line(&["value", "log_value", "nodes", "error_indicator", "converged", "method", "root_formula"].map(String::from))
                + &csv_line(&[
                    format!("{:.10}", est.value),
                    format!("{:.10}", est.log_value),
                    est.nodes.to_string(),
                    format!("{:e}", est.error_indicator),
                    est.converged.to_string(),
                    est.method.to_string(),
                    est.root_formula.map(|r| format!("{r:.10}")).unwrap_or_default(),
                ])
        }
        Format::Text => {
            let mut out = format!("{:.4}\n", est.value);
            if !est.converged {
                let _ = writeln!(out, "warning: not converged (error indicator {:e})", est.error_indicator);
            }
            out
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum PtCheck {
    W,
    EighthPower,
    Orbits,
    Gcd,
    Identity,
    FourthPower,
    All,
}

pub fn ptfamily(n: u64, check: PtCheck, fmt: Format, limits: &Limits) -> Result<String> {
    let mut lines: Vec<(String, Value)> = Vec::new();
    let want = |c: PtCheck| check == c || check == PtCheck::All;
    if want(PtCheck::W) {
        let w = symbolic::pt_w(n, PtVariant::T, limits)?;
        lines.push((
            format!("W_{n}(P_T) = {}", w.display_in("T")),
            json!({"check": "w", "n": n, "degree": w.degree(), "poly": w.display_in("T")}),
        ));
    }
    if want(PtCheck::EighthPower) {
        let (deg, divides, formula) = match symbolic::pt_eighth_power(n, limits) {
            Ok(ep) => (Some(ep.deg_b), true, ep.deg_b_formula),
            Err(Error::NotDivisible) => (None, false, symbolic::deg_b_formula(n)),
            Err(e) => return Err(e),
        };
        let shown = deg.map_or("?".to_string(), |d| d.to_string());
        lines.push((
            format!("deg B_{n} = {shown}, B^8 | W: {divides}"),
            json!({"check": "eighth-power", "n": n, "deg_b": deg, "deg_b_formula": formula, "divides": divides}),
        ));
    }
    if want(PtCheck::Orbits) {
        let c = symbolic::pt_orbit_count(n)?;
        lines.push((
            format!(
                "k({n}) = {} (free orbits {}, non-free points {}, closed form {})",
                c.free_points, c.free_orbits, c.nonfree_points, c.closed_form
            ),
            json!({"check": "orbits", "n": n, "free_points": c.free_points, "free_orbits": c.free_orbits,
                   "nonfree_points": c.nonfree_points, "closed_form": c.closed_form}),
        ));
    }
    if want(PtCheck::Gcd) {
        let g = symbolic::pt_gcd_check(n, limits)?;
        lines.push((
            format!("deg gcd(W_{n}(P_(2T+4)), W_{n}(P_T)) = {} >= {}: {}", g.degree, g.bound, g.degree >= g.bound),
            json!({"check": "gcd", "n": n, "degree": g.degree, "bound": g.bound, "gcd": g.gcd.display_in("T")}),
        ));
    }
    if want(PtCheck::Identity) {
        let r = symbolic::pt_identity_residual();
        lines.push((
            format!("P_(2T+4)(Z,Z) - 2 P_T(1,Z) = {r}"),
            json!({"check": "identity", "residual": r.to_string(), "holds": r.is_zero()}),
        ));
    }
    if want(PtCheck::FourthPower) {
        let base = if n % 2 == 1 { "W_1" } else { "W_2" };
        let (text, verdict) = match symbolic::pt_fourth_power_check(n, limits)? {
            FourthPower::Yes { root, .. } => (format!("true (root {})", root.display_in("T")), "fourth-power"),
            FourthPower::NotDivisible => ("false (not divisible)".to_string(), "not-divisible"),
            FourthPower::NotSquare => ("false (not a square)".to_string(), "not-square"),
        };
        lines.push((
            format!("A_{n} / {base} is a fourth power: {text}"),
            json!({"check": "fourth-power", "n": n, "verdict": verdict}),
        ));
    }
    Ok(match fmt {
        Format::Json => pretty(&Value::Array(lines.into_iter().map(|(_, v)| v).collect())),
        _ => lines.into_iter().map(|(t, _)| t + "\n").collect(),
    })
}

pub fn strongdiv(f: &LaurentPoly, g1: &FiniteSubgroup, g2: &FiniteSubgroup, fmt: Format, limits: &Limits) -> Result<String> {
    let r = dd::strong_div_check(f, g1, g2, limits)?;
    Ok(match fmt {
        Format::Json => pretty(&json!({
            "holds": r.holds,
            "gcd": r.gcd.to_json(),
            "w_meet": r.w_meet.to_json(),
            "meet": r.meet.key(),
        })),
        _ => format!(
            "gcd(W1, W2) = {}\nW(meet) = {} (meet {})\nstrong divisibility: {}\n",
            r.gcd, r.w_meet, r.meet, r.holds
        ),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum GenericWhat {
    V,
    W,
    Factors,
    Strongdiv,
}

pub fn generic(
    support: &Support,
    g: &FiniteSubgroup,
    g2: Option<&FiniteSubgroup>,
    what: GenericWhat,
    fmt: Format,
    limits: &Limits,
) -> Result<String> {
    let mut notes = Vec::new();
    if !support.contains_zero() {
        notes.push("warning: 0 is not in M, C may be reducible".to_string());
    }
    let (text, value) = match what {
        GenericWhat::V => {
            let v = symbolic::generic_v(support, g, limits)?;
            (format!("V = {v}"), json!({"v": v.to_string()}))
        }
        GenericWhat::W => {
            let f = symbolic::generic_w_factored(support, g, limits)?;
            let w = symbolic::expand(&f, support.var_names())?;
            (format!("W = {w}"), json!({"w": w.to_string()}))
        }
        GenericWhat::Factors => {
            let f = symbolic::generic_w_factored(support, g, limits)?;
            let text = f
                .iter()
                .map(|r| format!("{}\t{}\t({})^{}", r.subgroup.order(), r.generator, r.c, r.exponent))
                .collect::<Vec<_>>()
                .join("\n");
            let rows = f
                .iter()
                .map(|r| json!({"order": r.subgroup.order(), "generator": r.generator.to_string(),
                                "c": r.c.to_string(), "exponent": r.exponent}))
                .collect::<Vec<_>>();
            (format!("order\tgenerator\tC^|S|\n{text}"), json!({"rows": rows}))
        }
        GenericWhat::Strongdiv => {
            let g2 = g2.ok_or_else(|| Error::InvalidInput("strongdiv needs --n2 or --group2".into()))?;
            if !symbolic::separates_points(support) {
                notes.push("warning: M - m0 does not generate Z^N".to_string());
            }
            let r = symbolic::strong_div_symbolic(support, g, g2, limits)?;
            let pairs: Vec<String> = r.offending.iter().map(|(a, b)| format!("{a} ~ {b}")).collect();
            (
                format!("strong divisibility: {}{}", r.holds, pairs.iter().map(|p| format!("\nshared: {p}")).collect::<String>()),
                json!({"holds": r.holds, "offending": pairs}),
            )
        }
    };
    Ok(match fmt {
        Format::Json => {
            let mut v = value;
            v["warnings"] = json!(notes);
            pretty(&v)
        }
        _ => notes.into_iter().map(|n| n + "\n").collect::<String>() + &text + "\n",
    })
}

pub fn romanoff(f: &LaurentPoly, x: u64, eps: f64, fmt: Format, limits: &Limits) -> Result<String> {
    let r = analytics::romanoff_audit(f, x, eps, limits)?;
    Ok(match fmt {
        Format::Json => pretty(&serde_json::to_value(&r).expect("serializable")),
        _ => r.to_csv(),
    })
}

pub fn density(f: &LaurentPoly, theta: f64, p_bound: u64, max_order: u64, fmt: Format, limits: &Limits) -> Result<String> {
    let r = analytics::density_report(f, theta, p_bound, max_order, limits)?;
    Ok(match fmt {
        Format::Json => pretty(&serde_json::to_value(&r).expect("serializable")),
        _ => r.to_csv(),
    })
}

pub fn nu_cmd(dim: usize, n: u64, fmt: Format, limits: &Limits) -> Result<String> {
    if dim == 0 || n == 0 {
        return Err(Error::InvalidInput("dimension and n must be positive".into()));
    }
    let formula = nu(dim, n);
    let counted = subgroups_of_order(dim, n, limits)?.len() as u64;
    Ok(match fmt {
        Format::Json => pretty(&json!({"dim": dim, "n": n, "nu": formula, "enumerated": counted})),
        Format::Csv => csv_line(&["dim", "n", "nu", "enumerated"].map(String::from))
            + &csv_line(&[dim.to_string(), n.to_string(), formula.to_string(), counted.to_string()]),
        Format::Text => format!("nu_{dim}({n}) = {formula} (enumerated {counted})\n"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lim() -> Limits {
        Limits::default()
    }

    #[test]
    fn matrix_parsing() {
        assert_eq!(parse_matrix("1;1").unwrap(), vec![vec![1], vec![1]]);
        assert_eq!(parse_matrix("1,0; 0,-1").unwrap(), vec![vec![1, 0], vec![0, -1]]);
        assert!(parse_matrix("1,0;1").is_err());
        assert!(parse_matrix("x").is_err());
    }

    #[test]
    fn w_text() {
        let f: LaurentPoly = "X1 - X2 - 4".parse().unwrap();
        let g = FiniteSubgroup::mu_n(2, 2).unwrap();
        assert_eq!(w(&f, &g, Format::Text, &lim()).unwrap(), "192 = 2^6 * 3\n");
        let one: LaurentPoly = "X1 - 1".parse().unwrap();
        assert_eq!(w(&one, &FiniteSubgroup::mu_n(1, 1).unwrap(), Format::Text, &lim()).unwrap(), "1\n");
    }

    #[test]
    fn ptfamily_text() {
        assert_eq!(
            ptfamily(5, PtCheck::EighthPower, Format::Text, &lim()).unwrap(),
            "deg B_5 = 1, B^8 | W: true\n"
        );
    }
}
