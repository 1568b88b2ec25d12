use std::process::{Command, Output};

fn ddseq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ddseq")).args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = ddseq(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn w_values_and_factorizations() {
    assert_eq!(stdout(&["w", "X1 - X2 - 4", "--n", "2"]), "192 = 2^6 * 3\n");
    assert_eq!(stdout(&["w", "2*X1 - 1", "--n", "4"]), "-15 = -1 * 3 * 5\n");
    assert_eq!(stdout(&["w", "X1 - 1", "--n", "1"]), "1\n");
}

#[test]
fn leading_minus_is_a_polynomial_not_a_flag() {
    assert_eq!(stdout(&["w", "-X1 + 2", "--n", "1"]), "1\n");
}

#[test]
fn explicit_group_lifts_arity() {
    // X1 - 2 viewed on mu_2 x trivial in two variables
    let out = stdout(&["w", "X1 - 2", "--group", "N=2;m=2;gens=(1,0)"]);
    assert_eq!(out, "3\n");
}

#[test]
fn factor_table_formats() {
    let text = stdout(&["factor", "X1 - X2 - 4", "--group", "N=2;m=2;gens=(1,1)"]);
    assert!(text.ends_with("W = 16 = 2^4\n"), "{text}");
    let csv = stdout(&["factor", "X1 - X2 - 4", "--n", "2", "--csv"]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("order,group,generator,c,exponent,vanishes"));
    assert_eq!(lines.count(), 4);
    let json: serde_json::Value = serde_json::from_str(&stdout(&["factor", "X1 - X2 - 4", "--n", "2", "--json"])).unwrap();
    assert_eq!(json["w"], "192");
}

#[test]
fn rank_of_apparition_of_seven() {
    let out = stdout(&["ra", "2*X1 - 1", "--p", "7", "--max-order", "20"]);
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows, ["7,3,true,N=1;m=3;gens=(1)"]);
}

#[test]
fn ptfamily_eighth_power() {
    assert_eq!(
        stdout(&["ptfamily", "--n", "5", "--check", "eighth-power"]),
        "deg B_5 = 1, B^8 | W: true\n"
    );
}

#[test]
fn mahler_of_linear_polynomial() {
    assert_eq!(stdout(&["mahler", "X1 - 2"]), "2.0000\n");
    assert_eq!(stdout(&["mahler", "X1 - X2 - 4", "--param", "1;1"]), "4.0000\n");
}

#[test]
fn report_commands_emit_csv_and_json() {
    let z = stdout(&["zsig", "2*X1 - 1", "--max-order", "6"]);
    assert!(z.starts_with("order,group,w,primitive_part,in_zsigmondy_set\n"), "{z}");
    let g = stdout(&["growth", "X1 - 2", "--n", "4", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&g).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 4);
    let d = stdout(&["density", "2*X1 - 1", "--p", "20", "--max-order", "8"]);
    assert!(d.starts_with("p,min_order,partial_sum\n"), "{d}");
    let r = stdout(&["romanoff", "2*X1 - 1", "--x", "6"]);
    assert!(r.starts_with("key,value\n"), "{r}");
}

#[test]
fn nu_matches_enumeration() {
    assert_eq!(stdout(&["nu", "--dim", "2", "--n", "6"]), "nu_2(6) = 12 (enumerated 12)\n");
}

#[test]
fn generic_cyclotomic_factors() {
    let out = stdout(&["generic", "--support", "0;1", "--n", "3", "--what", "v"]);
    assert_eq!(out, "V = a(0)^2 - a(0)*a(1) + a(1)^2\n");
}

#[test]
fn malformed_input_exits_two() {
    assert_eq!(ddseq(&["w", "X1 +", "--n", "2"]).status.code(), Some(2));
    assert_eq!(ddseq(&["w", "X1", "--group", "N=1;m=0"]).status.code(), Some(2));
    assert_eq!(ddseq(&["w", "X1 - 1"]).status.code(), Some(2));
    assert_eq!(ddseq(&["nosuch"]).status.code(), Some(2));
}

#[test]
fn cap_exits_three() {
    let out = ddseq(&["w", "X1 - X2", "--n", "100000", "--max-elements", "1000"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("resource cap"));
}

#[test]
fn thread_count_does_not_change_output() {
    let a = stdout(&["w", "X1 + X2 + 3", "--n", "6", "--threads", "1"]);
    let b = stdout(&["w", "X1 + X2 + 3", "--n", "6", "--threads", "3"]);
    assert_eq!(a, b);
}

#[test]
fn cache_hits_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let first = stdout(&["--cache", d, "factor", "X1 - X2 - 4", "--n", "3"]);
    let file = dir.path().join("cache.jsonl");
    let lines_after_first = std::fs::read_to_string(&file).unwrap().lines().count();
    assert_eq!(lines_after_first, 2);
    // same polynomial spelled differently hashes to the same key
    let second = stdout(&["--cache", d, "factor", "-4 + X1 - X2", "--n", "3"]);
    assert_eq!(first, second);
    assert_eq!(std::fs::read_to_string(&file).unwrap().lines().count(), 2);
    // a different output format is a different entry
    stdout(&["--cache", d, "factor", "X1 - X2 - 4", "--n", "3", "--json"]);
    assert_eq!(std::fs::read_to_string(&file).unwrap().lines().count(), 3);
}
