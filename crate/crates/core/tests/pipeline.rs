use ddseq::analytics::{mahler, ra_scan, MahlerConfig};
use ddseq::ffield::w_mod_p;
use ddseq::lattice::subgroups_of_order;
use ddseq::{dd, Execution, FactoredProduct, FiniteSubgroup, LaurentPoly, Limits};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn poly_strategy() -> impl Strategy<Value = LaurentPoly> {
    prop::collection::vec(((-2i64..=2, -2i64..=2), -3i64..=3), 1..4).prop_map(|terms| {
        LaurentPoly::from_terms(2, terms.into_iter().map(|((a, b), c)| (vec![a, b], BigInt::from(c)))).unwrap()
    })
    .prop_filter("non-zero", |f| !f.is_zero())
}

#[test]
fn parse_compute_factor_render() {
    let f: LaurentPoly = "X1 - X2 - 4".parse().unwrap();
    let g = FiniteSubgroup::mu_n(2, 2).unwrap();
    let limits = Limits::default();
    let w = dd::w(&f, &g, &limits).unwrap();
    let fp = dd::factor_value(&w, &limits);
    assert_eq!(fp.value(), w);
    let back = FactoredProduct::from_json(&fp.to_json()).unwrap();
    assert_eq!(back, fp);
    let rows = dd::factor_w(&f, &g, &limits).unwrap();
    let product = rows
        .iter()
        .filter(|r| !r.vanishes)
        .fold(BigInt::one(), |acc, r| acc * r.c.pow(r.exponent as u32));
    assert_eq!(product, w);
}

#[test]
fn apparition_records_agree_with_finite_field_values() {
    let f: LaurentPoly = "2*X1 - 1".parse().unwrap();
    let limits = Limits::default();
    for p in [3u64, 5, 7, 11, 13] {
        let recs = ra_scan(&f, p, 24, &limits).unwrap();
        for r in recs {
            assert_eq!(w_mod_p(&f, &r.subgroup, p, &limits).unwrap(), 0);
            for d in ddseq::lattice::divisors(r.order) {
                if d < r.order {
                    let h = FiniteSubgroup::mu_n(1, d).unwrap();
                    assert_ne!(w_mod_p(&f, &h, p, &limits).unwrap(), 0, "p={p} d={d}");
                }
            }
        }
    }
}

#[test]
fn w_over_every_subgroup_of_small_order_divides_mu_n() {
    let f: LaurentPoly = "X1 + X2 + 3".parse().unwrap();
    let limits = Limits::default();
    let top = FiniteSubgroup::mu_n(2, 6).unwrap();
    let wt = dd::w(&f, &top, &limits).unwrap();
    for n in [1u64, 2, 3, 4, 6] {
        for h in subgroups_of_order(2, n, &limits).unwrap() {
            if top.contains(&h).unwrap() {
                let wh = dd::w(&f, &h, &limits).unwrap();
                assert!((&wt % &wh).is_zero(), "{h}");
            }
        }
    }
}

#[test]
fn mahler_bounds_growth_of_linear_forms() {
    let f: LaurentPoly = "X1 - 3".parse().unwrap();
    let m = mahler(&f, &MahlerConfig::default()).unwrap();
    let w = dd::w_n(&f, 20, &Limits::default()).unwrap();
    let rate = ddseq::analytics::log_abs(&w) / 20.0;
    assert!((rate - m.log_value).abs() < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn orbit_route_matches_direct_product(f in poly_strategy(), n in 1u64..5) {
        let g = FiniteSubgroup::mu_n(2, n).unwrap();
        let limits = Limits::default();
        prop_assert_eq!(dd::w(&f, &g, &limits).unwrap(), dd::w_direct(&f, &g, &limits).unwrap());
    }

    #[test]
    fn execution_mode_is_invisible(f in poly_strategy(), n in 1u64..6) {
        let g = FiniteSubgroup::mu_n(2, n).unwrap();
        let seq = dd::w(&f, &g, &Limits::default().with_exec(Execution::Sequential)).unwrap();
        let par = dd::w(&f, &g, &Limits::default().with_exec(Execution::Parallel)).unwrap();
        prop_assert_eq!(seq, par);
    }

    #[test]
    fn reduction_mod_p_commutes(f in poly_strategy(), n in 1u64..5, pi in 0usize..4) {
        let p = [2u64, 3, 5, 7][pi];
        let g = FiniteSubgroup::mu_n(2, n).unwrap();
        let limits = Limits::default();
        let w = dd::w(&f, &g, &limits).unwrap();
        let r = (&w % BigInt::from(p) + BigInt::from(p)) % BigInt::from(p);
        let expected: u64 = r.abs().try_into().unwrap();
        prop_assert_eq!(w_mod_p(&f, &g, p, &limits).unwrap(), expected);
    }
}
