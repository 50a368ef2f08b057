use phigamma_core::{FieldParams, LubinTate, OLRing, PowerSeries};
use proptest::prelude::*;

fn fields() -> Vec<FieldParams> {
    vec![FieldParams::unramified(2, 1), FieldParams::unramified(3, 1), FieldParams::unramified(2, 2), FieldParams::sqrt_p(3)]
}

fn series(r: &OLRing, c: &[i64], m: u32) -> PowerSeries {
    let mut coeffs: Vec<_> = c.iter().map(|&x| r.from_int(x, m)).collect();
    coeffs[0] = r.zero(m);
    PowerSeries { coeffs, prec: m }
}

#[test]
fn multiplicative_group_to_degree_eight() {
    let r = OLRing::new(FieldParams::unramified(2, 1)).unwrap();
    let lt = LubinTate::new(r.clone());
    let law = lt.group_law(9, 3).unwrap();
    for i in 0..9 {
        for j in 0..9 - i {
            let expect = if (i, j) == (1, 0) || (i, j) == (0, 1) || (i, j) == (1, 1) { 1 } else { 0 };
            assert_eq!(law.coeff(i, j), r.from_int(expect, 3), "coefficient X^{i} Y^{j}");
        }
    }
    for a in [2u64, 3, 5] {
        // (1+Z)^a - 1 by the binomial theorem
        let mut binom = vec![0i64; 8];
        let mut c = 1i64;
        for k in 1..8usize {
            c = c * (a as i64 - k as i64 + 1) / k as i64;
            binom[k] = c;
        }
        assert_eq!(lt.mult_by(&r.from_int(a as i64, 3), 8, 3).unwrap(), series(&r, &binom, 3));
    }
    let z = PowerSeries::var(&r, 8, 3);
    assert_eq!(lt.add(&law, &z, &z).unwrap(), series(&r, &[0, 2, 1, 0, 0, 0, 0, 0], 3));
}

#[test]
fn working_precision_is_sufficient() {
    for params in fields() {
        let r = OLRing::new(params).unwrap();
        let lt = LubinTate::new(r.clone());
        for a in [2i64, 4, 7] {
            let low = lt.mult_by(&r.from_int(a, 20), 30, 2).unwrap();
            let high = lt.mult_by(&r.from_int(a, 20), 30, 9).unwrap().truncate(&r, 30, 2);
            assert_eq!(low, high);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn endomorphisms_compose_and_add(field in 0usize..4, a in 1i64..40, b in 1i64..40) {
        let r = OLRing::new(fields()[field].clone()).unwrap();
        let lt = LubinTate::new(r.clone());
        let (n, m) = (8, 2);
        let big = r.max_prec();
        let fa = lt.mult_by(&r.from_int(a, big), n, m).unwrap();
        let fb = lt.mult_by(&r.from_int(b, big), n, m).unwrap();
        let fab = lt.mult_by(&r.from_int(a * b, big), n, m).unwrap();
        prop_assert_eq!(lt.compose(&fa, &fb).unwrap(), fab);
        let law = lt.group_law(n, m).unwrap();
        let fsum = lt.mult_by(&r.from_int(a + b, big), n, m).unwrap();
        prop_assert_eq!(lt.add(&law, &fa, &fb).unwrap(), fsum);
    }

    #[test]
    fn group_law_is_associative(field in 0usize..4, x in prop::collection::vec(-9i64..9, 7), y in prop::collection::vec(-9i64..9, 7), w in prop::collection::vec(-9i64..9, 7)) {
        let r = OLRing::new(fields()[field].clone()).unwrap();
        let lt = LubinTate::new(r.clone());
        let law = lt.group_law(7, 3).unwrap();
        let (x, y, w) = (series(&r, &x, 3), series(&r, &y, 3), series(&r, &w, 3));
        let left = lt.add(&law, &lt.add(&law, &x, &y).unwrap(), &w).unwrap();
        let right = lt.add(&law, &x, &lt.add(&law, &y, &w).unwrap()).unwrap();
        prop_assert_eq!(left, right);
        prop_assert_eq!(lt.add(&law, &x, &y).unwrap(), lt.add(&law, &y, &x).unwrap());
    }
}
