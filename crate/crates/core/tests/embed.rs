use std::sync::Arc;

use phigamma_core::charp::Q;
use phigamma_core::embed::witt_agree;
use phigamma_core::witt::witt_norm;
use phigamma_core::{ALElement, ALRing, Embedding, FieldParams, OLRing};
use proptest::prelude::*;

fn fields() -> Vec<FieldParams> {
    vec![FieldParams::unramified(2, 1), FieldParams::unramified(3, 1), FieldParams::unramified(2, 2), FieldParams::sqrt_p(3)]
}

fn setup(i: usize, n: usize) -> (Arc<ALRing>, Embedding) {
    let ol = OLRing::new(fields()[i].clone()).unwrap();
    let a = ALRing::new(ol.clone(), n as u32).unwrap();
    let e = Embedding::new(ol, n, n as u32, Q::from_integer(24)).unwrap();
    (a, e)
}

fn elem(a: &ALRing, lo: i64, coeffs: &[i64], hi: i64) -> ALElement {
    let r = a.ol();
    a.from_coeffs(lo, coeffs.iter().map(|&c| r.from_int(c, a.m())).collect(), hi)
}

fn coeffs(n: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-30i64..30, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn embedding_is_a_ring_map(fi in 0usize..4, c in coeffs(6), d in coeffs(6)) {
        let (a, e) = setup(fi, 2);
        let w = e.ring();
        let f = elem(&a, -1, &c, 5);
        let g = elem(&a, 0, &d, 6);
        let (ef, eg) = (e.embed_al(&f).unwrap(), e.embed_al(&g).unwrap());
        prop_assert!(witt_agree(w.base(), &e.embed_al(&a.add(&f, &g)).unwrap(), &w.add(&ef, &eg).unwrap()));
        prop_assert!(witt_agree(w.base(), &e.embed_al(&a.mul(&f, &g)).unwrap(), &w.mul(&ef, &eg).unwrap()));
    }

    #[test]
    fn frobenius_and_reduction(fi in 0usize..4, c in coeffs(6)) {
        let (a, e) = setup(fi, 2);
        let w = e.ring();
        let s = w.base();
        let f = elem(&a, -2, &c, 4);
        let ef = e.embed_al(&f).unwrap();
        prop_assert!(witt_agree(s, &e.embed_al(&a.phi(&f)).unwrap(), &w.frobenius(&ef)));
        let red = a.reduce_mod_pi(&f).unwrap();
        let terms: Vec<_> = red.terms().iter().map(|&(k, c)| (Q::from_integer(k), c)).collect();
        let hi = f.hi();
        let red = s.from_terms(&terms, Some(Q::from_integer(hi))).unwrap();
        prop_assert!(s.add_series(&ef.comps[0], &s.neg_series(&red)).terms().is_empty());
    }

    #[test]
    fn norm_transport(fi in 0usize..4, c in coeffs(8)) {
        let (a, e) = setup(fi, 3);
        let q = a.q();
        let weight = Q::new(q, q - 1);
        let r = Q::new(q - 1, 2 * q);
        let f = elem(&a, -3, &c, 5);
        let lhs = a.overconv_norm(&f, r, weight);
        let rhs = witt_norm(e.ring(), &e.embed_al(&f).unwrap(), r, weight).unwrap();
        prop_assert!(lhs.certified && rhs.certified);
        prop_assert_eq!(lhs.exponent, rhs.exponent);
    }

    #[test]
    fn correction_digits_are_forced(fi in 0usize..4, k in 1usize..3, c in 1u32..3, ex in 1i64..6) {
        let (_, e) = setup(fi, 3);
        let w = e.ring();
        let s = w.base();
        let omega = &e.omega_lt().witt;
        let mut guess = omega.clone();
        guess.comps[k] = s.add_series(&guess.comps[k], &s.monomial(s.fq().from_int(c as i64), Q::from_integer(ex)).unwrap());
        let a = e.lt_pi(omega).unwrap();
        let b = e.lt_pi(&guess).unwrap();
        prop_assert!(s.add_series(&a.comps[k], &s.neg_series(&b.comps[k])).terms().is_empty());
    }
}

#[test]
fn residual_vanishes_for_all_fields() {
    for i in 0..4 {
        let (_, e) = setup(i, 3);
        assert!(e.omega_lt().residual_vanishes());
        assert_eq!(e.omega_lt().witt.comps[0], e.ring().base().omega());
    }
}
