use std::sync::Arc;

use phigamma_core::{ALElement, ALRing, FieldParams, OLRing};
use proptest::prelude::*;

fn fields() -> Vec<FieldParams> {
    vec![FieldParams::unramified(2, 1), FieldParams::unramified(3, 1), FieldParams::unramified(2, 2), FieldParams::sqrt_p(3)]
}

fn ring(i: usize, m: u32) -> Arc<ALRing> {
    ALRing::new(OLRing::new(fields()[i].clone()).unwrap(), m).unwrap()
}

fn elem(a: &ALRing, lo: i64, coeffs: &[i64], hi: i64) -> ALElement {
    let r = a.ol();
    a.from_coeffs(lo, coeffs.iter().map(|&c| r.from_int(c, a.m())).collect(), hi)
}

/// Same element with the unknown tail filled by other values.
fn perturb(a: &ALRing, x: &ALElement, extra: &[i64]) -> ALElement {
    let tail = elem(a, x.hi(), extra, x.hi() + extra.len() as i64);
    let t = a.from_coeffs(x.lo(), x.terms().map(|t| *t.1).collect(), x.hi() + extra.len() as i64);
    a.add(&t, &tail)
}

fn coeffs(n: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-40i64..40, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn psi_phi_is_q_over_pi(fi in 0usize..4, c in coeffs(14)) {
        let a = ring(fi, 3);
        let f = elem(&a, -4, &c, 10);
        let lhs = a.psi(&a.phi(&f)).unwrap();
        let rhs = a.scale(&f, &a.ol().q_over_pi(3));
        let (ok, hi) = a.eq_on_window(&lhs, &rhs);
        prop_assert!(ok);
        prop_assert!(hi > -4);
    }

    #[test]
    fn projection_formula(fi in 0usize..4, c in coeffs(10), d in coeffs(10)) {
        let a = ring(fi, 2);
        let f = elem(&a, -2, &c, 8);
        let g = elem(&a, -2, &d, 8);
        let lhs = a.psi(&a.mul(&a.phi(&f), &g)).unwrap();
        let rhs = a.mul(&f, &a.psi(&g).unwrap());
        prop_assert!(a.eq_on_window(&lhs, &rhs).0);
    }

    #[test]
    fn gamma_group_law_and_phi(fi in 0usize..3, c in coeffs(10), s in 1i64..20, t in 1i64..20) {
        let a = ring(fi, 2);
        let r = a.ol().clone();
        let w = r.max_prec();
        let (x, y) = (r.from_int(s, w), r.from_int(t, w));
        prop_assume!(r.is_unit(&x) && r.is_unit(&y));
        let f = elem(&a, -3, &c, 7);
        let lhs = a.gamma(&x, &a.gamma(&y, &f).unwrap()).unwrap();
        let rhs = a.gamma(&r.mul(&x, &y), &f).unwrap();
        prop_assert!(a.eq_on_window(&lhs, &rhs).0);
        let lhs = a.phi(&a.gamma(&x, &f).unwrap());
        let rhs = a.gamma(&x, &a.phi(&f)).unwrap();
        prop_assert!(a.eq_on_window(&lhs, &rhs).0);
    }

    #[test]
    fn windows_are_honest(fi in 0usize..4, c in coeffs(12), d in coeffs(12), e in coeffs(6)) {
        let a = ring(fi, 3);
        let f = elem(&a, -3, &c, 9);
        let g = elem(&a, -3, &d, 9);
        let f2 = perturb(&a, &f, &e);
        let check = |x: &ALElement, y: &ALElement| a.eq_on_window(&a.truncate(y, x.hi()), x).0;
        prop_assert!(check(&a.mul(&f, &g), &a.mul(&f2, &g)));
        prop_assert!(check(&a.phi(&f), &a.phi(&f2)));
        prop_assert!(check(&a.psi(&f).unwrap(), &a.psi(&f2).unwrap()));
        for (x, y) in a.decompose(&f).iter().zip(a.decompose(&f2)) {
            prop_assert!(check(x, &y));
        }
        let r = a.ol().clone();
        let u = r.from_int(5, 3);
        if r.is_unit(&u) {
            prop_assert!(check(&a.gamma(&u, &f).unwrap(), &a.gamma(&u, &f2).unwrap()));
        }
        if let Ok(inv) = a.inv(&f) {
            prop_assert!(check(&inv, &a.inv(&f2).unwrap()));
        }
    }

    #[test]
    fn trace_is_phi_linear(fi in 0usize..4, c in coeffs(8), d in coeffs(8)) {
        let a = ring(fi, 2);
        let f = elem(&a, -2, &c, 6);
        let g = elem(&a, -2, &d, 6);
        let lhs = a.trace(&a.mul(&a.phi(&f), &g));
        let rhs = a.mul(&a.phi(&f), &a.trace(&g));
        prop_assert!(a.eq_on_window(&lhs, &rhs).0);
    }
}
