use std::collections::BTreeMap;

use super::{CharPRing, FqSeries, SeriesRing, Q};
use crate::error::{Error, Result};
use crate::field::FqElem;

/// Output of [`artin_schreier_solve`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArtinSchreier {
    pub x: FqSeries,
    /// The constant `a_0`, which `c ↦ c^q - c` cannot reach over `F_q`.
    pub obstruction: FqElem,
    /// `x^q - x - (a - obstruction)`; nonzero only below `floor`.
    pub floor_residual: FqSeries,
}

/// Solve `x^q - x = a - a_0` coefficientwise.
///
/// Positive exponents are resolved upward (`x_n = x_{n/q}^q - a_n`),
/// negative ones from `-1` downward with `x` taken to vanish below `floor`.
pub fn artin_schreier_solve(ring: &SeriesRing, a: &FqSeries, floor: Q) -> Result<ArtinSchreier> {
    let fq = ring.fq();
    let q = ring.q() as i64;
    let floor_s = (floor * ring.denom()).ceil().to_integer();
    if floor_s > 0 {
        return Err(Error::WindowTooSmall("floor must be at most 0".into()));
    }
    if a.terms().first().is_some_and(|t| t.0 < floor_s) {
        return Err(Error::WindowTooSmall("input is supported below the floor".into()));
    }
    let hi = a.hi_scaled();
    if a.is_exact() && a.terms().iter().any(|t| t.0 > 0) {
        return Err(Error::WindowTooSmall("positive part needs a finite window".into()));
    }
    let mut obstruction = FqElem::ZERO;
    let mut pos: BTreeMap<i64, FqElem> = BTreeMap::new();
    let mut neg: BTreeMap<i64, FqElem> = BTreeMap::new();
    for &(e, c) in a.terms() {
        match e {
            0 => obstruction = c,
            e if e > 0 => {
                pos.insert(e, fq.neg(c));
            }
            _ => {
                neg.insert(e, fq.neg(c));
            }
        }
    }
    let mut x: Vec<(Q, FqElem)> = Vec::new();
    while let Some((n, v)) = pos.pop_first() {
        if v.is_zero() {
            continue;
        }
        x.push((ring.unscale(n), v));
        if n.saturating_mul(q) < hi {
            let slot = pos.entry(n * q).or_insert(FqElem::ZERO);
            *slot = fq.add(*slot, fq.frobenius(v));
        }
    }
    let mut residual: Vec<(Q, FqElem)> = Vec::new();
    while let Some((n, v)) = neg.pop_last() {
        if v.is_zero() {
            continue;
        }
        x.push((ring.unscale(n), v));
        let target = n * q;
        if target >= floor_s {
            let slot = neg.entry(target).or_insert(FqElem::ZERO);
            *slot = fq.add(*slot, fq.frobenius(v));
        } else {
            residual.push((ring.unscale(target), fq.frobenius(v)));
        }
    }
    let hi_q = if a.is_exact() { None } else { Some(ring.unscale(hi)) };
    Ok(ArtinSchreier {
        x: ring.from_terms(&x, hi_q)?,
        obstruction,
        floor_residual: ring.from_terms(&residual, None)?,
    })
}

/// A solution of `x^q - x ≡ a` modulo series with integral exponents.
///
/// For a term `t = cω^e` whose exponent has denominator `q^s`, the finite
/// sum `x = -(t + t^q + … + t^{q^{s-1}})` gives `x^q - x = t - t^{q^s}`.
pub fn phi_minus_one_mod_integral(ring: &SeriesRing, a: &FqSeries) -> Result<FqSeries> {
    let d = ring.denom();
    let q = ring.q() as i64;
    if !a.is_exact() && a.hi_scaled() <= 0 {
        return Err(Error::WindowTooSmall("window must extend past 0".into()));
    }
    let mut acc = ring.zero();
    for &(e, c) in a.terms() {
        if e % d == 0 {
            continue;
        }
        let mut t = ring.monomial(c, ring.unscale(e))?;
        let mut exp = e;
        while exp % d != 0 {
            acc = ring.sub(&acc, &t);
            t = ring.frobenius(&t);
            exp *= q;
        }
    }
    Ok(match ring.hi(a) {
        Some(h) => ring.truncate(&acc, h),
        None => acc,
    })
}

/// The part of `x` with non-integral exponents.
pub fn fractional_part(ring: &SeriesRing, x: &FqSeries) -> FqSeries {
    let d = ring.denom();
    let terms: Vec<(Q, FqElem)> =
        x.terms().iter().filter(|t| t.0 % d != 0).map(|&(e, c)| (ring.unscale(e), c)).collect();
    ring.from_terms(&terms, ring.hi(x)).expect("exponents already admissible")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Fq;

    fn q(n: i64, d: i64) -> Q {
        Q::new(n, d)
    }

    #[test]
    fn zero_and_constant() {
        let r = SeriesRing::laurent(Fq::new(3, 1, 3).unwrap());
        let z = r.zero_to(q(10, 1)).unwrap();
        let s = artin_schreier_solve(&r, &z, q(-5, 1)).unwrap();
        assert!(r.is_zero(&s.x));
        assert_eq!(s.obstruction, FqElem::ZERO);
        let one = r.truncate(&r.one(), q(10, 1));
        let s = artin_schreier_solve(&r, &one, q(0, 1)).unwrap();
        assert!(r.is_zero(&s.x));
        assert_eq!(s.obstruction, FqElem::ONE);
        // c^q - c vanishes on all of F_3, so the constant 1 is unreachable
        assert!(r.fq().elements().all(|c| r.fq().sub(r.fq().frobenius(c), c).is_zero()));
    }

    #[test]
    fn omega_telescopes() {
        let r = SeriesRing::laurent(Fq::new(2, 1, 2).unwrap());
        let a = r.truncate(&r.omega(), q(20, 1));
        let s = artin_schreier_solve(&r, &a, q(0, 1)).unwrap();
        let expect: Vec<(Q, FqElem)> = [1, 2, 4, 8, 16].iter().map(|&k| (q(k, 1), FqElem::ONE)).collect();
        assert_eq!(s.x, r.from_terms(&expect, Some(q(20, 1))).unwrap());
        let back = r.sub(&r.frobenius(&s.x), &s.x);
        assert_eq!(back, a);
    }

    #[test]
    fn negative_exponents_report_floor() {
        let r = SeriesRing::laurent(Fq::new(3, 1, 3).unwrap());
        let a = r.truncate(&r.inv(&r.omega()).unwrap(), q(4, 1));
        let s = artin_schreier_solve(&r, &a, q(-9, 1)).unwrap();
        let resid = r.sub(&r.sub(&r.frobenius(&s.x), &s.x), &a);
        let resid = r.truncate(&resid, q(4, 1));
        let expect = r.truncate(&s.floor_residual, q(4, 1));
        assert_eq!(resid, expect);
        assert_eq!(r.valuation_of(&s.floor_residual), super::super::Valuation::Exact(q(-27, 1)));
    }

    #[test]
    fn fractional_solver_substitutes() {
        let r = SeriesRing::perfect(Fq::new(3, 1, 3).unwrap(), 2);
        let a = r.monomial(FqElem::ONE, q(1, 3)).unwrap();
        let x = phi_minus_one_mod_integral(&r, &a).unwrap();
        assert_eq!(x, r.neg(&a));
        let a = r.from_terms(&[(q(2, 9), FqElem(2)), (q(-1, 3), FqElem(1)), (q(5, 1), FqElem(1))], Some(q(8, 1))).unwrap();
        let x = phi_minus_one_mod_integral(&r, &a).unwrap();
        let diff = r.sub(&r.sub(&r.frobenius(&x), &x), &a);
        assert!(r.is_zero(&fractional_part(&r, &diff)));
        let integral = r.from_terms(&[(q(3, 1), FqElem(1))], None).unwrap();
        assert!(r.is_zero(&phi_minus_one_mod_integral(&r, &integral).unwrap()));
    }
}
