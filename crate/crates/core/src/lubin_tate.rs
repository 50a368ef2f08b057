//! Lubin-Tate formal group for the Frobenius series `f(Z) = πZ + Z^q`.
//!
//! The group law `F(X, Y)` and the endomorphisms `[a](Z)` are solved degree
//! by degree from `f∘G = G∘f`: at degree `d` the unknown part `H_d` enters
//! as `(π - π^d)·H_d`, so each step divides by `π` once.
//!
//! Internally the solve runs at a working precision `m + 2 + 2⌈log_q N⌉`;
//! an error in `h_j` only re-enters undamped at degree `q·j`, so the loss
//! is logarithmic in `N`. The result is then truncated to `π^m`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{OLElement, OLRing};

/// `Σ_{k<N} c_k Z^k` over `o_L/π^m`. Stored densely; `coeffs.len() == N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerSeries {
    pub coeffs: Vec<OLElement>,
    pub prec: u32,
}

impl PowerSeries {
    pub fn zero(r: &OLRing, n: usize, m: u32) -> Self {
        PowerSeries { coeffs: vec![r.zero(m); n], prec: m }
    }

    pub fn monomial(r: &OLRing, c: OLElement, k: usize, n: usize, m: u32) -> Self {
        let mut s = Self::zero(r, n, m);
        if k < n {
            s.coeffs[k] = r.with_prec(&c, m);
        }
        s
    }

    pub fn var(r: &OLRing, n: usize, m: u32) -> Self {
        Self::monomial(r, r.one(m), 1, n, m)
    }

    pub fn n(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, k: usize) -> Option<&OLElement> {
        self.coeffs.get(k)
    }

    pub fn truncate(&self, r: &OLRing, n: usize, m: u32) -> Self {
        let n = n.min(self.n());
        let m = m.min(self.prec);
        PowerSeries { coeffs: self.coeffs[..n].iter().map(|c| r.with_prec(c, m)).collect(), prec: m }
    }

    pub fn is_zero(&self, r: &OLRing) -> bool {
        self.coeffs.iter().all(|c| r.is_zero(c))
    }

    pub fn add(&self, r: &OLRing, o: &Self) -> Self {
        let n = self.n().min(o.n());
        let coeffs: Vec<_> = (0..n).map(|k| r.add(&self.coeffs[k], &o.coeffs[k])).collect();
        PowerSeries { coeffs, prec: self.prec.min(o.prec) }
    }

    pub fn sub(&self, r: &OLRing, o: &Self) -> Self {
        let n = self.n().min(o.n());
        let coeffs: Vec<_> = (0..n).map(|k| r.sub(&self.coeffs[k], &o.coeffs[k])).collect();
        PowerSeries { coeffs, prec: self.prec.min(o.prec) }
    }

    pub fn scale(&self, r: &OLRing, c: &OLElement) -> Self {
        PowerSeries { coeffs: self.coeffs.iter().map(|x| r.mul(x, c)).collect(), prec: self.prec.min(c.prec()) }
    }

    pub fn mul(&self, r: &OLRing, o: &Self) -> Self {
        let n = self.n().min(o.n());
        let m = self.prec.min(o.prec);
        let mut out = vec![r.zero(m); n];
        for (i, a) in self.coeffs.iter().enumerate().take(n) {
            if r.is_zero(a) {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate().take(n - i) {
                if !r.is_zero(b) {
                    out[i + j] = r.add(&out[i + j], &r.mul(a, b));
                }
            }
        }
        PowerSeries { coeffs: out, prec: m }
    }

    pub fn pow(&self, r: &OLRing, mut e: u64) -> Self {
        let mut acc = Self::monomial(r, r.one(self.prec), 0, self.n(), self.prec);
        let mut b = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(r, &b);
            }
            e >>= 1;
            if e > 0 {
                b = b.mul(r, &b);
            }
        }
        acc
    }

    /// `self(h(Z))`; `h` must have zero constant term.
    pub fn compose(&self, r: &OLRing, h: &Self) -> Result<Self> {
        if !r.is_zero(&h.coeffs[0]) {
            return Err(Error::ConstantTermNonzero);
        }
        let n = self.n().min(h.n());
        let m = self.prec.min(h.prec);
        let h = h.truncate(r, n, m);
        let mut acc = Self::zero(r, n, m);
        for k in (0..n).rev() {
            acc = acc.mul(r, &h);
            acc.coeffs[0] = r.add(&acc.coeffs[0], &r.with_prec(&self.coeffs[k], m));
        }
        Ok(acc)
    }

    /// Inverse of a series with unit constant term.
    pub fn inv(&self, r: &OLRing) -> Result<Self> {
        let a0inv = r.inv(&self.coeffs[0])?;
        let n = self.n();
        let mut b = vec![r.zero(self.prec); n];
        b[0] = a0inv;
        for k in 1..n {
            let mut s = r.zero(self.prec);
            for j in 1..=k {
                s = r.add(&s, &r.mul(&self.coeffs[j], &b[k - j]));
            }
            b[k] = r.neg(&r.mul(&s, &a0inv));
        }
        Ok(PowerSeries { coeffs: b, prec: self.prec })
    }

    /// `c*Z^k` terms in increasing `k`, then `O(Z^N) + O(pi^m)`.
    pub fn format(&self, r: &OLRing) -> String {
        let mut terms = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate() {
            if let Some(t) = format_term(r, c, &monomial_name("Z", k as i64)) {
                terms.push(t);
            }
        }
        terms.push(format!("O(Z^{})", self.n()));
        terms.push(format!("O(pi^{})", self.prec));
        terms.join(" + ")
    }
}

pub(crate) fn monomial_name(var: &str, k: i64) -> String {
    match k {
        0 => String::new(),
        1 => var.to_string(),
        _ => format!("{var}^{k}"),
    }
}

/// A single printed term, or `None` for a zero coefficient.
pub(crate) fn format_term(r: &OLRing, c: &OLElement, mono: &str) -> Option<String> {
    if r.is_zero(c) {
        return None;
    }
    let one = r.one(c.prec());
    Some(match (mono.is_empty(), *c == one) {
        (true, _) => r.format_digits(c),
        (false, true) => mono.to_string(),
        (false, false) => format!("{}*{mono}", r.format_digits(c)),
    })
}

/// `Σ_{i+j<N} c_{ij} X^i Y^j`, stored as an `N×N` array.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BivariateSeries {
    n: usize,
    coeffs: Vec<OLElement>,
    pub prec: u32,
}

impl BivariateSeries {
    pub fn zero(r: &OLRing, n: usize, m: u32) -> Self {
        BivariateSeries { n, coeffs: vec![r.zero(m); n * n], prec: m }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeff(&self, i: usize, j: usize) -> OLElement {
        self.coeffs[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, c: OLElement) {
        debug_assert!(i + j < self.n);
        self.coeffs[i * self.n + j] = c;
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..self.n - i).all(|j| self.coeff(i, j) == self.coeff(j, i)))
    }

    fn mul(&self, r: &OLRing, o: &Self, deg: usize) -> Self {
        let n = self.n;
        let mut out = Self::zero(r, n, self.prec.min(o.prec));
        for i in 0..n {
            for j in 0..n - i {
                let a = self.coeff(i, j);
                if r.is_zero(&a) {
                    continue;
                }
                for k in 0..n {
                    for l in 0..n - k {
                        if i + j + k + l > deg {
                            break;
                        }
                        let b = o.coeff(k, l);
                        if !r.is_zero(&b) {
                            let idx = (i + k) * n + j + l;
                            out.coeffs[idx] = r.add(&out.coeffs[idx], &r.mul(&a, &b));
                        }
                    }
                }
            }
        }
        out
    }

    fn pow(&self, r: &OLRing, mut e: u64, deg: usize) -> Self {
        let mut acc = Self::zero(r, self.n, self.prec);
        acc.set(0, 0, r.one(self.prec));
        let mut b = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(r, &b, deg);
            }
            e >>= 1;
            if e > 0 {
                b = b.mul(r, &b, deg);
            }
        }
        acc
    }

    /// `F(x(Z), y(Z))` for series without constant term.
    pub fn eval(&self, r: &OLRing, x: &PowerSeries, y: &PowerSeries) -> Result<PowerSeries> {
        if !r.is_zero(&x.coeffs[0]) || !r.is_zero(&y.coeffs[0]) {
            return Err(Error::ConstantTermNonzero);
        }
        let n = self.n.min(x.n()).min(y.n());
        let m = self.prec.min(x.prec).min(y.prec);
        let x = x.truncate(r, n, m);
        let y = y.truncate(r, n, m);
        let one = PowerSeries::monomial(r, r.one(m), 0, n, m);
        let mut xp = vec![one.clone()];
        let mut yp = vec![one];
        for k in 1..n {
            xp.push(xp[k - 1].mul(r, &x));
            yp.push(yp[k - 1].mul(r, &y));
        }
        let mut acc = PowerSeries::zero(r, n, m);
        for i in 0..n {
            for j in 0..n - i {
                let c = self.coeff(i, j);
                if !r.is_zero(&c) {
                    acc = acc.add(r, &xp[i].mul(r, &yp[j]).scale(r, &c));
                }
            }
        }
        Ok(acc)
    }

    /// Terms `c*X^i*Y^j` in increasing total degree.
    pub fn format(&self, r: &OLRing) -> String {
        let mut terms = Vec::new();
        for d in 0..self.n {
            for i in (0..=d).rev() {
                let j = d - i;
                let mono = [monomial_name("X", i as i64), monomial_name("Y", j as i64)]
                    .into_iter()
                    .filter(|s| !s.is_empty())
                    .collect::<Vec<_>>()
                    .join("*");
                if let Some(t) = format_term(r, &self.coeff(i, j), &mono) {
                    terms.push(t);
                }
            }
        }
        terms.push(format!("O(deg {})", self.n));
        terms.push(format!("O(pi^{})", self.prec));
        terms.join(" + ")
    }
}

/// The formal group attached to `f(Z) = πZ + Z^q`.
#[derive(Clone, Debug)]
pub struct LubinTate {
    ring: Arc<OLRing>,
}

fn ceil_log(q: u64, n: usize) -> u32 {
    let mut k = 0;
    let mut v = 1u64;
    while (v as u128) < n as u128 {
        v = v.saturating_mul(q);
        k += 1;
    }
    k
}

impl LubinTate {
    pub fn new(ring: Arc<OLRing>) -> Self {
        LubinTate { ring }
    }

    pub fn ring(&self) -> &Arc<OLRing> {
        &self.ring
    }

    fn work_prec(&self, n: usize, m: u32) -> Result<u32> {
        let w = m + 2 + 2 * ceil_log(self.ring.q(), n);
        self.ring.check_prec(w)?;
        Ok(w)
    }

    /// `πZ + Z^q` truncated to `(π^m, Z^N)`.
    pub fn frobenius_series(&self, n: usize, m: u32) -> PowerSeries {
        let r = &*self.ring;
        let mut s = PowerSeries::monomial(r, r.pi(m), 1, n, m);
        let q = r.q() as usize;
        if q < n {
            s.coeffs[q] = r.add(&s.coeffs[q], &r.one(m));
        }
        s
    }

    fn unit_factor(&self, d: usize, w: u32) -> Result<OLElement> {
        let r = &*self.ring;
        r.inv(&r.sub(&r.one(w), &r.pi_pow(d as u32 - 1, w)))
    }

    /// Solve `(π - π^d)·h = diff` at working precision `w`.
    fn solve_step(&self, diff: &OLElement, u: &OLElement, d: usize, w: u32) -> Result<OLElement> {
        let r = &*self.ring;
        let h = r.div_pi(diff).map_err(|_| Error::NoConvergence(d))?;
        Ok(r.with_prec(&r.mul(&h, u), w))
    }

    /// `[a](Z)` modulo `(π^m, Z^N)`; `a` is read as its stored representative.
    pub fn mult_by(&self, a: &OLElement, n: usize, m: u32) -> Result<PowerSeries> {
        let r = &*self.ring;
        if n < 2 {
            return Err(Error::InvalidParams("series length must be at least 2".into()));
        }
        let w = self.work_prec(n, m)?;
        let f = self.frobenius_series(n, w);
        let mut fpow = vec![PowerSeries::monomial(r, r.one(w), 0, n, w)];
        for k in 1..n {
            fpow.push(fpow[k - 1].mul(r, &f));
        }
        let mut h = PowerSeries::monomial(r, r.with_prec(a, w), 1, n, w);
        for d in 2..n {
            let mut lhs = r.zero(w);
            for i in 1..d {
                lhs = r.add(&lhs, &r.mul(&h.coeffs[i], &fpow[i].coeffs[d]));
            }
            let rhs = h.truncate(r, d + 1, w).pow(r, r.q()).coeffs[d];
            let u = self.unit_factor(d, w)?;
            h.coeffs[d] = self.solve_step(&r.sub(&lhs, &rhs), &u, d, w)?;
        }
        Ok(h.truncate(r, n, m))
    }

    /// The group law `F(X, Y)` modulo `(π^m, deg N)`.
    pub fn group_law(&self, n: usize, m: u32) -> Result<BivariateSeries> {
        self.group_law_ordered(n, m, false)
    }

    pub(crate) fn group_law_ordered(&self, n: usize, m: u32, reverse: bool) -> Result<BivariateSeries> {
        let r = &*self.ring;
        if n < 2 {
            return Err(Error::InvalidParams("series length must be at least 2".into()));
        }
        let w = self.work_prec(n, m)?;
        let f = self.frobenius_series(n, w);
        let mut fpow = vec![PowerSeries::monomial(r, r.one(w), 0, n, w)];
        for k in 1..n {
            fpow.push(fpow[k - 1].mul(r, &f));
        }
        let mut big = BivariateSeries::zero(r, n, w);
        big.set(1, 0, r.one(w));
        big.set(0, 1, r.one(w));
        for d in 2..n {
            let powq = big.pow(r, r.q(), d);
            let u = self.unit_factor(d, w)?;
            let mut order: Vec<usize> = (0..=d).collect();
            if reverse {
                order.reverse();
            }
            let mut new = Vec::with_capacity(d + 1);
            for a in order {
                let b = d - a;
                let mut lhs = r.zero(w);
                for i in 0..d {
                    let pa = fpow[i].coeffs[a];
                    if r.is_zero(&pa) {
                        continue;
                    }
                    for j in 0..d - i {
                        let c = big.coeff(i, j);
                        if r.is_zero(&c) {
                            continue;
                        }
                        lhs = r.add(&lhs, &r.mul(&c, &r.mul(&pa, &fpow[j].coeffs[b])));
                    }
                }
                let diff = r.sub(&lhs, &powq.coeff(a, b));
                new.push((a, b, self.solve_step(&diff, &u, d, w)?));
            }
            for (a, b, c) in new {
                big.set(a, b, c);
            }
        }
        let mut out = BivariateSeries::zero(r, n, m);
        for i in 0..n {
            for j in 0..n - i {
                out.set(i, j, r.with_prec(&big.coeff(i, j), m));
            }
        }
        Ok(out)
    }

    /// `x +_LT y` using a precomputed group law.
    pub fn add(&self, law: &BivariateSeries, x: &PowerSeries, y: &PowerSeries) -> Result<PowerSeries> {
        law.eval(&self.ring, x, y)
    }

    pub fn compose(&self, g: &PowerSeries, h: &PowerSeries) -> Result<PowerSeries> {
        if !self.ring.is_zero(&g.coeffs[0]) {
            return Err(Error::ConstantTermNonzero);
        }
        g.compose(&self.ring, h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldParams;

    fn lt(p: u32, f: u32) -> LubinTate {
        LubinTate::new(OLRing::new(FieldParams::unramified(p, f)).unwrap())
    }

    fn int_series(r: &OLRing, c: &[i64], m: u32) -> PowerSeries {
        PowerSeries { coeffs: c.iter().map(|&x| r.from_int(x, m)).collect(), prec: m }
    }

    #[test]
    fn frobenius_series_q3() {
        let t = lt(3, 1);
        let r = t.ring().clone();
        assert_eq!(t.frobenius_series(4, 2), int_series(&r, &[0, 3, 0, 1], 2));
    }

    #[test]
    fn multiplicative_group_q2() {
        let t = lt(2, 1);
        let r = t.ring().clone();
        let law = t.group_law(3, 3).unwrap();
        let mut expect = BivariateSeries::zero(&r, 3, 3);
        expect.set(1, 0, r.one(3));
        expect.set(0, 1, r.one(3));
        expect.set(1, 1, r.one(3));
        assert_eq!(law, expect);
        assert_eq!(t.mult_by(&r.from_int(3, 8), 4, 3).unwrap(), int_series(&r, &[0, 3, 3, 1], 3));
    }

    #[test]
    fn q3_law_has_no_quadratic_term() {
        let t = lt(3, 1);
        let r = t.ring().clone();
        let law = t.group_law(3, 4).unwrap();
        for (i, j) in [(2, 0), (1, 1), (0, 2)] {
            assert!(r.is_zero(&law.coeff(i, j)));
        }
        assert!(law.is_symmetric());
    }

    #[test]
    fn mult_by_one_and_pi() {
        for (p, f) in [(2, 1), (3, 1), (3, 2)] {
            let t = lt(p, f);
            let r = t.ring().clone();
            assert_eq!(t.mult_by(&r.one(10), 12, 3).unwrap(), PowerSeries::var(&r, 12, 3));
            assert_eq!(t.mult_by(&r.pi(10), 12, 3).unwrap(), t.frobenius_series(12, 3));
        }
    }

    #[test]
    fn law_identity_and_order_independence() {
        let t = lt(3, 1);
        let r = t.ring().clone();
        let law = t.group_law(7, 3).unwrap();
        for i in 2..7 {
            assert!(r.is_zero(&law.coeff(i, 0)));
        }
        assert_eq!(law, t.group_law_ordered(7, 3, true).unwrap());
    }

    #[test]
    fn ramified_law_is_consistent() {
        let t = LubinTate::new(OLRing::new(FieldParams::sqrt_p(3)).unwrap());
        let r = t.ring().clone();
        let law = t.group_law(8, 4).unwrap();
        let z = PowerSeries::var(&r, 8, 4);
        let two = t.mult_by(&r.from_int(2, 12), 8, 4).unwrap();
        assert_eq!(t.add(&law, &z, &z).unwrap(), two);
        let pi = t.mult_by(&r.pi(12), 8, 4).unwrap();
        assert_eq!(pi, t.frobenius_series(8, 4));
    }

    #[test]
    fn pi_endomorphism_is_frobenius_mod_pi() {
        let t = lt(3, 2);
        let r = t.ring().clone();
        let s = t.mult_by(&r.pi(20), 12, 3).unwrap().truncate(&r, 12, 1);
        let mut expect = PowerSeries::zero(&r, 12, 1);
        expect.coeffs[9] = r.one(1);
        assert_eq!(s, expect);
    }

    #[test]
    fn format_identity_series() {
        let t = lt(2, 1);
        let r = t.ring().clone();
        let s = t.mult_by(&r.one(3), 4, 3).unwrap();
        assert_eq!(s.format(&r), "Z + O(Z^4) + O(pi^3)");
        let s = t.mult_by(&r.from_int(3, 3), 3, 3).unwrap();
        assert_eq!(s.format(&r), "(1, 1, 0)*Z + (1, 1, 0)*Z^2 + O(Z^3) + O(pi^3)");
    }
}
