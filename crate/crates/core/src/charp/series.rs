use std::collections::BTreeMap;
use std::sync::Arc;

use super::{CharPRing, Valuation, Q};
use crate::error::{Error, Result};
use crate::field::{Fq, FqElem};

/// Sentinel window bound for exactly known elements.
pub const INF: i64 = i64::MAX / 4;

/// A truncated series `Σ c_e ω^{e/D} + O(ω^{hi/D})` over `F_q`, `D = q^L`
/// fixed by the owning [`SeriesRing`]. Terms are sorted with nonzero
/// coefficients below `hi`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FqSeries {
    terms: Vec<(i64, FqElem)>,
    hi: i64,
}

impl FqSeries {
    pub fn terms(&self) -> &[(i64, FqElem)] {
        &self.terms
    }

    /// Upper window bound in scaled units.
    pub fn hi_scaled(&self) -> i64 {
        self.hi
    }

    pub fn is_exact(&self) -> bool {
        self.hi >= INF
    }

    /// Lowest stored scaled exponent, or `hi` for a truncated zero.
    fn lo(&self) -> i64 {
        self.terms.first().map_or(self.hi, |t| t.0)
    }
}

/// `F_q((ω^{1/q^L}))` truncated: `L = 0` gives `E_L = F_q((ω))`.
#[derive(Clone, Debug)]
pub struct SeriesRing {
    fq: Arc<Fq>,
    level: u32,
    denom: i64,
}

fn clamp(v: i64) -> i64 {
    v.min(INF)
}

impl SeriesRing {
    pub fn laurent(fq: Arc<Fq>) -> Self {
        SeriesRing { fq, level: 0, denom: 1 }
    }

    /// Supports exponents with denominator dividing `q^level`.
    pub fn perfect(fq: Arc<Fq>, level: u32) -> Self {
        let denom = (fq.q() as i64).pow(level);
        SeriesRing { fq, level, denom }
    }

    pub fn fq(&self) -> &Arc<Fq> {
        &self.fq
    }

    pub fn max_level(&self) -> u32 {
        self.level
    }

    pub fn denom(&self) -> i64 {
        self.denom
    }

    fn scale_exp(&self, e: Q) -> Result<i64> {
        let s = e * self.denom;
        if !s.is_integer() {
            return Err(Error::PerfLevelExceeded { requested: self.level_of_denom(*e.denom()), max: self.level });
        }
        Ok(s.to_integer())
    }

    fn level_of_denom(&self, mut d: i64) -> u32 {
        let q = self.fq.q() as i64;
        let mut k = 0;
        while d > 1 {
            d /= q;
            k += 1;
        }
        k
    }

    pub fn unscale(&self, e: i64) -> Q {
        Q::new(e, self.denom)
    }

    fn normalize(&self, mut terms: Vec<(i64, FqElem)>, hi: i64) -> FqSeries {
        terms.retain(|t| !t.1.is_zero() && t.0 < hi);
        FqSeries { terms, hi: clamp(hi) }
    }

    pub fn exact_zero(&self) -> FqSeries {
        FqSeries { terms: Vec::new(), hi: INF }
    }

    /// Zero known modulo `ω^hi`.
    pub fn zero_to(&self, hi: Q) -> Result<FqSeries> {
        Ok(FqSeries { terms: Vec::new(), hi: self.scale_exp(hi)? })
    }

    pub fn constant(&self, c: FqElem) -> FqSeries {
        self.normalize(vec![(0, c)], INF)
    }

    /// `c·ω^e`, exact.
    pub fn monomial(&self, c: FqElem, e: Q) -> Result<FqSeries> {
        Ok(self.normalize(vec![(self.scale_exp(e)?, c)], INF))
    }

    pub fn omega(&self) -> FqSeries {
        self.normalize(vec![(self.denom, FqElem::ONE)], INF)
    }

    /// Build from `(exponent, coefficient)` pairs with window bound `hi`
    /// (`None` for exact). Repeated exponents are summed.
    pub fn from_terms(&self, terms: &[(Q, FqElem)], hi: Option<Q>) -> Result<FqSeries> {
        let hi = match hi {
            Some(h) => self.scale_exp_ceil(h),
            None => INF,
        };
        let mut acc: BTreeMap<i64, FqElem> = BTreeMap::new();
        for (e, c) in terms {
            let s = self.scale_exp(*e)?;
            let v = acc.entry(s).or_insert(FqElem::ZERO);
            *v = self.fq.add(*v, *c);
        }
        Ok(self.normalize(acc.into_iter().collect(), hi))
    }

    fn scale_exp_ceil(&self, e: Q) -> i64 {
        (e * self.denom).ceil().to_integer()
    }

    /// Forget terms at and above `ω^hi`.
    pub fn truncate(&self, x: &FqSeries, hi: Q) -> FqSeries {
        let h = self.scale_exp_ceil(hi).min(x.hi);
        self.normalize(x.terms.clone(), h)
    }

    pub fn hi(&self, x: &FqSeries) -> Option<Q> {
        (!x.is_exact()).then(|| self.unscale(x.hi))
    }

    pub fn coeff(&self, x: &FqSeries, e: Q) -> FqElem {
        let Ok(s) = self.scale_exp(e) else { return FqElem::ZERO };
        x.terms.binary_search_by_key(&s, |t| t.0).map_or(FqElem::ZERO, |i| x.terms[i].1)
    }

    /// The least `s` such that all exponents have denominator dividing `q^s`.
    pub fn level(&self, x: &FqSeries) -> u32 {
        let q = self.fq.q() as i64;
        let mut s = self.level;
        while s > 0 {
            let unit = self.denom / q.pow(s) * q;
            if x.terms.iter().any(|t| t.0 % unit != 0) {
                break;
            }
            s -= 1;
        }
        s
    }

    pub fn add_series(&self, a: &FqSeries, b: &FqSeries) -> FqSeries {
        let hi = a.hi.min(b.hi);
        let mut out = Vec::with_capacity(a.terms.len() + b.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < a.terms.len() || j < b.terms.len() {
            let take_a = j >= b.terms.len() || (i < a.terms.len() && a.terms[i].0 < b.terms[j].0);
            let take_b = i >= a.terms.len() || (j < b.terms.len() && b.terms[j].0 < a.terms[i].0);
            if take_a {
                out.push(a.terms[i]);
                i += 1;
            } else if take_b {
                out.push(b.terms[j]);
                j += 1;
            } else {
                out.push((a.terms[i].0, self.fq.add(a.terms[i].1, b.terms[j].1)));
                i += 1;
                j += 1;
            }
        }
        self.normalize(out, hi)
    }

    pub fn neg_series(&self, a: &FqSeries) -> FqSeries {
        FqSeries { terms: a.terms.iter().map(|&(e, c)| (e, self.fq.neg(c))).collect(), hi: a.hi }
    }

    pub fn scale(&self, a: &FqSeries, c: FqElem) -> FqSeries {
        if c.is_zero() {
            return FqSeries { terms: Vec::new(), hi: a.hi };
        }
        FqSeries { terms: a.terms.iter().map(|&(e, x)| (e, self.fq.mul(x, c))).collect(), hi: a.hi }
    }

    /// Multiply by `ω^{e}` (scaled units).
    pub fn shift_scaled(&self, a: &FqSeries, e: i64) -> FqSeries {
        FqSeries {
            terms: a.terms.iter().map(|&(k, c)| (k + e, c)).collect(),
            hi: if a.is_exact() { INF } else { clamp(a.hi + e) },
        }
    }

    pub fn mul_series(&self, a: &FqSeries, b: &FqSeries) -> FqSeries {
        let bound = |x: &FqSeries, y: &FqSeries| if x.is_exact() { INF } else { x.hi.saturating_add(y.lo()) };
        let hi = clamp(bound(a, b).min(bound(b, a)));
        let mut acc: BTreeMap<i64, FqElem> = BTreeMap::new();
        for &(ea, ca) in &a.terms {
            let bound = hi - ea;
            for &(eb, cb) in &b.terms {
                if eb >= bound {
                    break;
                }
                let v = acc.entry(ea + eb).or_insert(FqElem::ZERO);
                *v = self.fq.add(*v, self.fq.mul(ca, cb));
            }
        }
        self.normalize(acc.into_iter().collect(), hi)
    }

    /// `x ↦ x^p`, the absolute Frobenius.
    fn frob_p(&self, a: &FqSeries) -> FqSeries {
        let p = self.fq.p() as i64;
        let hi = if a.is_exact() { INF } else { clamp(a.hi.saturating_mul(p)) };
        let terms = a.terms.iter().map(|&(e, c)| (e * p, self.fq.pow(c, p as u64))).collect();
        FqSeries { terms, hi }
    }

    pub fn frobenius_series(&self, a: &FqSeries) -> FqSeries {
        let q = self.fq.q() as i64;
        let hi = if a.is_exact() { INF } else { clamp(a.hi.saturating_mul(q)) };
        let terms = a.terms.iter().map(|&(e, c)| (e * q, self.fq.frobenius(c))).collect();
        FqSeries { terms, hi }
    }

    pub fn qth_root_series(&self, a: &FqSeries) -> Result<FqSeries> {
        let q = self.fq.q() as i64;
        if a.terms.iter().any(|t| t.0 % q != 0) {
            return Err(Error::PerfLevelExceeded { requested: self.level + 1, max: self.level });
        }
        let hi = if a.is_exact() { INF } else { a.hi.div_euclid(q) + i64::from(a.hi.rem_euclid(q) != 0) };
        let terms = a.terms.iter().map(|&(e, c)| (e / q, self.fq.qth_root(c))).collect();
        Ok(self.normalize(terms, hi))
    }

    pub fn valuation_of(&self, a: &FqSeries) -> Valuation {
        match a.terms.first() {
            Some(t) => Valuation::Exact(self.unscale(t.0)),
            None if a.is_exact() => Valuation::Infinite,
            None => Valuation::AtLeast(self.unscale(a.hi)),
        }
    }

    /// Inverse via `(1 - h)^{-1} = Π_k Σ_{i<p} h^{i p^k}`.
    pub fn inv_series(&self, a: &FqSeries) -> Result<FqSeries> {
        let &(v, c) = a.terms.first().ok_or(Error::UncertifiedLeadingTerm)?;
        let cinv = self.fq.inv(c)?;
        // a = c ω^v (1 - h)
        let normed = self.scale(&self.shift_scaled(a, -v), cinv);
        let h = self.neg_series(&self.add_series(&normed, &self.neg_series(&self.constant(FqElem::ONE))));
        let rel = normed.hi;
        if rel >= INF && !h.terms.is_empty() {
            return Err(Error::WindowTooSmall("inverse of an exact non-monomial needs a finite window".into()));
        }
        let p = self.fq.p() as u64;
        let mut acc = self.constant(FqElem::ONE);
        let mut hk = h;
        while hk.lo() < rel && !hk.terms.is_empty() {
            let mut factor = self.constant(FqElem::ONE);
            let mut pw = self.constant(FqElem::ONE);
            for _ in 1..p {
                pw = self.mul_series(&pw, &hk);
                factor = self.add_series(&factor, &pw);
            }
            acc = self.mul_series(&acc, &factor);
            hk = self.frob_p(&hk);
        }
        let acc = self.normalize(acc.terms, rel);
        Ok(self.scale(&self.shift_scaled(&acc, -v), cinv))
    }

    /// `c*w^(a/b)` terms in increasing exponent, then `O(w^N)`.
    pub fn format(&self, x: &FqSeries) -> String {
        let mut parts = Vec::new();
        for &(e, c) in &x.terms {
            let exp = self.unscale(e);
            let mono = format_power("w", exp);
            let coef = self.fq.format(c);
            parts.push(match (mono.is_empty(), c == FqElem::ONE) {
                (true, _) => coef,
                (false, true) => mono,
                (false, false) => format!("{coef}*{mono}"),
            });
        }
        if !x.is_exact() {
            let h = self.unscale(x.hi);
            let mono = if h == Q::from_integer(0) { "w^0".to_string() } else { format_power("w", h) };
            parts.push(format!("O({mono})"));
        }
        if parts.is_empty() {
            return "0".into();
        }
        parts.join(" + ")
    }

    pub fn parse(&self, s: &str) -> Result<FqSeries> {
        let mut terms = Vec::new();
        let mut hi = None;
        let s = s.trim();
        if s == "0" {
            return Ok(self.exact_zero());
        }
        for tok in split_terms(s) {
            let tok = tok.trim();
            if let Some(inner) = tok.strip_prefix("O(").and_then(|t| t.strip_suffix(')')) {
                hi = Some(parse_power("w", inner)?);
                continue;
            }
            let (coef, mono) = match tok.split_once('*') {
                Some((c, m)) => (self.fq.parse(c)?, m.trim()),
                None if tok.starts_with('w') => (FqElem::ONE, tok),
                None => (self.fq.parse(tok)?, ""),
            };
            let e = if mono.is_empty() { Q::from_integer(0) } else { parse_power("w", mono)? };
            terms.push((e, coef));
        }
        self.from_terms(&terms, hi)
    }
}

pub(crate) fn split_terms(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    let bytes = s.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'(' | b'[' => depth += 1,
            b')' | b']' => depth -= 1,
            b'+' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
        i += 1;
    }
    out.push(&s[start..]);
    out
}

/// `w`, `w^3`, `w^(1/3)`, `w^(-2)`; empty for exponent zero.
pub(crate) fn format_power(var: &str, e: Q) -> String {
    if e == Q::from_integer(0) {
        String::new()
    } else if e == Q::from_integer(1) {
        var.to_string()
    } else if e.is_integer() && e > Q::from_integer(0) {
        format!("{var}^{}", e.to_integer())
    } else {
        format!("{var}^({e})")
    }
}

pub(crate) fn parse_power(var: &str, s: &str) -> Result<Q> {
    let s = s.trim();
    let rest = s.strip_prefix(var).ok_or_else(|| Error::Parse(format!("expected {var} in {s:?}")))?;
    if rest.is_empty() {
        return Ok(Q::from_integer(1));
    }
    let rest = rest.strip_prefix('^').ok_or_else(|| Error::Parse(format!("bad power {s:?}")))?;
    let rest = rest.strip_prefix('(').and_then(|r| r.strip_suffix(')')).unwrap_or(rest);
    rest.trim().parse::<Q>().map_err(|_| Error::Parse(format!("bad exponent {s:?}")))
}

impl CharPRing for SeriesRing {
    type Elem = FqSeries;

    fn p(&self) -> u32 {
        self.fq.p()
    }
    fn q(&self) -> u64 {
        self.fq.q()
    }
    fn zero(&self) -> FqSeries {
        self.exact_zero()
    }
    fn one(&self) -> FqSeries {
        self.constant(FqElem::ONE)
    }
    fn from_int(&self, n: i64) -> FqSeries {
        self.constant(self.fq.from_int(n))
    }
    fn from_fq(&self, x: FqElem) -> Result<FqSeries> {
        Ok(self.constant(x))
    }
    fn add(&self, a: &FqSeries, b: &FqSeries) -> FqSeries {
        self.add_series(a, b)
    }
    fn neg(&self, a: &FqSeries) -> FqSeries {
        self.neg_series(a)
    }
    fn mul(&self, a: &FqSeries, b: &FqSeries) -> FqSeries {
        self.mul_series(a, b)
    }
    fn is_zero(&self, a: &FqSeries) -> bool {
        a.terms.is_empty()
    }
    fn frobenius(&self, a: &FqSeries) -> FqSeries {
        self.frobenius_series(a)
    }
    fn inv(&self, a: &FqSeries) -> Result<FqSeries> {
        self.inv_series(a)
    }
    fn qth_root(&self, a: &FqSeries) -> Result<FqSeries> {
        self.qth_root_series(a)
    }
    fn valuation(&self, a: &FqSeries) -> Result<Valuation> {
        Ok(self.valuation_of(a))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(q: u64, level: u32) -> SeriesRing {
        let p = if q.is_multiple_of(2) { 2 } else { 3 };
        let f = q.trailing_zeros().max(if p == 3 { (q as f64).log(3.0).round() as u32 } else { 0 });
        SeriesRing::perfect(Fq::new(p, f, q).unwrap(), level)
    }

    fn q(n: i64, d: i64) -> Q {
        Q::new(n, d)
    }

    #[test]
    fn omega_times_inverse() {
        let r = ring(3, 0);
        let w = r.omega();
        assert_eq!(r.mul(&w, &r.inv(&w).unwrap()), r.one());
    }

    #[test]
    fn geometric_series_inverse() {
        for (qq, signs) in [(2u64, [1i64, 1, 1, 1]), (3, [1, -1, 1, -1])] {
            let r = ring(qq, 0);
            let x = r.truncate(&r.add(&r.one(), &r.omega()), q(4, 1));
            let inv = r.inv(&x).unwrap();
            let expect: Vec<(Q, FqElem)> =
                signs.iter().enumerate().map(|(k, &s)| (q(k as i64, 1), r.fq().from_int(s))).collect();
            assert_eq!(inv, r.from_terms(&expect, Some(q(4, 1))).unwrap());
        }
    }

    #[test]
    fn inverse_of_truncated_zero_is_uncertified() {
        let r = ring(2, 0);
        let z = r.zero_to(q(5, 1)).unwrap();
        assert_eq!(r.inv(&z), Err(Error::UncertifiedLeadingTerm));
    }

    #[test]
    fn roots_and_frobenius() {
        let r = ring(3, 2);
        let w = r.omega();
        assert_eq!(r.qth_root(&r.frobenius(&w)).unwrap(), w);
        let x = r.add(&r.one(), &r.pow(&w, 3));
        assert_eq!(r.qth_root(&x).unwrap(), r.add(&r.one(), &w));
        let root = r.qth_root(&r.qth_root(&w).unwrap()).unwrap();
        assert_eq!(r.level(&root), 2);
        assert_eq!(r.valuation_of(&root), Valuation::Exact(q(1, 9)));
        assert!(matches!(r.qth_root(&root), Err(Error::PerfLevelExceeded { .. })));
    }

    #[test]
    fn windows_follow_valuations() {
        let r = ring(2, 0);
        let a = r.truncate(&r.add(&r.omega(), &r.pow(&r.omega(), 3)), q(6, 1));
        let b = r.truncate(&r.pow(&r.omega(), 2), q(5, 1));
        let prod = r.mul(&a, &b);
        assert_eq!(r.hi(&prod), Some(q(6, 1)));
    }

    #[test]
    fn format_parse_round_trip() {
        let r = ring(4, 1);
        let x = r
            .from_terms(&[(q(-2, 1), FqElem(2)), (q(1, 4), FqElem(1)), (q(3, 1), FqElem(3))], Some(q(7, 1)))
            .unwrap();
        let s = r.format(&x);
        assert_eq!(s, "[0,1]*w^(-2) + w^(1/4) + [1,1]*w^3 + O(w^7)");
        assert_eq!(r.parse(&s).unwrap(), x);
        assert_eq!(r.parse(&r.format(&r.exact_zero())).unwrap(), r.exact_zero());
    }
}
