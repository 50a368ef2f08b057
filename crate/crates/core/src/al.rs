//! The coefficient ring `A_L/π^m`: Laurent series `Σ a_n Z^n` over
//! `o_L/π^m` with finitely many negative terms.
//!
//! An element stores the coefficients on `[lo, lo + len)`; exponents up to
//! `hi` are zero and everything from `hi` on is unknown. Every operation
//! shrinks `hi` to what its inputs determine.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::charp::{format_power, parse_power, split_terms, FqSeries, SeriesRing, INF, Q};
use crate::error::{Error, Result};
use crate::field::{FqElem, OLElement, OLRing};
use crate::lubin_tate::{format_term, LubinTate, PowerSeries};
use crate::witt::NormValue;

fn bound(x: i64) -> i64 {
    if x >= INF / 2 {
        INF
    } else {
        x
    }
}

/// `C(k, t)` for any integer `k`.
fn binom(k: i64, t: u32) -> i128 {
    let mut c: i128 = 1;
    for s in 0..t as i128 {
        c = c * (k as i128 - s) / (s + 1);
    }
    c
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ALElement {
    lo: i64,
    coeffs: Vec<OLElement>,
    hi: i64,
}

impl ALElement {
    /// Lowest stored exponent; `INF` for the exact zero.
    pub fn lo(&self) -> i64 {
        self.lo
    }

    /// First unknown exponent; `INF` when exact.
    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn is_exact(&self) -> bool {
        self.hi == INF
    }

    /// `(n, a_n)` over the stored range.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &OLElement)> {
        self.coeffs.iter().enumerate().map(move |(i, c)| (self.lo + i as i64, c))
    }

    fn top(&self) -> i64 {
        self.lo + self.coeffs.len() as i64
    }
}

/// `A_L/π^m` together with its `φ`, `ψ` and `Γ_L` structure.
#[derive(Debug)]
pub struct ALRing {
    ol: Arc<OLRing>,
    lt: LubinTate,
    m: u32,
    mult_cache: Mutex<HashMap<OLElement, PowerSeries>>,
    psi_consts: OnceLock<Vec<OLElement>>,
}

impl ALRing {
    pub fn new(ol: Arc<OLRing>, m: u32) -> Result<Arc<ALRing>> {
        if m == 0 {
            return Err(Error::InvalidParams("m must be positive".into()));
        }
        // psi needs one extra digit
        ol.check_prec(m + 1)?;
        let lt = LubinTate::new(ol.clone());
        Ok(Arc::new(ALRing { ol, lt, m, mult_cache: Mutex::new(HashMap::new()), psi_consts: OnceLock::new() }))
    }

    pub fn ol(&self) -> &Arc<OLRing> {
        &self.ol
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn q(&self) -> i64 {
        self.ol.q() as i64
    }

    fn zc(&self) -> OLElement {
        self.ol.zero(self.m)
    }

    /// Build from coefficients on `[lo, lo + len)` known below `hi`.
    pub fn from_coeffs(&self, lo: i64, coeffs: Vec<OLElement>, hi: i64) -> ALElement {
        let hi = bound(hi);
        let keep = if hi == INF { coeffs.len() } else { (hi - lo).clamp(0, coeffs.len() as i64) as usize };
        let mut coeffs: Vec<OLElement> = coeffs[..keep].iter().map(|c| self.ol.with_prec(c, self.m)).collect();
        let first = coeffs.iter().position(|c| !self.ol.is_zero(c));
        match first {
            None => ALElement { lo: hi, coeffs: Vec::new(), hi },
            Some(f) => {
                let last = coeffs.iter().rposition(|c| !self.ol.is_zero(c)).unwrap();
                coeffs.truncate(last + 1);
                coeffs.drain(..f);
                ALElement { lo: lo + f as i64, coeffs, hi }
            }
        }
    }

    pub fn from_terms(&self, terms: &[(i64, OLElement)], hi: i64) -> ALElement {
        let Some(lo) = terms.iter().map(|t| t.0).min() else {
            return self.from_coeffs(0, Vec::new(), hi);
        };
        let top = terms.iter().map(|t| t.0).max().unwrap();
        let mut v = vec![self.zc(); (top - lo + 1) as usize];
        for (k, c) in terms {
            let i = (k - lo) as usize;
            v[i] = self.ol.add(&v[i], c);
        }
        self.from_coeffs(lo, v, hi)
    }

    pub fn zero(&self) -> ALElement {
        self.from_coeffs(0, Vec::new(), INF)
    }

    /// Zero known only below `Z^hi`.
    pub fn zero_to(&self, hi: i64) -> ALElement {
        self.from_coeffs(hi, Vec::new(), hi)
    }

    pub fn one(&self) -> ALElement {
        self.monomial(self.ol.one(self.m), 0)
    }

    pub fn var(&self) -> ALElement {
        self.monomial(self.ol.one(self.m), 1)
    }

    pub fn monomial(&self, c: OLElement, k: i64) -> ALElement {
        self.from_coeffs(k, vec![c], INF)
    }

    pub fn from_power_series(&self, s: &PowerSeries) -> ALElement {
        self.from_coeffs(0, s.coeffs.clone(), s.n() as i64)
    }

    /// `a_k`, or `None` if it lies outside the known window.
    pub fn coeff(&self, x: &ALElement, k: i64) -> Option<OLElement> {
        if k >= x.hi {
            return None;
        }
        Some(if k < x.lo || k >= x.top() { self.zc() } else { x.coeffs[(k - x.lo) as usize] })
    }

    pub fn truncate(&self, x: &ALElement, hi: i64) -> ALElement {
        self.from_coeffs(x.lo, x.coeffs.clone(), hi.min(x.hi))
    }

    pub fn is_zero(&self, x: &ALElement) -> bool {
        x.coeffs.is_empty()
    }

    pub fn add(&self, a: &ALElement, b: &ALElement) -> ALElement {
        self.combine(a, b, false)
    }

    pub fn sub(&self, a: &ALElement, b: &ALElement) -> ALElement {
        self.combine(a, b, true)
    }

    fn combine(&self, a: &ALElement, b: &ALElement, negate: bool) -> ALElement {
        let hi = a.hi.min(b.hi);
        if a.coeffs.is_empty() && b.coeffs.is_empty() {
            return self.from_coeffs(hi, Vec::new(), hi);
        }
        let live = [a, b].into_iter().filter(|x| !x.coeffs.is_empty());
        let lo = live.clone().map(|x| x.lo).min().unwrap();
        let top = live.map(|x| x.top()).max().unwrap().min(hi.max(lo));
        let v = (lo..top)
            .map(|k| {
                let x = self.coeff(a, k).unwrap_or(self.zc());
                let y = self.coeff(b, k).unwrap_or(self.zc());
                if negate {
                    self.ol.sub(&x, &y)
                } else {
                    self.ol.add(&x, &y)
                }
            })
            .collect();
        self.from_coeffs(lo, v, hi)
    }

    pub fn neg(&self, a: &ALElement) -> ALElement {
        ALElement { lo: a.lo, coeffs: a.coeffs.iter().map(|c| self.ol.neg(c)).collect(), hi: a.hi }
    }

    pub fn scale(&self, a: &ALElement, c: &OLElement) -> ALElement {
        self.from_coeffs(a.lo, a.coeffs.iter().map(|x| self.ol.mul(x, c)).collect(), a.hi)
    }

    /// `Z^k·a`.
    pub fn shift(&self, a: &ALElement, k: i64) -> ALElement {
        ALElement { lo: bound(a.lo + k), coeffs: a.coeffs.clone(), hi: bound(a.hi + k) }
    }

    pub fn mul(&self, a: &ALElement, b: &ALElement) -> ALElement {
        let hi = bound((a.hi + b.lo).min(b.hi + a.lo));
        if a.coeffs.is_empty() || b.coeffs.is_empty() {
            return self.zero_to(hi);
        }
        let lo = a.lo + b.lo;
        let top = (a.top() + b.top() - 1).min(hi.max(lo));
        let mut v = vec![self.zc(); (top - lo).max(0) as usize];
        for (i, x) in a.coeffs.iter().enumerate() {
            if self.ol.is_zero(x) {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                let k = i + j;
                if k >= v.len() {
                    break;
                }
                v[k] = self.ol.add(&v[k], &self.ol.mul(x, y));
            }
        }
        self.from_coeffs(lo, v, hi)
    }

    pub fn pow(&self, a: &ALElement, mut e: u64) -> ALElement {
        let mut acc = self.one();
        let mut b = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &b);
            }
            e >>= 1;
            if e > 0 {
                b = self.mul(&b, &b);
            }
        }
        acc
    }

    /// Inverse of a unit, i.e. an element whose reduction mod `π` has a
    /// certified leading term.
    ///
    /// With `v` that leading exponent, `a = Z^v·P·(1 + n)` where `P` is a
    /// power series with unit constant term and `n` is divisible by `π`.
    pub fn inv(&self, a: &ALElement) -> Result<ALElement> {
        let r = &*self.ol;
        let v = a.terms().find(|(_, c)| r.is_unit(c)).map(|(k, _)| k);
        let v = match v {
            Some(v) => v,
            None if a.is_exact() => return Err(Error::NonUnit),
            None => return Err(Error::UncertifiedLeadingTerm),
        };
        let p_len = bound(a.hi - v);
        let top = a.top();
        let pcoeffs: Vec<OLElement> = (v..top).map(|k| self.coeff(a, k).unwrap()).collect();
        let pinv = if p_len == INF {
            if pcoeffs.len() > 1 {
                return Err(Error::WindowTooSmall("inverse of an exact non-monomial series".into()));
            }
            self.monomial(r.inv(&pcoeffs[0])?, 0)
        } else {
            let mut s = pcoeffs.clone();
            s.resize(p_len as usize, self.zc());
            let ps = PowerSeries { coeffs: s, prec: self.m }.inv(r)?;
            self.from_power_series(&ps)
        };
        let tail: Vec<(i64, OLElement)> = a.terms().filter(|&(k, _)| k < v).map(|(k, c)| (k - v, *c)).collect();
        let n = self.mul(&pinv, &self.from_terms(&tail, INF));
        let mut geo = self.one();
        let mut term = self.one();
        let minus_n = self.neg(&n);
        for _ in 1..self.m {
            term = self.mul(&term, &minus_n);
            geo = self.add(&geo, &term);
        }
        Ok(self.shift(&self.mul(&pinv, &geo), -v))
    }

    /// `φ(Z^k) = Σ_{t<m} C(k,t)·π^t·Z^{qk - t(q-1)}`, valid for all `k`.
    fn phi_monomial(&self, k: i64, prec: u32) -> impl Iterator<Item = (i64, OLElement)> + '_ {
        let q = self.q();
        (0..prec).filter_map(move |t| {
            let c = binom(k, t);
            if c == 0 {
                return None;
            }
            let coef = self.ol.mul(&self.ol.from_int_wide(c, prec), &self.ol.pi_pow(t, prec));
            Some((q * k - t as i64 * (q - 1), coef))
        })
    }

    /// First exponent of `φ(a)` that the unknown tail of `a` can reach.
    fn phi_hi(&self, hi: i64) -> i64 {
        if hi == INF {
            return INF;
        }
        let q = self.q();
        let m = self.m as i64;
        if hi >= 0 {
            hi + (q - 1) * (hi - m + 1).max(0)
        } else {
            q * hi - (m - 1) * (q - 1)
        }
    }

    /// `φ(f)(Z) = f(πZ + Z^q)`, acting trivially on coefficients.
    pub fn phi(&self, a: &ALElement) -> ALElement {
        let hi = self.phi_hi(a.hi);
        if a.coeffs.is_empty() {
            return self.zero_to(hi);
        }
        let q = self.q();
        let lo = q * a.lo - (self.m as i64 - 1) * (q - 1);
        let top = (q * (a.top() - 1) + 1).min(hi.max(lo));
        let mut v = vec![self.zc(); (top - lo).max(0) as usize];
        for (k, c) in a.terms() {
            if self.ol.is_zero(c) {
                continue;
            }
            for (e, t) in self.phi_monomial(k, self.m) {
                if e < top {
                    let i = (e - lo) as usize;
                    v[i] = self.ol.add(&v[i], &self.ol.mul(c, &t));
                }
            }
        }
        self.from_coeffs(lo, v, hi)
    }

    /// `[a](Z)` to `Z^n`, cached per `a`.
    fn mult_series(&self, a: &OLElement, n: usize) -> Result<PowerSeries> {
        let a = *a;
        if let Some(s) = self.mult_cache.lock().unwrap().get(&a) {
            if s.n() >= n {
                return Ok(s.truncate(&self.ol, n, self.m));
            }
        }
        let s = self.lt.mult_by(&a, n.max(2), self.m)?;
        self.mult_cache.lock().unwrap().insert(a, s.clone());
        Ok(s.truncate(&self.ol, n, self.m))
    }

    /// `γ_a(f)(Z) = f([a](Z))` for a unit `a`.
    ///
    /// `[a]` mod `π^m` depends on more digits of `a` than `m`, so `a` is read
    /// as its stored representative; pass it at full precision.
    pub fn gamma(&self, a: &OLElement, x: &ALElement) -> Result<ALElement> {
        let r = &*self.ol;
        if !r.is_unit(a) {
            return Err(Error::NonUnit);
        }
        if x.hi == INF {
            return Err(Error::WindowTooSmall("gamma needs a finite Z-window".into()));
        }
        if x.coeffs.is_empty() {
            return Ok(x.clone());
        }
        let len = (x.hi - x.lo) as usize;
        // [a](Z) = Z·u with u a unit power series
        let full = self.mult_series(a, len + 1)?;
        let u = PowerSeries { coeffs: full.coeffs[1..].to_vec(), prec: self.m };
        let mut upow = if x.lo >= 0 { u.pow(r, x.lo as u64) } else { u.inv(r)?.pow(r, x.lo.unsigned_abs()) };
        let mut v = vec![self.zc(); len];
        for (k, c) in x.terms() {
            if !r.is_zero(c) {
                let off = (k - x.lo) as usize;
                for (j, uc) in upow.coeffs.iter().enumerate().take(len - off) {
                    v[off + j] = r.add(&v[off + j], &r.mul(c, uc));
                }
            }
            upow = upow.mul(r, &u);
        }
        Ok(self.from_coeffs(x.lo, v, x.hi))
    }

    /// Components `(f_0, …, f_{q-1})` with `x = Σ_i φ(f_i)·Z^i`.
    pub fn decompose(&self, x: &ALElement) -> Vec<ALElement> {
        let (lo, comps) = self.decompose_raw(x, self.m);
        let q = self.q();
        let hi = if x.hi == INF { INF } else { x.hi.div_euclid(q) - (self.m as i64 - 1) };
        comps.into_iter().map(|c| self.from_coeffs(lo, c, hi)).collect()
    }

    /// Digit-by-digit: the level-`ℓ` digit `d` at `Z^{qk+i}` contributes
    /// `π^ℓ[d]·Z^k` to `f_i`, and `π^ℓ[d]·φ(Z^k)·Z^i` is removed, which only
    /// disturbs higher levels.
    fn decompose_raw(&self, x: &ALElement, prec: u32) -> (i64, Vec<Vec<OLElement>>) {
        let r = &*self.ol;
        let q = self.q();
        let zero = r.zero(prec);
        if x.coeffs.is_empty() {
            return (0, vec![Vec::new(); q as usize]);
        }
        let lo_ext = x.lo - (prec as i64 - 1) * (q - 1);
        let top = x.top();
        let mut res = vec![zero; (top - lo_ext) as usize];
        for (k, c) in x.terms() {
            res[(k - lo_ext) as usize] = r.with_prec(c, prec);
        }
        let klo = lo_ext.div_euclid(q);
        let ktop = (top - 1).div_euclid(q) + 1;
        let mut comps = vec![vec![zero; (ktop - klo) as usize]; q as usize];
        for level in 0..prec {
            for idx in 0..res.len() {
                if r.is_zero(&res[idx]) {
                    continue;
                }
                let c = r.div_pi_pow(&res[idx], level).expect("lower digits already removed");
                let d = r.residue(&c);
                if d == FqElem::ZERO {
                    continue;
                }
                let e = lo_ext + idx as i64;
                let (k, i) = (e.div_euclid(q), e.rem_euclid(q));
                let t = r.mul_pi_pow(&r.teichmuller(d, prec - level), level);
                let slot = &mut comps[i as usize][(k - klo) as usize];
                *slot = r.add(slot, &t);
                for (ex, pc) in self.phi_monomial(k, prec - level) {
                    let j = (ex + i - lo_ext) as usize;
                    res[j] = r.sub(&res[j], &r.mul(&t, &r.with_prec(&pc, prec)));
                }
            }
        }
        (klo, comps)
    }

    /// `trace_{A/φ(A)}(x) = φ(Σ_j comp_j(x·Z^j))`.
    pub fn trace(&self, x: &ALElement) -> ALElement {
        let mut acc = self.zero();
        for j in 0..self.q() {
            let c = self.decompose(&self.shift(x, j));
            acc = self.add(&acc, &c[j as usize]);
        }
        self.phi(&acc)
    }

    /// `ψ(Z^i)` for `0 ≤ i < q`, from `π·ψ(Z^i) = Σ_j comp_j(Z^{i+j})`
    /// computed one digit beyond `m`.
    pub fn psi_constants(&self) -> Result<&[OLElement]> {
        if let Some(v) = self.psi_consts.get() {
            return Ok(v);
        }
        let r = &*self.ol;
        let q = self.q();
        let w = self.m + 1;
        let mut out = Vec::new();
        for i in 0..q {
            let mut t = r.zero(w);
            for j in 0..q {
                let mono = ALElement { lo: i + j, coeffs: vec![r.one(w)], hi: INF };
                let (klo, comps) = self.decompose_raw(&mono, w);
                for (idx, c) in comps[j as usize].iter().enumerate() {
                    if klo + idx as i64 == 0 {
                        t = r.add(&t, c);
                    } else if !r.is_zero(c) {
                        return Err(Error::CertificateInvalid(format!("trace of Z^{i} is not constant")));
                    }
                }
            }
            out.push(r.div_pi(&t).map_err(|_| Error::TraceNotDivisible)?);
        }
        Ok(self.psi_consts.get_or_init(|| out))
    }

    /// `ψ = π^{-1}·φ^{-1}∘trace`, so `ψ(Σ φ(f_i) Z^i) = Σ f_i ψ(Z^i)`.
    pub fn psi(&self, x: &ALElement) -> Result<ALElement> {
        let consts = self.psi_constants()?;
        let comps = self.decompose(x);
        let mut acc = self.zero();
        for (c, k) in comps.iter().zip(consts) {
            acc = self.add(&acc, &self.scale(c, k));
        }
        Ok(acc)
    }

    /// Image in `F_q((ω))` under `Z ↦ ω`.
    pub fn reduce_mod_pi(&self, x: &ALElement) -> Result<FqSeries> {
        let s = SeriesRing::laurent(self.ol.residue_field().clone());
        let terms: Vec<(Q, FqElem)> = x
            .terms()
            .map(|(k, c)| (Q::from_integer(k), self.ol.residue(c)))
            .filter(|t| t.1 != FqElem::ZERO)
            .collect();
        let hi = (x.hi != INF).then(|| Q::from_integer(x.hi));
        s.from_terms(&terms, hi)
    }

    /// `sup_n |a_n|·|ω|_♭^{r·n} = q^{max_n(-v_π(a_n) - w·r·n)}` for the lift whose
    /// coefficients are the stored representatives. Certified when the unknown
    /// tail, bounded by `-w·r·hi`, stays strictly below the maximum.
    pub fn overconv_norm(&self, x: &ALElement, r: Q, weight: Q) -> NormValue {
        let best = x
            .terms()
            .filter_map(|(n, c)| self.ol.valuation(c).map(|v| -Q::from_integer(v as i64) - weight * r * Q::from_integer(n)))
            .max();
        let tail = (x.hi != INF).then(|| -weight * r * Q::from_integer(x.hi));
        NormValue { exponent: best, certified: match (best, tail) {
            (_, None) => true,
            (Some(b), Some(t)) => t < b,
            (None, Some(_)) => false,
        } }
    }

    /// Whether `a` and `b` agree below `min(hi_a, hi_b)`, which is returned.
    pub fn eq_on_window(&self, a: &ALElement, b: &ALElement) -> (bool, i64) {
        let hi = a.hi.min(b.hi);
        (self.is_zero(&self.truncate(&self.sub(a, b), hi)), hi)
    }

    /// `c*Z^k` in increasing `k`, then `O(Z^N)` (if truncated) and `O(pi^m)`.
    pub fn format(&self, x: &ALElement) -> String {
        let mut parts: Vec<String> =
            x.terms().filter_map(|(k, c)| format_term(&self.ol, c, &format_power("Z", Q::from_integer(k)))).collect();
        if x.hi != INF {
            let mono = if x.hi == 0 { "Z^0".to_string() } else { format_power("Z", Q::from_integer(x.hi)) };
            parts.push(format!("O({mono})"));
        }
        parts.push(format!("O(pi^{})", self.m));
        parts.join(" + ")
    }

    pub fn parse(&self, s: &str) -> Result<ALElement> {
        let mut terms = Vec::new();
        let mut hi = INF;
        let int_power = |t: &str| -> Result<i64> {
            let e = parse_power("Z", t)?;
            if !e.is_integer() {
                return Err(Error::Parse(format!("fractional exponent in {t:?}")));
            }
            Ok(e.to_integer())
        };
        for tok in split_terms(s.trim()) {
            let tok = tok.trim();
            if tok.is_empty() || tok == "0" {
                continue;
            }
            if let Some(inner) = tok.strip_prefix("O(").and_then(|t| t.strip_suffix(')')) {
                if let Some(m) = inner.strip_prefix("pi^") {
                    let m: u32 = m.trim().parse().map_err(|_| Error::Parse(format!("bad precision {tok:?}")))?;
                    if m != self.m {
                        return Err(Error::Parse(format!("precision pi^{m} does not match ring pi^{}", self.m)));
                    }
                } else {
                    hi = int_power(inner)?;
                }
                continue;
            }
            let (coef, mono) = match tok.split_once('*') {
                Some((c, mono)) => (self.ol.parse(c)?, mono.trim()),
                None if tok.starts_with('Z') => (self.ol.one(self.m), tok),
                None => (self.ol.parse(tok)?, ""),
            };
            let k = if mono.is_empty() { 0 } else { int_power(mono)? };
            terms.push((k, self.ol.with_prec(&coef, self.m)));
        }
        Ok(self.from_terms(&terms, hi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldParams;

    fn ring(params: FieldParams, m: u32) -> Arc<ALRing> {
        ALRing::new(OLRing::new(params).unwrap(), m).unwrap()
    }

    #[test]
    fn phi_of_z() {
        for (p, f) in [(2, 1), (3, 1), (2, 2)] {
            let a = ring(FieldParams::unramified(p, f), 3);
            let r = a.ol().clone();
            let expect = a.add(&a.monomial(r.pi(3), 1), &a.monomial(r.one(3), a.q()));
            assert_eq!(a.phi(&a.var()), expect);
        }
    }

    #[test]
    fn decompose_z_q_plus_one() {
        for params in [FieldParams::unramified(3, 1), FieldParams::unramified(2, 2), FieldParams::sqrt_p(3)] {
            let a = ring(params, 3);
            let r = a.ol().clone();
            let q = a.q();
            let comps = a.decompose(&a.monomial(r.one(3), q + 1));
            for (i, c) in comps.iter().enumerate() {
                let expect = match i {
                    1 => a.var(),
                    2 => a.monomial(r.neg(&r.pi(3)), 0),
                    _ => a.zero(),
                };
                assert_eq!(c, &expect, "component {i}");
            }
        }
    }

    #[test]
    fn decompose_reconstructs() {
        let a = ring(FieldParams::unramified(3, 1), 3);
        let r = a.ol().clone();
        let terms: Vec<_> = (-4..12).map(|k| (k, r.from_int(k * k + 1, 3))).collect();
        let x = a.from_terms(&terms, 12);
        let comps = a.decompose(&x);
        let mut back = a.zero();
        for (i, c) in comps.iter().enumerate() {
            back = a.add(&back, &a.shift(&a.phi(c), i as i64));
        }
        let (ok, hi) = a.eq_on_window(&back, &x);
        assert!(ok);
        assert!(hi > 0);
    }

    #[test]
    fn trace_examples() {
        let a = ring(FieldParams::unramified(2, 1), 4);
        let r = a.ol().clone();
        assert_eq!(a.trace(&a.var()), a.monomial(r.from_int(-2, 4), 0));
        let a = ring(FieldParams::unramified(3, 1), 3);
        let r = a.ol().clone();
        let g = a.from_terms(&[(-1, r.one(3)), (2, r.from_int(5, 3))], INF);
        let pg = a.phi(&g);
        assert_eq!(a.trace(&pg), a.scale(&pg, &r.from_int(3, 3)));
    }

    #[test]
    fn psi_constants_match_power_sums() {
        // roots of X^q + πX - φ(Z): p_0 = q, p_{q-1} = -(q-1)π, others vanish
        for params in [FieldParams::unramified(2, 1), FieldParams::unramified(5, 1), FieldParams::unramified(2, 2), FieldParams::sqrt_p(3)] {
            let a = ring(params, 3);
            let r = a.ol().clone();
            let q = a.q();
            let c = a.psi_constants().unwrap().to_vec();
            for (i, ci) in c.iter().enumerate() {
                let expect = match i as i64 {
                    0 => r.q_over_pi(3),
                    i if i == q - 1 => r.from_int(1 - q, 3),
                    _ => r.zero(3),
                };
                let expect = if q == 2 && i == 1 { r.from_int(-1, 3) } else { expect };
                assert_eq!(*ci, expect, "q={q} i={i}");
            }
        }
    }

    #[test]
    fn psi_of_one_over_qp() {
        for p in [2, 3, 5, 7] {
            let a = ring(FieldParams::unramified(p, 1), 3);
            assert_eq!(a.psi(&a.one()).unwrap(), a.one());
        }
    }

    #[test]
    fn reduce_example() {
        let a = ring(FieldParams::unramified(3, 1), 2);
        let r = a.ol().clone();
        let x = a.add(&a.var(), &a.monomial(r.pi(2), 2));
        let s = SeriesRing::laurent(r.residue_field().clone());
        assert_eq!(a.reduce_mod_pi(&x).unwrap(), s.omega());
    }

    #[test]
    fn inverse_on_window() {
        let a = ring(FieldParams::unramified(2, 1), 3);
        let r = a.ol().clone();
        let x = a.from_terms(&[(-3, r.pi(3)), (-1, r.from_int(3, 3)), (0, r.one(3)), (4, r.from_int(6, 3))], 10);
        let y = a.inv(&x).unwrap();
        let (ok, hi) = a.eq_on_window(&a.mul(&x, &y), &a.one());
        assert!(ok && hi > 0, "hi={hi}");
        let z = a.monomial(r.from_int(2, 3), 1);
        assert_eq!(a.inv(&z), Err(Error::NonUnit));
        assert_eq!(a.inv(&a.zero_to(5)), Err(Error::UncertifiedLeadingTerm));
    }

    #[test]
    fn gamma_basics() {
        let a = ring(FieldParams::unramified(3, 1), 3);
        let r = a.ol().clone();
        let z = a.truncate(&a.var(), 8);
        let two = r.from_int(2, 3);
        let g = a.gamma(&two, &z).unwrap();
        let lt = LubinTate::new(r.clone());
        assert_eq!(g, a.from_power_series(&lt.mult_by(&two, 8, 3).unwrap()));
        let one = a.truncate(&a.one(), 8);
        assert_eq!(a.gamma(&two, &one).unwrap(), one);
        assert_eq!(a.gamma(&r.from_int(3, 3), &z), Err(Error::NonUnit));
    }

    #[test]
    fn format_round_trip() {
        let a = ring(FieldParams::unramified(3, 1), 2);
        let r = a.ol().clone();
        let x = a.from_terms(&[(-2, r.from_int(4, 2)), (0, r.one(2)), (3, r.from_int(2, 2))], 7);
        let s = a.format(&x);
        assert_eq!(s, "(1, 1)*Z^(-2) + (1, 0) + (2, 1)*Z^3 + O(Z^7) + O(pi^2)");
        assert_eq!(a.parse(&s).unwrap(), x);
        let e = a.var();
        assert_eq!(a.parse(&a.format(&e)).unwrap(), e);
    }
}
