//! The truncated ring of integers `o_L/π_L^m`.
//!
//! Internally an element is `Σ_{i<e} a_i π^i` with `a_i` in the unramified
//! subring `Z_q = Z_p[t]/(g)`, each `a_i` reduced modulo
//! `p^{⌈(m-i)/e⌉}`; that form is canonical. Teichmüller digits are derived
//! from it on demand.

use std::fmt;
use std::sync::{Arc, OnceLock};

use super::fq::{Fq, FqElem};
use super::FieldParams;
use crate::error::{Error, Result};

/// Maximum of `e·f` supported by the fixed-size limb array.
pub const MAX_LIMBS: usize = 8;

/// An element of `o_L/π_L^prec`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct OLElement {
    c: [u64; MAX_LIMBS],
    prec: u32,
}

impl OLElement {
    pub fn prec(&self) -> u32 {
        self.prec
    }
}

impl fmt::Debug for OLElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OL({:?}, prec {})", self.c, self.prec)
    }
}

/// Arithmetic context for `o_L/π^m` at every precision up to `max_prec`.
pub struct OLRing {
    params: FieldParams,
    residue: Arc<Fq>,
    p: u64,
    f: usize,
    e: usize,
    q: u64,
    g: Vec<u64>,
    eis: Vec<i64>,
    max_prec: u32,
    pow_p: Vec<u64>,
    p_over_pi: OnceLock<OLElement>,
    teich: OnceLock<Vec<OLElement>>,
}

impl fmt::Debug for OLRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OLRing({:?})", self.params)
    }
}

fn ceil_div(a: i64, b: i64) -> i64 {
    (a + b - 1).div_euclid(b)
}

fn mod_inverse(a: i128, m: i128) -> Option<i128> {
    let (mut old_r, mut r) = (a.rem_euclid(m), m);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let qt = old_r / r;
        (old_r, r) = (r, old_r - qt * r);
        (old_s, s) = (s, old_s - qt * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m))
}

impl OLRing {
    pub fn new(params: FieldParams) -> Result<Arc<OLRing>> {
        params.validate()?;
        let p = params.p as u64;
        let f = params.f as usize;
        let e = params.e as usize;
        if e * f > MAX_LIMBS {
            return Err(Error::Unsupported(format!("e*f = {} exceeds {MAX_LIMBS}", e * f)));
        }
        let q = p.pow(params.f);
        let residue = match &params.residue_modulus {
            Some(m) => Fq::with_modulus(params.p, m.clone(), q)?,
            None => Fq::new(params.p, params.f, q)?,
        };
        let g: Vec<u64> = residue.modulus().iter().map(|&c| c as u64).collect();
        let eis: Vec<i64> = params.eisenstein_coeffs();
        // largest K with p^K < 2^62
        let mut kmax = 0u32;
        let mut pk: u128 = 1;
        while pk * (p as u128) < (1u128 << 62) {
            pk *= p as u128;
            kmax += 1;
        }
        let pow_p: Vec<u64> = (0..=kmax).map(|k| p.pow(k)).collect();
        Ok(Arc::new(OLRing {
            params,
            residue,
            p,
            f,
            e,
            q,
            g,
            eis,
            max_prec: kmax * e as u32,
            pow_p,
            p_over_pi: OnceLock::new(),
            teich: OnceLock::new(),
        }))
    }

    pub fn params(&self) -> &FieldParams {
        &self.params
    }

    pub fn residue_field(&self) -> &Arc<Fq> {
        &self.residue
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn e(&self) -> u32 {
        self.e as u32
    }

    pub fn f(&self) -> u32 {
        self.f as u32
    }

    pub fn max_prec(&self) -> u32 {
        self.max_prec
    }

    pub fn check_prec(&self, prec: u32) -> Result<()> {
        if prec > self.max_prec {
            Err(Error::PrecisionTooLarge { requested: prec, max: self.max_prec })
        } else {
            Ok(())
        }
    }

    fn k_of(&self, prec: u32) -> usize {
        ceil_div(prec as i64, self.e as i64).max(0) as usize
    }

    fn limb_modulus(&self, i: usize, prec: u32) -> u64 {
        let k = ceil_div(prec as i64 - i as i64, self.e as i64);
        if k <= 0 {
            1
        } else {
            self.pow_p[k as usize]
        }
    }

    fn canon(&self, mut c: [u64; MAX_LIMBS], prec: u32) -> OLElement {
        for i in 0..self.e {
            let m = self.limb_modulus(i, prec);
            for k in 0..self.f {
                c[i * self.f + k] %= m;
            }
        }
        for v in c.iter_mut().skip(self.e * self.f) {
            *v = 0;
        }
        OLElement { c, prec }
    }

    pub fn zero(&self, prec: u32) -> OLElement {
        OLElement { c: [0; MAX_LIMBS], prec }
    }

    pub fn one(&self, prec: u32) -> OLElement {
        self.from_int(1, prec)
    }

    pub fn from_int(&self, n: i64, prec: u32) -> OLElement {
        let mut c = [0u64; MAX_LIMBS];
        if prec > 0 {
            let m = self.limb_modulus(0, prec) as i128;
            c[0] = (n as i128).rem_euclid(m) as u64;
        }
        self.canon(c, prec)
    }

    /// The uniformizer `π_L`.
    pub fn pi(&self, prec: u32) -> OLElement {
        if self.e == 1 {
            self.from_int(self.p as i64, prec)
        } else {
            let mut c = [0u64; MAX_LIMBS];
            c[self.f] = 1;
            self.canon(c, prec)
        }
    }

    pub fn pi_pow(&self, k: u32, prec: u32) -> OLElement {
        let mut r = self.one(prec);
        let pi = self.pi(prec);
        for _ in 0..k {
            r = self.mul(&r, &pi);
        }
        r
    }

    /// Change precision. Lowering truncates; raising reads the stored
    /// representative as an exact element.
    pub fn with_prec(&self, a: &OLElement, prec: u32) -> OLElement {
        self.canon(a.c, prec)
    }

    pub fn is_zero(&self, a: &OLElement) -> bool {
        a.c.iter().all(|&v| v == 0)
    }

    pub fn eq_at(&self, a: &OLElement, b: &OLElement) -> bool {
        let prec = a.prec.min(b.prec);
        self.with_prec(a, prec).c == self.with_prec(b, prec).c
    }

    pub fn add(&self, a: &OLElement, b: &OLElement) -> OLElement {
        let prec = a.prec.min(b.prec);
        let m = self.pow_p[self.k_of(prec)] as u128;
        let mut c = [0u64; MAX_LIMBS];
        for i in 0..self.e * self.f {
            c[i] = ((a.c[i] as u128 + b.c[i] as u128) % m) as u64;
        }
        self.canon(c, prec)
    }

    pub fn neg(&self, a: &OLElement) -> OLElement {
        let m = self.pow_p[self.k_of(a.prec)] as u128;
        let mut c = [0u64; MAX_LIMBS];
        for i in 0..self.e * self.f {
            c[i] = ((m - a.c[i] as u128 % m) % m) as u64;
        }
        self.canon(c, a.prec)
    }

    pub fn sub(&self, a: &OLElement, b: &OLElement) -> OLElement {
        self.add(a, &self.neg(b))
    }

    fn zq_mul(&self, x: &[u64], y: &[u64], m: u128) -> Vec<u128> {
        let f = self.f;
        let mut prod = vec![0u128; 2 * f - 1];
        for i in 0..f {
            if x[i] == 0 {
                continue;
            }
            for j in 0..f {
                prod[i + j] = (prod[i + j] + (x[i] as u128 * y[j] as u128) % m) % m;
            }
        }
        for d in (f..2 * f - 1).rev() {
            let top = prod[d];
            if top == 0 {
                continue;
            }
            prod[d] = 0;
            for k in 0..f {
                let t = top * self.g[k] as u128 % m;
                prod[d - f + k] = (prod[d - f + k] + m - t) % m;
            }
        }
        prod.truncate(f);
        prod
    }

    pub fn mul(&self, a: &OLElement, b: &OLElement) -> OLElement {
        let prec = a.prec.min(b.prec);
        let m = self.pow_p[self.k_of(prec)] as u128;
        let (e, f) = (self.e, self.f);
        if e == 1 && f == 1 {
            let mut c = [0u64; MAX_LIMBS];
            c[0] = (a.c[0] as u128 * b.c[0] as u128 % m) as u64;
            return self.canon(c, prec);
        }
        let mut acc = vec![vec![0u128; f]; 2 * e - 1];
        for i in 0..e {
            let x = &a.c[i * f..(i + 1) * f];
            if x.iter().all(|&v| v == 0) {
                continue;
            }
            for j in 0..e {
                let y = &b.c[j * f..(j + 1) * f];
                if y.iter().all(|&v| v == 0) {
                    continue;
                }
                let pr = self.zq_mul(x, y, m);
                for k in 0..f {
                    acc[i + j][k] = (acc[i + j][k] + pr[k]) % m;
                }
            }
        }
        // π^e = -Σ c_i π^i
        for d in (e..2 * e - 1).rev() {
            let top = std::mem::replace(&mut acc[d], vec![0u128; f]);
            for i in 0..e {
                let ci = (self.eis[i] as i128).rem_euclid(m as i128) as u128;
                if ci == 0 {
                    continue;
                }
                for k in 0..f {
                    let t = top[k] * ci % m;
                    acc[d - e + i][k] = (acc[d - e + i][k] + m - t) % m;
                }
            }
        }
        let mut c = [0u64; MAX_LIMBS];
        for i in 0..e {
            for k in 0..f {
                c[i * f + k] = acc[i][k] as u64;
            }
        }
        self.canon(c, prec)
    }

    pub fn pow(&self, a: &OLElement, mut n: u64) -> OLElement {
        let mut r = self.one(a.prec);
        let mut b = *a;
        while n > 0 {
            if n & 1 == 1 {
                r = self.mul(&r, &b);
            }
            b = self.mul(&b, &b);
            n >>= 1;
        }
        r
    }

    /// Reduction modulo `π_L`.
    pub fn residue(&self, a: &OLElement) -> FqElem {
        if a.prec == 0 {
            return FqElem::ZERO;
        }
        let coords: Vec<u32> = (0..self.f).map(|k| (a.c[k] % self.p) as u32).collect();
        self.residue.from_coords(&coords).expect("coordinates below p")
    }

    /// Some lift of a residue-field element (coordinates read as integers).
    pub fn lift(&self, x: FqElem, prec: u32) -> OLElement {
        let coords = self.residue.coords(x);
        let mut c = [0u64; MAX_LIMBS];
        for (k, v) in coords.iter().enumerate() {
            c[k] = *v as u64;
        }
        self.canon(c, prec)
    }

    fn teich_table(&self) -> &Vec<OLElement> {
        self.teich.get_or_init(|| {
            let prec = self.max_prec;
            self.residue
                .elements()
                .map(|x| {
                    let mut y = self.lift(x, prec);
                    for _ in 0..prec {
                        y = self.pow(&y, self.q);
                    }
                    y
                })
                .collect()
        })
    }

    /// Teichmüller representative `[x]`.
    pub fn teichmuller(&self, x: FqElem, prec: u32) -> OLElement {
        self.with_prec(&self.teich_table()[x.0 as usize], prec)
    }

    fn p_over_pi(&self) -> &OLElement {
        self.p_over_pi.get_or_init(|| {
            let prec = self.max_prec;
            if self.e == 1 {
                return self.one(prec);
            }
            // c_0 = p·u0, and p = -(π^e + c_{e-1}π^{e-1} + … + c_1π)/u0
            let m = self.pow_p[self.k_of(prec)] as i128;
            let u0 = self.eis[0] / self.p as i64;
            let u0inv = mod_inverse(u0 as i128, m).expect("eisenstein constant term has valuation 1");
            let mut acc = self.pi_pow((self.e - 1) as u32, prec);
            for i in 1..self.e {
                let term = self.mul(&self.from_int(self.eis[i], prec), &self.pi_pow((i - 1) as u32, prec));
                acc = self.add(&acc, &term);
            }
            let minus_u0inv = self.from_int(0, prec);
            let minus_u0inv = self.sub(&minus_u0inv, &self.from_int_wide(u0inv, prec));
            self.mul(&acc, &minus_u0inv)
        })
    }

    pub(crate) fn from_int_wide(&self, n: i128, prec: u32) -> OLElement {
        let mut c = [0u64; MAX_LIMBS];
        if prec > 0 {
            let m = self.limb_modulus(0, prec) as i128;
            c[0] = n.rem_euclid(m) as u64;
        }
        self.canon(c, prec)
    }

    /// `π^k·a`, which is known to `π`-precision `prec(a) + k`.
    pub fn mul_pi_pow(&self, a: &OLElement, k: u32) -> OLElement {
        let prec = a.prec + k;
        self.mul(&self.with_prec(a, prec), &self.pi_pow(k, prec))
    }

    /// Exact division by `π_L`; the precision drops by one.
    pub fn div_pi(&self, a: &OLElement) -> Result<OLElement> {
        if a.prec == 0 {
            return Ok(*a);
        }
        for k in 0..self.f {
            if !a.c[k].is_multiple_of(self.p) {
                return Err(Error::InexactDivision { power: 1, context: "o_L element".into() });
            }
        }
        let prec = a.prec - 1;
        let mut head = [0u64; MAX_LIMBS];
        for k in 0..self.f {
            head[k] = a.c[k] / self.p;
        }
        let head = OLElement { c: head, prec };
        let mut rest = [0u64; MAX_LIMBS];
        for i in 1..self.e {
            for k in 0..self.f {
                rest[(i - 1) * self.f + k] = a.c[i * self.f + k];
            }
        }
        let rest = self.canon(rest, prec);
        let ppi = self.with_prec(self.p_over_pi(), prec);
        Ok(self.add(&self.mul(&head, &ppi), &rest))
    }

    pub fn div_pi_pow(&self, a: &OLElement, k: u32) -> Result<OLElement> {
        let mut r = *a;
        for _ in 0..k {
            r = self.div_pi(&r)?;
        }
        Ok(r)
    }

    /// `π`-adic valuation of the stored representative, `None` for zero.
    pub fn valuation(&self, a: &OLElement) -> Option<u32> {
        let mut best: Option<u32> = None;
        for i in 0..self.e {
            let limb = &a.c[i * self.f..(i + 1) * self.f];
            let mut vp: Option<u32> = None;
            for &v in limb {
                if v != 0 {
                    let mut x = v;
                    let mut k = 0;
                    while x % self.p == 0 {
                        x /= self.p;
                        k += 1;
                    }
                    vp = Some(vp.map_or(k, |w: u32| w.min(k)));
                }
            }
            if let Some(k) = vp {
                let val = k * self.e as u32 + i as u32;
                best = Some(best.map_or(val, |b| b.min(val)));
            }
        }
        best
    }

    pub fn is_unit(&self, a: &OLElement) -> bool {
        a.prec > 0 && !self.residue(a).is_zero()
    }

    pub fn inv(&self, a: &OLElement) -> Result<OLElement> {
        let r = self.residue(a);
        if r.is_zero() || a.prec == 0 {
            return Err(Error::NonUnit);
        }
        let prec = a.prec;
        let mut x = self.lift(self.residue.inv(r)?, prec);
        let two = self.from_int(2, prec);
        let mut correct = 1u32;
        while correct < prec {
            x = self.mul(&x, &self.sub(&two, &self.mul(a, &x)));
            correct *= 2;
        }
        Ok(x)
    }

    /// `q/π_L`, which is integral since `v_π(q) = e·f ≥ 1`.
    pub fn q_over_pi(&self, prec: u32) -> OLElement {
        let q = self.from_int(self.q as i64, prec + 1);
        self.div_pi(&q).expect("q is divisible by pi")
    }

    /// Teichmüller digits `(d_0, …, d_{m-1})` with `a = Σ [d_i] π^i`.
    pub fn digits(&self, a: &OLElement) -> Vec<FqElem> {
        let mut out = Vec::with_capacity(a.prec as usize);
        let mut cur = *a;
        for _ in 0..a.prec {
            let d = self.residue(&cur);
            out.push(d);
            let t = self.teichmuller(d, cur.prec);
            cur = self.div_pi(&self.sub(&cur, &t)).expect("digit removal leaves a multiple of pi");
        }
        out
    }

    pub fn from_digits(&self, digits: &[FqElem]) -> OLElement {
        let prec = digits.len() as u32;
        let pi = self.pi(prec);
        let mut acc = self.zero(prec);
        for d in digits.iter().rev() {
            acc = self.add(&self.mul(&acc, &pi), &self.teichmuller(*d, prec));
        }
        acc
    }

    /// `(d_0, d_1, …) base q=<q>`.
    pub fn format(&self, a: &OLElement) -> String {
        format!("{} base q={}", self.format_digits(a), self.q)
    }

    /// The bare digit tuple `(d_0, d_1, …)`.
    pub fn format_digits(&self, a: &OLElement) -> String {
        let d: Vec<String> = self.digits(a).iter().map(|x| self.residue.format(*x)).collect();
        format!("({})", d.join(", "))
    }

    pub fn parse(&self, s: &str) -> Result<OLElement> {
        let s = s.trim();
        let (tuple, rest) = match s.find(')') {
            Some(i) => (&s[..=i], s[i + 1..].trim()),
            None => return Err(Error::Parse(format!("expected digit tuple in {s:?}"))),
        };
        if !rest.is_empty() {
            let qs = rest
                .strip_prefix("base q=")
                .ok_or_else(|| Error::Parse(format!("unexpected trailer {rest:?}")))?;
            let qv: u64 = qs.trim().parse().map_err(|_| Error::Parse(format!("bad q in {rest:?}")))?;
            if qv != self.q {
                return Err(Error::Parse(format!("base q={qv} does not match field q={}", self.q)));
            }
        }
        let inner = tuple
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(|| Error::Parse(format!("bad tuple {tuple:?}")))?;
        let digits = split_top_level(inner)
            .into_iter()
            .filter(|t| !t.trim().is_empty())
            .map(|t| self.residue.parse(t))
            .collect::<Result<Vec<_>>>()?;
        self.check_prec(digits.len() as u32)?;
        Ok(self.from_digits(&digits))
    }
}

/// Split on commas that are not nested inside brackets or parentheses.
pub(crate) fn split_top_level(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '[' | '(' => depth += 1,
            ']' | ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}
