//! Finite fields `F_{p^k}` with a configured q-power Frobenius.
//!
//! Elements are packed base-`p` coordinate vectors with respect to the
//! power basis of a fixed irreducible modulus; multiplication goes through
//! log/exp tables built once per field.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Largest field size for which tables are built.
pub const MAX_FIELD_SIZE: u32 = 1 << 20;

/// An element of a finite field: packed coordinates `Σ c_i p^i`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct FqElem(pub u32);

impl FqElem {
    pub const ZERO: FqElem = FqElem(0);
    pub const ONE: FqElem = FqElem(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// The field `F_p[t]/(modulus)` of size `p^degree`, whose Frobenius is
/// `x ↦ x^q`.
pub struct Fq {
    p: u32,
    degree: u32,
    size: u32,
    q: u64,
    modulus: Vec<u32>,
    exp: Vec<u32>,
    log: Vec<u32>,
    add_table: Option<Vec<u32>>,
}

impl fmt::Debug for Fq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{} (q={}, modulus {:?})", self.p, self.degree, self.q, self.modulus)
    }
}

impl PartialEq for Fq {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.modulus == other.modulus && self.q == other.q
    }
}

impl Eq for Fq {}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut n: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

// Dense polynomials over F_p, lowest degree first, no trailing zeros.
mod fp_poly {
    pub fn trim(a: &mut Vec<u32>) {
        while a.last() == Some(&0) {
            a.pop();
        }
    }

    pub fn sub(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let n = a.len().max(b.len());
        let mut out: Vec<u32> = (0..n)
            .map(|i| {
                let x = *a.get(i).unwrap_or(&0);
                let y = *b.get(i).unwrap_or(&0);
                (x + p - y) % p
            })
            .collect();
        trim(&mut out);
        out
    }

    pub fn inv_mod(a: u32, p: u32) -> u32 {
        let mut r = 1u64;
        let mut b = a as u64 % p as u64;
        let mut e = p - 2;
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % p as u64;
            }
            b = b * b % p as u64;
            e >>= 1;
        }
        r as u32
    }

    pub fn rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
        let mut r = a.to_vec();
        trim(&mut r);
        let dm = m.len() - 1;
        let lead_inv = inv_mod(m[dm], p) as u64;
        while r.len() > dm {
            let shift = r.len() - 1 - dm;
            let c = (*r.last().unwrap() as u64 * lead_inv % p as u64) as u32;
            for (i, &mc) in m.iter().enumerate() {
                let t = (c as u64 * mc as u64 % p as u64) as u32;
                r[shift + i] = (r[shift + i] + p - t) % p;
            }
            trim(&mut r);
        }
        r
    }

    pub fn mul_mod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> Vec<u32> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x as u64 * y as u64) % p as u64;
            }
        }
        let out: Vec<u32> = out.into_iter().map(|v| v as u32).collect();
        rem(&out, m, p)
    }

    pub fn pow_mod(base: &[u32], mut e: u64, m: &[u32], p: u32) -> Vec<u32> {
        let mut result = vec![1u32];
        let mut b = rem(base, m, p);
        while e > 0 {
            if e & 1 == 1 {
                result = mul_mod(&result, &b, m, p);
            }
            b = mul_mod(&b, &b, m, p);
            e >>= 1;
        }
        result
    }

    pub fn gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let mut a = a.to_vec();
        let mut b = b.to_vec();
        trim(&mut a);
        trim(&mut b);
        while !b.is_empty() {
            let r = rem(&a, &b, p);
            a = b;
            b = r;
        }
        a
    }
}

/// Rabin's irreducibility test over `F_p`. `poly` is monic, lowest degree first.
pub fn is_irreducible(poly: &[u32], p: u32) -> bool {
    let n = poly.len() as u32 - 1;
    if n == 0 {
        return false;
    }
    if n == 1 {
        return true;
    }
    let x = vec![0, 1];
    let pk = |k: u32| (p as u64).pow(k);
    let xq = fp_poly::pow_mod(&x, pk(n), poly, p);
    if fp_poly::sub(&xq, &x, p).iter().any(|&c| c != 0) {
        return false;
    }
    for r in prime_factors(n) {
        let h = fp_poly::pow_mod(&x, pk(n / r), poly, p);
        let diff = fp_poly::sub(&h, &x, p);
        let g = fp_poly::gcd(poly, &diff, p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

/// Lexicographically smallest monic irreducible polynomial of the given
/// degree (coefficients read from the constant term upward).
pub fn default_modulus(p: u32, degree: u32) -> Vec<u32> {
    if degree == 1 {
        return vec![0, 1];
    }
    let count = (p as u64).pow(degree);
    for code in 0..count {
        let mut poly = Vec::with_capacity(degree as usize + 1);
        let mut c = code;
        for _ in 0..degree {
            poly.push((c % p as u64) as u32);
            c /= p as u64;
        }
        poly.push(1);
        if is_irreducible(&poly, p) {
            return poly;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

impl Fq {
    /// `F_{p^degree}` with Frobenius `x ↦ x^q`; `q` must be a power of `p`
    /// whose exponent divides `degree`.
    pub fn new(p: u32, degree: u32, q: u64) -> Result<Arc<Fq>> {
        Self::with_modulus(p, default_modulus(p, degree), q)
    }

    pub fn with_modulus(p: u32, modulus: Vec<u32>, q: u64) -> Result<Arc<Fq>> {
        if !is_prime(p as u64) {
            return Err(Error::InvalidParams(format!("{p} is not prime")));
        }
        let degree = modulus.len() as u32 - 1;
        if modulus.last() != Some(&1) || !is_irreducible(&modulus, p) {
            return Err(Error::InvalidParams(format!(
                "modulus {modulus:?} is not monic irreducible over F_{p}"
            )));
        }
        let size64 = (p as u64).pow(degree);
        if size64 > MAX_FIELD_SIZE as u64 {
            return Err(Error::TooLarge(size64));
        }
        let size = size64 as u32;
        let mut f = 0;
        let mut qq = 1u64;
        while qq < q {
            qq *= p as u64;
            f += 1;
        }
        if qq != q || f == 0 || !degree.is_multiple_of(f) {
            return Err(Error::InvalidParams(format!(
                "q={q} is not a power of {p} dividing the field degree {degree}"
            )));
        }
        let mut field = Fq {
            p,
            degree,
            size,
            q,
            modulus,
            exp: Vec::new(),
            log: Vec::new(),
            add_table: None,
        };
        field.build_tables();
        Ok(Arc::new(field))
    }

    fn build_tables(&mut self) {
        let order = self.size - 1;
        let mut exp = vec![0u32; self.size as usize];
        let mut log = vec![0u32; self.size as usize];
        if order == 0 {
            return;
        }
        let factors = prime_factors(order);
        let mut generator = None;
        'search: for cand in 1..self.size {
            let g = self.coords_of(cand);
            for &r in &factors {
                let h = fp_poly::pow_mod(&g, (order / r) as u64, &self.modulus, self.p);
                if h == [1] {
                    continue 'search;
                }
            }
            generator = Some(g);
            break;
        }
        let g = generator.expect("multiplicative group is cyclic");
        let mut cur = vec![1u32];
        for i in 0..order {
            let packed = self.pack_coords(&cur);
            exp[i as usize] = packed;
            log[packed as usize] = i;
            cur = fp_poly::mul_mod(&cur, &g, &self.modulus, self.p);
        }
        exp[order as usize] = 1;
        self.exp = exp;
        self.log = log;
        if self.p != 2 && self.size <= 256 {
            let s = self.size as usize;
            let mut table = vec![0u32; s * s];
            for a in 0..s {
                for b in 0..s {
                    table[a * s + b] = self.add_slow(a as u32, b as u32);
                }
            }
            self.add_table = Some(table);
        }
    }

    fn coords_of(&self, mut v: u32) -> Vec<u32> {
        let mut c = Vec::with_capacity(self.degree as usize);
        for _ in 0..self.degree {
            c.push(v % self.p);
            v /= self.p;
        }
        fp_poly::trim(&mut c);
        c
    }

    fn pack_coords(&self, c: &[u32]) -> u32 {
        let mut v = 0u32;
        for &x in c.iter().rev() {
            v = v * self.p + x;
        }
        v
    }

    fn add_slow(&self, mut a: u32, mut b: u32) -> u32 {
        let mut out = 0u32;
        let mut place = 1u32;
        for _ in 0..self.degree {
            let d = (a % self.p + b % self.p) % self.p;
            out += d * place;
            place *= self.p;
            a /= self.p;
            b /= self.p;
        }
        out
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    /// The Frobenius exponent `q`.
    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn zero(&self) -> FqElem {
        FqElem::ZERO
    }

    pub fn one(&self) -> FqElem {
        FqElem::ONE
    }

    pub fn from_int(&self, n: i64) -> FqElem {
        FqElem(n.rem_euclid(self.p as i64) as u32)
    }

    pub fn from_coords(&self, coords: &[u32]) -> Result<FqElem> {
        if coords.len() > self.degree as usize || coords.iter().any(|&c| c >= self.p) {
            return Err(Error::Parse(format!("bad coordinates {coords:?} for {self:?}")));
        }
        Ok(FqElem(self.pack_coords(coords)))
    }

    /// Coordinates of length exactly `degree`.
    pub fn coords(&self, x: FqElem) -> Vec<u32> {
        let mut c = self.coords_of(x.0);
        c.resize(self.degree as usize, 0);
        c
    }

    pub fn elements(&self) -> impl Iterator<Item = FqElem> {
        (0..self.size).map(FqElem)
    }

    pub fn add(&self, a: FqElem, b: FqElem) -> FqElem {
        if self.p == 2 {
            return FqElem(a.0 ^ b.0);
        }
        match &self.add_table {
            Some(t) => FqElem(t[(a.0 * self.size + b.0) as usize]),
            None => FqElem(self.add_slow(a.0, b.0)),
        }
    }

    pub fn neg(&self, a: FqElem) -> FqElem {
        if self.p == 2 {
            return a;
        }
        let mut v = a.0;
        let mut out = 0u32;
        let mut place = 1u32;
        for _ in 0..self.degree {
            let d = v % self.p;
            out += ((self.p - d) % self.p) * place;
            place *= self.p;
            v /= self.p;
        }
        FqElem(out)
    }

    pub fn sub(&self, a: FqElem, b: FqElem) -> FqElem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: FqElem, b: FqElem) -> FqElem {
        if a.0 == 0 || b.0 == 0 {
            return FqElem::ZERO;
        }
        let order = self.size - 1;
        let l = (self.log[a.0 as usize] as u64 + self.log[b.0 as usize] as u64) % order as u64;
        FqElem(self.exp[l as usize])
    }

    pub fn inv(&self, a: FqElem) -> Result<FqElem> {
        if a.0 == 0 {
            return Err(Error::NonUnit);
        }
        let order = self.size - 1;
        let l = (order - self.log[a.0 as usize]) % order;
        Ok(FqElem(self.exp[l as usize]))
    }

    pub fn pow(&self, a: FqElem, e: u64) -> FqElem {
        if e == 0 {
            return FqElem::ONE;
        }
        if a.0 == 0 {
            return FqElem::ZERO;
        }
        let order = (self.size - 1) as u64;
        let l = (self.log[a.0 as usize] as u64 % order) * (e % order) % order;
        FqElem(self.exp[l as usize])
    }

    /// Signed integer powers of a nonzero element.
    pub fn pow_signed(&self, a: FqElem, e: i64) -> Result<FqElem> {
        if e >= 0 {
            Ok(self.pow(a, e as u64))
        } else {
            Ok(self.pow(self.inv(a)?, e.unsigned_abs()))
        }
    }

    /// `x ↦ x^q`.
    pub fn frobenius(&self, a: FqElem) -> FqElem {
        self.pow(a, self.q)
    }

    /// The unique `y` with `y^q = x`.
    pub fn qth_root(&self, a: FqElem) -> FqElem {
        // the Frobenius has order degree/f; its inverse is its (order-1)-th power
        let mut steps = 0u32;
        let mut qq = 1u64;
        while qq < self.q {
            qq *= self.p as u64;
            steps += 1;
        }
        let order = self.degree / steps;
        let mut y = a;
        for _ in 0..order.saturating_sub(1) {
            y = self.frobenius(y);
        }
        y
    }

    /// Whether `x` lies in the subfield fixed by `x ↦ x^{p^k}`.
    pub fn in_subfield(&self, a: FqElem, k: u32) -> bool {
        self.pow(a, (self.p as u64).pow(k)) == a
    }

    /// Write `x` with integer coordinates: a bare integer when the degree is
    /// one, otherwise `[c0,c1,…]`.
    pub fn format(&self, x: FqElem) -> String {
        if self.degree == 1 {
            x.0.to_string()
        } else {
            let c: Vec<String> = self.coords(x).iter().map(|v| v.to_string()).collect();
            format!("[{}]", c.join(","))
        }
    }

    pub fn parse(&self, s: &str) -> Result<FqElem> {
        let s = s.trim();
        if let Some(inner) = s.strip_prefix('[').and_then(|t| t.strip_suffix(']')) {
            let coords = inner
                .split(',')
                .filter(|t| !t.trim().is_empty())
                .map(|t| t.trim().parse::<u32>().map_err(|e| Error::Parse(e.to_string())))
                .collect::<Result<Vec<_>>>()?;
            self.from_coords(&coords)
        } else {
            let v: i64 = s.parse().map_err(|_| Error::Parse(format!("bad F_q element {s:?}")))?;
            Ok(self.from_int(v))
        }
    }

    /// A table sending each element of `self` to its image in `target`,
    /// determined by a root of `self`'s modulus. `target` must contain `self`.
    pub fn embedding_into(&self, target: &Fq) -> Result<Vec<FqElem>> {
        if target.p != self.p || !target.degree.is_multiple_of(self.degree) {
            return Err(Error::RingMismatch);
        }
        let eval = |y: FqElem| {
            let mut acc = FqElem::ZERO;
            for &c in self.modulus.iter().rev() {
                acc = target.add(target.mul(acc, y), target.from_int(c as i64));
            }
            acc
        };
        let root = target
            .elements()
            .find(|&y| eval(y).is_zero())
            .ok_or(Error::RingMismatch)?;
        let powers: Vec<FqElem> = (0..self.degree).map(|i| target.pow(root, i as u64)).collect();
        Ok(self
            .elements()
            .map(|x| {
                let mut acc = FqElem::ZERO;
                for (c, &pw) in self.coords(x).iter().zip(&powers) {
                    acc = target.add(acc, target.mul(target.from_int(*c as i64), pw));
                }
                acc
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frobenius_fixes_base_field() {
        for (p, k) in [(2, 1), (2, 2), (2, 4), (3, 1), (3, 2), (5, 1)] {
            let q = (p as u64).pow(k);
            let f = Fq::new(p, k, q).unwrap();
            assert!(f.elements().all(|x| f.frobenius(x) == x), "p={p} k={k}");
        }
    }

    #[test]
    fn field_axioms_f9() {
        let f = Fq::new(3, 2, 9).unwrap();
        for a in f.elements() {
            if !a.is_zero() {
                assert_eq!(f.mul(a, f.inv(a).unwrap()), FqElem::ONE);
            }
            assert_eq!(f.add(a, f.neg(a)), FqElem::ZERO);
            for b in f.elements() {
                assert_eq!(f.mul(a, b), f.mul(b, a));
                assert_eq!(f.add(a, b), f.add(b, a));
            }
        }
    }

    #[test]
    fn qth_root_in_f4_over_f2() {
        let f4 = Fq::new(2, 2, 2).unwrap();
        for x in f4.elements() {
            let r = f4.qth_root(x);
            assert_eq!(f4.mul(r, r), x);
        }
        // on a generator the square root is the square
        let zeta = FqElem(2);
        assert_eq!(f4.qth_root(zeta), f4.mul(zeta, zeta));
        assert_eq!(f4.qth_root(FqElem::ONE), FqElem::ONE);
    }

    #[test]
    fn default_moduli() {
        assert_eq!(default_modulus(2, 2), vec![1, 1, 1]);
        assert_eq!(default_modulus(3, 2), vec![1, 0, 1]);
        assert!(!is_irreducible(&[1, 0, 1], 2));
    }

    #[test]
    fn embedding_is_ring_hom() {
        let f4 = Fq::new(2, 2, 2).unwrap();
        let f16 = Fq::new(2, 4, 2).unwrap();
        let emb = f4.embedding_into(&f16).unwrap();
        for a in f4.elements() {
            for b in f4.elements() {
                assert_eq!(emb[f4.mul(a, b).0 as usize], f16.mul(emb[a.0 as usize], emb[b.0 as usize]));
                assert_eq!(emb[f4.add(a, b).0 as usize], f16.add(emb[a.0 as usize], emb[b.0 as usize]));
            }
        }
    }

    #[test]
    fn format_parse() {
        let f = Fq::new(3, 2, 9).unwrap();
        for x in f.elements() {
            assert_eq!(f.parse(&f.format(x)).unwrap(), x);
        }
    }
}
