use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use crate::charp::CharPRing;
use crate::error::{Error, Result};
use crate::field::{FieldParams, OLElement, OLRing};

/// Maximal Witt length: `2n` variables packed one byte each into a `u64`.
pub const MAX_WITT_LEN: usize = 4;

const BITS: u32 = 8;

fn exp_of(packed: u64, var: usize) -> u32 {
    ((packed >> (BITS * var as u32)) & 0xff) as u32
}

/// A polynomial over `o_L/π^prec` in at most eight variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    terms: BTreeMap<u64, OLElement>,
    prec: u32,
}

impl Poly {
    pub fn zero(prec: u32) -> Self {
        Poly { terms: BTreeMap::new(), prec }
    }

    pub fn var(r: &OLRing, v: usize, prec: u32) -> Self {
        let mut p = Self::zero(prec);
        p.terms.insert(1u64 << (BITS * v as u32), r.one(prec));
        p
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of the monomial `Π x_v^{e_v}`.
    pub fn coeff(&self, r: &OLRing, exps: &[(usize, u32)]) -> OLElement {
        let key = exps.iter().fold(0u64, |k, &(v, e)| k + ((e as u64) << (BITS * v as u32)));
        self.terms.get(&key).copied().unwrap_or_else(|| r.zero(self.prec))
    }

    pub fn terms(&self) -> impl Iterator<Item = (u64, &OLElement)> {
        self.terms.iter().map(|(k, v)| (*k, v))
    }

    fn insert_add(&mut self, r: &OLRing, key: u64, c: OLElement) {
        let slot = self.terms.entry(key).or_insert_with(|| r.zero(self.prec));
        *slot = r.add(slot, &c);
        if r.is_zero(slot) {
            self.terms.remove(&key);
        }
    }

    fn with_prec(&self, r: &OLRing, prec: u32) -> Self {
        let mut out = Self::zero(prec);
        for (&k, c) in &self.terms {
            out.insert_add(r, k, r.with_prec(c, prec));
        }
        out
    }

    pub fn add(&self, r: &OLRing, o: &Self) -> Self {
        let prec = self.prec.min(o.prec);
        let mut out = self.with_prec(r, prec);
        for (&k, c) in &o.terms {
            out.insert_add(r, k, r.with_prec(c, prec));
        }
        out
    }

    pub fn neg(&self, r: &OLRing) -> Self {
        Poly { terms: self.terms.iter().map(|(&k, c)| (k, r.neg(c))).collect(), prec: self.prec }
    }

    pub fn sub(&self, r: &OLRing, o: &Self) -> Self {
        self.add(r, &o.neg(r))
    }

    pub fn mul(&self, r: &OLRing, o: &Self) -> Self {
        let prec = self.prec.min(o.prec);
        let mut acc: HashMap<u64, OLElement> = HashMap::new();
        for (&ka, ca) in &self.terms {
            for (&kb, cb) in &o.terms {
                let c = r.mul(ca, cb);
                let slot = acc.entry(ka + kb).or_insert_with(|| r.zero(prec));
                *slot = r.add(slot, &c);
            }
        }
        let terms = acc.into_iter().filter(|(_, c)| !r.is_zero(c)).collect();
        Poly { terms, prec }
    }

    pub fn pow(&self, r: &OLRing, mut e: u64) -> Self {
        let mut acc = Self::zero(self.prec);
        acc.terms.insert(0, r.one(self.prec));
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

    /// `π^k·self`, known to precision `prec + k`.
    pub fn mul_pi_pow(&self, r: &OLRing, k: u32) -> Self {
        let terms = self.terms.iter().map(|(&key, c)| (key, r.mul_pi_pow(c, k))).collect();
        Poly { terms, prec: self.prec + k }
    }

    /// Exact division by `π^k`; fails if any coefficient is not divisible.
    pub fn div_pi_pow(&self, r: &OLRing, k: u32, context: &str) -> Result<Self> {
        let mut out = Self::zero(self.prec.saturating_sub(k));
        for (&key, c) in &self.terms {
            let d = r
                .div_pi_pow(c, k)
                .map_err(|_| Error::InexactDivision { power: k, context: context.to_string() })?;
            out.insert_add(r, key, d);
        }
        Ok(out)
    }

    /// Substitute ring elements for the variables.
    pub fn eval_ol(&self, r: &OLRing, vals: &[OLElement]) -> OLElement {
        let mut acc = r.zero(self.prec);
        for (&k, c) in &self.terms {
            let mut t = *c;
            for (v, x) in vals.iter().enumerate() {
                let e = exp_of(k, v);
                if e > 0 {
                    t = r.mul(&t, &r.pow(x, e as u64));
                }
            }
            acc = r.add(&acc, &t);
        }
        acc
    }
}

/// `Φ_j(X_{off}, …, X_{off+j}) = Σ_{i≤j} π^i X_{off+i}^{q^{j-i}}`.
pub fn ghost(r: &OLRing, j: usize, offset: usize, prec: u32) -> Poly {
    let q = r.q();
    let mut acc = Poly::zero(prec);
    for i in 0..=j {
        let mono = Poly::var(r, offset + i, prec).pow(r, q.pow((j - i) as u32));
        acc = acc.add(r, &mono.with_prec(r, prec - i as u32).mul_pi_pow(r, i as u32));
    }
    acc
}

/// A polynomial reduced mod `π` and grouped by its `X`-part for evaluation.
#[derive(Clone, Debug)]
struct Reduced {
    groups: Vec<(u64, Vec<(u64, i64)>)>,
    max_exp: Vec<u32>,
}

/// Addition, multiplication and negation polynomials of `W_n(-)_L`.
#[derive(Debug)]
pub struct UniversalWittPolys {
    pub n: usize,
    pub q: u64,
    pub work_prec: u32,
    pub s: Vec<Poly>,
    pub p: Vec<Poly>,
    pub i: Vec<Poly>,
    rs: Vec<Reduced>,
    rp: Vec<Reduced>,
    ri: Vec<Reduced>,
}

type CacheKey = (FieldParams, usize, u32);

fn cache() -> &'static Mutex<HashMap<CacheKey, Arc<UniversalWittPolys>>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, Arc<UniversalWittPolys>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl UniversalWittPolys {
    /// `S_j, P_j, I_j` for `j < n`, each known modulo `π^m`.
    ///
    /// The ghost recursion runs at precision `m + n - 1` and every
    /// division by `π^j` is checked to be exact.
    pub fn compute(r: &OLRing, n: usize, m: u32) -> Result<Self> {
        if n == 0 || n > MAX_WITT_LEN {
            return Err(Error::Unsupported(format!("Witt length {n} outside 1..={MAX_WITT_LEN}")));
        }
        let q = r.q();
        if q.pow(n as u32 - 1) > 255 {
            return Err(Error::Unsupported(format!("q^(n-1) = {} exceeds the packed exponent range", q.pow(n as u32 - 1))));
        }
        let w = m + n as u32 - 1;
        r.check_prec(w)?;
        let solve = |target: &dyn Fn(usize) -> Poly, name: &str| -> Result<Vec<Poly>> {
            let mut out: Vec<Poly> = Vec::new();
            for j in 0..n {
                let mut acc = target(j);
                for (i, prev) in out.iter().enumerate() {
                    let pw = prev.pow(r, q.pow((j - i) as u32));
                    acc = acc.sub(r, &pw.mul_pi_pow(r, i as u32));
                }
                let ctx = format!("{name}_{j}");
                out.push(acc.div_pi_pow(r, j as u32, &ctx)?);
            }
            Ok(out)
        };
        let gx = |j: usize| ghost(r, j, 0, w);
        let gy = |j: usize| ghost(r, j, n, w);
        let s = solve(&|j| gx(j).add(r, &gy(j)), "S")?;
        let p = solve(&|j| gx(j).mul(r, &gy(j)), "P")?;
        let i = solve(&|j| gx(j).neg(r), "I")?;
        let reduce = |v: &[Poly]| v.iter().map(|poly| Self::reduce(r, poly, n)).collect::<Result<Vec<_>>>();
        Ok(UniversalWittPolys { n, q, work_prec: w, rs: reduce(&s)?, rp: reduce(&p)?, ri: reduce(&i)?, s, p, i })
    }

    /// Cached per field, length and precision.
    pub fn cached(r: &OLRing, n: usize, m: u32) -> Result<Arc<Self>> {
        let key = (r.params().clone(), n, m);
        if let Some(v) = cache().lock().expect("cache poisoned").get(&key) {
            return Ok(v.clone());
        }
        let v = Arc::new(Self::compute(r, n, m)?);
        Ok(cache().lock().expect("cache poisoned").entry(key).or_insert(v).clone())
    }

    fn reduce(r: &OLRing, poly: &Poly, n: usize) -> Result<Reduced> {
        let xmask = if n * BITS as usize >= 64 { u64::MAX } else { (1u64 << (BITS as usize * n)) - 1 };
        let mut groups: BTreeMap<u64, Vec<(u64, i64)>> = BTreeMap::new();
        let mut max_exp = vec![0u32; 2 * n];
        for (&k, c) in &poly.terms {
            let res = r.residue(c);
            let coords = r.residue_field().coords(res);
            if coords.iter().skip(1).any(|&x| x != 0) {
                return Err(Error::Unsupported("universal coefficient outside F_p".into()));
            }
            if coords[0] == 0 {
                continue;
            }
            for (v, slot) in max_exp.iter_mut().enumerate() {
                *slot = (*slot).max(exp_of(k, v));
            }
            groups.entry(k & xmask).or_default().push((k & !xmask, coords[0] as i64));
        }
        Ok(Reduced { groups: groups.into_iter().collect(), max_exp })
    }

    pub fn eval_add<R: CharPRing>(&self, ring: &R, x: &[R::Elem], y: &[R::Elem], upto: usize) -> Vec<R::Elem> {
        self.eval(ring, &self.rs, x, Some(y), upto)
    }

    pub fn eval_mul<R: CharPRing>(&self, ring: &R, x: &[R::Elem], y: &[R::Elem], upto: usize) -> Vec<R::Elem> {
        self.eval(ring, &self.rp, x, Some(y), upto)
    }

    pub fn eval_neg<R: CharPRing>(&self, ring: &R, x: &[R::Elem]) -> Vec<R::Elem> {
        self.eval(ring, &self.ri, x, None, self.n)
    }

    /// Evaluate only `P_k` with its `Y_k`-free part, for inversion.
    pub(crate) fn eval_mul_component<R: CharPRing>(&self, ring: &R, x: &[R::Elem], y: &[R::Elem], k: usize) -> R::Elem {
        self.eval_one(ring, &self.rp[k], x, Some(y))
    }

    fn eval<R: CharPRing>(&self, ring: &R, polys: &[Reduced], x: &[R::Elem], y: Option<&[R::Elem]>, upto: usize) -> Vec<R::Elem> {
        polys[..upto].iter().map(|p| self.eval_one(ring, p, x, y)).collect()
    }

    fn eval_one<R: CharPRing>(&self, ring: &R, poly: &Reduced, x: &[R::Elem], y: Option<&[R::Elem]>) -> R::Elem {
        let n = self.n;
        let vars: Vec<&R::Elem> = x.iter().chain(y.unwrap_or(&[]).iter()).collect();
        let powers: Vec<Vec<R::Elem>> = (0..vars.len())
            .map(|v| {
                let mut t = vec![ring.one()];
                for e in 1..=poly.max_exp.get(v).copied().unwrap_or(0) as usize {
                    let next = ring.mul(&t[e - 1], vars[v]);
                    t.push(next);
                }
                t
            })
            .collect();
        // zero factors are still multiplied: a truncated zero carries a window
        let mono = |k: u64, offset: usize, count: usize| -> R::Elem {
            let mut acc: Option<R::Elem> = None;
            for v in offset..offset + count {
                let e = exp_of(k, v) as usize;
                if e == 0 {
                    continue;
                }
                let f = &powers[v][e];
                acc = Some(match acc {
                    None => f.clone(),
                    Some(a) => ring.mul(&a, f),
                });
            }
            acc.unwrap_or_else(|| ring.one())
        };
        let mut total = ring.zero();
        for (xk, ys) in &poly.groups {
            let xm = mono(*xk, 0, n);
            let mut inner = ring.zero();
            for &(yk, c) in ys {
                let ym = if y.is_some() { mono(yk, n, n) } else { ring.one() };
                let term = if c == 1 { ym } else { ring.mul(&ym, &ring.from_int(c)) };
                inner = ring.add(&inner, &term);
            }
            total = ring.add(&total, &ring.mul(&xm, &inner));
        }
        total
    }
}
