use std::sync::Arc;

use super::poly::UniversalWittPolys;
use crate::charp::CharPRing;
use crate::error::{Error, Result};
use crate::field::{OLElement, OLRing};

/// A truncated Witt vector `(x_0, …, x_{n-1})`.
#[derive(Clone, Debug, PartialEq)]
pub struct WittVector<E> {
    pub comps: Vec<E>,
}

impl<E> WittVector<E> {
    pub fn len(&self) -> usize {
        self.comps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comps.is_empty()
    }
}

/// `W_n(R)_L` over a characteristic-`p` ring `R`.
#[derive(Clone, Debug)]
pub struct WittRing<R: CharPRing> {
    base: R,
    n: usize,
    ol: Arc<OLRing>,
    polys: Arc<UniversalWittPolys>,
}

impl<R: CharPRing> WittRing<R> {
    pub fn new(base: R, ol: Arc<OLRing>, n: usize) -> Result<Self> {
        if base.q() != ol.q() {
            return Err(Error::RingMismatch);
        }
        let polys = UniversalWittPolys::cached(&ol, n, 1)?;
        Ok(WittRing { base, n, ol, polys })
    }

    pub fn base(&self) -> &R {
        &self.base
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn ol(&self) -> &Arc<OLRing> {
        &self.ol
    }

    fn check(&self, x: &WittVector<R::Elem>) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::RingMismatch);
        }
        Ok(())
    }

    pub fn from_comps(&self, comps: Vec<R::Elem>) -> Result<WittVector<R::Elem>> {
        let v = WittVector { comps };
        self.check(&v)?;
        Ok(v)
    }

    pub fn zero(&self) -> WittVector<R::Elem> {
        WittVector { comps: vec![self.base.zero(); self.n] }
    }

    pub fn one(&self) -> WittVector<R::Elem> {
        self.teichmuller(&self.base.one())
    }

    /// `[x] = (x, 0, 0, …)`.
    pub fn teichmuller(&self, x: &R::Elem) -> WittVector<R::Elem> {
        let mut comps = vec![self.base.zero(); self.n];
        comps[0] = x.clone();
        WittVector { comps }
    }

    /// `a = Σ π^i [d_i]` goes to `(d_0, d_1^q, d_2^{q^2}, …)`.
    pub fn from_ol(&self, a: &OLElement) -> Result<WittVector<R::Elem>> {
        let digits = self.ol.digits(a);
        let mut comps = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let mut c = match digits.get(i) {
                Some(d) => self.base.from_fq(*d)?,
                None => return Err(Error::PrecisionTooLarge { requested: self.n as u32, max: a.prec() }),
            };
            for _ in 0..i {
                c = self.base.frobenius(&c);
            }
            comps.push(c);
        }
        Ok(WittVector { comps })
    }

    pub fn add(&self, x: &WittVector<R::Elem>, y: &WittVector<R::Elem>) -> Result<WittVector<R::Elem>> {
        self.check(x)?;
        self.check(y)?;
        Ok(WittVector { comps: self.polys.eval_add(&self.base, &x.comps, &y.comps, self.n) })
    }

    pub fn mul(&self, x: &WittVector<R::Elem>, y: &WittVector<R::Elem>) -> Result<WittVector<R::Elem>> {
        self.check(x)?;
        self.check(y)?;
        Ok(WittVector { comps: self.polys.eval_mul(&self.base, &x.comps, &y.comps, self.n) })
    }

    pub fn neg(&self, x: &WittVector<R::Elem>) -> Result<WittVector<R::Elem>> {
        self.check(x)?;
        Ok(WittVector { comps: self.polys.eval_neg(&self.base, &x.comps) })
    }

    pub fn sub(&self, x: &WittVector<R::Elem>, y: &WittVector<R::Elem>) -> Result<WittVector<R::Elem>> {
        self.add(x, &self.neg(y)?)
    }

    pub fn pow(&self, x: &WittVector<R::Elem>, mut e: u64) -> Result<WittVector<R::Elem>> {
        let mut acc = self.one();
        let mut b = x.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &b)?;
            }
            e >>= 1;
            if e > 0 {
                b = self.mul(&b, &b)?;
            }
        }
        Ok(acc)
    }

    /// Componentwise `q`-th power.
    pub fn frobenius(&self, x: &WittVector<R::Elem>) -> WittVector<R::Elem> {
        WittVector { comps: x.comps.iter().map(|c| self.base.frobenius(c)).collect() }
    }

    /// `V^k`: shift right by `k`, dropping what falls off the end.
    pub fn verschiebung(&self, x: &WittVector<R::Elem>, k: usize) -> WittVector<R::Elem> {
        let mut comps = vec![self.base.zero(); k.min(self.n)];
        comps.extend(x.comps.iter().take(self.n.saturating_sub(k)).cloned());
        WittVector { comps }
    }

    /// `π·x = V(F(x))` in characteristic `p`.
    pub fn mul_pi(&self, x: &WittVector<R::Elem>) -> WittVector<R::Elem> {
        self.verschiebung(&self.frobenius(x), 1)
    }

    /// `y_0 = x_0^{-1}`, then `y_k = -P_k(x, y|_{y_k = 0}) · x_0^{-q^k}`.
    pub fn inv(&self, x: &WittVector<R::Elem>) -> Result<WittVector<R::Elem>> {
        self.check(x)?;
        let b = &self.base;
        let x0inv = b.inv(&x.comps[0])?;
        let mut y = vec![b.zero(); self.n];
        y[0] = x0inv.clone();
        let mut scale = x0inv;
        for k in 1..self.n {
            scale = b.pow(&scale, b.q());
            let pk = self.polys.eval_mul_component(b, &x.comps, &y, k);
            y[k] = b.neg(&b.mul(&pk, &scale));
        }
        Ok(WittVector { comps: y })
    }

    pub fn is_zero(&self, x: &WittVector<R::Elem>) -> bool {
        x.comps.iter().all(|c| self.base.is_zero(c))
    }
}
