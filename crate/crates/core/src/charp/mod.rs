//! Characteristic-`p` coefficient rings: finite fields, truncated Laurent
//! series `F_q((ω))` and their partial perfections.

mod series;
mod solve;

use std::fmt::Debug;
use std::sync::Arc;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::field::{Fq, FqElem};

pub use series::{FqSeries, SeriesRing, INF};
pub(crate) use series::{format_power, parse_power, split_terms};
pub use solve::{artin_schreier_solve, fractional_part, phi_minus_one_mod_integral, ArtinSchreier};

pub type Q = Ratio<i64>;

/// The `ω`-adic valuation of a possibly truncated element.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Valuation {
    /// The element is exactly zero.
    Infinite,
    Exact(Q),
    /// Zero on the stored window, so only a lower bound is known.
    AtLeast(Q),
}

/// A ring of characteristic `p` with the `q`-power Frobenius.
pub trait CharPRing: Clone + Debug + Send + Sync {
    type Elem: Clone + Debug + PartialEq;

    fn p(&self) -> u32;
    fn q(&self) -> u64;
    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_int(&self, n: i64) -> Self::Elem;
    /// Image of a residue-field element of `L`.
    fn from_fq(&self, x: FqElem) -> Result<Self::Elem>;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn frobenius(&self, a: &Self::Elem) -> Self::Elem;

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }

    fn pow(&self, a: &Self::Elem, mut e: u64) -> Self::Elem {
        let mut r = self.one();
        let mut b = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(&r, &b);
            }
            e >>= 1;
            if e > 0 {
                b = self.mul(&b, &b);
            }
        }
        r
    }

    fn inv(&self, _a: &Self::Elem) -> Result<Self::Elem> {
        Err(Error::Unsupported("inversion".into()))
    }

    fn qth_root(&self, _a: &Self::Elem) -> Result<Self::Elem> {
        Err(Error::Unsupported("q-th roots in an imperfect ring".into()))
    }

    fn valuation(&self, _a: &Self::Elem) -> Result<Valuation> {
        Err(Error::NoValuation)
    }
}

/// `F_{q^j}` with the `q`-power Frobenius.
#[derive(Clone, Debug)]
pub struct FqRing {
    field: Arc<Fq>,
    base: Arc<Fq>,
    embed: Vec<FqElem>,
}

impl FqRing {
    /// The degree-`j` extension of the residue field `base`.
    pub fn extension(base: &Arc<Fq>, j: u32) -> Result<Self> {
        let field = Fq::new(base.p(), base.degree() * j, base.size() as u64)?;
        let embed = base.embedding_into(&field)?;
        Ok(FqRing { field, base: base.clone(), embed })
    }

    pub fn field(&self) -> &Arc<Fq> {
        &self.field
    }

    pub fn base(&self) -> &Arc<Fq> {
        &self.base
    }

    pub fn elements(&self) -> impl Iterator<Item = FqElem> + '_ {
        self.field.elements()
    }

    /// Whether `x` lies in the image of the base field.
    pub fn in_base(&self, x: FqElem) -> bool {
        self.field.in_subfield(x, self.base.degree())
    }
}

impl CharPRing for FqRing {
    type Elem = FqElem;

    fn p(&self) -> u32 {
        self.field.p()
    }
    fn q(&self) -> u64 {
        self.field.q()
    }
    fn zero(&self) -> FqElem {
        FqElem::ZERO
    }
    fn one(&self) -> FqElem {
        self.field.one()
    }
    fn from_int(&self, n: i64) -> FqElem {
        self.field.from_int(n)
    }
    fn from_fq(&self, x: FqElem) -> Result<FqElem> {
        Ok(self.embed[x.0 as usize])
    }
    fn add(&self, a: &FqElem, b: &FqElem) -> FqElem {
        self.field.add(*a, *b)
    }
    fn neg(&self, a: &FqElem) -> FqElem {
        self.field.neg(*a)
    }
    fn mul(&self, a: &FqElem, b: &FqElem) -> FqElem {
        self.field.mul(*a, *b)
    }
    fn is_zero(&self, a: &FqElem) -> bool {
        a.is_zero()
    }
    fn frobenius(&self, a: &FqElem) -> FqElem {
        self.field.frobenius(*a)
    }
    fn pow(&self, a: &FqElem, e: u64) -> FqElem {
        self.field.pow(*a, e)
    }
    fn inv(&self, a: &FqElem) -> Result<FqElem> {
        self.field.inv(*a)
    }
    fn qth_root(&self, a: &FqElem) -> Result<FqElem> {
        Ok(self.field.qth_root(*a))
    }
    fn valuation(&self, a: &FqElem) -> Result<Valuation> {
        Ok(if a.is_zero() { Valuation::Infinite } else { Valuation::Exact(Q::from_integer(0)) })
    }
}
