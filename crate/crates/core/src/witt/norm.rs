use std::fmt;

use super::ring::{WittRing, WittVector};
use crate::charp::{CharPRing, Valuation, Q};
use crate::error::Result;

/// `|x| = q^exponent`, or zero when `exponent` is `None`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NormValue {
    pub exponent: Option<Q>,
    /// False when the truncation cannot pin down the supremum.
    pub certified: bool,
}

impl NormValue {
    pub fn max(self, o: NormValue) -> NormValue {
        let exponent = match (self.exponent, o.exponent) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        NormValue { exponent, certified: self.certified && o.certified }
    }
}

impl fmt::Display for NormValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.certified { "certified" } else { "boundary" };
        match self.exponent {
            Some(e) => write!(f, "q^({e}) {tag}"),
            None => write!(f, "0 {tag}"),
        }
    }
}

/// `|x|_r = sup_i q^{-i} |x_i|_♭^r` over the Teichmüller digits of `x`.
///
/// The `i`-th Witt component is `y_i = x_i^{q^i}`, so the digit valuation
/// is `v(y_i)/q^i`; with `|z|_♭ = q^{-w·v(z)}` the exponent is
/// `max_i (-i - w·r·v(y_i)/q^i)`.
pub fn witt_norm<R: CharPRing>(ring: &WittRing<R>, x: &WittVector<R::Elem>, r: Q, weight: Q) -> Result<NormValue> {
    let q = ring.base().q() as i64;
    let mut best: Option<(Q, usize)> = None;
    let mut bound: Option<Q> = None;
    let mut qi = 1i64;
    for (i, c) in x.comps.iter().enumerate() {
        let term = |v: Q| -Q::from_integer(i as i64) - weight * r * v / qi;
        match ring.base().valuation(c)? {
            Valuation::Infinite => {}
            Valuation::Exact(v) => {
                let t = term(v);
                if best.is_none_or(|(b, _)| t > b) {
                    best = Some((t, i));
                }
            }
            Valuation::AtLeast(v) => {
                let t = term(v);
                bound = Some(bound.map_or(t, |b: Q| b.max(t)));
            }
        }
        qi *= q;
    }
    let last = x.len().saturating_sub(1);
    Ok(match best {
        Some((t, i)) => NormValue { exponent: Some(t), certified: i < last && bound.is_none_or(|b| b < t) },
        // the components past the truncation are unknown
        None => NormValue { exponent: None, certified: false },
    })
}

/// `max(|x|_s, |x|_r)`.
pub fn witt_norm_interval<R: CharPRing>(
    ring: &WittRing<R>,
    x: &WittVector<R::Elem>,
    s: Q,
    r: Q,
    weight: Q,
) -> Result<NormValue> {
    Ok(witt_norm(ring, x, s, weight)?.max(witt_norm(ring, x, r, weight)?))
}
