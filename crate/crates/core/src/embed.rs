//! The embedding `A_L → W(E)_L`, `Z ↦ ω_LT`, at finite precision.
//!
//! `ω_LT` is pinned by `w_0 = ω` and `φ_q(w) = [π]_LT(w) = π·w + w^q`.
//! Component `k` of the right side does not involve `w_k`, so each
//! correction is a single `q`-th root.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use crate::al::ALElement;
use crate::charp::{CharPRing, FqRing, FqSeries, SeriesRing, Valuation, INF, Q};
use crate::error::{Error, Result};
use crate::field::{FqElem, OLRing};
use crate::witt::{witt_norm, NormValue, WittRing, WittVector, MAX_WITT_LEN};

pub type WittSeries = WittVector<FqSeries>;

/// `ω_LT` to `n` components with the residual of its defining equation.
#[derive(Clone, Debug)]
pub struct OmegaLT {
    pub witt: WittSeries,
    /// `φ_q(w) - [π]_LT(w)`; zero on each component's window.
    pub residual: WittSeries,
}

impl OmegaLT {
    pub fn residual_vanishes(&self) -> bool {
        self.residual.comps.iter().all(|c| c.terms().is_empty())
    }
}

#[derive(Clone, Debug)]
pub struct Embedding {
    ring: WittRing<SeriesRing>,
    omega: OmegaLT,
    omega_inv: WittSeries,
    window: Q,
}

impl Embedding {
    /// Solve for `ω_LT` in `W_n(F_q((ω^{1/q^∞})))` truncated at `perf_level`,
    /// keeping each component below `ω^window`.
    pub fn new(ol: Arc<OLRing>, n: usize, perf_level: u32, window: Q) -> Result<Embedding> {
        if n == 0 || n > MAX_WITT_LEN {
            return Err(Error::InvalidParams(format!("witt length must be in 1..={MAX_WITT_LEN}")));
        }
        if (perf_level as usize) < n - 1 {
            return Err(Error::PerfLevelExceeded { requested: n as u32 - 1, max: perf_level });
        }
        if window <= Q::from_integer(1) {
            return Err(Error::WindowTooSmall(format!("window {window} does not contain ω")));
        }
        let s = SeriesRing::perfect(ol.residue_field().clone(), perf_level);
        let ring = WittRing::new(s.clone(), ol, n)?;
        let mut w = ring.teichmuller(&s.omega());
        for k in 1..n {
            let rhs = lt_pi(&ring, &w)?;
            w.comps[k] = s.truncate(&s.qth_root_series(&rhs.comps[k])?, window);
        }
        let residual = ring.sub(&ring.frobenius(&w), &lt_pi(&ring, &w)?)?;
        let omega_inv = ring.inv(&w)?;
        Ok(Embedding { ring, omega: OmegaLT { witt: w, residual }, omega_inv, window })
    }

    pub fn ring(&self) -> &WittRing<SeriesRing> {
        &self.ring
    }

    pub fn omega_lt(&self) -> &OmegaLT {
        &self.omega
    }

    pub fn window(&self) -> Q {
        self.window
    }

    /// `[π]_LT(x) = π·x + x^q`.
    pub fn lt_pi(&self, x: &WittSeries) -> Result<WittSeries> {
        lt_pi(&self.ring, x)
    }

    /// `(O(1), …, O(1))`: an unknown integral vector.
    fn unknown(&self) -> Result<WittSeries> {
        let s = self.ring.base();
        self.ring.from_comps(vec![s.zero_to(Q::from_integer(0))?; self.ring.len()])
    }

    /// `ω_LT^k` for every `k` in `lo..top`.
    fn powers(&self, lo: i64, top: i64) -> Result<Vec<WittSeries>> {
        let r = &self.ring;
        let mut cur = if lo >= 0 { r.pow(&self.omega.witt, lo as u64)? } else { r.pow(&self.omega_inv, lo.unsigned_abs())? };
        let mut out = Vec::new();
        for _ in lo..top {
            out.push(cur.clone());
            cur = r.mul(&cur, &self.omega.witt)?;
        }
        Ok(out)
    }

    /// `Σ c_k·ω_LT^k + ω_LT^hi·O(1)`.
    fn evaluate(&self, lo: i64, coeffs: &[WittSeries], hi: i64) -> Result<WittSeries> {
        let r = &self.ring;
        let top = lo + coeffs.len() as i64;
        let last = if hi == INF { top } else { top.max(hi + 1) };
        let pows = self.powers(lo.min(last - 1), last)?;
        let base = lo.min(last - 1);
        let mut acc = r.zero();
        for (i, c) in coeffs.iter().enumerate() {
            if r.is_zero(c) {
                continue;
            }
            acc = r.add(&acc, &r.mul(c, &pows[(lo + i as i64 - base) as usize])?)?;
        }
        if hi != INF {
            let tail = r.mul(&pows[(hi - base) as usize], &self.unknown()?)?;
            acc = r.add(&acc, &tail)?;
        }
        Ok(acc)
    }

    /// `f(ω_LT) = Σ a_n ω_LT^n` with `a_n ∈ o_L/π^m` sent to Witt digits.
    pub fn embed_al(&self, f: &ALElement) -> Result<WittSeries> {
        if f.terms().next().is_none() {
            return match f.hi() {
                INF => Ok(self.ring.zero()),
                h => self.evaluate(h, &[], h),
            };
        }
        let coeffs = f.terms().map(|(_, a)| self.ring.from_ol(a)).collect::<Result<Vec<_>>>()?;
        self.evaluate(f.lo(), &coeffs, f.hi())
    }

    /// `Σ [b_n]·ω_LT^n` for `b ∈ F_q((ω))`.
    pub fn teichmuller_lift(&self, b: &FqSeries, laurent: &SeriesRing) -> Result<WittSeries> {
        let s = self.ring.base();
        let hi = laurent.hi(b).map(|h| h.ceil().to_integer()).unwrap_or(INF);
        let terms: Vec<(i64, FqElem)> = b.terms().iter().map(|&(e, c)| (laurent.unscale(e).to_integer(), c)).collect();
        let Some(&(lo, _)) = terms.first() else {
            return if hi == INF { Ok(self.ring.zero()) } else { self.evaluate(hi, &[], hi) };
        };
        let top = terms.last().unwrap().0 + 1;
        let mut coeffs = vec![self.ring.zero(); (top - lo) as usize];
        for (e, c) in terms {
            coeffs[(e - lo) as usize] = self.ring.teichmuller(&s.constant(c));
        }
        self.evaluate(lo, &coeffs, hi)
    }

    /// Scan `r = (q-1)/q·2^{-i}`, `i ≤ 6`, for a certified
    /// `|ω_LT - [ω]|_r < |ω|_♭^r`.
    pub fn find_r(&self, weight: Q) -> Result<(Q, NormValue)> {
        let q = self.ring.base().q() as i64;
        for i in 0..=6 {
            let r = Q::new(q - 1, q) / Q::from_integer(1 << i);
            let gap = self.gap_norm(r, weight)?;
            if gap_ok(gap, r, weight) {
                return Ok((r, gap));
            }
        }
        Err(Error::NoValidR)
    }

    /// `|ω_LT - [ω]|_r`.
    pub fn gap_norm(&self, r: Q, weight: Q) -> Result<NormValue> {
        let s = self.ring.base();
        let d = self.ring.sub(&self.omega.witt, &self.ring.teichmuller(&s.omega()))?;
        witt_norm(&self.ring, &d, r, weight)
    }

    pub fn check_weak_decompletion(&self, b: &FqSeries, r: Option<Q>, weight: Q) -> Result<WeakDecompletion> {
        let (r, gap) = match r {
            Some(r) => (r, self.gap_norm(r, weight)?),
            None => self.find_r(weight)?,
        };
        let laurent = SeriesRing::laurent(self.ring.base().fq().clone());
        let x = self.teichmuller_lift(b, &laurent)?;
        let lift = witt_norm(&self.ring, &x, r, weight)?;
        let expected = match laurent.valuation_of(b) {
            Valuation::Exact(v) => Some(-weight * r * v),
            _ => None,
        };
        let equal = lift.certified && lift.exponent == expected && expected.is_some();
        Ok(WeakDecompletion { r, gap, gap_bound: -weight * r, gap_strict: gap_ok(gap, r, weight), lift, expected, equal })
    }
}

/// Componentwise agreement on the common windows.
pub fn witt_agree(s: &SeriesRing, x: &WittSeries, y: &WittSeries) -> bool {
    x.len() == y.len() && x.comps.iter().zip(&y.comps).all(|(a, b)| s.add_series(a, &s.neg_series(b)).terms().is_empty())
}

fn gap_ok(gap: NormValue, r: Q, weight: Q) -> bool {
    gap.certified && gap.exponent.is_none_or(|e| e < -weight * r)
}

fn lt_pi<R: CharPRing>(ring: &WittRing<R>, x: &WittVector<R::Elem>) -> Result<WittVector<R::Elem>> {
    ring.add(&ring.mul_pi(x), &ring.pow(x, ring.base().q())?)
}

#[derive(Clone, Debug)]
pub struct WeakDecompletion {
    pub r: Q,
    /// `|ω_LT - [ω]|_r`.
    pub gap: NormValue,
    /// Exponent of `|ω|_♭^r`.
    pub gap_bound: Q,
    pub gap_strict: bool,
    /// `|Σ [b_n] ω_LT^n|_r`.
    pub lift: NormValue,
    /// Exponent of `|b|_♭^r`.
    pub expected: Option<Q>,
    pub equal: bool,
}

/// Enumeration of `φ_q - 1` on `W_n(F_{q^j})_L`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactSequenceReport {
    pub j: u32,
    pub n: usize,
    pub domain: usize,
    pub kernel: usize,
    /// Every kernel element has all components in `F_q`.
    pub kernel_in_base: bool,
    pub image: usize,
    /// Targets outside the image, keyed by the least extension degree
    /// (over `F_q`) where a preimage appears; `None` if none within range.
    pub preimage_degree: BTreeMap<Option<u32>, usize>,
}

const ENUM_LIMIT: u64 = 1 << 16;

fn enumerate(ring: &FqRing, n: usize) -> Vec<Vec<FqElem>> {
    let elems: Vec<FqElem> = ring.elements().collect();
    let mut all = vec![Vec::new()];
    for _ in 0..n {
        all = all
            .into_iter()
            .flat_map(|v: Vec<FqElem>| {
                elems.iter().map(move |&e| {
                    let mut v = v.clone();
                    v.push(e);
                    v
                })
            })
            .collect();
    }
    all
}

fn phi_minus_one_image(w: &WittRing<FqRing>, n: usize) -> Result<HashMap<Vec<FqElem>, Vec<Vec<FqElem>>>> {
    let mut img: HashMap<Vec<FqElem>, Vec<Vec<FqElem>>> = HashMap::new();
    for c in enumerate(w.base(), n) {
        let x = w.from_comps(c.clone())?;
        let y = w.sub(&w.frobenius(&x), &x)?;
        img.entry(y.comps).or_default().push(c);
    }
    Ok(img)
}

pub fn check_exact_sequence_finite(ol: &Arc<OLRing>, j: u32, n: usize) -> Result<ExactSequenceReport> {
    let q = ol.q();
    let size = q.checked_pow(j * n as u32).unwrap_or(u64::MAX);
    if size > ENUM_LIMIT {
        return Err(Error::TooLarge(size));
    }
    let base = ol.residue_field();
    let field = FqRing::extension(base, j)?;
    let w = WittRing::new(field.clone(), ol.clone(), n)?;
    let img = phi_minus_one_image(&w, n)?;
    let zero = vec![FqElem::ZERO; n];
    let kernel = img.get(&zero).cloned().unwrap_or_default();
    let kernel_in_base = kernel.iter().all(|c| c.iter().all(|&x| field.in_base(x)));
    let mut missing: Vec<Vec<FqElem>> = enumerate(&field, n).into_iter().filter(|c| !img.contains_key(c)).collect();
    let mut preimage_degree = BTreeMap::new();
    let mut k = 2;
    while !missing.is_empty() && q.checked_pow(j * k * n as u32).is_some_and(|s| s <= ENUM_LIMIT) {
        let big = FqRing::extension(base, j * k)?;
        let emb = field.field().embedding_into(big.field())?;
        let wb = WittRing::new(big, ol.clone(), n)?;
        let img_big = phi_minus_one_image(&wb, n)?;
        missing.retain(|c| {
            let lifted: Vec<FqElem> = c.iter().map(|x| emb[x.0 as usize]).collect();
            let hit = img_big.contains_key(&lifted);
            if hit {
                *preimage_degree.entry(Some(j * k)).or_insert(0) += 1;
            }
            !hit
        });
        k += 1;
    }
    if !missing.is_empty() {
        preimage_degree.insert(None, missing.len());
    }
    Ok(ExactSequenceReport {
        j,
        n,
        domain: size as usize,
        kernel: kernel.len(),
        kernel_in_base,
        image: img.len(),
        preimage_degree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::al::ALRing;
    use crate::field::FieldParams;

    fn ol(p: u32, f: u32) -> Arc<OLRing> {
        OLRing::new(FieldParams::unramified(p, f)).unwrap()
    }

    #[test]
    fn one_component_is_omega() {
        let r = ol(3, 1);
        let e = Embedding::new(r, 1, 0, Q::from_integer(10)).unwrap();
        assert_eq!(e.omega_lt().witt.comps, vec![e.ring().base().omega()]);
        assert!(e.omega_lt().residual_vanishes());
    }

    #[test]
    fn q2_matches_multiplicative_group() {
        // over Q_2, πZ + Z^2 = (1+Z)^2 - 1, so ω_LT = [1+ω] - 1
        let r = ol(2, 1);
        for n in 2..=3 {
            let e = Embedding::new(r.clone(), n, n as u32 - 1, Q::from_integer(12)).unwrap();
            let w = e.ring();
            let s = w.base();
            let oracle = w.sub(&w.teichmuller(&s.add_series(&s.one(), &s.omega())), &w.one()).unwrap();
            assert!(witt_agree(s, &e.omega_lt().witt, &oracle));
            assert!(e.omega_lt().residual_vanishes());
            assert_eq!(e.omega_lt().witt.comps[0], s.omega());
        }
    }

    #[test]
    fn perf_level_precondition() {
        assert_eq!(
            Embedding::new(ol(2, 1), 3, 1, Q::from_integer(8)).unwrap_err(),
            Error::PerfLevelExceeded { requested: 2, max: 1 }
        );
    }

    #[test]
    fn embedding_basics() {
        let r = ol(3, 1);
        let a = ALRing::new(r.clone(), 2).unwrap();
        let e = Embedding::new(r, 2, 1, Q::from_integer(12)).unwrap();
        let w = e.ring();
        let s = w.base();
        assert_eq!(e.embed_al(&a.one()).unwrap(), w.one());
        assert_eq!(e.embed_al(&a.var()).unwrap(), e.omega_lt().witt);
        let z2 = e.embed_al(&a.monomial(r_one(&a), 2)).unwrap();
        let sq = w.mul(&e.omega_lt().witt, &e.omega_lt().witt).unwrap();
        assert!(witt_agree(s, &z2, &sq));
    }

    fn r_one(a: &ALRing) -> crate::field::OLElement {
        a.ol().one(a.m())
    }

    #[test]
    fn weak_decompletion_examples() {
        let r = ol(2, 1);
        let weight = Q::from_integer(2);
        let e = Embedding::new(r.clone(), 3, 2, Q::from_integer(16)).unwrap();
        let l = SeriesRing::laurent(r.residue_field().clone());
        let (rr, _) = e.find_r(weight).unwrap();
        let omega = l.truncate(&l.omega(), Q::from_integer(6));
        let rep = e.check_weak_decompletion(&omega, Some(rr), weight).unwrap();
        assert!(rep.gap_strict && rep.equal, "{rep:?}");
        assert_eq!(rep.expected, Some(-weight * rr));
        let c = l.constant(FqElem::ONE);
        let rep = e.check_weak_decompletion(&c, None, weight).unwrap();
        assert!(rep.equal);
        assert_eq!(rep.lift.exponent, Some(Q::from_integer(0)));
        let b = l.parse("w^(-3) + w^2 + O(w^5)").unwrap();
        let rep = e.check_weak_decompletion(&b, None, weight).unwrap();
        assert!(rep.equal, "{rep:?}");
        assert_eq!(rep.expected, Some(weight * rep.r * 3));
    }

    #[test]
    fn exact_sequence_counts() {
        let r = ol(2, 1);
        let rep = check_exact_sequence_finite(&r, 2, 2).unwrap();
        assert_eq!((rep.domain, rep.kernel, rep.image), (16, 4, 4));
        assert!(rep.kernel_in_base);
        let rep = check_exact_sequence_finite(&r, 1, 1).unwrap();
        assert_eq!((rep.kernel, rep.image), (2, 1));
        let rep = check_exact_sequence_finite(&r, 2, 1).unwrap();
        assert_eq!(rep.image, 2);
        assert_eq!(rep.preimage_degree.get(&Some(4)), Some(&2));
        assert!(matches!(check_exact_sequence_finite(&r, 10, 2), Err(Error::TooLarge(_))));
    }
}
