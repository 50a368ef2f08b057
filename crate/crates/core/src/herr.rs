//! Matrix-presented `(φ_L, Γ_L)`-modules over `A_L/π^m` and their Herr
//! complexes.
//!
//! The module is cut down to the finite pieces `Q_X = Z^{-X}A^+/Z^{N_0}A^+`.
//! With `N_0 = m + ⌊s/(q-1)⌋`, where `s` bounds the poles of `Φ`, the map
//! `Φφ - 1` is a `Z`-adic contraction on `Z^{N_0}A^+`, so that subcomplex is
//! acyclic and the quotient sees the whole cohomology. `φ` sends `Q_X` into
//! `Q_{φX}` with `φX = qX + s + (m-1)(q-1)`, and `Γ` preserves every `Q_X`.
//!
//! The total complex is the fibre of `φ - 1` on the Koszul complex of the
//! `U′`-generators. A stage pair `(X, Y)` measures the image of `H(T_X)` in
//! `H(T_Y)`; the reported groups are those of two agreeing stage pairs.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::al::{ALElement, ALRing};
use crate::charp::{fractional_part, CharPRing, FqSeries, SeriesRing, INF, Q};
use crate::error::{Error, Result};
use crate::field::{FqElem, OLElement, OLRing};
use crate::linalg::{kernel, subquotient, Matrix, ModuleType};

pub type Mat = Vec<Vec<ALElement>>;

/// A free module of rank `d` with `φ(e_j) = Σ_i Φ_ij e_i` and
/// `γ_a(e_j) = Σ_i G_ij e_i`.
#[derive(Clone, Debug)]
pub struct PhiGammaModule {
    al: Arc<ALRing>,
    rank: usize,
    phi: Mat,
    /// Topological generators of `U′`.
    gammas: Vec<(OLElement, Mat)>,
    /// Every element of the torsion subgroup `Δ`, including the identity.
    delta: Vec<(OLElement, Mat)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EtaleCertificate {
    pub etale: bool,
    pub det: ALElement,
    /// Leading exponent and residue of `det mod π`.
    pub leading: Option<(i64, FqElem)>,
}

fn check_square(m: &Mat, d: usize) -> Result<()> {
    if m.len() != d || m.iter().any(|r| r.len() != d) {
        return Err(Error::InvalidParams(format!("expected a {d}x{d} matrix")));
    }
    Ok(())
}

impl PhiGammaModule {
    pub fn new(al: Arc<ALRing>, phi: Mat, gammas: Vec<(OLElement, Mat)>, delta: Vec<(OLElement, Mat)>) -> Result<Self> {
        let rank = phi.len();
        if rank == 0 {
            return Err(Error::InvalidParams("rank must be positive".into()));
        }
        check_square(&phi, rank)?;
        for (a, g) in gammas.iter().chain(&delta) {
            check_square(g, rank)?;
            if !al.ol().is_unit(a) {
                return Err(Error::NonUnit);
            }
        }
        let delta = if delta.is_empty() { vec![(al.ol().one(al.ol().max_prec()), identity(&al, rank))] } else { delta };
        Ok(PhiGammaModule { al, rank, phi, gammas, delta })
    }

    /// Rank one with `φ(e) = c·e` and trivial `Γ` on `e`.
    pub fn rank_one(al: Arc<ALRing>, c: ALElement, gammas: &[OLElement], delta: &[OLElement]) -> Result<Self> {
        let one = identity(&al, 1);
        let g = gammas.iter().map(|a| (*a, one.clone())).collect();
        let d = delta.iter().map(|a| (*a, one.clone())).collect();
        Self::new(al, vec![vec![c]], g, d)
    }

    pub fn al(&self) -> &Arc<ALRing> {
        &self.al
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn phi_matrix(&self) -> &Mat {
        &self.phi
    }

    pub fn gammas(&self) -> &[(OLElement, Mat)] {
        &self.gammas
    }

    pub fn delta(&self) -> &[(OLElement, Mat)] {
        &self.delta
    }

    /// `φ_M(x) = Φ·φ(x)`.
    pub fn apply_phi(&self, x: &[ALElement]) -> Vec<ALElement> {
        let px: Vec<ALElement> = x.iter().map(|c| self.al.phi(c)).collect();
        mat_vec(&self.al, &self.phi, &px)
    }

    /// `γ_M(x) = G·γ_a(x)`.
    pub fn apply_gamma(&self, a: &OLElement, g: &Mat, x: &[ALElement]) -> Result<Vec<ALElement>> {
        let gx = x.iter().map(|c| self.al.gamma(a, c)).collect::<Result<Vec<_>>>()?;
        Ok(mat_vec(&self.al, g, &gx))
    }

    /// `det Φ` must reduce to a nonzero element of `E_L` with a certified
    /// leading term.
    pub fn is_etale(&self) -> EtaleCertificate {
        let det = determinant(&self.al, &self.phi);
        let leading = det.terms().find(|(_, c)| self.al.ol().is_unit(c)).map(|(k, c)| (k, self.al.ol().residue(c)));
        EtaleCertificate { etale: leading.is_some(), det, leading }
    }

    /// `G_a·γ_a(Φ) = Φ·φ(G_a)` for each generator and each element of `Δ`,
    /// truncated to `Z^hi` for the `Γ`-action.
    pub fn check_commutation(&self, hi: i64) -> Result<bool> {
        let al = &self.al;
        for (a, g) in self.gammas.iter().chain(&self.delta) {
            let gphi: Mat = self
                .phi
                .iter()
                .map(|row| row.iter().map(|c| al.gamma(a, &al.truncate(c, hi))).collect::<Result<Vec<_>>>())
                .collect::<Result<_>>()?;
            let pg: Mat = g.iter().map(|row| row.iter().map(|c| al.phi(c)).collect()).collect();
            let lhs = mat_mul(al, g, &gphi);
            let rhs = mat_mul(al, &self.phi, &pg);
            for (l, r) in lhs.iter().flatten().zip(rhs.iter().flatten()) {
                if !al.eq_on_window(l, r).0 {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// `G_a·γ_a(G_b) = G_{ab}` for all `a, b ∈ Δ`, truncated to `Z^hi`.
    pub fn check_cocycle(&self, hi: i64) -> Result<bool> {
        let al = &self.al;
        let ol = al.ol();
        for (a, ga) in &self.delta {
            for (b, gb) in &self.delta {
                let ab = ol.mul(a, b);
                let Some((_, gab)) = self.delta.iter().find(|(c, _)| ol.eq_at(c, &ab)) else {
                    return Err(Error::InvalidParams("Δ is not closed under multiplication".into()));
                };
                let gamma_gb: Mat = gb
                    .iter()
                    .map(|row| row.iter().map(|c| al.gamma(a, &al.truncate(c, hi))).collect::<Result<Vec<_>>>())
                    .collect::<Result<_>>()?;
                let lhs = mat_mul(al, ga, &gamma_gb);
                if lhs.iter().flatten().zip(gab.iter().flatten()).any(|(l, r)| !al.eq_on_window(l, r).0) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    fn delta_order(&self) -> Result<u64> {
        let n = self.delta.len() as u64;
        if n.is_multiple_of(self.al.ol().p()) {
            return Err(Error::DeltaOrderDivisibleByP);
        }
        Ok(n)
    }

    /// Slope bound: the worst pole order among the entries of `Φ`.
    pub fn pole_bound(&self) -> i64 {
        self.phi.iter().flatten().filter(|c| !self.al.is_zero(c)).map(|c| (-c.lo()).max(0)).max().unwrap_or(0)
    }
}

/// For unramified `L`: `Δ = μ_{q-1}` and topological generators
/// `1 + p·[e_i]` of `U′ = 1 + p·o_L`, `e_i` an `F_p`-basis of `F_q`.
/// `L = Q_2` has no such splitting; there `Δ` is trivial and `U′ = 1 + 4Z_2`.
pub fn standard_units(ol: &OLRing) -> Result<(Vec<OLElement>, Vec<OLElement>)> {
    if ol.e() != 1 {
        return Err(Error::Unsupported("standard units need an unramified field".into()));
    }
    let n = ol.max_prec();
    let fq = ol.residue_field();
    let p = ol.p() as i64;
    if ol.q() == 2 {
        return Ok((vec![ol.from_int(5, n)], vec![]));
    }
    if p == 2 {
        return Err(Error::Unsupported("1 + 2·o_L has torsion; supply U′ explicitly".into()));
    }
    let gens = (0..ol.f())
        .map(|i| {
            let mut coords = vec![0; ol.f() as usize];
            coords[i as usize] = 1;
            let e = ol.teichmuller(fq.from_coords(&coords)?, n);
            Ok(ol.add(&ol.one(n), &ol.mul(&ol.from_int(p, n), &e)))
        })
        .collect::<Result<_>>()?;
    let delta = fq.elements().filter(|x| !x.is_zero()).map(|x| ol.teichmuller(x, n)).collect();
    Ok((gens, delta))
}

fn identity(al: &ALRing, d: usize) -> Mat {
    (0..d).map(|i| (0..d).map(|j| if i == j { al.one() } else { al.zero() }).collect()).collect()
}

fn mat_vec(al: &ALRing, m: &Mat, x: &[ALElement]) -> Vec<ALElement> {
    m.iter().map(|row| row.iter().zip(x).fold(al.zero(), |acc, (a, b)| al.add(&acc, &al.mul(a, b)))).collect()
}

fn mat_mul(al: &ALRing, a: &Mat, b: &Mat) -> Mat {
    let d = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| (0..d).map(|j| row.iter().zip(b).fold(al.zero(), |acc, (x, brow)| al.add(&acc, &al.mul(x, &brow[j])))).collect())
        .collect()
}

fn determinant(al: &ALRing, m: &Mat) -> ALElement {
    let d = m.len();
    if d == 1 {
        return m[0][0].clone();
    }
    let mut acc = al.zero();
    for j in 0..d {
        let minor: Mat = m[1..].iter().map(|row| row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, x)| x.clone()).collect()).collect();
        let t = al.mul(&m[0][j], &determinant(al, &minor));
        acc = if j % 2 == 0 { al.add(&acc, &t) } else { al.sub(&acc, &t) };
    }
    acc
}

/// A sparse image column: `(target index, coefficient)`.
type Column = Vec<(usize, OLElement)>;

/// The finite pieces `Q_X` of a module over `A_L/π^m` or over a level-`L`
/// perfection of `E_L`, with the operators on monomial basis vectors.
trait Filtered {
    fn ol(&self) -> &OLRing;
    fn m(&self) -> u32;
    fn rank(&self) -> usize;
    /// Exponent denominator `q^L`.
    fn denom(&self) -> i64;
    fn n0(&self) -> i64;
    fn phi_pole(&self, x: i64) -> i64;
    fn ngens(&self) -> usize;
    fn delta_len(&self) -> usize;
    /// `φ_M` on the basis of `Q_X`.
    fn phi_cols(&self, x: i64) -> Result<Vec<Column>>;
    /// Generator `g` (or `Δ`-element `g` when `delta`) on the basis of `Q_X`.
    fn gamma_cols(&self, g: usize, delta: bool, x: i64) -> Result<Vec<Column>>;

    fn dim(&self, x: i64) -> usize {
        ((self.n0() + x) * self.denom()) as usize * self.rank()
    }

    /// Basis index of `e_j·ω^{k/denom}`.
    fn index(&self, j: usize, k: i64) -> usize {
        (self.n0() * self.denom() - 1 - k) as usize * self.rank() + j
    }

    /// Exponent and component of a basis index.
    fn basis(&self, idx: usize) -> (usize, i64) {
        let d = self.rank();
        (idx % d, self.n0() * self.denom() - 1 - (idx / d) as i64)
    }
}

/// Turn coordinates known below `ω^{n0}` into a sparse column inside `Q_X`.
fn to_column<F: Filtered + ?Sized>(f: &F, comps: &[Vec<(i64, OLElement)>], x: i64, what: &str) -> Result<Column> {
    let lo = -x * f.denom();
    let mut col = Vec::new();
    for (j, terms) in comps.iter().enumerate() {
        for &(k, c) in terms {
            if k >= f.n0() * f.denom() || f.ol().is_zero(&c) {
                continue;
            }
            if k < lo {
                return Err(Error::WindowTooSmall(format!("{what} leaves the pole bound {x}")));
            }
            col.push((f.index(j, k), c));
        }
    }
    Ok(col)
}

struct ALFiltered<'a> {
    module: &'a PhiGammaModule,
    n0: i64,
    s: i64,
    cache: std::sync::Mutex<HashMap<(usize, bool), Vec<ALElement>>>,
}

impl<'a> ALFiltered<'a> {
    fn new(module: &'a PhiGammaModule) -> Result<Self> {
        let s = module.pole_bound();
        let q = module.al.q();
        let n0 = module.al.m() as i64 + s / (q - 1);
        for (_, g) in module.gammas.iter().chain(&module.delta) {
            if g.iter().flatten().any(|c| !module.al.is_zero(c) && c.lo() < 0) {
                return Err(Error::Unsupported("Γ matrices must be integral".into()));
            }
        }
        Ok(ALFiltered { module, n0, s, cache: Default::default() })
    }

    /// `γ_a(Z^k) mod Z^{n0}` for `k` in `[-x, n0)`, lowest first.
    fn gamma_powers(&self, a: &OLElement, x: i64) -> Result<Vec<ALElement>> {
        let al = &self.module.al;
        let hi = self.n0 + x + 1;
        let z = al.truncate(&al.var(), hi);
        let gz = al.gamma(a, &z)?;
        let u = al.shift(&gz, -1);
        let uinv = al.inv(&u)?;
        let mut cur = al.pow(&uinv, x as u64);
        let mut out = Vec::new();
        for k in -x..self.n0 {
            out.push(al.truncate(&al.shift(&cur, k), self.n0));
            cur = al.mul(&cur, &u);
        }
        Ok(out)
    }
}

impl Filtered for ALFiltered<'_> {
    fn ol(&self) -> &OLRing {
        self.module.al.ol()
    }
    fn m(&self) -> u32 {
        self.module.al.m()
    }
    fn rank(&self) -> usize {
        self.module.rank
    }
    fn denom(&self) -> i64 {
        1
    }
    fn n0(&self) -> i64 {
        self.n0
    }
    fn phi_pole(&self, x: i64) -> i64 {
        let q = self.module.al.q();
        q * x + self.s + (self.m() as i64 - 1) * (q - 1)
    }
    fn ngens(&self) -> usize {
        self.module.gammas.len()
    }
    fn delta_len(&self) -> usize {
        self.module.delta.len()
    }

    fn phi_cols(&self, x: i64) -> Result<Vec<Column>> {
        let al = &self.module.al;
        let target = self.phi_pole(x);
        (0..self.dim(x))
            .map(|idx| {
                let (j, k) = self.basis(idx);
                let pz = al.truncate(&al.phi(&al.monomial(al.ol().one(al.m()), k)), self.n0);
                let comps: Vec<Vec<(i64, OLElement)>> = (0..self.rank())
                    .map(|i| {
                        let v = al.mul(&self.module.phi[i][j], &pz);
                        check_window(&v, self.n0)?;
                        Ok(v.terms().map(|(e, c)| (e, *c)).collect())
                    })
                    .collect::<Result<_>>()?;
                to_column(self, &comps, target, "φ")
            })
            .collect()
    }

    fn gamma_cols(&self, g: usize, delta: bool, x: i64) -> Result<Vec<Column>> {
        let al = &self.module.al;
        let (a, mat) = if delta { &self.module.delta[g] } else { &self.module.gammas[g] };
        let key = (g, delta);
        let needed = (self.n0 + x) as usize;
        let cached = self.cache.lock().unwrap().get(&key).filter(|p| p.len() >= needed).cloned();
        let pows = match cached {
            Some(p) => p[p.len() - needed..].to_vec(),
            None => {
                let p = self.gamma_powers(a, x)?;
                self.cache.lock().unwrap().insert(key, p.clone());
                p
            }
        };
        (0..self.dim(x))
            .map(|idx| {
                let (j, k) = self.basis(idx);
                let gz = &pows[(k + x) as usize];
                let comps: Vec<Vec<(i64, OLElement)>> = (0..self.rank())
                    .map(|i| {
                        let v = al.truncate(&al.mul(&mat[i][j], gz), self.n0);
                        check_window(&v, self.n0)?;
                        Ok(v.terms().map(|(e, c)| (e, *c)).collect())
                    })
                    .collect::<Result<_>>()?;
                to_column(self, &comps, x, "γ")
            })
            .collect()
    }
}

fn check_window(v: &ALElement, n0: i64) -> Result<()> {
    if v.hi() < n0 {
        return Err(Error::WindowTooSmall(format!("matrix entry known only below Z^{}", v.hi())));
    }
    Ok(())
}

/// The module base-changed to `F_q((ω^{1/q^L}))` (mod `π` only).
struct PerfFiltered<'a> {
    module: &'a PhiGammaModule,
    ring: SeriesRing,
    n0: i64,
    s: i64,
    /// `Φ` reduced mod `π`.
    phi: Vec<Vec<FqSeries>>,
    /// `(u^{1/q^L}, G mod π)` per generator, then per `Δ`-element.
    gens: Vec<Option<(FqSeries, Vec<Vec<FqSeries>>)>>,
    x_ready: i64,
}

impl<'a> PerfFiltered<'a> {
    fn new(module: &'a PhiGammaModule, level: u32, x_max: i64) -> Result<Self> {
        if module.al.m() != 1 {
            return Err(Error::Unsupported("the perfection comparison is mod π only".into()));
        }
        let al = &module.al;
        let fq = al.ol().residue_field().clone();
        let ring = SeriesRing::perfect(fq, level);
        let lift = |c: &ALElement| -> Result<FqSeries> {
            let red = al.reduce_mod_pi(c)?;
            let terms: Vec<(Q, FqElem)> = red.terms().iter().map(|&(e, c)| (Q::from_integer(e), c)).collect();
            ring.from_terms(&terms, (!c.is_exact()).then(|| Q::from_integer(c.hi())))
        };
        let reduce = |m: &Mat| -> Result<Vec<Vec<FqSeries>>> { m.iter().map(|r| r.iter().map(&lift).collect()).collect() };
        let phi = reduce(&module.phi)?;
        let inner = ALFiltered::new(module)?;
        let (n0, s) = (inner.n0, inner.s);
        // γ also acts on the copies Q_{φX}
        let x_max = module.al.q() * x_max + s;
        let mut gens = Vec::new();
        let denom = ring.denom();
        for (a, g) in module.gammas.iter().chain(&module.delta) {
            // u = [a](ω)/ω to the precision its q^L-th root needs
            let w = denom * (n0 + x_max) + 1;
            let z = al.truncate(&al.var(), w + 1);
            let u = lift(&al.shift(&al.gamma(a, &z)?, -1))?;
            let mut root = u;
            for _ in 0..level {
                root = ring.qth_root_series(&root)?;
            }
            gens.push(Some((root, reduce(g)?)));
        }
        Ok(PerfFiltered { module, ring, n0, s, phi, gens, x_ready: x_max })
    }

    fn columns_of(&self, comps: Vec<FqSeries>, x: i64, what: &str) -> Result<Column> {
        let ol = self.module.al.ol();
        let mut out = Vec::new();
        for c in &comps {
            if self.ring.hi(c).is_some_and(|h| h < Q::from_integer(self.n0)) {
                return Err(Error::WindowTooSmall(format!("{what} image known only below ω^{}", self.ring.hi(c).unwrap())));
            }
            let terms: Vec<(i64, OLElement)> = c
                .terms()
                .iter()
                .map(|&(e, v)| (e, ol.teichmuller(v, 1)))
                .collect();
            out.push(terms);
        }
        to_column(self, &out, x, what)
    }

    fn mono(&self, k: i64) -> FqSeries {
        let d = self.ring.denom();
        self.ring.monomial(FqElem::ONE, Q::new(k, d)).expect("exponent on the grid")
    }
}

impl Filtered for PerfFiltered<'_> {
    fn ol(&self) -> &OLRing {
        self.module.al.ol()
    }
    fn m(&self) -> u32 {
        1
    }
    fn rank(&self) -> usize {
        self.module.rank
    }
    fn denom(&self) -> i64 {
        self.ring.denom()
    }
    fn n0(&self) -> i64 {
        self.n0
    }
    fn phi_pole(&self, x: i64) -> i64 {
        self.module.al.q() * x + self.s
    }
    fn ngens(&self) -> usize {
        self.module.gammas.len()
    }
    fn delta_len(&self) -> usize {
        self.module.delta.len()
    }

    fn phi_cols(&self, x: i64) -> Result<Vec<Column>> {
        let r = &self.ring;
        let cut = Q::from_integer(self.n0);
        (0..self.dim(x))
            .map(|idx| {
                let (j, k) = self.basis(idx);
                let pz = r.frobenius_series(&self.mono(k));
                let comps = (0..self.rank()).map(|i| r.truncate(&r.mul_series(&self.phi[i][j], &pz), cut)).collect();
                self.columns_of(comps, self.phi_pole(x), "φ")
            })
            .collect()
    }

    fn gamma_cols(&self, g: usize, delta: bool, x: i64) -> Result<Vec<Column>> {
        if x > self.x_ready {
            return Err(Error::WindowTooSmall(format!("γ prepared only up to pole {}", self.x_ready)));
        }
        let r = &self.ring;
        let cut = Q::from_integer(self.n0);
        let i = if delta { self.module.gammas.len() + g } else { g };
        let (root, mat) = self.gens[i].as_ref().unwrap();
        let d = self.denom();
        // γ(ω^{k/d}) = ω^{k/d}·(u^{1/d})^k
        let rinv = r.inv_series(root)?;
        let mut cur = r.pow(&rinv, (x * d) as u64);
        let mut pows = Vec::new();
        for k in -x * d..self.n0 * d {
            pows.push(r.truncate(&r.mul_series(&cur, &self.mono(k)), cut));
            cur = r.mul_series(&cur, root);
        }
        (0..self.dim(x))
            .map(|idx| {
                let (j, k) = self.basis(idx);
                let gz = &pows[(k + x * d) as usize];
                let comps = (0..self.rank()).map(|i| r.truncate(&r.mul_series(&mat[i][j], gz), cut)).collect();
                self.columns_of(comps, x, "γ")
            })
            .collect()
    }
}

/// A total complex degree: Koszul blocks `K^n(Q_X) ⊕ K^{n-1}(Q_{φX})`.
struct Layout {
    /// `(subset mask, is target copy)` per block, in order.
    blocks: Vec<(u32, bool)>,
}

fn subsets(d: usize, n: usize) -> Vec<u32> {
    (0..1u32 << d).filter(|s| s.count_ones() as usize == n).collect()
}

impl Layout {
    fn new(d: usize, n: usize) -> Layout {
        let mut blocks: Vec<(u32, bool)> = subsets(d, n).into_iter().map(|s| (s, false)).collect();
        if n >= 1 {
            blocks.extend(subsets(d, n - 1).into_iter().map(|s| (s, true)));
        }
        Layout { blocks }
    }

    fn block_dims<F: Filtered + ?Sized>(&self, f: &F, x: i64) -> Vec<usize> {
        self.blocks.iter().map(|&(_, t)| f.dim(if t { f.phi_pole(x) } else { x })).collect()
    }

    fn offsets<F: Filtered + ?Sized>(&self, f: &F, x: i64) -> Vec<usize> {
        let mut acc = 0;
        self.block_dims(f, x)
            .into_iter()
            .map(|d| {
                let o = acc;
                acc += d;
                o
            })
            .collect()
    }

    fn dim<F: Filtered + ?Sized>(&self, f: &F, x: i64) -> usize {
        self.block_dims(f, x).iter().sum()
    }
}

/// Operator matrices of one stage, built on demand.
struct Ops<'f, F: Filtered + ?Sized> {
    f: &'f F,
    phi: HashMap<i64, Matrix>,
    gamma: HashMap<(usize, i64), Matrix>,
    proj: HashMap<i64, Option<Matrix>>,
}

fn dense<F: Filtered + ?Sized>(f: &F, rows: usize, cols: &[Column]) -> Matrix {
    let r = f.ol();
    let mut m = Matrix::zeros(r, rows, cols.len(), f.m());
    for (j, c) in cols.iter().enumerate() {
        for &(i, v) in c {
            m.set(i, j, r.add(&m.get(i, j), &v));
        }
    }
    m
}

fn minus_identity(r: &OLRing, a: &mut Matrix, m: u32) {
    for i in 0..a.cols().min(a.rows()) {
        a.set(i, i, r.sub(&a.get(i, i), &r.one(m)));
    }
}

impl<'f, F: Filtered + ?Sized> Ops<'f, F> {
    fn new(f: &'f F) -> Self {
        Ops { f, phi: HashMap::new(), gamma: HashMap::new(), proj: HashMap::new() }
    }

    /// `φ - 1: Q_x → Q_{φx}`.
    fn phi_minus_one(&mut self, x: i64) -> Result<&Matrix> {
        if !self.phi.contains_key(&x) {
            let f = self.f;
            let mut m = dense(f, f.dim(f.phi_pole(x)), &f.phi_cols(x)?);
            minus_identity(f.ol(), &mut m, f.m());
            self.phi.insert(x, m);
        }
        Ok(&self.phi[&x])
    }

    /// `γ_g - 1` on `Q_x`.
    fn gamma_minus_one(&mut self, g: usize, x: i64) -> Result<&Matrix> {
        if !self.gamma.contains_key(&(g, x)) {
            let f = self.f;
            let mut m = dense(f, f.dim(x), &f.gamma_cols(g, false, x)?);
            minus_identity(f.ol(), &mut m, f.m());
            self.gamma.insert((g, x), m);
        }
        Ok(&self.gamma[&(g, x)])
    }

    /// `e_Δ = |Δ|^{-1} Σ_δ δ` on `Q_x`, or `None` for trivial `Δ`.
    fn projector(&mut self, x: i64) -> Result<Option<Matrix>> {
        if let Some(p) = self.proj.get(&x) {
            return Ok(p.clone());
        }
        let f = self.f;
        let n = f.delta_len();
        let p = if n <= 1 {
            None
        } else {
            let r = f.ol();
            let m = f.m();
            let dim = f.dim(x);
            let mut acc = Matrix::zeros(r, dim, dim, m);
            for g in 0..n {
                let d = dense(f, dim, &f.gamma_cols(g, true, x)?);
                for i in 0..dim {
                    for j in 0..dim {
                        acc.set(i, j, r.add(&acc.get(i, j), &d.get(i, j)));
                    }
                }
            }
            let inv = r.with_prec(&r.inv(&r.from_int(n as i64, m))?, m);
            for i in 0..dim {
                for j in 0..dim {
                    acc.set(i, j, r.mul(&acc.get(i, j), &inv));
                }
            }
            Some(acc)
        };
        self.proj.insert(x, p.clone());
        Ok(p)
    }

    /// The differential `Tot^n_x → Tot^{n+1}_x`.
    fn differential(&mut self, n: usize, x: i64) -> Result<Matrix> {
        let f = self.f;
        let d = f.ngens();
        let src = Layout::new(d, n);
        let dst = Layout::new(d, n + 1);
        let (so, doff) = (src.offsets(f, x), dst.offsets(f, x));
        let r = f.ol();
        let m = f.m();
        let mut out = Matrix::zeros(r, dst.dim(f, x), src.dim(f, x), m);
        let px = f.phi_pole(x);
        let place = |out: &mut Matrix, blk: &Matrix, ro: usize, co: usize, neg: bool| {
            for i in 0..blk.rows() {
                for j in 0..blk.cols() {
                    let v = blk.get(i, j);
                    if !r.is_zero(&v) {
                        out.set(ro + i, co + j, if neg { r.neg(&v) } else { v });
                    }
                }
            }
        };
        for (bi, &(set, target)) in src.blocks.iter().enumerate() {
            let pole = if target { px } else { x };
            // Koszul part, with an extra sign on the target copy
            for g in 0..d {
                if set & (1 << g) != 0 {
                    continue;
                }
                let sign = (set & ((1 << g) - 1)).count_ones() % 2 == 1;
                let to = set | (1 << g);
                let dj = dst.blocks.iter().position(|&b| b == (to, target)).unwrap();
                let blk = self.gamma_minus_one(g, pole)?.clone();
                place(&mut out, &blk, doff[dj], so[bi], sign ^ target);
            }
            if !target {
                let dj = dst.blocks.iter().position(|&b| b == (set, true)).unwrap();
                let blk = self.phi_minus_one(x)?.clone();
                place(&mut out, &blk, doff[dj], so[bi], false);
            }
        }
        Ok(out)
    }

    fn total_projector(&mut self, n: usize, x: i64) -> Result<Option<Matrix>> {
        let f = self.f;
        let lay = Layout::new(f.ngens(), n);
        let dim = lay.dim(f, x);
        let offs = lay.offsets(f, x);
        let r = f.ol();
        let mut out = Matrix::zeros(r, dim, dim, f.m());
        let mut any = false;
        for (bi, &(_, target)) in lay.blocks.iter().enumerate() {
            let pole = if target { f.phi_pole(x) } else { x };
            match self.projector(pole)? {
                None => {
                    for i in 0..f.dim(pole) {
                        out.set(offs[bi] + i, offs[bi] + i, r.one(f.m()));
                    }
                }
                Some(p) => {
                    any = true;
                    for i in 0..p.rows() {
                        for j in 0..p.cols() {
                            out.set(offs[bi] + i, offs[bi] + j, p.get(i, j));
                        }
                    }
                }
            }
        }
        Ok(any.then_some(out))
    }

    /// Embed `Tot^n_x` into `Tot^n_y` blockwise.
    fn include(&self, n: usize, x: i64, y: i64, v: &Matrix) -> Matrix {
        let f = self.f;
        let lay = Layout::new(f.ngens(), n);
        let (ox, oy) = (lay.offsets(f, x), lay.offsets(f, y));
        let dims = lay.block_dims(f, x);
        let r = f.ol();
        let mut out = Matrix::zeros(r, lay.dim(f, y), v.cols(), f.m());
        for b in 0..lay.blocks.len() {
            for i in 0..dims[b] {
                for j in 0..v.cols() {
                    out.set(oy[b] + i, j, v.get(ox[b] + i, j));
                }
            }
        }
        out
    }

    /// Image of `H^n(T_x)^Δ` in `H^n(T_y)`.
    fn stage_value(&mut self, n: usize, x: i64, y: i64) -> Result<ModuleType> {
        let f = self.f;
        let r = f.ol();
        let m = f.m();
        let top = f.ngens() + 1;
        let z = if n == top {
            Matrix::identity(r, Layout::new(f.ngens(), n).dim(f, x), m)
        } else {
            kernel(r, &self.differential(n, x)?, m)
        };
        let z = match self.total_projector(n, x)? {
            Some(e) => e.mul(r, &z),
            None => z,
        };
        let v = self.include(n, x, y, &z);
        let b = if n == 0 { Matrix::zeros(r, v.rows(), 0, m) } else { self.differential(n - 1, y)? };
        Ok(subquotient(r, &v, &b, m))
    }
}

/// Stage schedule: pole bounds `X_0 < X_1 < …`; consecutive pairs are compared.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StagePolicy {
    pub stages: Vec<i64>,
}

impl StagePolicy {
    /// `P_0 = slope + margin`, then `2P_0`, `4P_0`.
    pub fn doubling(slope: i64, margin: i64) -> Self {
        let p0 = (slope + margin).max(1);
        StagePolicy { stages: vec![p0, 2 * p0, 4 * p0] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.stages.len() < 3 || self.stages.windows(2).any(|w| w[0] >= w[1]) || self.stages[0] < 1 {
            return Err(Error::InvalidParams("stages must be at least three increasing positive pole bounds".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CohomologyReport {
    /// Module type of `H^i` for `i = 0..=d+1`.
    pub groups: Vec<ModuleType>,
    /// `(X, Y, groups)` for each compared stage pair.
    pub trail: Vec<(i64, i64, Vec<ModuleType>)>,
    pub stabilized: bool,
}

impl CohomologyReport {
    /// `dim_{F_q}` of the `π`-torsion of each `H^i`; the dimension mod `π`.
    pub fn dims(&self) -> Vec<usize> {
        self.groups.iter().map(|g| g.rank()).collect()
    }

    pub fn lengths(&self) -> Vec<u32> {
        self.groups.iter().map(|g| g.length()).collect()
    }

    pub fn into_result(self) -> Result<Self> {
        if self.stabilized {
            Ok(self)
        } else {
            Err(Error::NotStabilized)
        }
    }
}

impl fmt::Display for CohomologyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |g: &[ModuleType]| g.iter().map(|t| format!("{:?}", t.0)).collect::<Vec<_>>().join(" ");
        for (x, y, g) in &self.trail {
            writeln!(f, "STAGE {x}->{y} {}", show(g))?;
        }
        write!(f, "RESULT {} {}", if self.stabilized { "stabilized" } else { "not-stabilized" }, show(&self.groups))
    }
}

fn run<F: Filtered + ?Sized>(f: &F, policy: &StagePolicy) -> Result<CohomologyReport> {
    policy.validate()?;
    let mut ops = Ops::new(f);
    let top = f.ngens() + 1;
    let mut trail = Vec::new();
    for w in policy.stages.windows(2) {
        let groups = (0..=top).map(|n| ops.stage_value(n, w[0], w[1])).collect::<Result<Vec<_>>>()?;
        trail.push((w[0], w[1], groups));
    }
    let k = trail.len();
    let stabilized = trail[k - 1].2 == trail[k - 2].2;
    Ok(CohomologyReport { groups: trail[k - 1].2.clone(), trail, stabilized })
}

impl PhiGammaModule {
    fn precheck(&self) -> Result<()> {
        if !self.is_etale().etale {
            return Err(Error::NotEtale);
        }
        self.delta_order()?;
        Ok(())
    }

    /// Herr cohomology of `M^Δ` over `A_L/π^m` with `m` the ring precision.
    pub fn cohomology(&self, policy: &StagePolicy) -> Result<CohomologyReport> {
        self.precheck()?;
        run(&ALFiltered::new(self)?, policy)
    }

    /// The same complex after base change to `F_q((ω^{1/q^L}))`; mod `π` only.
    pub fn cohomology_perfect(&self, level: u32, policy: &StagePolicy) -> Result<CohomologyReport> {
        self.precheck()?;
        policy.validate()?;
        let f = PerfFiltered::new(self, level, *policy.stages.last().unwrap())?;
        run(&f, policy)
    }

    /// A default schedule for this module.
    pub fn default_policy(&self, margin: i64) -> StagePolicy {
        StagePolicy::doubling(self.pole_bound(), margin)
    }

    /// Solve `Φφ(y) - y ≡ b` modulo integral exponents, for `b` in the level-`L`
    /// perfection: `y = -Σ_{j<L} (Φφ)^j(b)`. Returns `y` and the residual
    /// `(Φφ - 1)y - b`, whose terms must all be integral.
    pub fn solve_fractional(&self, ring: &SeriesRing, b: &[FqSeries]) -> Result<(Vec<FqSeries>, Vec<FqSeries>)> {
        if b.len() != self.rank {
            return Err(Error::RingMismatch);
        }
        let al = &self.al;
        let phi: Vec<Vec<FqSeries>> = self
            .phi
            .iter()
            .map(|row| {
                row.iter()
                    .map(|c| {
                        let red = al.reduce_mod_pi(c)?;
                        let t: Vec<(Q, FqElem)> = red.terms().iter().map(|&(e, v)| (Q::from_integer(e), v)).collect();
                        ring.from_terms(&t, (c.hi() != INF).then(|| Q::from_integer(c.hi())))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let apply = |x: &[FqSeries]| -> Vec<FqSeries> {
            let fx: Vec<FqSeries> = x.iter().map(|c| ring.frobenius_series(c)).collect();
            phi.iter()
                .map(|row| row.iter().zip(&fx).fold(ring.exact_zero(), |acc, (a, b)| ring.add_series(&acc, &ring.mul_series(a, b))))
                .collect()
        };
        let mut y: Vec<FqSeries> = vec![ring.exact_zero(); self.rank];
        let mut term = b.to_vec();
        for _ in 0..ring.max_level() {
            y = y.iter().zip(&term).map(|(a, t)| ring.add_series(a, &ring.neg_series(t))).collect();
            term = apply(&term);
        }
        let py = apply(&y);
        let residual: Vec<FqSeries> = py
            .iter()
            .zip(&y)
            .zip(b)
            .map(|((p, yy), bb)| ring.add_series(&ring.add_series(p, &ring.neg_series(yy)), &ring.neg_series(bb)))
            .collect();
        Ok((y, residual))
    }
}

/// Dims over `E_L` and over the level-`L` perfection, computed independently.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RingComparison {
    pub laurent: CohomologyReport,
    pub perfect: CohomologyReport,
    pub equal: bool,
}

impl PhiGammaModule {
    pub fn compare_across_rings(&self, level: u32, policy: &StagePolicy) -> Result<RingComparison> {
        let laurent = self.cohomology(policy)?.into_result()?;
        let perfect = self.cohomology_perfect(level, policy)?.into_result()?;
        let equal = laurent.groups == perfect.groups;
        Ok(RingComparison { laurent, perfect, equal })
    }

    /// Whether `(Φφ - 1)y - b` has only integral exponents.
    pub fn fractional_residual_vanishes(&self, ring: &SeriesRing, b: &[FqSeries]) -> Result<bool> {
        let (_, residual) = self.solve_fractional(ring, b)?;
        Ok(residual.iter().all(|r| ring.is_zero(&fractional_part(ring, r))))
    }

    /// Text form read by [`PhiGammaModule::parse`].
    pub fn format(&self) -> String {
        let al = &self.al;
        let ol = al.ol();
        let mat = |m: &Mat| m.iter().map(|r| r.iter().map(|c| al.format(c)).collect::<Vec<_>>().join(" ; ")).collect::<Vec<_>>().join(" | ");
        let mut out = format!("rank {}\nphi {}\n", self.rank, mat(&self.phi));
        for (a, g) in &self.gammas {
            out += &format!("gamma {} : {}\n", ol.format_digits(a), mat(g));
        }
        for (a, g) in &self.delta {
            out += &format!("delta {} : {}\n", ol.format_digits(a), mat(g));
        }
        out
    }

    /// Lines `rank d`, `phi <matrix>`, `gamma <unit> : <matrix>`,
    /// `delta <unit> : <matrix>`, or `units standard` for the default
    /// generators with identity matrices. Matrix rows are separated by `|`
    /// and entries by `;`; units are integers or digit tuples.
    pub fn parse(al: Arc<ALRing>, text: &str) -> Result<Self> {
        let ol = al.ol().clone();
        let entry = |t: &str| -> Result<ALElement> {
            let t = t.trim();
            match t.parse::<i64>() {
                Ok(n) => Ok(al.monomial(ol.from_int(n, al.m()), 0)),
                Err(_) => al.parse(t),
            }
        };
        let matrix = |t: &str| -> Result<Mat> { t.split('|').map(|r| r.split(';').map(entry).collect()).collect() };
        let unit = |t: &str| -> Result<OLElement> {
            let t = t.trim();
            match t.parse::<i64>() {
                Ok(n) => Ok(ol.from_int(n, ol.max_prec())),
                Err(_) => ol.parse(t),
            }
        };
        let (mut rank, mut phi, mut gammas, mut delta) = (None, None, Vec::new(), Vec::new());
        for line in text.lines().map(|l| l.split('#').next().unwrap().trim()).filter(|l| !l.is_empty()) {
            let (key, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            match key {
                "rank" => rank = Some(rest.trim().parse::<usize>().map_err(|_| Error::Parse(format!("bad rank {rest:?}")))?),
                "phi" => phi = Some(matrix(rest)?),
                "gamma" | "delta" => {
                    let (a, m) = rest.split_once(':').ok_or_else(|| Error::Parse(format!("expected `unit : matrix` in {line:?}")))?;
                    let item = (unit(a)?, matrix(m)?);
                    if key == "gamma" { gammas.push(item) } else { delta.push(item) }
                }
                "units" if rest.trim() == "standard" => {
                    let d = rank.ok_or_else(|| Error::Parse("`units` needs `rank` first".into()))?;
                    let (g, dl) = standard_units(&ol)?;
                    gammas.extend(g.into_iter().map(|a| (a, identity(&al, d))));
                    delta.extend(dl.into_iter().map(|a| (a, identity(&al, d))));
                }
                _ => return Err(Error::Parse(format!("unknown line {line:?}"))),
            }
        }
        let phi = phi.ok_or_else(|| Error::Parse("missing phi".into()))?;
        if rank.is_some_and(|d| d != phi.len()) {
            return Err(Error::Parse("rank does not match phi".into()));
        }
        Self::new(al, phi, gammas, delta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldParams;

    fn q3(m: u32) -> Arc<ALRing> {
        ALRing::new(OLRing::new(FieldParams::unramified(3, 1)).unwrap(), m).unwrap()
    }

    fn unit(al: &ALRing, a: i64) -> OLElement {
        al.ol().from_int(a, al.ol().max_prec())
    }

    #[test]
    fn etale_examples() {
        let al = q3(2);
        let m = PhiGammaModule::rank_one(al.clone(), al.one(), &[], &[]).unwrap();
        assert!(m.is_etale().etale);
        let pi = al.monomial(al.ol().pi(2), 0);
        let m = PhiGammaModule::rank_one(al.clone(), pi, &[], &[]).unwrap();
        assert!(!m.is_etale().etale);
        let e = q3(1);
        let c = e.monomial(e.ol().from_int(2, 1), 0);
        assert!(PhiGammaModule::rank_one(e.clone(), c, &[], &[]).unwrap().is_etale().etale);
    }

    #[test]
    fn trivial_module_commutes() {
        let al = q3(1);
        let m = PhiGammaModule::rank_one(al.clone(), al.one(), &[unit(&al, 4)], &[unit(&al, 1), unit(&al, -1)]).unwrap();
        assert!(m.check_commutation(10).unwrap());
    }

    #[test]
    fn delta_order_must_be_prime_to_p() {
        let al = q3(1);
        let d: Vec<OLElement> = [1, 2, 4].iter().map(|&a| unit(&al, a)).collect();
        let m = PhiGammaModule::rank_one(al.clone(), al.one(), &[unit(&al, 4)], &d).unwrap();
        assert_eq!(m.cohomology(&StagePolicy::doubling(0, 2)).unwrap_err(), Error::DeltaOrderDivisibleByP);
    }

    #[test]
    fn differentials_square_to_zero() {
        let al = q3(2);
        let m = PhiGammaModule::rank_one(al.clone(), al.monomial(al.ol().from_int(4, 2), 0), &[unit(&al, 4), unit(&al, 7)], &[])
            .unwrap();
        let f = ALFiltered::new(&m).unwrap();
        let mut ops = Ops::new(&f);
        let r = f.ol();
        for n in 0..2 {
            let a = ops.differential(n, 2).unwrap();
            let b = ops.differential(n + 1, 2).unwrap();
            assert!(b.mul(r, &a).is_zero(r), "n={n}");
        }
    }

    #[test]
    fn projector_is_idempotent_and_invariant() {
        let al = q3(1);
        let m = PhiGammaModule::rank_one(al.clone(), al.one(), &[unit(&al, 4)], &[unit(&al, 1), unit(&al, -1)]).unwrap();
        let f = ALFiltered::new(&m).unwrap();
        let mut ops = Ops::new(&f);
        let r = f.ol();
        let e = ops.projector(6).unwrap().unwrap();
        assert_eq!(e.mul(r, &e), e);
        let delta = dense(&f, f.dim(6), &f.gamma_cols(1, true, 6).unwrap());
        assert_eq!(delta.mul(r, &e), e);
    }
}
