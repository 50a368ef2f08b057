//! Line-oriented claim reports and the desk-scale acceptance suite.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::al::{ALElement, ALRing};
use crate::charp::{CharPRing, FqSeries, SeriesRing, INF, Q};
use crate::embed::{check_exact_sequence_finite, witt_agree, Embedding};
use crate::error::Result;
use crate::field::{FieldParams, FqElem, OLRing, RunConfig};
use crate::herr::{standard_units, PhiGammaModule, StagePolicy};
use crate::lubin_tate::{LubinTate, PowerSeries};
use crate::witt::{ghost, witt_norm, NormValue, Poly, UniversalWittPolys};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Ok,
    Fail,
    Uncertified,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Ok => "ok",
            Verdict::Fail => "fail",
            Verdict::Uncertified => "uncertified",
        })
    }
}

/// A claim side: a norm `q^t`, a count, or a tuple of dims.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Norm(Option<Q>),
    Count(u64),
    Dims(Vec<usize>),
    Text(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Norm(Some(t)) => write!(f, "q^({}/{})", t.numer(), t.denom()),
            Value::Norm(None) => f.write_str("0"),
            Value::Count(n) => write!(f, "{n}"),
            Value::Dims(d) => write!(f, "({})", d.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")),
            Value::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Claim {
    pub name: String,
    pub verdict: Verdict,
    pub lhs: Value,
    pub rhs: Value,
}

impl Claim {
    pub fn compare(name: impl Into<String>, lhs: Value, rhs: Value) -> Claim {
        let verdict = if lhs == rhs { Verdict::Ok } else { Verdict::Fail };
        Claim { name: name.into(), verdict, lhs, rhs }
    }

    /// Equality of two norms, downgraded when either side is uncertified.
    pub fn norms(name: impl Into<String>, lhs: NormValue, rhs: NormValue) -> Claim {
        let verdict = match (lhs.certified && rhs.certified, lhs.exponent == rhs.exponent) {
            (true, true) => Verdict::Ok,
            (true, false) => Verdict::Fail,
            (false, _) => Verdict::Uncertified,
        };
        Claim { name: name.into(), verdict, lhs: Value::Norm(lhs.exponent), rhs: Value::Norm(rhs.exponent) }
    }

    pub fn error(name: impl Into<String>, e: impl fmt::Display) -> Claim {
        Claim { name: name.into(), verdict: Verdict::Fail, lhs: Value::Text(format!("error:{}", e.to_string().replace(' ', "_"))), rhs: Value::Text("-".into()) }
    }
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CLAIM {} VERDICT {} LHS {} RHS {}", self.name, self.verdict, self.lhs, self.rhs)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub config_hash: String,
    pub claims: Vec<Claim>,
}

impl Report {
    pub fn new(cfg: &RunConfig) -> Report {
        Report { config_hash: cfg.hash(), claims: Vec::new() }
    }

    pub fn push(&mut self, c: Claim) {
        self.claims.push(c);
    }

    pub fn all_ok(&self) -> bool {
        self.claims.iter().all(|c| c.verdict == Verdict::Ok)
    }

    pub fn count(&self, v: Verdict) -> usize {
        self.claims.iter().filter(|c| c.verdict == v).count()
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CONFIG {}", self.config_hash)?;
        for c in &self.claims {
            writeln!(f, "{c}")?;
        }
        write!(f, "SUMMARY ok={} fail={} uncertified={}", self.count(Verdict::Ok), self.count(Verdict::Fail), self.count(Verdict::Uncertified))
    }
}

/// Random element of `A_L/π^m` with coefficients on `[lo, hi)`, known to `Z^hi`.
pub fn random_al(al: &ALRing, rng: &mut impl Rng, lo: i64, hi: i64) -> ALElement {
    let ol = al.ol();
    let fq = ol.residue_field();
    let coeffs = (lo..hi)
        .map(|_| {
            let digits: Vec<FqElem> = (0..al.m()).map(|_| FqElem(rng.gen_range(0..fq.size()))).collect();
            ol.from_digits(&digits)
        })
        .collect();
    al.from_coeffs(lo, coeffs, hi)
}

/// Random exact element of `E_L` with up to `terms` nonzero terms on `[lo, hi)`.
/// Colliding exponents are summed and may cancel.
pub fn random_laurent(ring: &SeriesRing, rng: &mut impl Rng, lo: i64, hi: i64, terms: usize) -> Result<FqSeries> {
    let size = ring.fq().size();
    let t: Vec<(Q, FqElem)> = (0..terms).map(|_| (Q::from_integer(rng.gen_range(lo..hi)), FqElem(rng.gen_range(1..size)))).collect();
    ring.from_terms(&t, None)
}

fn rng(cfg: &RunConfig, criterion: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(1_000_003).wrapping_add(criterion))
}

fn field_name(p: &FieldParams) -> String {
    if p.e == 1 && p.f == 1 {
        format!("Q_{}", p.p)
    } else if p.e == 1 {
        format!("Q_{}^{}", p.p, p.f)
    } else {
        format!("L_p{}f{}e{}", p.p, p.f, p.e)
    }
}

fn attempt(r: &mut Report, name: &str, f: impl FnOnce(&mut Report) -> Result<()>) {
    if let Err(e) = f(r) {
        r.push(Claim::error(name, e));
    }
}

/// ψ(φ(f)) = (q/π)·f and ψ(φ(f)·g) = f·ψ(g) on the certified window.
/// `g` is exact: a truncated `g` times the pole of `φ(f)` leaves no certified
/// window for `q = 9`.
pub fn psi_identities(cfg: &RunConfig, r: &mut Report) {
    let prof = cfg.profile;
    let mut g = rng(cfg, 1);
    for params in [FieldParams::unramified(2, 1), FieldParams::unramified(3, 1), FieldParams::unramified(3, 2)] {
        let name = format!("psi_identities.{}", field_name(&params));
        attempt(r, &name, |r| {
            let al = ALRing::new(OLRing::new(params.clone())?, prof.m)?;
            let qp = al.ol().q_over_pi(prof.m);
            let (mut ok, mut windows) = (0u64, 0u64);
            let total = 100u64;
            for _ in 0..total {
                let f = random_al(&al, &mut g, prof.v_min, prof.n);
                let h = random_al(&al, &mut g, prof.v_min, prof.n);
                let h = al.from_terms(&h.terms().map(|(k, c)| (k, *c)).collect::<Vec<_>>(), INF);
                let pf = al.phi(&f);
                let lhs1 = al.psi(&pf)?;
                let (e1, w1) = al.eq_on_window(&lhs1, &al.scale(&f, &qp));
                let lhs2 = al.psi(&al.mul(&pf, &h))?;
                let (e2, w2) = al.eq_on_window(&lhs2, &al.mul(&f, &al.psi(&h)?));
                ok += (e1 && e2) as u64;
                windows += (w1 > prof.v_min && w2 > prof.v_min) as u64;
            }
            r.push(Claim::compare(format!("{name}.exact"), Value::Count(ok), Value::Count(total)));
            r.push(Claim::compare(format!("{name}.window_nonempty"), Value::Count(windows), Value::Count(total)));
            Ok(())
        });
    }
}

fn ghost_compose(r: &OLRing, polys: &[Poly], j: usize, w: u32) -> Poly {
    let mut acc = Poly::zero(w);
    for (i, p) in polys.iter().enumerate().take(j + 1) {
        acc = acc.add(r, &p.pow(r, r.q().pow((j - i) as u32)).mul_pi_pow(r, i as u32));
    }
    acc
}

/// Ghost identities of `S, P, I` for `j ≤ 3`, `q ∈ {2, 3}`.
pub fn witt_ghost_identities(cfg: &RunConfig, r: &mut Report) {
    for p in [2u32, 3] {
        let name = format!("witt_ghost.q{p}");
        attempt(r, &name, |r| {
            let ol = OLRing::new(FieldParams::unramified(p, 1))?;
            let n = 4;
            // divisions by π^j inside compute are checked to be exact
            let u = UniversalWittPolys::compute(&ol, n, cfg.profile.m.max(1))?;
            let w = u.work_prec;
            let mut ok = 0u64;
            for j in 0..n {
                let (gx, gy) = (ghost(&ol, j, 0, w), ghost(&ol, j, n, w));
                ok += ghost_compose(&ol, &u.s, j, w).sub(&ol, &gx.add(&ol, &gy)).is_empty() as u64;
                ok += ghost_compose(&ol, &u.p, j, w).sub(&ol, &gx.mul(&ol, &gy)).is_empty() as u64;
                ok += ghost_compose(&ol, &u.i, j, w).add(&ol, &gx).is_empty() as u64;
            }
            r.push(Claim::compare(name.clone(), Value::Count(ok), Value::Count(3 * n as u64)));
            Ok(())
        });
    }
}

/// Enumeration of `W_2(F_4)_{Q_2}` and the `n = 1` image count.
pub fn exact_sequence(r: &mut Report) {
    attempt(r, "exact_sequence", |r| {
        let ol = OLRing::new(FieldParams::unramified(2, 1))?;
        let rep = check_exact_sequence_finite(&ol, 2, 2)?;
        r.push(Claim::compare("exact_sequence.domain", Value::Count(rep.domain as u64), Value::Count(16)));
        r.push(Claim::compare("exact_sequence.kernel", Value::Count(rep.kernel as u64), Value::Count(4)));
        r.push(Claim::compare("exact_sequence.kernel_in_base", Value::Count(rep.kernel_in_base as u64), Value::Count(1)));
        let one = check_exact_sequence_finite(&ol, 2, 1)?;
        r.push(Claim::compare(
            "exact_sequence.image_n1",
            Value::Count(one.image as u64),
            Value::Count((one.domain / one.kernel) as u64),
        ));
        Ok(())
    });
}

/// `Q_2`, `f = 2Z + Z^2`: the group law is `X + Y + XY` and `[a](Z) = (1+Z)^a - 1`.
pub fn multiplicative_group(r: &mut Report) {
    attempt(r, "lubin_tate_gm", |r| {
        let ol = OLRing::new(FieldParams::unramified(2, 1))?;
        let m = 3;
        let lt = LubinTate::new(ol.clone());
        let law = lt.group_law(9, m)?;
        let mut bad = 0u64;
        for i in 0..9 {
            for j in 0..9 - i {
                let expect = if (i, j) == (1, 0) || (i, j) == (0, 1) || (i, j) == (1, 1) { ol.one(m) } else { ol.zero(m) };
                bad += (law.coeff(i, j) != expect) as u64;
            }
        }
        r.push(Claim::compare("lubin_tate_gm.group_law", Value::Count(bad), Value::Count(0)));
        for a in [2i64, 3, 5] {
            let n = 8;
            let got = lt.mult_by(&ol.from_int(a, ol.max_prec()), n, m)?;
            let one_plus = PowerSeries::var(&ol, n, m).add(&ol, &PowerSeries::monomial(&ol, ol.one(m), 0, n, m));
            let expect = one_plus.pow(&ol, a as u64).sub(&ol, &PowerSeries::monomial(&ol, ol.one(m), 0, n, m));
            r.push(Claim::compare(format!("lubin_tate_gm.mult_{a}"), Value::Text(got.format(&ol)), Value::Text(expect.format(&ol))));
        }
        Ok(())
    });
}

fn embedding(cfg: &RunConfig, n: usize, perf: u32, window: i64) -> Result<(Arc<ALRing>, Embedding)> {
    let ol = OLRing::new(cfg.params.clone())?;
    let al = ALRing::new(ol.clone(), n as u32)?;
    Ok((al, Embedding::new(ol, n, perf, Q::from_integer(window))?))
}

/// `ω_LT` residual and multiplicativity of the embedding.
pub fn embedding_residual(cfg: &RunConfig, r: &mut Report) {
    attempt(r, "embedding", |r| {
        let (al, e) = embedding(cfg, 3, 2, 16)?;
        r.push(Claim::compare(
            "embedding.residual",
            Value::Count(!e.omega_lt().residual_vanishes() as u64),
            Value::Count(0),
        ));
        let mut g = rng(cfg, 5);
        let w = e.ring();
        let mut ok = 0u64;
        for _ in 0..50 {
            let f = random_al(&al, &mut g, -2, 6);
            let h = random_al(&al, &mut g, -2, 6);
            let prod = e.embed_al(&al.mul(&f, &h))?;
            ok += witt_agree(w.base(), &prod, &w.mul(&e.embed_al(&f)?, &e.embed_al(&h)?)?) as u64;
        }
        r.push(Claim::compare("embedding.multiplicative", Value::Count(ok), Value::Count(50)));
        Ok(())
    });
}

/// The auto-found `r`, strictness of the gap and the Teichmüller-lift norms.
pub fn weak_decompletion(cfg: &RunConfig, r: &mut Report) {
    attempt(r, "weak_decompletion", |r| {
        let (_, e) = embedding(cfg, 3, 2, 24)?;
        let weight = cfg.weight;
        let (rr, gap) = e.find_r(weight)?;
        let bound = NormValue { exponent: Some(-weight * rr), certified: true };
        let verdict = match (gap.certified, gap.exponent.is_none_or(|x| x < -weight * rr)) {
            (true, true) => Verdict::Ok,
            (true, false) => Verdict::Fail,
            (false, _) => Verdict::Uncertified,
        };
        r.push(Claim { name: format!("weak_decompletion.gap_lt_bound.r={rr}"), verdict, lhs: Value::Norm(gap.exponent), rhs: Value::Norm(bound.exponent) });
        let laurent = SeriesRing::laurent(e.ring().base().fq().clone());
        let mut g = rng(cfg, 6);
        let mut ok = 0u64;
        for _ in 0..20 {
            let b = random_laurent(&laurent, &mut g, -3, 6, 3)?;
            if laurent.is_zero(&b) {
                ok += 1;
                continue;
            }
            let wd = e.check_weak_decompletion(&b, Some(rr), weight)?;
            ok += (wd.equal && wd.lift.certified) as u64;
        }
        r.push(Claim::compare("weak_decompletion.lift_norms", Value::Count(ok), Value::Count(20)));
        Ok(())
    });
}

fn q3_modules(m: u32) -> Result<Vec<(&'static str, PhiGammaModule, Vec<usize>)>> {
    let ol = OLRing::new(FieldParams::unramified(3, 1))?;
    let al = ALRing::new(ol.clone(), m)?;
    let (g, d) = standard_units(&ol)?;
    let triv = PhiGammaModule::rank_one(al.clone(), al.one(), &g, &d)?;
    let tw = PhiGammaModule::rank_one(al.clone(), al.monomial(ol.from_int(-1, m), 0), &g, &d)?;
    Ok(vec![("trivial", triv, vec![1, 2, 0]), ("twist", tw, vec![0, 1, 0])])
}

/// Herr cohomology over `Q_3`, trivial and unramified twist, mod `π`.
pub fn herr_q3(cfg: &RunConfig, r: &mut Report) {
    let margin = -cfg.profile.v_min;
    attempt(r, "herr_q3", |r| {
        for (name, m, expect) in q3_modules(1)? {
            let rep = m.cohomology(&StagePolicy::doubling(m.pole_bound(), margin))?;
            let claim = format!("herr_q3.{name}");
            if rep.stabilized {
                r.push(Claim::compare(claim, Value::Dims(rep.dims()), Value::Dims(expect)));
            } else {
                r.push(Claim { name: format!("{claim}.not_stabilized"), verdict: Verdict::Fail, lhs: Value::Dims(rep.dims()), rhs: Value::Dims(expect) });
            }
        }
        Ok(())
    });
}

/// The same dims over the perfection, and the fractional `(φ - 1)`-solver.
pub fn herr_cross_ring(cfg: &RunConfig, r: &mut Report) {
    let margin = -cfg.profile.v_min;
    attempt(r, "herr_cross_ring", |r| {
        let mods = q3_modules(1)?;
        for (name, m, _) in &mods {
            let policy = StagePolicy::doubling(m.pole_bound(), margin);
            let a = m.cohomology(&policy)?;
            let b = m.cohomology_perfect(1, &policy)?;
            let verdict = if !(a.stabilized && b.stabilized) {
                Verdict::Fail
            } else if a.groups == b.groups {
                Verdict::Ok
            } else {
                Verdict::Fail
            };
            r.push(Claim { name: format!("herr_cross_ring.{name}"), verdict, lhs: Value::Dims(a.dims()), rhs: Value::Dims(b.dims()) });
        }
        let (_, triv, _) = &mods[0];
        let level = cfg.profile.perf_level.max(1);
        let ring = SeriesRing::perfect(triv.al().ol().residue_field().clone(), level);
        let d = ring.denom();
        let mut g = rng(cfg, 8);
        let mut ok = 0u64;
        for _ in 0..50 {
            let t: Vec<(Q, FqElem)> = (0..4).map(|_| (Q::new(g.gen_range(-6 * d..6 * d), d), FqElem(g.gen_range(1..3)))).collect();
            let b = ring.from_terms(&t, None)?;
            ok += triv.fractional_residual_vanishes(&ring, &[b])? as u64;
        }
        r.push(Claim::compare("herr_cross_ring.fractional_solver", Value::Count(ok), Value::Count(50)));
        Ok(())
    });
}

/// `overconv_norm_r(f) = witt_norm_r(embed(f))` at `r = (q-1)/(2q)`.
pub fn norm_transport(cfg: &RunConfig, r: &mut Report) {
    attempt(r, "norm_transport", |r| {
        let (al, e) = embedding(cfg, 3, 3, 24)?;
        let q = al.q();
        let rr = Q::new(q - 1, 2 * q);
        let mut g = rng(cfg, 9);
        let (mut ok, mut unc) = (0u64, 0u64);
        for _ in 0..50 {
            let f = random_al(&al, &mut g, -3, 5);
            let lhs = al.overconv_norm(&f, rr, cfg.weight);
            let rhs = witt_norm(e.ring(), &e.embed_al(&f)?, rr, cfg.weight)?;
            match Claim::norms("", lhs, rhs).verdict {
                Verdict::Ok => ok += 1,
                Verdict::Uncertified => unc += 1,
                Verdict::Fail => {}
            }
        }
        r.push(Claim::compare(format!("norm_transport.r={rr}"), Value::Count(ok), Value::Count(50)));
        if unc > 0 {
            r.push(Claim { name: "norm_transport.uncertified".into(), verdict: Verdict::Uncertified, lhs: Value::Count(unc), rhs: Value::Count(0) });
        }
        Ok(())
    });
}

/// Every suite criterion in fixed order; criteria run in parallel.
pub fn run_acceptance_suite(cfg: &RunConfig) -> Report {
    type Job = fn(&RunConfig, &mut Report);
    let jobs: [Job; 9] = [
        psi_identities,
        witt_ghost_identities,
        |_, r| exact_sequence(r),
        |_, r| multiplicative_group(r),
        embedding_residual,
        weak_decompletion,
        herr_q3,
        herr_cross_ring,
        norm_transport,
    ];
    let parts: Vec<Vec<Claim>> = std::thread::scope(|s| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|job| {
                s.spawn(move || {
                    let mut r = Report::new(cfg);
                    job(cfg, &mut r);
                    r.claims
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("suite job panicked")).collect()
    });
    let mut report = Report::new(cfg);
    for (i, claims) in parts.into_iter().enumerate() {
        for mut c in claims {
            c.name = format!("c{}.{}", i + 1, c.name);
            report.push(c);
        }
    }
    report
}
