//! Desk-scale acceptance criteria 1-10, one PASS/FAIL line each.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use phigamma_core::charp::{fractional_part, INF, Q};
use phigamma_core::embed::witt_agree;
use phigamma_core::herr::{standard_units, PhiGammaModule, StagePolicy};
use phigamma_core::report::{random_al, random_laurent, run_acceptance_suite};
use phigamma_core::witt::{ghost, witt_norm, Poly, UniversalWittPolys};
use phigamma_core::{
    check_exact_sequence_finite, ALRing, CharPRing, Embedding, FieldParams, FqElem, LubinTate, OLRing, PowerSeries,
    PrecisionProfile, RunConfig, SeriesRing,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20241014;
const M: u32 = 3;
const WINDOW: (i64, i64) = (-10, 30);
const HERR_MARGIN: i64 = 10;

type Check = fn() -> Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rng(k: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED + k)
}

fn c1_psi() -> Result<(), String> {
    let mut g = rng(1);
    for params in [FieldParams::unramified(2, 1), FieldParams::unramified(3, 1), FieldParams::unramified(3, 2)] {
        let al = ALRing::new(OLRing::new(params).unwrap(), M).unwrap();
        let q_over_pi = al.ol().q_over_pi(M);
        for i in 0..100 {
            let f = random_al(&al, &mut g, WINDOW.0, WINDOW.1);
            let h = random_al(&al, &mut g, WINDOW.0, WINDOW.1);
            let h = al.from_terms(&h.terms().map(|(k, c)| (k, *c)).collect::<Vec<_>>(), INF);
            let pf = al.phi(&f);
            let (ok1, w1) = al.eq_on_window(&al.psi(&pf).unwrap(), &al.scale(&f, &q_over_pi));
            let (ok2, w2) = al.eq_on_window(&al.psi(&al.mul(&pf, &h)).unwrap(), &al.mul(&f, &al.psi(&h).unwrap()));
            ensure(ok1 && ok2, || format!("q={} sample {i}: identity fails", al.q()))?;
            ensure(w1 > WINDOW.0 && w2 > WINDOW.0, || format!("q={} sample {i}: empty window ({w1}, {w2})", al.q()))?;
        }
    }
    Ok(())
}

fn c2_witt() -> Result<(), String> {
    for p in [2u32, 3] {
        let ol = OLRing::new(FieldParams::unramified(p, 1)).unwrap();
        let n = 4;
        let u = UniversalWittPolys::compute(&ol, n, 2).map_err(|e| format!("q={p}: {e}"))?;
        let w = u.work_prec;
        let compose = |polys: &[Poly], j: usize| {
            (0..=j).fold(Poly::zero(w), |acc, i| acc.add(&ol, &polys[i].pow(&ol, ol.q().pow((j - i) as u32)).mul_pi_pow(&ol, i as u32)))
        };
        for j in 0..n {
            let (gx, gy) = (ghost(&ol, j, 0, w), ghost(&ol, j, n, w));
            ensure(compose(&u.s, j).sub(&ol, &gx.add(&ol, &gy)).is_empty(), || format!("q={p} S_{j}"))?;
            ensure(compose(&u.p, j).sub(&ol, &gx.mul(&ol, &gy)).is_empty(), || format!("q={p} P_{j}"))?;
            ensure(compose(&u.i, j).add(&ol, &gx).is_empty(), || format!("q={p} I_{j}"))?;
        }
    }
    Ok(())
}

fn c3_exact_sequence() -> Result<(), String> {
    let ol = OLRing::new(FieldParams::unramified(2, 1)).unwrap();
    let rep = check_exact_sequence_finite(&ol, 2, 2).map_err(|e| e.to_string())?;
    ensure(rep.domain == 16 && rep.kernel == 4 && rep.kernel_in_base, || format!("{rep:?}"))?;
    let one = check_exact_sequence_finite(&ol, 2, 1).map_err(|e| e.to_string())?;
    ensure(one.image * one.kernel == one.domain, || format!("{one:?}"))
}

fn c4_multiplicative() -> Result<(), String> {
    let ol = OLRing::new(FieldParams::unramified(2, 1)).unwrap();
    let lt = LubinTate::new(ol.clone());
    let law = lt.group_law(9, 3).unwrap();
    for i in 0..9 {
        for j in 0..9 - i {
            let want = if matches!((i, j), (1, 0) | (0, 1) | (1, 1)) { 1 } else { 0 };
            ensure(law.coeff(i, j) == ol.from_int(want, 3), || format!("coefficient X^{i}Y^{j}"))?;
        }
    }
    let n = 8;
    let one = PowerSeries::monomial(&ol, ol.one(3), 0, n, 3);
    let one_plus_z = PowerSeries::var(&ol, n, 3).add(&ol, &one);
    for a in [2u64, 3, 5] {
        let got = lt.mult_by(&ol.from_int(a as i64, ol.max_prec()), n, 3).unwrap();
        ensure(got == one_plus_z.pow(&ol, a).sub(&ol, &one), || format!("[{a}](Z) = {}", got.format(&ol)))?;
    }
    Ok(())
}

fn q3_setup(n: usize, perf: u32, window: i64) -> (Arc<ALRing>, Embedding) {
    let ol = OLRing::new(FieldParams::unramified(3, 1)).unwrap();
    (ALRing::new(ol.clone(), n as u32).unwrap(), Embedding::new(ol, n, perf, Q::from_integer(window)).unwrap())
}

fn c5_embedding() -> Result<(), String> {
    let (al, e) = q3_setup(3, 2, 16);
    ensure(e.omega_lt().residual_vanishes(), || "residual of ω_LT is nonzero".into())?;
    let w = e.ring();
    let mut g = rng(5);
    for i in 0..50 {
        // products stay inside [-4, 16)
        let f = random_al(&al, &mut g, -2, 6);
        let h = random_al(&al, &mut g, -2, 6);
        let lhs = e.embed_al(&al.mul(&f, &h)).unwrap();
        let rhs = w.mul(&e.embed_al(&f).unwrap(), &e.embed_al(&h).unwrap()).unwrap();
        ensure(witt_agree(w.base(), &lhs, &rhs), || format!("pair {i}"))?;
    }
    Ok(())
}

fn c6_weak_decompletion() -> Result<(), String> {
    let (_, e) = q3_setup(3, 2, 24);
    let weight = Q::new(3, 2);
    let (r, gap) = e.find_r(weight).map_err(|x| x.to_string())?;
    let bound = -weight * r;
    ensure(gap.certified && gap.exponent.is_none_or(|t| t < bound), || format!("gap {gap:?} vs {bound} at r={r}"))?;
    let laurent = SeriesRing::laurent(e.ring().base().fq().clone());
    let mut g = rng(6);
    let mut done = 0;
    while done < 20 {
        let b = random_laurent(&laurent, &mut g, -3, 6, 3).unwrap();
        if laurent.is_zero(&b) {
            continue;
        }
        let wd = e.check_weak_decompletion(&b, Some(r), weight).unwrap();
        ensure(wd.lift.certified && wd.equal, || format!("b = {}: {wd:?}", laurent.format(&b)))?;
        done += 1;
    }
    Ok(())
}

fn q3_modules() -> Vec<(PhiGammaModule, Vec<usize>)> {
    let ol = OLRing::new(FieldParams::unramified(3, 1)).unwrap();
    let al = ALRing::new(ol.clone(), 1).unwrap();
    let (g, d) = standard_units(&ol).unwrap();
    let twist = al.monomial(ol.from_int(-1, 1), 0);
    vec![
        // Kummer theory: dim Q_3^×/(Q_3^×)^3 = 2, μ_3 ⊄ Q_3, Euler characteristic -1
        (PhiGammaModule::rank_one(al.clone(), al.one(), &g, &d).unwrap(), vec![1, 2, 0]),
        (PhiGammaModule::rank_one(al, twist, &g, &d).unwrap(), vec![0, 1, 0]),
    ]
}

fn c7_herr() -> Result<(), String> {
    for (m, want) in q3_modules() {
        let rep = m.cohomology(&StagePolicy::doubling(m.pole_bound(), HERR_MARGIN)).map_err(|e| e.to_string())?;
        ensure(rep.stabilized && rep.dims() == want, || format!("{rep}"))?;
    }
    Ok(())
}

fn c8_cross_ring() -> Result<(), String> {
    let mods = q3_modules();
    for (m, want) in &mods {
        let rep = m.cohomology_perfect(1, &StagePolicy::doubling(m.pole_bound(), HERR_MARGIN)).map_err(|e| e.to_string())?;
        ensure(rep.stabilized && &rep.dims() == want, || format!("perfection: {rep}"))?;
    }
    let triv = &mods[0].0;
    let ring = SeriesRing::perfect(triv.al().ol().residue_field().clone(), 2);
    let d = ring.denom();
    let mut g = rng(8);
    for i in 0..50 {
        let t: Vec<(Q, FqElem)> = (0..4).map(|_| (Q::new(g.gen_range(-6 * d..6 * d), d), FqElem(g.gen_range(1..3)))).collect();
        let b = ring.from_terms(&t, None).unwrap();
        let (_, residual) = triv.solve_fractional(&ring, &[b]).unwrap();
        ensure(ring.is_zero(&fractional_part(&ring, &residual[0])), || format!("target {i}"))?;
    }
    Ok(())
}

fn c9_norm_transport() -> Result<(), String> {
    let (al, e) = q3_setup(3, 3, 24);
    let q = al.q();
    let (r, weight) = (Q::new(q - 1, 2 * q), Q::new(q, q - 1));
    let mut g = rng(9);
    for i in 0..50 {
        let f = random_al(&al, &mut g, -3, 5);
        let lhs = al.overconv_norm(&f, r, weight);
        let rhs = witt_norm(e.ring(), &e.embed_al(&f).unwrap(), r, weight).unwrap();
        ensure(lhs.certified && rhs.certified && lhs.exponent == rhs.exponent, || format!("witness {i}: {lhs:?} vs {rhs:?}"))?;
    }
    Ok(())
}

fn c10_determinism() -> Result<(), String> {
    let cfg = RunConfig::new(FieldParams::unramified(3, 1), PrecisionProfile::default());
    let a = run_acceptance_suite(&cfg).to_string();
    let b = run_acceptance_suite(&cfg).to_string();
    ensure(a == b, || "suite reports differ".into())?;
    ensure(!a.contains("VERDICT fail"), || format!("suite has failing claims:\n{a}"))
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, Check, u64); 10] = [
        (1, "psi identities", c1_psi, 10),
        (2, "Witt ghost identities", c2_witt, 30),
        (3, "finite exact sequence", c3_exact_sequence, 1),
        (4, "multiplicative group", c4_multiplicative, 1),
        (5, "embedding residual", c5_embedding, 30),
        (6, "weak decompletion", c6_weak_decompletion, 30),
        (7, "Herr cohomology Q_3", c7_herr, 60),
        (8, "cross-ring comparison", c8_cross_ring, 120),
        (9, "norm transport", c9_norm_transport, 30),
        (10, "determinism", c10_determinism, 240),
    ];
    let mut failed = 0;
    for (n, name, check, limit) in criteria {
        let t = Instant::now();
        let res = check();
        let el = t.elapsed();
        let res = res.and_then(|()| ensure(el <= Duration::from_secs(limit), || format!("over the {limit} s limit")));
        match res {
            Ok(()) => println!("criterion {n:>2} PASS {name} ({:.3} s, limit {limit} s)", el.as_secs_f64()),
            Err(e) => {
                failed += 1;
                println!("criterion {n:>2} FAIL {name} ({:.3} s, limit {limit} s): {e}", el.as_secs_f64());
            }
        }
    }
    println!("acceptance: {} of 10 criteria pass", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
