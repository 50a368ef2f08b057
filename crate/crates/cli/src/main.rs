use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use phigamma_core::charp::Q;
use phigamma_core::embed::check_exact_sequence_finite;
use phigamma_core::herr::{PhiGammaModule, StagePolicy};
use phigamma_core::report::{run_acceptance_suite, Claim, Report, Value, Verdict};
use phigamma_core::witt::witt_norm;
use phigamma_core::{
    ALRing, CharPRing, Embedding, Error, FqRing, LubinTate, OLRing, RunConfig, SeriesRing, WittRing, WittVector,
};

#[derive(Parser)]
#[command(name = "phigamma", version, about = "Lubin-Tate (phi, Gamma)-module arithmetic")]
struct Cli {
    /// Run configuration (key = value lines).
    #[arg(long, global = true, env = "PHIGAMMA_CONFIG")]
    config: Option<PathBuf>,
    /// Override the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Lubin-Tate series for f = πZ + Z^q.
    Lt {
        #[command(subcommand)]
        op: LtOp,
    },
    /// Ramified Witt vector arithmetic.
    Witt {
        #[arg(value_enum)]
        op: WittOp,
        /// `[x_0; x_1; ...]`, one or two operands.
        operands: Vec<String>,
        /// `fq:<j>`, `laurent` or `perf:<level>`.
        #[arg(long, default_value = "fq:1")]
        ring: String,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Radius for `norm`.
        #[arg(long)]
        r: Option<String>,
    },
    /// Operators on A_L/π^m.
    Al {
        #[arg(value_enum)]
        op: AlOp,
        /// Element in `c*Z^k + O(Z^N) + O(pi^m)` syntax.
        x: String,
        #[arg(long)]
        m: Option<u32>,
        /// Unit for `gamma`.
        #[arg(long)]
        a: Option<String>,
        /// Radius for `norm`.
        #[arg(long)]
        r: Option<String>,
    },
    /// The embedding A_L → W(E_perf)_L.
    Embed {
        #[command(subcommand)]
        op: EmbedOp,
    },
    /// Claim checks with report lines.
    Check {
        #[command(subcommand)]
        op: CheckOp,
    },
    /// Herr cohomology of a module file.
    Herr {
        #[command(subcommand)]
        op: HerrOp,
    },
    /// Run the acceptance suite.
    Suite,
}

#[derive(Subcommand)]
enum LtOp {
    /// `[a](Z)`.
    Series {
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long = "N", default_value_t = 8)]
        n: usize,
        #[arg(long)]
        m: Option<u32>,
    },
    /// The group law `F(X, Y)`.
    Law {
        #[arg(long = "N", default_value_t = 6)]
        n: usize,
        #[arg(long)]
        m: Option<u32>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum WittOp {
    Add,
    Mul,
    Frob,
    Versch,
    Teich,
    Norm,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlOp {
    Phi,
    Gamma,
    Psi,
    Trace,
    Reduce,
    Norm,
}

#[derive(Subcommand)]
enum EmbedOp {
    /// `ω_LT` and its defining-equation residual.
    Omega {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long)]
        perf: Option<u32>,
        #[arg(long, default_value_t = 16)]
        window: i64,
    },
    /// Image of an element of A_L/π^n.
    Apply {
        x: Option<String>,
        #[arg(long)]
        file: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 16)]
        window: i64,
    },
}

#[derive(Subcommand)]
enum CheckOp {
    /// Weak decompletion for `b ∈ E_L`.
    Weakdec {
        #[arg(long, allow_hyphen_values = true)]
        b: String,
        /// Rational radius or `auto`.
        #[arg(long, default_value = "auto")]
        r: String,
        #[arg(long, default_value_t = 3)]
        n: usize,
    },
    /// `0 → W_n(F_q)_L → W_n(F_{q^j})_L → W_n(F_{q^j})_L` by enumeration.
    Exact {
        #[arg(long)]
        j: u32,
        #[arg(long)]
        n: usize,
    },
}

#[derive(Subcommand)]
enum HerrOp {
    /// Stabilized cohomology.
    Cohom {
        #[arg(long)]
        module: PathBuf,
        #[arg(long)]
        m: Option<u32>,
        /// Comma-separated pole bounds; defaults to slope + margin, doubled twice.
        #[arg(long)]
        policy: Option<String>,
        /// Recompute over the level-`L` perfection (mod π only).
        #[arg(long)]
        perfect: Option<u32>,
    },
}

/// Mathematical outcome of a subcommand.
enum Outcome {
    Ok(String),
    Fail(String),
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg: RunConfig = match &cli.config {
        Some(p) => std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?.parse()?,
        None => "p = 3".parse()?,
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn parse_q(s: &str) -> Result<Q> {
    s.trim().parse::<Q>().map_err(|_| anyhow!("bad rational {s:?}"))
}

fn unit(ol: &OLRing, s: &str) -> Result<phigamma_core::OLElement> {
    Ok(match s.trim().parse::<i64>() {
        Ok(n) => ol.from_int(n, ol.max_prec()),
        Err(_) => ol.parse(s)?,
    })
}

fn fmt_witt<R: CharPRing>(v: &WittVector<R::Elem>, f: impl Fn(&R::Elem) -> String) -> String {
    format!("[{}]", v.comps.iter().map(f).collect::<Vec<_>>().join("; "))
}

fn parse_witt<R: CharPRing>(w: &WittRing<R>, s: &str, p: impl Fn(&str) -> phigamma_core::Result<R::Elem>) -> Result<WittVector<R::Elem>> {
    let inner = s.trim().strip_prefix('[').and_then(|t| t.strip_suffix(']')).ok_or_else(|| anyhow!("expected [x_0; ...] in {s:?}"))?;
    let comps = inner.split(';').map(|t| p(t.trim())).collect::<phigamma_core::Result<Vec<_>>>()?;
    Ok(w.from_comps(comps)?)
}

fn witt_op<R: CharPRing>(
    w: &WittRing<R>,
    op: WittOp,
    operands: &[String],
    k: usize,
    parse: impl Fn(&str) -> phigamma_core::Result<R::Elem> + Copy,
    fmt: impl Fn(&R::Elem) -> String + Copy,
) -> Result<String> {
    let arg = |i: usize| -> Result<WittVector<R::Elem>> {
        parse_witt(w, operands.get(i).ok_or_else(|| anyhow!("missing operand {}", i + 1))?, parse)
    };
    let out = match op {
        WittOp::Add => w.add(&arg(0)?, &arg(1)?)?,
        WittOp::Mul => w.mul(&arg(0)?, &arg(1)?)?,
        WittOp::Frob => w.frobenius(&arg(0)?),
        WittOp::Versch => w.verschiebung(&arg(0)?, k),
        WittOp::Teich => w.teichmuller(&parse(operands.first().ok_or_else(|| anyhow!("missing operand"))?)?),
        WittOp::Norm => bail!("norm needs a series ring"),
    };
    Ok(fmt_witt::<R>(&out, fmt))
}

fn run_witt(cfg: &RunConfig, op: WittOp, operands: &[String], ring: &str, k: usize, r: Option<&str>) -> Result<String> {
    let ol = OLRing::new(cfg.params.clone())?;
    let n = operands.first().map_or(1, |s| s.matches(';').count() + 1);
    if let Some(j) = ring.strip_prefix("fq:") {
        if matches!(op, WittOp::Norm) {
            bail!("norm needs a series ring");
        }
        let base = FqRing::extension(ol.residue_field(), j.parse().context("bad extension degree")?)?;
        let fld = base.field().clone();
        let w = WittRing::new(base, ol, n)?;
        return witt_op(&w, op, operands, k, |s| fld.parse(s), |x| fld.format(*x));
    }
    let s = match ring {
        "laurent" => SeriesRing::laurent(ol.residue_field().clone()),
        _ => match ring.strip_prefix("perf:") {
            Some(e) => SeriesRing::perfect(ol.residue_field().clone(), e.parse().context("bad perfection level")?),
            None => bail!("unknown ring {ring:?}"),
        },
    };
    let w = WittRing::new(s.clone(), ol, n)?;
    if matches!(op, WittOp::Norm) {
        let x = parse_witt(&w, operands.first().ok_or_else(|| anyhow!("missing operand"))?, |t| s.parse(t))?;
        let r = parse_q(r.ok_or_else(|| anyhow!("norm needs --r"))?)?;
        return Ok(format!("{} weight={}", witt_norm(&w, &x, r, cfg.weight)?, cfg.weight));
    }
    witt_op(&w, op, operands, k, |t| s.parse(t), |x| s.format(x))
}

fn al_ring(cfg: &RunConfig, m: Option<u32>) -> Result<Arc<ALRing>> {
    Ok(ALRing::new(OLRing::new(cfg.params.clone())?, m.unwrap_or(cfg.profile.m))?)
}

fn run_al(cfg: &RunConfig, op: AlOp, x: &str, m: Option<u32>, a: Option<&str>, r: Option<&str>) -> Result<String> {
    let al = al_ring(cfg, m)?;
    let x = al.parse(x)?;
    Ok(match op {
        AlOp::Phi => al.format(&al.phi(&x)),
        AlOp::Gamma => al.format(&al.gamma(&unit(al.ol(), a.ok_or_else(|| anyhow!("gamma needs --a"))?)?, &x)?),
        AlOp::Psi => al.format(&al.psi(&x)?),
        AlOp::Trace => al.format(&al.trace(&x)),
        AlOp::Reduce => SeriesRing::laurent(al.ol().residue_field().clone()).format(&al.reduce_mod_pi(&x)?),
        AlOp::Norm => {
            let r = parse_q(r.ok_or_else(|| anyhow!("norm needs --r"))?)?;
            format!("{} weight={}", al.overconv_norm(&x, r, cfg.weight), cfg.weight)
        }
    })
}

fn embedding(cfg: &RunConfig, n: usize, perf: Option<u32>, window: i64) -> Result<Embedding> {
    let ol = OLRing::new(cfg.params.clone())?;
    Ok(Embedding::new(ol, n, perf.unwrap_or(cfg.profile.perf_level.max(n as u32 - 1)), Q::from_integer(window))?)
}

fn run_embed(cfg: &RunConfig, op: &EmbedOp) -> Result<Outcome> {
    match op {
        EmbedOp::Omega { n, perf, window } => {
            let e = embedding(cfg, *n, *perf, *window)?;
            let s = e.ring().base();
            let om = e.omega_lt();
            let mut out = fmt_witt::<SeriesRing>(&om.witt, |x| s.format(x));
            let ok = om.residual_vanishes();
            write!(out, "\nresidual {}", if ok { "0" } else { "nonzero" })?;
            Ok(if ok { Outcome::Ok(out) } else { Outcome::Fail(out) })
        }
        EmbedOp::Apply { x, file, n, window } => {
            let text = match (x, file) {
                (Some(x), _) => x.clone(),
                (None, Some(f)) => std::fs::read_to_string(f).with_context(|| format!("reading {}", f.display()))?,
                (None, None) => bail!("give an element or --file"),
            };
            let e = embedding(cfg, *n, None, *window)?;
            let al = ALRing::new(e.ring().ol().clone(), *n as u32)?;
            let v = e.embed_al(&al.parse(text.trim())?)?;
            let s = e.ring().base();
            Ok(Outcome::Ok(fmt_witt::<SeriesRing>(&v, |x| s.format(x))))
        }
    }
}

fn run_check(cfg: &RunConfig, op: &CheckOp) -> Result<Outcome> {
    let mut rep = Report::new(cfg);
    match op {
        CheckOp::Weakdec { b, r, n } => {
            let e = embedding(cfg, *n, None, 24)?;
            let laurent = SeriesRing::laurent(e.ring().base().fq().clone());
            let b = laurent.parse(b)?;
            let r = if r == "auto" { None } else { Some(parse_q(r)?) };
            let wd = e.check_weak_decompletion(&b, r, cfg.weight)?;
            let strict = match (wd.gap.certified, wd.gap_strict) {
                (true, true) => Verdict::Ok,
                (true, false) => Verdict::Fail,
                (false, _) => Verdict::Uncertified,
            };
            rep.push(Claim { name: format!("gap_strict.r={}", wd.r), verdict: strict, lhs: Value::Norm(wd.gap.exponent), rhs: Value::Norm(Some(wd.gap_bound)) });
            let lift = phigamma_core::NormValue { exponent: wd.expected, certified: true };
            rep.push(Claim::norms("lift_norm", wd.lift, lift));
            rep.push(Claim::compare("weight", Value::Text(cfg.weight.to_string()), Value::Text(cfg.weight.to_string())));
        }
        CheckOp::Exact { j, n } => {
            let ol = OLRing::new(cfg.params.clone())?;
            let e = check_exact_sequence_finite(&ol, *j, *n)?;
            let base = ol.q().pow(*n as u32);
            rep.push(Claim::compare("kernel", Value::Count(e.kernel as u64), Value::Count(base)));
            rep.push(Claim::compare("kernel_in_base", Value::Count(e.kernel_in_base as u64), Value::Count(1)));
            rep.push(Claim::compare("image", Value::Count(e.image as u64), Value::Count((e.domain / e.kernel.max(1)) as u64)));
            for (deg, count) in &e.preimage_degree {
                let d = deg.map_or("none".to_string(), |d| d.to_string());
                rep.push(Claim::compare(format!("preimage_degree.{d}"), Value::Count(*count as u64), Value::Count(*count as u64)));
            }
        }
    }
    Ok(report_outcome(rep))
}

fn report_outcome(rep: Report) -> Outcome {
    let text = rep.to_string();
    if rep.all_ok() {
        Outcome::Ok(text)
    } else {
        Outcome::Fail(text)
    }
}

fn run_herr(cfg: &RunConfig, op: &HerrOp) -> Result<Outcome> {
    let HerrOp::Cohom { module, m, policy, perfect } = op;
    let al = al_ring(cfg, Some(m.unwrap_or(1)))?;
    let text = std::fs::read_to_string(module).with_context(|| format!("reading {}", module.display()))?;
    let md = PhiGammaModule::parse(al, &text)?;
    let policy = match policy {
        Some(p) => StagePolicy { stages: p.split(',').map(|t| t.trim().parse::<i64>()).collect::<std::result::Result<_, _>>().context("bad --policy")? },
        None => md.default_policy(-cfg.profile.v_min),
    };
    let rep = match perfect {
        Some(level) => md.cohomology_perfect(*level, &policy)?,
        None => md.cohomology(&policy)?,
    };
    let body = format!("CONFIG {}\n{rep}", cfg.hash());
    Ok(if rep.stabilized { Outcome::Ok(body) } else { Outcome::Fail(body) })
}

fn run(cli: &Cli) -> Result<Outcome> {
    let cfg = load_config(cli)?;
    match &cli.cmd {
        Cmd::Lt { op } => {
            let ol = OLRing::new(cfg.params.clone())?;
            let lt = LubinTate::new(ol.clone());
            Ok(Outcome::Ok(match op {
                LtOp::Series { a, n, m } => lt.mult_by(&unit(&ol, a)?, *n, m.unwrap_or(cfg.profile.m))?.format(&ol),
                LtOp::Law { n, m } => lt.group_law(*n, m.unwrap_or(cfg.profile.m))?.format(&ol),
            }))
        }
        Cmd::Witt { op, operands, ring, k, r } => Ok(Outcome::Ok(run_witt(&cfg, *op, operands, ring, *k, r.as_deref())?)),
        Cmd::Al { op, x, m, a, r } => Ok(Outcome::Ok(run_al(&cfg, *op, x, *m, a.as_deref(), r.as_deref())?)),
        Cmd::Embed { op } => run_embed(&cfg, op),
        Cmd::Check { op } => run_check(&cfg, op),
        Cmd::Herr { op } => run_herr(&cfg, op),
        Cmd::Suite => Ok(report_outcome(run_acceptance_suite(&cfg))),
    }
}

/// Errors that are verdicts about the mathematics rather than bad input.
fn is_mathematical(e: &anyhow::Error) -> bool {
    matches!(
        e.downcast_ref::<Error>(),
        Some(Error::NotStabilized | Error::NotEtale | Error::NoValidR | Error::CertificateInvalid(_) | Error::TraceNotDivisible | Error::NoConvergence(_))
    )
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(Outcome::Ok(s)) => {
            println!("{s}");
            ExitCode::SUCCESS
        }
        Ok(Outcome::Fail(s)) => {
            println!("{s}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_mathematical(&e) { 2 } else { 1 })
        }
    }
}
