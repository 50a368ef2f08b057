use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use sha2::{Digest, Sha256};

use super::fq::{default_modulus, is_irreducible, is_prime};
use crate::error::{Error, Result};

/// Parameters of the base field `L`: residue characteristic, inertia degree,
/// ramification index and the Eisenstein polynomial of `π_L`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FieldParams {
    pub p: u32,
    pub f: u32,
    pub e: u32,
    /// Coefficients `c_0, …, c_e` of `E(X) = Σ c_i X^i`; empty means `X - p`.
    pub eisenstein: Vec<i64>,
    /// Explicit residue-field modulus; `None` selects the default one.
    pub residue_modulus: Option<Vec<u32>>,
}

impl fmt::Debug for FieldParams {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(fm, "L(p={}, f={}, e={}, E={:?})", self.p, self.f, self.e, self.eisenstein_coeffs())
    }
}

impl FieldParams {
    pub fn unramified(p: u32, f: u32) -> Self {
        FieldParams { p, f, e: 1, eisenstein: Vec::new(), residue_modulus: None }
    }

    pub fn new(p: u32, f: u32, e: u32, eisenstein: Vec<i64>) -> Self {
        FieldParams { p, f, e, eisenstein, residue_modulus: None }
    }

    /// `Q_p(√p)`, cut out by `X² - p`.
    pub fn sqrt_p(p: u32) -> Self {
        FieldParams::new(p, 1, 2, vec![-(p as i64), 0, 1])
    }

    pub fn q(&self) -> u64 {
        (self.p as u64).pow(self.f)
    }

    pub fn eisenstein_coeffs(&self) -> Vec<i64> {
        if self.eisenstein.is_empty() && self.e == 1 {
            vec![-(self.p as i64), 1]
        } else {
            self.eisenstein.clone()
        }
    }

    pub fn residue_modulus(&self) -> Vec<u32> {
        self.residue_modulus.clone().unwrap_or_else(|| default_modulus(self.p, self.f))
    }

    pub fn validate(&self) -> Result<()> {
        if !is_prime(self.p as u64) {
            return Err(Error::InvalidParams(format!("p = {} is not prime", self.p)));
        }
        if self.f == 0 || self.e == 0 {
            return Err(Error::InvalidParams("f and e must be positive".into()));
        }
        let c = self.eisenstein_coeffs();
        if c.len() != self.e as usize + 1 {
            return Err(Error::InvalidParams(format!(
                "eisenstein polynomial needs {} coefficients, got {}",
                self.e + 1,
                c.len()
            )));
        }
        if c[self.e as usize] != 1 {
            return Err(Error::InvalidParams("eisenstein polynomial must be monic".into()));
        }
        let p = self.p as i64;
        if c[0] % p != 0 || (c[0] / p) % p == 0 {
            return Err(Error::InvalidParams("constant term must have p-valuation exactly 1".into()));
        }
        if c[1..self.e as usize].iter().any(|&x| x % p != 0) {
            return Err(Error::InvalidParams("non-leading coefficients must be divisible by p".into()));
        }
        if let Some(m) = &self.residue_modulus {
            if m.len() != self.f as usize + 1 || m[self.f as usize] != 1 || !is_irreducible(m, self.p) {
                return Err(Error::InvalidParams(format!("residue modulus {m:?} is not monic irreducible of degree {}", self.f)));
            }
        }
        Ok(())
    }
}

/// π-adic precision, series exponent window `[v_min, n)` and perfection depth.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrecisionProfile {
    pub m: u32,
    pub v_min: i64,
    pub n: i64,
    pub perf_level: u32,
}

impl PrecisionProfile {
    pub fn new(m: u32, v_min: i64, n: i64, perf_level: u32) -> Result<Self> {
        let p = PrecisionProfile { m, v_min, n, perf_level };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.v_min > 0 || self.n < 0 {
            return Err(Error::InvalidParams(format!("window [{}, {}) must contain 0", self.v_min, self.n)));
        }
        if self.m == 0 {
            return Err(Error::InvalidParams("precision m must be positive".into()));
        }
        Ok(())
    }
}

impl Default for PrecisionProfile {
    fn default() -> Self {
        PrecisionProfile { m: 3, v_min: -10, n: 30, perf_level: 2 }
    }
}

pub const REPORT_FORMAT_VERSION: u32 = 1;

/// Everything a run depends on; its canonical text form is hashed into reports.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub params: FieldParams,
    pub profile: PrecisionProfile,
    /// ♭-weight `w`: `|x|_♭ = q^{-w·v(x)}`.
    pub weight: Ratio<i64>,
    pub seed: u64,
    pub version: u32,
}

impl RunConfig {
    pub fn new(params: FieldParams, profile: PrecisionProfile) -> Self {
        let q = params.q() as i64;
        RunConfig { params, profile, weight: Ratio::new(q, q - 1), seed: 0, version: REPORT_FORMAT_VERSION }
    }

    pub fn canonical(&self) -> String {
        let join = |v: &[i64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let modulus: Vec<i64> = self.params.residue_modulus().iter().map(|&x| x as i64).collect();
        format!(
            "p={}\nf={}\ne={}\neisenstein={}\nresidue_modulus={}\nm={}\nwindow={},{}\nperf_level={}\nweight={}\nseed={}\nversion={}\n",
            self.params.p,
            self.params.f,
            self.params.e,
            join(&self.params.eisenstein_coeffs()),
            join(&modulus),
            self.profile.m,
            self.profile.v_min,
            self.profile.n,
            self.profile.perf_level,
            self.weight,
            self.seed,
            self.version
        )
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(|t| t.trim().parse::<T>().map_err(|_| Error::Parse(format!("bad entry {t:?} for {key}"))))
        .collect()
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse::<T>().map_err(|_| Error::Parse(format!("bad value {v:?} for {key}")))
}

impl FromStr for RunConfig {
    type Err = Error;

    /// `key = value` lines; `#` starts a comment. `p` is required.
    fn from_str(s: &str) -> Result<Self> {
        let mut p = None;
        let (mut f, mut e) = (1u32, 1u32);
        let mut eis = Vec::new();
        let mut modulus = None;
        let mut profile = PrecisionProfile::default();
        let mut weight = None;
        let mut seed = 0u64;
        for (lineno, raw) in s.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key=value", lineno + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            match k {
                "p" => p = Some(parse_num(k, v)?),
                "f" => f = parse_num(k, v)?,
                "e" => e = parse_num(k, v)?,
                "eisenstein" => eis = parse_list(k, v)?,
                "residue_modulus" => modulus = Some(parse_list(k, v)?),
                "m" => profile.m = parse_num(k, v)?,
                "window" => {
                    let w: Vec<i64> = parse_list(k, v)?;
                    if w.len() != 2 {
                        return Err(Error::Parse("window needs two bounds".into()));
                    }
                    profile.v_min = w[0];
                    profile.n = w[1];
                }
                "perf_level" => profile.perf_level = parse_num(k, v)?,
                "weight" => weight = Some(parse_num::<Ratio<i64>>(k, v)?),
                "seed" => seed = parse_num(k, v)?,
                "version" => {
                    let ver: u32 = parse_num(k, v)?;
                    if ver != REPORT_FORMAT_VERSION {
                        return Err(Error::Parse(format!("unsupported version {ver}")));
                    }
                }
                _ => return Err(Error::Parse(format!("unknown key {k:?}"))),
            }
        }
        let p = p.ok_or_else(|| Error::Parse("missing key p".into()))?;
        let mut params = FieldParams::new(p, f, e, eis);
        params.residue_modulus = modulus.filter(|m| *m != default_modulus(p, f));
        params.validate()?;
        profile.validate()?;
        let mut cfg = RunConfig::new(params, profile);
        if let Some(w) = weight {
            if w <= Ratio::from_integer(0) {
                return Err(Error::InvalidParams("weight must be positive".into()));
            }
            cfg.weight = w;
        }
        cfg.seed = seed;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_round_trip() {
        let cfg: RunConfig = "p=3\ne=2\neisenstein=-3,0,1\nm=4\nwindow=-5,20\n".parse().unwrap();
        assert_eq!(cfg.weight, Ratio::new(3, 2));
        let again: RunConfig = cfg.canonical().parse().unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.hash(), cfg.hash());
    }

    #[test]
    fn rejects_bad_eisenstein() {
        assert!("p=3\ne=2\neisenstein=-9,0,1".parse::<RunConfig>().is_err());
        assert!("p=3\ne=2\neisenstein=-3,1,1".parse::<RunConfig>().is_err());
        assert!("p=4".parse::<RunConfig>().is_err());
        assert!("f=2".parse::<RunConfig>().is_err());
        assert!("".parse::<RunConfig>().is_err());
    }

    #[test]
    fn window_must_contain_zero() {
        assert!(PrecisionProfile::new(3, 1, 10, 0).is_err());
        assert!(PrecisionProfile::new(3, -1, 10, 0).is_ok());
    }
}
