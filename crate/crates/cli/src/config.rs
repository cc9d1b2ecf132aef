//! Flat line-oriented `key = value` run configuration. Keys repeat to build
//! lists; there is no nesting. Unknown keys are rejected so configs stay
//! diffable against what actually ran.

use std::path::PathBuf;

use taulab_core::hamiltonian::{AngleRule, HRule, RotationPlan};
use taulab_core::models::OverlapRegime;
use taulab_core::seminorm::{Pairing, SeminormSpec};
use taulab_core::spectral::{DecayFamily, SpectrumKind, TestFunction};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

type Result<T> = std::result::Result<T, ConfigError>;

fn err<T>(msg: impl Into<String>) -> Result<T> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelChoice {
    Bosonic,
    FermionLattice,
    Rotated,
}

#[derive(Debug, Clone)]
pub enum ObservableChoice {
    /// `exp(-kappa S) Y exp(-kappa S)` for a seeded dense sample `Y`.
    Smooth { kappa: f64 },
    /// `Q_m Y Q_m`.
    Localized { level: usize },
    /// Unweighted dense sample.
    Dense,
    /// A named observable of the model bundle.
    Named(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Evolve,
    Certify,
    Membership,
    Gibbs,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: ModelChoice,
    pub h_rule: HRule,
    pub levels: Option<usize>,
    pub sites: usize,
    pub onsite: f64,
    pub hopping: f64,
    pub plan: RotationPlan,
    pub regime: OverlapRegime,
    pub observable: ObservableChoice,
    pub families: Vec<DecayFamily>,
    pub gammas: Vec<f64>,
    pub ks: Vec<u32>,
    pub include_weak: bool,
    pub n: u32,
    pub cutoffs: Vec<usize>,
    pub t_grid: Vec<f64>,
    pub betas: Vec<f64>,
    pub taus: Vec<f64>,
    pub suites: Vec<Suite>,
    pub cauchy_tol: f64,
    pub window: usize,
    pub identity_tol: f64,
    pub pairing: Pairing,
    pub panels: usize,
    pub taylor_terms: usize,
    pub samples: usize,
    pub out_dir: PathBuf,
    pub seed: u64,
}

const KNOWN_KEYS: &[&str] = &[
    "model",
    "h_rule",
    "levels",
    "sites",
    "onsite",
    "hopping",
    "plan",
    "angle_rule",
    "regime",
    "observable",
    "family",
    "gamma",
    "k",
    "weak",
    "n",
    "cutoff",
    "t",
    "beta",
    "tau",
    "suite",
    "cauchy_tol",
    "window",
    "identity_tol",
    "pairing",
    "panels",
    "taylor_terms",
    "samples",
    "out_dir",
    "seed",
];

struct Pairs(Vec<(String, String)>);

impl Pairs {
    fn all(&self, key: &str) -> Vec<&str> {
        self.0
            .iter()
            .filter(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .collect()
    }

    fn one(&self, key: &str) -> Result<Option<&str>> {
        let hits = self.all(key);
        match hits.len() {
            0 => Ok(None),
            1 => Ok(Some(hits[0])),
            n => err(format!("key {key} given {n} times, expected once")),
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.parse()
        .map_err(|_| ConfigError(format!("{key}: not a number: {v}")))
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.parse()
        .map_err(|_| ConfigError(format!("{key}: not an integer: {v}")))
}

fn parse_cutoffs(values: &[&str]) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for v in values {
        if let Some((a, b)) = v.split_once("..") {
            let lo = parse_usize("cutoff", a.trim())?;
            let hi = parse_usize("cutoff", b.trim())?;
            if hi < lo {
                return err(format!("cutoff range {v} is reversed"));
            }
            out.extend(lo..=hi);
        } else {
            out.push(parse_usize("cutoff", v)?);
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn parse_h_rule(v: &str) -> Result<HRule> {
    let mut parts = v.split(':');
    let head = parts.next().unwrap_or("");
    let rest: Vec<&str> = parts.collect();
    match head {
        "zero" => Ok(HRule::Zero),
        "linear" => Ok(HRule::Linear),
        "power" => Ok(HRule::Power {
            exponent: parse_f64("h_rule power", rest.first().copied().unwrap_or("1"))?,
        }),
        "exp_scale" => Ok(HRule::ExpOfScale {
            gamma: parse_f64("h_rule exp_scale", rest.first().copied().unwrap_or("1"))?,
        }),
        "counterexample" | "counterexample_sq" => {
            let gamma = parse_f64("h_rule rate", rest.first().copied().unwrap_or("1"))?;
            let f0 = TestFunction::exp(gamma)
                .map_err(|e| ConfigError(format!("h_rule rate: {e}")))?;
            Ok(HRule::InverseTest {
                f0,
                squared: head == "counterexample_sq",
            })
        }
        "explicit" => {
            let vals = rest
                .first()
                .copied()
                .unwrap_or("")
                .split(',')
                .map(|s| parse_f64("h_rule explicit", s.trim()))
                .collect::<Result<Vec<f64>>>()?;
            if vals.is_empty() {
                return err("h_rule explicit: needs at least one value");
            }
            Ok(HRule::Explicit(vals))
        }
        other => err(format!("unknown h_rule {other}")),
    }
}

fn parse_angle_rule(v: &str) -> Result<AngleRule> {
    let parts: Vec<&str> = v.split(':').collect();
    match parts[0] {
        "const" => Ok(AngleRule::Constant(parse_f64(
            "angle_rule const",
            parts.get(1).copied().unwrap_or("0"),
        )?)),
        "geometric" => Ok(AngleRule::Geometric {
            base: parse_f64("angle_rule base", parts.get(1).copied().unwrap_or("0.5"))?,
            ratio: parse_f64("angle_rule ratio", parts.get(2).copied().unwrap_or("0.7"))?,
        }),
        "shift" => Ok(AngleRule::ShiftLike {
            eps: parse_f64("angle_rule eps", parts.get(1).copied().unwrap_or("0.4"))?,
            ratio: parse_f64("angle_rule ratio", parts.get(2).copied().unwrap_or("0.6"))?,
        }),
        other => err(format!("unknown angle_rule {other}")),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return err(format!("line {}: expected key = value", ln + 1));
            };
            let key = k.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return err(format!("line {}: unknown key {key}", ln + 1));
            }
            pairs.push((key, v.trim().to_string()));
        }
        let p = Pairs(pairs);

        let model = match p.one("model")? {
            Some("bosonic") => ModelChoice::Bosonic,
            Some("fermion_lattice") => ModelChoice::FermionLattice,
            Some("rotated") => ModelChoice::Rotated,
            Some(other) => return err(format!("unknown model {other}")),
            None => return err("model is required"),
        };
        let h_rule = parse_h_rule(p.one("h_rule")?.unwrap_or("linear"))?;
        let levels = p.one("levels")?.map(|v| parse_usize("levels", v)).transpose()?;
        let sites = p
            .one("sites")?
            .map(|v| parse_usize("sites", v))
            .transpose()?
            .unwrap_or(4);
        let onsite = p
            .one("onsite")?
            .map(|v| parse_f64("onsite", v))
            .transpose()?
            .unwrap_or(1.0);
        let hopping = p
            .one("hopping")?
            .map(|v| parse_f64("hopping", v))
            .transpose()?
            .unwrap_or(0.5);
        let angles = parse_angle_rule(p.one("angle_rule")?.unwrap_or("const:0.5236"))?;
        let plan = match p.one("plan")? {
            None => RotationPlan::BrickWall { layers: 1, angles },
            Some(v) => {
                let parts: Vec<&str> = v.split(':').collect();
                match parts[0] {
                    "brick" => RotationPlan::BrickWall {
                        layers: parse_usize("plan layers", parts.get(1).copied().unwrap_or("1"))?,
                        angles,
                    },
                    "staircase" => RotationPlan::Staircase { angles },
                    other => return err(format!("unknown plan {other}")),
                }
            }
        };
        let regime = match p.one("regime")? {
            None | Some("banded_finite_r") => OverlapRegime::BandedFiniteR,
            Some("l1_profile") => OverlapRegime::L1Profile,
            Some("bk_summable") => OverlapRegime::BkSummable,
            Some(other) => return err(format!("unknown regime {other}")),
        };
        let observable = match p.one("observable")? {
            None => ObservableChoice::Smooth { kappa: 0.75 },
            Some(v) => {
                let parts: Vec<&str> = v.split(':').collect();
                match parts[0] {
                    "smooth" => ObservableChoice::Smooth {
                        kappa: parse_f64("observable kappa", parts.get(1).copied().unwrap_or("0.75"))?,
                    },
                    "localized" => ObservableChoice::Localized {
                        level: parse_usize("observable level", parts.get(1).copied().unwrap_or("4"))?,
                    },
                    "dense" => ObservableChoice::Dense,
                    "named" => match parts.get(1) {
                        Some(name) => ObservableChoice::Named((*name).into()),
                        None => return err("observable named: needs a name"),
                    },
                    other => return err(format!("unknown observable {other}")),
                }
            }
        };

        let mut families = Vec::new();
        for f in p.all("family") {
            families.push(match f {
                "exp" => DecayFamily::Exp,
                "gauss" => DecayFamily::Gauss,
                other => return err(format!("unknown family {other}")),
            });
        }
        if families.is_empty() {
            families.push(DecayFamily::Exp);
        }
        let gammas = p
            .all("gamma")
            .iter()
            .map(|v| parse_f64("gamma", v))
            .collect::<Result<Vec<f64>>>()?;
        let gammas = if gammas.is_empty() { vec![1.0] } else { gammas };
        if gammas.iter().any(|&g| g <= 0.0) {
            return err("gamma must be positive");
        }
        let ks = p
            .all("k")
            .iter()
            .map(|v| parse_usize("k", v).map(|x| x as u32))
            .collect::<Result<Vec<u32>>>()?;
        let ks = if ks.is_empty() { vec![0] } else { ks };
        let include_weak = matches!(p.one("weak")?, Some("true") | Some("1"));
        let n = p
            .one("n")?
            .map(|v| parse_usize("n", v))
            .transpose()?
            .unwrap_or(1) as u32;
        if n == 0 {
            return err("n must be >= 1");
        }
        let cutoffs = parse_cutoffs(&p.all("cutoff"))?;
        let t_grid = p
            .all("t")
            .iter()
            .map(|v| parse_f64("t", v))
            .collect::<Result<Vec<f64>>>()?;
        let t_grid = if t_grid.is_empty() { vec![1.0] } else { t_grid };
        let betas = p
            .all("beta")
            .iter()
            .map(|v| parse_f64("beta", v))
            .collect::<Result<Vec<f64>>>()?;
        let betas = if betas.is_empty() { vec![1.0] } else { betas };
        if betas.iter().any(|&b| b <= 0.0) {
            return err("beta must be positive");
        }
        let taus = p
            .all("tau")
            .iter()
            .map(|v| parse_f64("tau", v))
            .collect::<Result<Vec<f64>>>()?;
        let taus = if taus.is_empty() { vec![0.5] } else { taus };

        let mut suites = Vec::new();
        for s in p.all("suite") {
            suites.push(match s {
                "evolve" => Suite::Evolve,
                "certify" => Suite::Certify,
                "membership" => Suite::Membership,
                "gibbs" => Suite::Gibbs,
                other => return err(format!("unknown suite {other}")),
            });
        }

        let cauchy_tol = p
            .one("cauchy_tol")?
            .map(|v| parse_f64("cauchy_tol", v))
            .transpose()?
            .unwrap_or(1e-6);
        let window = p
            .one("window")?
            .map(|v| parse_usize("window", v))
            .transpose()?
            .unwrap_or(3);
        let identity_tol = p
            .one("identity_tol")?
            .map(|v| parse_f64("identity_tol", v))
            .transpose()?
            .unwrap_or(1e-10);
        let pairing = match p.one("pairing")? {
            None | Some("all_pairs") => Pairing::AllPairs,
            Some("adjacent") => Pairing::Adjacent,
            Some(other) => return err(format!("unknown pairing {other}")),
        };
        let panels = p
            .one("panels")?
            .map(|v| parse_usize("panels", v))
            .transpose()?
            .unwrap_or(200);
        let taylor_terms = p
            .one("taylor_terms")?
            .map(|v| parse_usize("taylor_terms", v))
            .transpose()?
            .unwrap_or(40);
        let samples = p
            .one("samples")?
            .map(|v| parse_usize("samples", v))
            .transpose()?
            .unwrap_or(10);
        let out_dir = PathBuf::from(p.one("out_dir")?.unwrap_or("results"));
        let seed = p
            .one("seed")?
            .map(|v| {
                v.parse::<u64>()
                    .map_err(|_| ConfigError(format!("seed: not a u64: {v}")))
            })
            .transpose()?
            .unwrap_or(42);

        let cfg = RunConfig {
            model,
            h_rule,
            levels,
            sites,
            onsite,
            hopping,
            plan,
            regime,
            observable,
            families,
            gammas,
            ks,
            include_weak,
            n,
            cutoffs,
            t_grid,
            betas,
            taus,
            suites,
            cauchy_tol,
            window,
            identity_tol,
            pairing,
            panels,
            taylor_terms,
            samples,
            out_dir,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// The full seminorm grid: families x gammas x k, plus the two-sided
    /// weights when requested.
    pub fn grid(&self) -> Vec<SeminormSpec> {
        let mut out = Vec::new();
        for &fam in &self.families {
            for &g in &self.gammas {
                let f = TestFunction::new(fam, g).expect("validated");
                for &k in &self.ks {
                    out.push(SeminormSpec::graph(f, k));
                }
                if self.include_weak {
                    out.push(SeminormSpec::weak(f));
                }
            }
        }
        out
    }

    pub fn test_functions(&self) -> Vec<TestFunction> {
        let mut out = Vec::new();
        for &fam in &self.families {
            for &g in &self.gammas {
                out.push(TestFunction::new(fam, g).expect("validated"));
            }
        }
        out
    }

    pub fn k_max(&self) -> u32 {
        self.ks.iter().copied().max().unwrap_or(0)
    }

    fn validate(&self) -> Result<()> {
        if self.suites.is_empty() {
            return err("nothing to run: no suite selected");
        }
        if self.cutoffs.len() < self.window + 2 {
            return err(format!(
                "need at least window+2 = {} cutoffs, got {}",
                self.window + 2,
                self.cutoffs.len()
            ));
        }
        match self.model {
            ModelChoice::FermionLattice => {
                let max = self.cutoffs.iter().max().unwrap();
                if *max >= self.sites {
                    return err(format!(
                        "cutoff {max} exceeds last site index {}",
                        self.sites - 1
                    ));
                }
            }
            _ => {
                // ambient truncation rule: the top level must be invisible
                // under every configured weight at the largest power
                let fs = self.test_functions();
                let max_cut = *self.cutoffs.iter().max().unwrap();
                if let Some(levels) = self.levels {
                    if levels <= max_cut {
                        return err(format!(
                            "levels {levels} must exceed the largest cutoff {max_cut}"
                        ));
                    }
                    let spec = taulab_core::spectral::make_spectrum(
                        SpectrumKind::ShiftedInteger,
                        levels,
                        taulab_core::spectral::Degeneracy::Simple,
                    )
                    .map_err(|e| ConfigError(e.to_string()))?;
                    if !taulab_core::spectral::truncation_ok(&spec, &fs, self.k_max(), self.n) {
                        return err(format!(
                            "levels {levels} violates the truncation rule for k_max {} and n {}: \
                             the top level is still visible under the weakest weight",
                            self.k_max(),
                            self.n
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Ambient level count: configured, or the smallest satisfying the
    /// truncation rule.
    pub fn ambient_levels(&self) -> Result<usize> {
        if let Some(l) = self.levels {
            return Ok(l);
        }
        let max_cut = *self.cutoffs.iter().max().unwrap();
        taulab_core::spectral::choose_level_count(
            &SpectrumKind::ShiftedInteger,
            &self.test_functions(),
            self.k_max(),
            self.n,
            max_cut + 2,
        )
        .map_err(|e| ConfigError(e.to_string()))
    }
}
