use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::Scheme;
use crate::error::{Error, Result};
use crate::hamiltonians::{random_termset, spin_chain_termset, TermSet, RNG_NAME};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Couplings {
    pub jx: f64,
    pub jz: f64,
    pub hz: f64,
}

impl Default for Couplings {
    fn default() -> Self {
        Self {
            jx: 1.0,
            jz: 1.0,
            hz: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Minimum coefficient of determination for a slope verdict.
    #[serde(default = "default_r2_min")]
    pub r2_min: f64,
    /// Drop the two smallest-K points and refit when the fit bends.
    #[serde(default = "yes")]
    pub drop_preasymptotic: bool,
    /// Log-space residual at the largest K that counts as a bend.
    #[serde(default = "default_bend")]
    pub bend_residual: f64,
    /// Below this every error is treated as zero (commuting instance).
    #[serde(default = "default_commuting_floor")]
    pub commuting_floor: f64,
}

fn default_r2_min() -> f64 {
    0.98
}
fn yes() -> bool {
    true
}
fn default_bend() -> f64 {
    0.05
}
fn default_commuting_floor() -> f64 {
    1e-12
}
fn default_norm_bound() -> f64 {
    1.0
}
fn default_rng() -> String {
    RNG_NAME.to_string()
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            r2_min: default_r2_min(),
            drop_preasymptotic: true,
            bend_residual: default_bend(),
            commuting_floor: default_commuting_floor(),
        }
    }
}

/// Where the terms come from.
#[derive(Clone, Debug, PartialEq)]
pub enum HamiltonianSource {
    SpinChain {
        n_qubits: usize,
        couplings: Couplings,
    },
    Random {
        d: usize,
        m: usize,
        norm_bound: f64,
        seed: u64,
    },
}

impl HamiltonianSource {
    pub fn build(&self) -> Result<TermSet<f64>> {
        match *self {
            HamiltonianSource::SpinChain { n_qubits, couplings } => {
                spin_chain_termset(n_qubits, couplings.jx, couplings.jz, couplings.hz)
            }
            HamiltonianSource::Random { d, m, norm_bound, seed } => random_termset(d, m, norm_bound, seed),
        }
    }
}

/// One sweep. Setting `n_qubits` selects the spin chain (then `d` and `m`,
/// if given, must agree with it); otherwise `d` and `m` select a random
/// Gaussian instance drawn from `seed`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scheme: Scheme,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_qubits: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub couplings: Option<Couplings>,
    pub t: f64,
    #[serde(rename = "K")]
    pub ks: Vec<u64>,
    pub seed: u64,
    #[serde(default = "default_norm_bound")]
    pub norm_bound: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default = "default_rng")]
    pub rng: String,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl RunConfig {
    /// Spin-chain preset on `n_qubits` sites with unit couplings.
    pub fn spin_chain(scheme: Scheme, n_qubits: usize, t: f64, ks: Vec<u64>, seed: u64) -> Self {
        Self {
            scheme,
            d: None,
            m: None,
            n_qubits: Some(n_qubits),
            couplings: None,
            t,
            ks,
            seed,
            norm_bound: default_norm_bound(),
            output: None,
            rng: default_rng(),
            tolerances: Tolerances::default(),
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.rng != RNG_NAME {
            return bad(format!(
                "unsupported rng {:?}; only {RNG_NAME:?} is available",
                self.rng
            ));
        }
        if !(self.t > 0.0 && self.t.is_finite()) {
            return bad(format!("t must be positive, got {}", self.t));
        }
        if self.ks.is_empty() {
            return bad("K list is empty".into());
        }
        if self.ks[0] == 0 || self.ks.windows(2).any(|w| w[0] >= w[1]) {
            return bad("K list must be positive and strictly increasing".into());
        }
        if !(self.tolerances.r2_min > 0.0 && self.tolerances.r2_min <= 1.0) {
            return bad("r2_min must lie in (0, 1]".into());
        }
        self.source().map(|_| ())
    }

    pub fn source(&self) -> Result<HamiltonianSource> {
        match self.n_qubits {
            Some(n) => {
                if self.m.is_some_and(|m| m != 2) {
                    return Err(Error::InvalidConfig("the spin chain has m = 2 terms".into()));
                }
                if !(2..=6).contains(&n) {
                    return Err(Error::InvalidConfig(format!("n_qubits must be 2..=6, got {n}")));
                }
                if self.d.is_some_and(|d| d != 1 << n) {
                    return Err(Error::InvalidConfig(format!("d must equal 2^n_qubits = {}", 1 << n)));
                }
                Ok(HamiltonianSource::SpinChain {
                    n_qubits: n,
                    couplings: self.couplings.unwrap_or_default(),
                })
            }
            None => match (self.d, self.m) {
                (Some(d), Some(m)) => Ok(HamiltonianSource::Random {
                    d,
                    m,
                    norm_bound: self.norm_bound,
                    seed: self.seed,
                }),
                _ => Err(Error::InvalidConfig("set n_qubits, or both d and m".into())),
            },
        }
    }
}
