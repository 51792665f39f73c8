//! Experiment driver: convergence sweeps, slope fits, error-bound campaigns,
//! stage-count scaling checks and their CSV/JSON outputs.
//!
//! Everything here runs in `f64`. Results depend only on the configuration
//! (including seeds); parallel evaluation never changes a number.

mod campaign;
mod config;
mod eval;
mod fit;
mod io;
mod scaling;
mod sweep;

use serde::{Deserialize, Serialize};

pub use campaign::{
    lemma1_campaign, stage_orders, CampaignReport, CampaignViolation, StageOrderPoint, StageOrderReport,
};
pub use config::{Couplings, HamiltonianSource, RunConfig, Tolerances};
pub use eval::{input_panel, Evaluator, PANEL_SIZE};
pub use fit::{fit_loglog, LogLogFit};
pub use io::{write_json, write_points_csv, write_sweep};
pub use scaling::{scaling_cross_check, ExponentFit, ScalingCell, ScalingConfig, ScalingReport};
pub use sweep::{simulate, sweep_error_vs_k, InstanceInfo, SimulatePoint, SimulateReport, SweepPoint, SweepResult};

/// The four product-formula schemes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Trotter,
    Strang,
    /// `mK` stages, each a single uniformly chosen term.
    Alg1,
    /// `K` stages, each a uniformly random ordering of all terms.
    Alg2,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Trotter, Scheme::Strang, Scheme::Alg1, Scheme::Alg2];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Trotter => "trotter",
            Scheme::Strang => "strang",
            Scheme::Alg1 => "alg1",
            Scheme::Alg2 => "alg2",
        }
    }

    pub fn is_randomized(self) -> bool {
        matches!(self, Scheme::Alg1 | Scheme::Alg2)
    }

    /// Expected order of the global error in the step size.
    pub fn order(self) -> u32 {
        match self {
            Scheme::Trotter | Scheme::Alg1 => 1,
            Scheme::Strang | Scheme::Alg2 => 2,
        }
    }

    /// Exponentials applied for `k` segments over `m` terms. Strang counts
    /// the merged form, where adjacent half steps of the same term fuse.
    pub fn exponentials(self, m: usize, k: u64) -> u64 {
        let m = m as u64;
        match self {
            Scheme::Strang => k * (2 * m - 2) + 1,
            _ => m * k,
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Scheme {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| crate::Error::InvalidArgument(format!("unknown scheme {s:?}")))
    }
}
