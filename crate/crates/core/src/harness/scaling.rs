use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Couplings, HamiltonianSource};
use super::eval::Evaluator;
use super::fit::fit_loglog;
use super::sweep::InstanceInfo;
use super::Scheme;
use crate::error::{Error, Result};

/// Stage-count scaling experiment on the spin chain.
///
/// First- and second-order schemes get separate time grids: the leading
/// Trotter error stops growing like `t²` once `t` exceeds the inverse
/// commutator scale, while the `t^{3/2}` law of the second-order schemes
/// only emerges at long times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScalingConfig {
    pub n_qubits: usize,
    pub couplings: Couplings,
    pub seed: u64,
    pub schemes: Vec<Scheme>,
    /// Error target for the time sweeps.
    pub eps_for_t: f64,
    pub first_order_t: Vec<f64>,
    pub second_order_t: Vec<f64>,
    /// Total time for the error-target sweeps.
    pub t_for_eps: f64,
    pub first_order_eps: Vec<f64>,
    pub second_order_eps: Vec<f64>,
    pub k_cap: u64,
    pub t_exponent_tol: f64,
    pub eps_exponent_tol: f64,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self {
            n_qubits: 2,
            couplings: Couplings::default(),
            seed: 1,
            schemes: Scheme::ALL.to_vec(),
            eps_for_t: 1e-4,
            first_order_t: vec![0.05, 0.1, 0.2, 0.4],
            second_order_t: vec![4.0, 8.0, 16.0, 32.0],
            t_for_eps: 1.0,
            first_order_eps: vec![1e-2, 1e-3, 1e-4],
            second_order_eps: vec![1e-3, 1e-4, 1e-5],
            k_cap: 1 << 22,
            t_exponent_tol: 0.2,
            eps_exponent_tol: 0.1,
        }
    }
}

impl ScalingConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: &[f64]| v.iter().all(|x| *x > 0.0 && x.is_finite());
        let grids = [
            &self.first_order_t,
            &self.second_order_t,
            &self.first_order_eps,
            &self.second_order_eps,
        ];
        if grids.iter().any(|g| g.len() < 3 || !positive(g)) {
            return Err(Error::InvalidConfig(
                "every grid needs at least 3 positive values".into(),
            ));
        }
        if !(self.eps_for_t > 0.0 && self.t_for_eps > 0.0 && self.k_cap >= 1) {
            return Err(Error::InvalidConfig(
                "eps_for_t, t_for_eps and k_cap must be positive".into(),
            ));
        }
        if self.schemes.is_empty() {
            return Err(Error::InvalidConfig("no schemes selected".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// `N` against `t` at fixed error target.
    T,
    /// `N` against `1/ε` at fixed time.
    InvEps,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingCell {
    pub scheme: Scheme,
    pub axis: Axis,
    pub t: f64,
    pub eps: f64,
    /// Smallest stage count meeting `eps`; `None` if the cap was hit.
    #[serde(rename = "K")]
    pub k: Option<u64>,
    #[serde(rename = "N")]
    pub n: Option<u64>,
    pub error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub scheme: Scheme,
    pub axis: Axis,
    pub exponent: Option<f64>,
    pub expected: f64,
    pub tolerance: f64,
    pub r2: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub instance: InstanceInfo,
    pub cells: Vec<ScalingCell>,
    pub fits: Vec<ExponentFit>,
    /// Median of `ε K² / t³` over the Strang cells: the instance-specific
    /// constant for [`min_exponentials`](crate::bounds::min_exponentials).
    pub strang_calibration: Option<f64>,
}

impl ScalingReport {
    pub fn passed(&self) -> bool {
        self.fits.iter().all(|f| f.pass)
    }
}

/// Smallest `K ≤ cap` with `error(K) ≤ eps`, by doubling then bisection.
fn smallest_k(ev: &Evaluator, scheme: Scheme, t: f64, eps: f64, cap: u64) -> Result<Option<(u64, f64)>> {
    let mut hi = 1u64;
    let mut hi_err = ev.error(scheme, t, hi)?;
    while hi_err > eps {
        if hi >= cap {
            return Ok(None);
        }
        hi = (hi * 2).min(cap);
        hi_err = ev.error(scheme, t, hi)?;
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let e = ev.error(scheme, t, mid)?;
        if e <= eps {
            hi = mid;
            hi_err = e;
        } else {
            lo = mid;
        }
    }
    Ok(Some((hi, hi_err)))
}

/// Finds the minimal stage count for each `(scheme, t, ε)` cell and fits
/// the exponents of `N` in `t` and in `1/ε`.
pub fn scaling_cross_check(cfg: &ScalingConfig) -> Result<ScalingReport> {
    cfg.validate()?;
    let source = HamiltonianSource::SpinChain {
        n_qubits: cfg.n_qubits,
        couplings: cfg.couplings,
    };
    let ts = source.build()?;
    let instance = InstanceInfo::describe(&ts, &source, cfg.seed);
    let ev = Evaluator::new(ts, cfg.seed)?;
    let m = ev.termset().len();

    let mut jobs = Vec::new();
    for &scheme in &cfg.schemes {
        let (ts_grid, eps_grid) = if scheme.order() == 1 {
            (&cfg.first_order_t, &cfg.first_order_eps)
        } else {
            (&cfg.second_order_t, &cfg.second_order_eps)
        };
        jobs.extend(ts_grid.iter().map(|&t| (scheme, Axis::T, t, cfg.eps_for_t)));
        jobs.extend(eps_grid.iter().map(|&eps| (scheme, Axis::InvEps, cfg.t_for_eps, eps)));
    }
    let cells = jobs
        .par_iter()
        .map(|&(scheme, axis, t, eps)| {
            let found = smallest_k(&ev, scheme, t, eps, cfg.k_cap)?;
            Ok(ScalingCell {
                scheme,
                axis,
                t,
                eps,
                k: found.map(|f| f.0),
                n: found.map(|f| scheme.exponentials(m, f.0)),
                error: found.map(|f| f.1),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut fits = Vec::new();
    for &scheme in &cfg.schemes {
        for axis in [Axis::T, Axis::InvEps] {
            let (expected, tolerance) = match (scheme.order(), axis) {
                (1, Axis::T) => (2.0, cfg.t_exponent_tol),
                (1, Axis::InvEps) => (1.0, cfg.eps_exponent_tol),
                (_, Axis::T) => (1.5, cfg.t_exponent_tol),
                (_, Axis::InvEps) => (0.5, cfg.eps_exponent_tol),
            };
            let selected: Vec<&ScalingCell> = cells.iter().filter(|c| c.scheme == scheme && c.axis == axis).collect();
            let data: Option<Vec<(f64, f64)>> = selected
                .iter()
                .map(|c| {
                    let x = if axis == Axis::T { c.t } else { 1.0 / c.eps };
                    c.n.map(|n| (x, n as f64))
                })
                .collect();
            let fit = data.map(|d| fit_loglog(&d)).transpose()?;
            let exponent = fit.map(|f| f.slope);
            fits.push(ExponentFit {
                scheme,
                axis,
                exponent,
                expected,
                tolerance,
                r2: fit.map(|f| f.r2),
                pass: exponent.is_some_and(|e| (e - expected).abs() <= tolerance),
            });
        }
    }

    let mut calib: Vec<f64> = cells
        .iter()
        .filter(|c| c.scheme == Scheme::Strang)
        .filter_map(|c| c.k.map(|k| c.eps * (k * k) as f64 / c.t.powi(3)))
        .collect();
    calib.sort_by(f64::total_cmp);
    let strang_calibration = (!calib.is_empty()).then(|| calib[calib.len() / 2]);

    Ok(ScalingReport {
        instance,
        cells,
        fits,
        strang_calibration,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::spin_chain_termset;

    #[test]
    fn bisection_finds_the_threshold() {
        let ev = Evaluator::new(spin_chain_termset(2, 1.0, 1.0, 1.0).unwrap(), 1).unwrap();
        let (k, e) = smallest_k(&ev, Scheme::Strang, 1.0, 1e-3, 1 << 20).unwrap().unwrap();
        assert!(e <= 1e-3);
        assert!(ev.error(Scheme::Strang, 1.0, k - 1).unwrap() > 1e-3);
        assert!(smallest_k(&ev, Scheme::Trotter, 1.0, 1e-9, 4).unwrap().is_none());
    }

    #[test]
    fn config_defaults_and_validation() {
        let cfg = ScalingConfig::from_json("{}").unwrap();
        assert_eq!(cfg, ScalingConfig::default());
        assert!(ScalingConfig::from_json(r#"{"first_order_t":[1.0]}"#).is_err());
    }
}
