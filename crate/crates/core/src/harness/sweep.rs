use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{HamiltonianSource, RunConfig};
use super::eval::Evaluator;
use super::fit::{fit_loglog, LogLogFit};
use super::Scheme;
use crate::error::Result;
use crate::hamiltonians::TermSet;
use crate::matkernel::spectral_norm;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceInfo {
    pub d: usize,
    pub m: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_qubits: Option<usize>,
    pub seed: u64,
    pub labels: Vec<String>,
    /// Spectral norm of each term.
    pub norms: Vec<f64>,
    /// Largest pairwise commutator norm.
    pub commutator_norm: f64,
}

impl InstanceInfo {
    pub fn describe(ts: &TermSet<f64>, source: &HamiltonianSource, seed: u64) -> Self {
        Self {
            d: ts.dim(),
            m: ts.len(),
            n_qubits: match source {
                HamiltonianSource::SpinChain { n_qubits, .. } => Some(*n_qubits),
                HamiltonianSource::Random { .. } => None,
            },
            seed,
            labels: ts.labels().to_vec(),
            norms: ts.terms().iter().map(spectral_norm).collect(),
            commutator_norm: ts.max_commutator_norm(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    #[serde(rename = "K")]
    pub k: u64,
    #[serde(rename = "N")]
    pub n: u64,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub scheme: Scheme,
    pub instance: InstanceInfo,
    pub t: f64,
    /// Sorted by `K`.
    pub points: Vec<SweepPoint>,
    /// `None` when the instance is commuting.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub r2: Option<f64>,
    /// Smallest-K points left out of the fit after a preasymptotic bend.
    pub dropped_points: usize,
    /// Every error fell below the commuting floor.
    pub commuting: bool,
    /// The fit reached the configured `r2_min`.
    pub r2_ok: bool,
}

/// Error against exact evolution for each `K` in the config, then a log-log
/// fit of error against `K`.
pub fn sweep_error_vs_k(cfg: &RunConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let source = cfg.source()?;
    let ts = source.build()?;
    let instance = InstanceInfo::describe(&ts, &source, cfg.seed);
    let ev = Evaluator::new(ts, cfg.seed)?;
    let m = ev.termset().len();
    let points = cfg
        .ks
        .par_iter()
        .map(|&k| {
            Ok(SweepPoint {
                k,
                n: cfg.scheme.exponentials(m, k),
                error: ev.error(cfg.scheme, cfg.t, k)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let tol = &cfg.tolerances;
    let commuting = points.iter().all(|p| p.error < tol.commuting_floor);
    let mut result = SweepResult {
        scheme: cfg.scheme,
        instance,
        t: cfg.t,
        points,
        slope: None,
        intercept: None,
        r2: None,
        dropped_points: 0,
        commuting,
        r2_ok: false,
    };
    if commuting || result.points.len() < 3 {
        return Ok(result);
    }
    let data: Vec<(f64, f64)> = result.points.iter().map(|p| (p.k as f64, p.error)).collect();
    let mut fit = fit_loglog(&data)?;
    if tol.drop_preasymptotic && data.len() >= 5 && bends(&fit, &data, tol.r2_min, tol.bend_residual) {
        fit = fit_loglog(&data[2..])?;
        result.dropped_points = 2;
    }
    result.slope = Some(fit.slope);
    result.intercept = Some(fit.intercept);
    result.r2 = Some(fit.r2);
    result.r2_ok = fit.r2 >= tol.r2_min;
    Ok(result)
}

fn bends(fit: &LogLogFit, data: &[(f64, f64)], r2_min: f64, bend_residual: f64) -> bool {
    let &(k, e) = data.last().expect("nonempty");
    fit.r2 < r2_min || (e.ln() - fit.predict_ln(k)).abs() > bend_residual
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulatePoint {
    #[serde(rename = "K")]
    pub k: u64,
    #[serde(rename = "N")]
    pub n: u64,
    pub error: f64,
    pub mean_error: f64,
    pub panel_errors: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulateReport {
    pub scheme: Scheme,
    pub instance: InstanceInfo,
    pub t: f64,
    pub points: Vec<SimulatePoint>,
}

/// Per-state errors for each `K`, without fitting.
pub fn simulate(cfg: &RunConfig) -> Result<SimulateReport> {
    cfg.validate()?;
    let source = cfg.source()?;
    let ts = source.build()?;
    let instance = InstanceInfo::describe(&ts, &source, cfg.seed);
    let ev = Evaluator::new(ts, cfg.seed)?;
    let m = ev.termset().len();
    let points = cfg
        .ks
        .par_iter()
        .map(|&k| {
            let panel_errors = ev.panel_errors(cfg.scheme, cfg.t, k)?;
            Ok(SimulatePoint {
                k,
                n: cfg.scheme.exponentials(m, k),
                error: panel_errors.iter().copied().fold(0.0, f64::max),
                mean_error: panel_errors.iter().sum::<f64>() / panel_errors.len() as f64,
                panel_errors,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SimulateReport {
        scheme: cfg.scheme,
        instance,
        t: cfg.t,
        points,
    })
}
