use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Scheme;
use crate::channels::{exact_evolution, lemma1_report, stage_deviation, BoundReport};
use crate::error::{Error, Result};
use crate::hamiltonians::{random_termset, TermSet, TermSetDoc};
use crate::matkernel::{DensityMatrix, Matrix};
use crate::schedules::{
    alg1_group_mixture, alg1_stage_mixture, alg2_stage_mixture, strang_word, trotter_word, StrangForm, UnitaryMixture,
};
use crate::tol;

const DIMS: [usize; 3] = [2, 4, 8];
const MAX_DT: f64 = 0.2;
const CONTROL_EVERY: usize = 10;

/// A failed instance, with everything needed to replay it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignViolation {
    pub index: usize,
    pub stage: String,
    pub input: String,
    pub report: BoundReport,
    /// `final distance - bound`.
    pub excess: f64,
    pub termset: TermSetDoc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub n_instances: usize,
    pub seed: u64,
    pub violations: Vec<CampaignViolation>,
    /// Largest `final distance - bound` seen (negative when all dominated).
    pub max_excess: f64,
    pub controls: usize,
    /// Every control had observed and bound both below the dominance tolerance.
    pub controls_exact: bool,
    pub mixed_inputs: usize,
    pub pure_inputs: usize,
    /// Best `observed / mean_dev` over noncontrol instances.
    pub best_mean_ratio: f64,
    /// Best `observed / sq_dev` over noncontrol instances.
    pub best_sq_ratio: f64,
}

impl CampaignReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.controls_exact
    }
}

struct Outcome {
    report: BoundReport,
    control: bool,
    mixed: bool,
    violation: Option<CampaignViolation>,
    excess: f64,
}

fn gaussian_vec(d: usize, rng: &mut ChaCha20Rng) -> Vec<num_complex::Complex<f64>> {
    (0..d)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            num_complex::Complex::new(re, im)
        })
        .collect()
}

fn random_density(d: usize, rng: &mut ChaCha20Rng) -> Result<DensityMatrix<f64>> {
    let g = Matrix::from_fn(d, d, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        num_complex::Complex::new(re, im)
    });
    let p = &g * &g.adjoint();
    let tr = p.trace().re;
    DensityMatrix::new(p.scale_real(1.0 / tr).hermitian_part())
}

fn commuting_termset(d: usize, m: usize, rng: &mut ChaCha20Rng) -> Result<TermSet<f64>> {
    let terms = (0..m)
        .map(|_| {
            let diag: Vec<_> = (0..d)
                .map(|_| num_complex::Complex::new(rng.random_range(-1.0..1.0), 0.0))
                .collect();
            Matrix::diag(&diag)
        })
        .collect();
    TermSet::from_terms(terms)
}

fn run_instance(index: usize, seed: u64) -> Result<Outcome> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let d = DIMS[rng.random_range(0..DIMS.len())];
    let m = rng.random_range(2..=3usize);
    let dt = rng.random_range(0.01..=MAX_DT);
    let k = [1u64, 1, 2, 4][rng.random_range(0..4)];
    let control = index % CONTROL_EVERY == CONTROL_EVERY - 1;

    let (ts, stage, mix): (TermSet<f64>, &str, UnitaryMixture<f64>) = if control {
        let ts = commuting_termset(d, m, &mut rng)?;
        (ts, "control", UnitaryMixture::single(trotter_word(m, dt, 1)?))
    } else {
        let ts = random_termset(d, m, 1.0, rng.random())?;
        let (stage, mix) = match rng.random_range(0..5) {
            0 => ("alg1_stage", alg1_stage_mixture(m, dt)?),
            1 => ("alg1_group", alg1_group_mixture(m, dt)?),
            2 => ("alg2_stage", alg2_stage_mixture(m, dt)?),
            3 => ("trotter_word", UnitaryMixture::single(trotter_word(m, dt, 1)?)),
            _ => (
                "strang_word",
                UnitaryMixture::single(strang_word(m, dt, 1, StrangForm::Merged)?),
            ),
        };
        (ts, stage, mix)
    };
    let psi0 = DensityMatrix::pure(&gaussian_vec(d, &mut rng))?;
    let (rho0, input) = if control {
        (psi0.clone(), "pure-same")
    } else {
        match rng.random_range(0..3) {
            0 => (psi0.clone(), "pure-same"),
            1 => (DensityMatrix::pure(&gaussian_vec(d, &mut rng))?, "pure-other"),
            _ => {
                let w = rng.random_range(0.05..0.5);
                (psi0.mix(&random_density(d, &mut rng)?, w)?, "mixed")
            }
        }
    };
    let t = dt * k as f64;
    let mut report = lemma1_report(&ts, &mix, k, t, &rho0, &psi0)?;
    report.meta.seed = Some(seed);
    let final_dist = report.input_dist + report.raw_observed;
    let excess = final_dist - report.bound;
    let violation = (excess > tol::DOMINANCE || !report.dominated()).then(|| CampaignViolation {
        index,
        stage: stage.to_string(),
        input: input.to_string(),
        report: report.clone(),
        excess,
        termset: ts.to_doc(),
    });
    Ok(Outcome {
        report,
        control,
        mixed: input == "mixed",
        violation,
        excess,
    })
}

/// Evaluates the mixed-unitary error bound on `n_instances` seeded random
/// draws and checks that the final trace distance never exceeds it.
///
/// Draws cover `d ∈ {2, 4, 8}`, two or three terms, `dt ≤ 0.2`, one to four
/// stages, single-term, grouped and permutation stages as well as
/// deterministic Trotter and Strang words, and pure or mixed inputs. Every
/// tenth instance is a commuting control where the Trotter word is exact.
pub fn lemma1_campaign(n_instances: usize, seed: u64) -> Result<CampaignReport> {
    let outcomes = (0..n_instances)
        .into_par_iter()
        .map(|i| run_instance(i, seed))
        .collect::<Result<Vec<_>>>()?;
    let mut report = CampaignReport {
        n_instances,
        seed,
        violations: Vec::new(),
        max_excess: f64::NEG_INFINITY,
        controls: 0,
        controls_exact: true,
        mixed_inputs: 0,
        pure_inputs: 0,
        best_mean_ratio: 0.0,
        best_sq_ratio: 0.0,
    };
    for o in outcomes {
        report.max_excess = report.max_excess.max(o.excess);
        if o.mixed {
            report.mixed_inputs += 1;
        } else {
            report.pure_inputs += 1;
        }
        if o.control {
            report.controls += 1;
            report.controls_exact &= o.report.bound <= tol::DOMINANCE && o.report.observed <= tol::DOMINANCE;
        } else {
            let r = &o.report;
            if r.mean_dev > 0.0 {
                report.best_mean_ratio = report.best_mean_ratio.max(r.observed / r.mean_dev);
            }
            if r.sq_dev > 0.0 {
                report.best_sq_ratio = report.best_sq_ratio.max(r.observed / r.sq_dev);
            }
        }
        report.violations.extend(o.violation);
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageOrderPoint {
    pub dt: f64,
    pub mean_dev: f64,
    pub sq_dev: f64,
    /// `2 mean_dev + sq_dev`.
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageOrderReport {
    pub scheme: Scheme,
    pub points: Vec<StageOrderPoint>,
    /// `bound(dt_i) / bound(dt_{i+1})` for consecutive step sizes.
    pub ratios: Vec<f64>,
}

/// Single-stage error bound against `e^{-iH dt}` for each step size.
///
/// The randomized single-term scheme is measured on its `m`-stage group,
/// the unit that approximates one step of the full Hamiltonian.
pub fn stage_orders(ts: &TermSet<f64>, scheme: Scheme, dts: &[f64]) -> Result<StageOrderReport> {
    let m = ts.len();
    let points = dts
        .iter()
        .map(|&dt| {
            let mix = match scheme {
                Scheme::Alg1 => alg1_group_mixture(m, dt)?,
                Scheme::Alg2 => alg2_stage_mixture(m, dt)?,
                Scheme::Trotter => UnitaryMixture::single(trotter_word(m, dt, 1)?),
                Scheme::Strang => UnitaryMixture::single(strang_word(m, dt, 1, StrangForm::Merged)?),
            };
            let dev = stage_deviation(ts, &mix, &exact_evolution(ts, dt)?)?;
            Ok(StageOrderPoint {
                dt,
                mean_dev: dev.mean_dev,
                sq_dev: dev.sq_dev,
                bound: dev.bound(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if points.iter().any(|p| !(p.bound > 0.0)) {
        return Err(Error::InvalidArgument("stage bound vanished; the terms commute".into()));
    }
    let ratios = points.windows(2).map(|w| w[0].bound / w[1].bound).collect();
    Ok(StageOrderReport { scheme, points, ratios })
}
