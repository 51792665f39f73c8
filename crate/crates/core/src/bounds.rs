//! Numerical checks of the third-order obstruction: the maximum of the
//! interleaving sum `S` over the feasible simplex slice, per-schedule audits,
//! and the stage-count calculator that follows from the per-step `Δt³` floor.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schedules::Word;
use crate::series::{interleaving_profile, s_value};
use crate::tol;

/// Largest block count searched exhaustively on a grid.
pub const MAX_GRID_N: usize = 9;

/// Largest block count accepted at all.
pub const MAX_N: usize = 64;

const POLISH_STOP: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Lemma2Method {
    /// The best grid point survived polishing unchanged.
    Grid,
    /// Local polishing improved on the starting point.
    RefinedLocal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma2Result {
    #[serde(rename = "N")]
    pub n: usize,
    pub max_s: f64,
    pub argmax: Vec<f64>,
    pub method: Lemma2Method,
    pub grid_steps: usize,
    /// Best value on the grid before polishing; `None` above [`MAX_GRID_N`].
    pub grid_max: Option<f64>,
}

impl Lemma2Result {
    pub fn below_one_third(&self) -> bool {
        self.max_s < 1.0 / 3.0
    }
}

/// Default grid resolution for `n` blocks.
pub fn default_grid_steps(n: usize) -> usize {
    if n <= 6 {
        40
    } else {
        20
    }
}

/// Maximizes `S(x)` over `x ∈ [0,1]^n`, `Σx = 2`.
///
/// For `n ≤ 9` every grid point with spacing `2 / grid_steps` is scored (in
/// parallel over the first coordinate), then the best point is polished by
/// pairwise mass transfer. Larger `n` skip the grid and polish from the
/// uniform point. Ties go to the lexicographically smallest point, so the
/// result does not depend on thread scheduling.
pub fn lemma2_max(n: usize, grid_steps: usize) -> Result<Lemma2Result> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 blocks, got {n}")));
    }
    if n > MAX_N {
        return Err(Error::InvalidArgument(format!(
            "at most {MAX_N} blocks are supported, got {n}"
        )));
    }
    if grid_steps < 2 {
        return Err(Error::InvalidArgument("grid needs at least 2 steps".into()));
    }
    let (start, grid_max) = if n <= MAX_GRID_N {
        let (s, x) = grid_search(n, grid_steps);
        (x, Some(s))
    } else {
        (vec![2.0 / n as f64; n], None)
    };
    let start_s = s_value(&start);
    let (argmax, max_s) = polish(start);
    let method = if max_s > start_s {
        Lemma2Method::RefinedLocal
    } else {
        Lemma2Method::Grid
    };
    Ok(Lemma2Result {
        n,
        max_s: max_s.max(start_s),
        argmax,
        method,
        grid_steps,
        grid_max,
    })
}

fn better(a: &(f64, Vec<f64>), b: &(f64, Vec<f64>)) -> bool {
    a.0 > b.0 || (a.0 == b.0 && a.1 < b.1)
}

fn grid_search(n: usize, steps: usize) -> (f64, Vec<f64>) {
    let cap = steps / 2;
    let h = 2.0 / steps as f64;
    (0..=cap.min(steps))
        .into_par_iter()
        .map(|first| {
            let mut counts = vec![0usize; n];
            counts[0] = first;
            let mut best = (f64::NEG_INFINITY, Vec::new());
            enumerate(&mut counts, 1, steps - first, cap, h, &mut best);
            best
        })
        .reduce(
            || (f64::NEG_INFINITY, Vec::new()),
            |a, b| if better(&b, &a) { b } else { a },
        )
}

fn enumerate(counts: &mut [usize], pos: usize, remaining: usize, cap: usize, h: f64, best: &mut (f64, Vec<f64>)) {
    let n = counts.len();
    if pos == n - 1 {
        if remaining > cap {
            return;
        }
        counts[pos] = remaining;
        let x: Vec<f64> = counts.iter().map(|&k| k as f64 * h).collect();
        let cand = (s_value(&x), x);
        if better(&cand, best) {
            *best = cand;
        }
        return;
    }
    let slots_after = n - pos - 1;
    let lo = remaining.saturating_sub(slots_after * cap);
    for k in lo..=cap.min(remaining) {
        counts[pos] = k;
        enumerate(counts, pos + 1, remaining - k, cap, h, best);
    }
}

/// Pairwise transfer ascent: for each ordered pair `(p, q)`, move mass `δ`
/// from `q` to `p`. `S` is multilinear, so along that line it is a quadratic
/// in `δ` and the best feasible `δ` is found in closed form.
fn polish(mut x: Vec<f64>) -> (Vec<f64>, f64) {
    let n = x.len();
    let mut current = s_value(&x);
    for _ in 0..10_000 {
        let before = current;
        for p in 0..n {
            for q in 0..n {
                if p == q {
                    continue;
                }
                let lo = (-x[p]).max(x[q] - 1.0);
                let hi = (1.0 - x[p]).min(x[q]);
                if hi - lo <= 0.0 {
                    continue;
                }
                let along = |d: f64| {
                    let mut y = x.clone();
                    y[p] += d;
                    y[q] -= d;
                    s_value(&y)
                };
                let (f0, fp, fm) = (current, along(1.0), along(-1.0));
                let a = 0.5 * (fp + fm) - f0;
                let b = 0.5 * (fp - fm);
                let mut cands = vec![lo, hi];
                if a < 0.0 {
                    cands.push((-b / (2.0 * a)).clamp(lo, hi));
                }
                let (d, val) =
                    cands
                        .into_iter()
                        .map(|d| (d, along(d)))
                        .fold((0.0, f0), |acc, c| if c.1 > acc.1 { c } else { acc });
                if val > current {
                    x[p] = (x[p] + d).clamp(0.0, 1.0);
                    x[q] = (x[q] - d).clamp(0.0, 1.0);
                    current = s_value(&x);
                }
            }
        }
        if current - before < POLISH_STOP {
            break;
        }
    }
    (x, current)
}

/// `(1/3)(1 - 1/N²)`, the value of `S` at the uniform point for odd `N`.
pub fn lemma2_uniform_value(n: usize) -> Result<f64> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("closed form needs odd N >= 3, got {n}")));
    }
    let nf = n as f64;
    Ok((1.0 - 1.0 / (nf * nf)) / 3.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    /// Totals match; the cross coefficient falls short of 1/3 by `gap`.
    Obstructed,
    /// A per-term total differs from 1, so the error is already first order
    /// in the step.
    Mistimed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleAudit {
    /// One-based term indices.
    pub pair: (usize, usize),
    pub normalized: bool,
    pub alpha_sum: f64,
    pub beta_sum: f64,
    pub s: f64,
    pub gap: f64,
    pub verdict: Verdict,
}

/// Audits the pair `(a, b)` (zero-based) of `w` after dividing durations by
/// `dt_unit`.
pub fn audit_schedule(w: &Word<f64>, a: usize, b: usize, dt_unit: f64) -> Result<ScheduleAudit> {
    if !(dt_unit > 0.0 && dt_unit.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "dt_unit must be positive, got {dt_unit}"
        )));
    }
    let scaled = w.rescaled(dt_unit)?;
    let profile = interleaving_profile(&scaled, a, b)?;
    let totals = scaled.term_totals(a.max(b) + 1);
    let (alpha_sum, beta_sum) = (totals[a], totals[b]);
    let normalized =
        (alpha_sum - 1.0).abs() <= tol::NORMALIZED_TOTAL && (beta_sum - 1.0).abs() <= tol::NORMALIZED_TOTAL;
    let s = s_value(&profile.x);
    Ok(ScheduleAudit {
        pair: (a + 1, b + 1),
        normalized,
        alpha_sum,
        beta_sum,
        s,
        gap: 1.0 / 3.0 - s,
        verdict: if normalized {
            Verdict::Obstructed
        } else {
            Verdict::Mistimed
        },
    })
}

/// Smallest stage count `K` with `c t³ / K² ≤ eps`.
pub fn min_exponentials(t: f64, eps: f64, c: f64) -> Result<u64> {
    for (name, v) in [("t", t), ("eps", eps), ("c", c)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "{name} must be positive and finite, got {v}"
            )));
        }
    }
    let need = c * t.powi(3);
    let fits = |k: u64| need / (k as f64 * k as f64) <= eps;
    let mut k = (need / eps).sqrt().ceil().max(1.0) as u64;
    while !fits(k) {
        k += 1;
    }
    while k > 1 && fits(k - 1) {
        k -= 1;
    }
    Ok(k)
}

/// `Σ t_j³`.
pub fn cube_sum(parts: &[f64]) -> f64 {
    parts.iter().map(|t| t * t * t).sum()
}

/// `t³ / K²`: the minimum of [`cube_sum`] over splits of `t` into `K` parts.
pub fn equal_split_cube_sum(t: f64, k: usize) -> f64 {
    t.powi(3) / (k * k) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedules::{strang_word, trotter_word, StrangForm};
    use proptest::prelude::*;

    #[test]
    fn three_blocks() {
        let r = lemma2_max(3, 40).unwrap();
        assert!((r.max_s - 8.0 / 27.0).abs() < 1e-4, "{r:?}");
        for x in &r.argmax {
            assert!((x - 2.0 / 3.0).abs() < 1e-3);
        }
    }

    #[test]
    fn five_blocks_hits_uniform_value() {
        let r = lemma2_max(5, 40).unwrap();
        assert!((r.max_s - 0.32).abs() < 1e-4, "{r:?}");
        assert!((r.argmax.iter().sum::<f64>() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn even_and_large_stay_below_one_third() {
        for n in [4, 6] {
            let r = lemma2_max(n, default_grid_steps(n)).unwrap();
            assert!(r.max_s < 1.0 / 3.0 - 1e-6, "{r:?}");
        }
        let big = lemma2_max(15, 20).unwrap();
        assert!(big.grid_max.is_none());
        assert!((big.max_s - lemma2_uniform_value(15).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(lemma2_max(2, 40).is_err());
        assert!(lemma2_uniform_value(4).is_err());
    }

    #[test]
    fn grid_is_deterministic() {
        assert_eq!(lemma2_max(5, 20).unwrap(), lemma2_max(5, 20).unwrap());
    }

    #[test]
    fn uniform_formula() {
        assert!((lemma2_uniform_value(3).unwrap() - 8.0 / 27.0).abs() < 1e-15);
        assert!((lemma2_uniform_value(5).unwrap() - 8.0 / 25.0).abs() < 1e-15);
        let seven = lemma2_uniform_value(7).unwrap();
        assert!((seven - 16.0 / 49.0).abs() < 1e-15);
        assert!((s_value(&[2.0 / 7.0; 7]) - seven).abs() < 1e-14);
    }

    #[test]
    fn audits() {
        let strang = strang_word(2, 0.1, 1, StrangForm::Merged).unwrap();
        let a = audit_schedule(&strang, 0, 1, 0.1).unwrap();
        assert_eq!(a.verdict, Verdict::Obstructed);
        assert!((a.s - 0.25).abs() < 1e-12 && (a.gap - 1.0 / 12.0).abs() < 1e-12);
        let t = audit_schedule(&trotter_word(2, 1.0, 1).unwrap(), 0, 1, 1.0).unwrap();
        assert_eq!((t.s, t.gap), (0.0, 1.0 / 3.0));
        let short = Word::from_pairs(&[(0, 0.9), (1, 1.0)]).unwrap();
        assert_eq!(audit_schedule(&short, 0, 1, 1.0).unwrap().verdict, Verdict::Mistimed);
        assert!(audit_schedule(&short, 0, 2, 1.0).is_err());
    }

    #[test]
    fn stage_counts() {
        let base = min_exponentials(1.0, 1e-4, 1.0).unwrap();
        assert_eq!(base, 100);
        assert_eq!(min_exponentials(1.0, 0.25e-4, 1.0).unwrap(), 200);
        let doubled = min_exponentials(2.0, 1e-4, 1.0).unwrap();
        assert_eq!(doubled, (100.0 * 2f64.powf(1.5)).ceil() as u64);
        assert!(min_exponentials(0.0, 1e-4, 1.0).is_err());
        assert_eq!(cube_sum(&[0.5, 0.5]), 0.25);
        assert_eq!(cube_sum(&[0.25, 0.75]), 0.4375);
        assert_eq!(equal_split_cube_sum(1.0, 2), 0.25);
    }

    proptest! {
        #[test]
        fn equal_split_minimizes_cube_sum(raw in proptest::collection::vec(0.01f64..1.0, 1..10), t in 0.1f64..5.0) {
            let total: f64 = raw.iter().sum();
            let parts: Vec<f64> = raw.iter().map(|r| r / total * t).collect();
            prop_assert!(cube_sum(&parts) >= equal_split_cube_sum(t, parts.len()) * (1.0 - 1e-12));
        }
    }
}
