use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use super::Scheme;
use crate::channels::{channel_power, exact_evolution, mixture_superoperator};
use crate::error::{Error, Result};
use crate::hamiltonians::TermSet;
use crate::matkernel::{trace_distance, DensityMatrix, HermitianEigen, Matrix};
use crate::schedules::{
    alg1_stage_mixture, alg2_stage_mixture, strang_word, trotter_word, word_unitary_from_spectra, StrangForm,
};
use crate::tol;

/// Number of pure input states the error is maximized over.
pub const PANEL_SIZE: usize = 16;

// Stream id keeping the panel independent of any instance drawn from the same seed.
const PANEL_STREAM: u64 = 0x0070_616e_656c;

/// `PANEL_SIZE` Haar-like pure states (normalized complex Gaussian vectors).
pub fn input_panel(dim: usize, seed: u64) -> Result<Vec<DensityMatrix<f64>>> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(PANEL_STREAM);
    (0..PANEL_SIZE)
        .map(|_| {
            let psi: Vec<_> = (0..dim)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    num_complex::Complex::new(re, im)
                })
                .collect();
            DensityMatrix::pure(&psi)
        })
        .collect()
}

/// Exact error of a scheme against `e^{-iHt}`, maximized over the panel.
pub struct Evaluator {
    ts: TermSet<f64>,
    spectra: Vec<HermitianEigen<f64>>,
    panel: Vec<DensityMatrix<f64>>,
}

impl Evaluator {
    pub fn new(ts: TermSet<f64>, seed: u64) -> Result<Self> {
        let panel = input_panel(ts.dim(), seed)?;
        Ok(Self {
            spectra: ts.spectra(),
            ts,
            panel,
        })
    }

    pub fn termset(&self) -> &TermSet<f64> {
        &self.ts
    }

    pub fn panel(&self) -> &[DensityMatrix<f64>] {
        &self.panel
    }

    fn segment_unitary(&self, scheme: Scheme, dt: f64) -> Result<Matrix<f64>> {
        let m = self.ts.len();
        let w = match scheme {
            Scheme::Trotter => trotter_word(m, dt, 1)?,
            Scheme::Strang => strang_word(m, dt, 1, StrangForm::Palindrome)?,
            _ => unreachable!("deterministic schemes only"),
        };
        Ok(word_unitary_from_spectra(&self.spectra, self.ts.dim(), &w))
    }

    /// Trace distance to the exact output for each panel state, with `k`
    /// segments of length `t / k`.
    pub fn panel_errors(&self, scheme: Scheme, t: f64, k: u64) -> Result<Vec<f64>> {
        if k == 0 {
            return Err(Error::InvalidArgument("K must be at least 1".into()));
        }
        let dt = t / k as f64;
        let u0 = exact_evolution(&self.ts, t)?;
        let targets = self
            .panel
            .iter()
            .map(|rho| rho.conjugate(&u0))
            .collect::<Result<Vec<_>>>()?;
        let outputs: Vec<DensityMatrix<f64>> = if scheme.is_randomized() {
            let m = self.ts.len();
            let (mix, stages) = match scheme {
                Scheme::Alg1 => (alg1_stage_mixture(m, dt)?, k * m as u64),
                _ => (alg2_stage_mixture(m, dt)?, k),
            };
            let channel = channel_power(&mixture_superoperator(&self.ts, &mix)?, stages);
            self.panel
                .iter()
                .map(|rho| DensityMatrix::with_tolerance(channel.apply_raw(rho.matrix()), tol::CHANNEL_OUTPUT))
                .collect::<Result<_>>()?
        } else {
            let u = self.segment_unitary(scheme, dt)?.pow(k);
            self.panel.iter().map(|rho| rho.conjugate(&u)).collect::<Result<_>>()?
        };
        outputs
            .iter()
            .zip(&targets)
            .map(|(out, target)| trace_distance(out, target))
            .collect()
    }

    /// Maximum of [`panel_errors`](Self::panel_errors).
    pub fn error(&self, scheme: Scheme, t: f64, k: u64) -> Result<f64> {
        Ok(self.panel_errors(scheme, t, k)?.into_iter().fold(0.0, f64::max))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::spin_chain_termset;

    #[test]
    fn panel_is_seeded() {
        let a = input_panel(4, 9).unwrap();
        assert_eq!(a.len(), PANEL_SIZE);
        assert_eq!(a, input_panel(4, 9).unwrap());
        assert_ne!(a, input_panel(4, 10).unwrap());
    }

    #[test]
    fn errors_shrink_with_k_for_every_scheme() {
        let ev = Evaluator::new(spin_chain_termset(2, 1.0, 1.0, 1.0).unwrap(), 1).unwrap();
        for scheme in Scheme::ALL {
            let coarse = ev.error(scheme, 1.0, 4).unwrap();
            let fine = ev.error(scheme, 1.0, 8).unwrap();
            assert!(fine < coarse && fine > 0.0, "{scheme}: {coarse} -> {fine}");
        }
    }

    #[test]
    fn commuting_terms_are_exact_for_deterministic_and_permutation_schemes() {
        let ev = Evaluator::new(spin_chain_termset(2, 1.0, 1.0, 0.0).unwrap(), 2).unwrap();
        for scheme in [Scheme::Trotter, Scheme::Strang, Scheme::Alg2] {
            assert!(ev.error(scheme, 1.0, 3).unwrap() < 1e-12, "{scheme}");
        }
    }
}
