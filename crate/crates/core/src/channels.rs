//! Randomized schedules evaluated exactly as mixed-unitary channels.
//!
//! Density matrices are vectorized column-major, `vec(ρ)[i + j·d] = ρ[i, j]`,
//! so `vec(A ρ B) = (Bᵀ ⊗ A) vec(ρ)` and unitary conjugation `U ρ U^H` is the
//! matrix `conj(U) ⊗ U`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonians::TermSet;
use crate::matkernel::{expm_hermitian, kron, spectral_norm, trace_distance, DensityMatrix, Matrix};
use crate::scalar::Real;
use crate::schedules::{word_unitary_from_spectra, UnitaryMixture};
use crate::tol;

/// `d² × d²` matrix acting on column-major vectorized `d × d` operators.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator<T> {
    dim: usize,
    mat: Matrix<T>,
}

impl<T: Real> Superoperator<T> {
    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            mat: Matrix::identity(dim * dim),
        }
    }

    /// `ρ ↦ U ρ U^H`.
    pub fn unitary(u: &Matrix<T>) -> Self {
        Self {
            dim: u.rows(),
            mat: kron(&u.conj(), u),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.mat
    }

    /// `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            dim: self.dim,
            mat: self.mat.matmul(&other.mat),
        }
    }

    /// Applies to an arbitrary `d × d` operator without validation.
    pub fn apply_raw(&self, rho: &Matrix<T>) -> Matrix<T> {
        unvectorize(&self.mat.matvec(&vectorize(rho)), self.dim)
    }
}

pub fn vectorize<T: Real>(m: &Matrix<T>) -> Vec<num_complex::Complex<T>> {
    let (r, c) = (m.rows(), m.cols());
    let mut v = Vec::with_capacity(r * c);
    for j in 0..c {
        for i in 0..r {
            v.push(m[(i, j)]);
        }
    }
    v
}

pub fn unvectorize<T: Real>(v: &[num_complex::Complex<T>], dim: usize) -> Matrix<T> {
    Matrix::from_fn(dim, dim, |i, j| v[i + j * dim])
}

/// `e^{-iHt}` for `H = Σ_k H_k`.
pub fn exact_evolution<T: Real>(ts: &TermSet<T>, t: T) -> Result<Matrix<T>> {
    expm_hermitian(&ts.total(), t)
}

fn mixture_unitaries<T: Real>(ts: &TermSet<T>, mix: &UnitaryMixture<T>) -> Result<Vec<(T, Matrix<T>)>> {
    for e in mix.entries() {
        e.word.check_terms(ts.len())?;
    }
    let spectra = ts.spectra();
    Ok(mix
        .entries()
        .iter()
        .map(|e| (e.probability, word_unitary_from_spectra(&spectra, ts.dim(), &e.word)))
        .collect())
}

/// `Σ_ω p_ω conj(U_ω) ⊗ U_ω`.
pub fn mixture_superoperator<T: Real>(ts: &TermSet<T>, mix: &UnitaryMixture<T>) -> Result<Superoperator<T>> {
    let d = ts.dim();
    let mut mat = Matrix::zeros(d * d, d * d);
    for (p, u) in mixture_unitaries(ts, mix)? {
        mat = &mat + &kron(&u.conj(), &u).scale_real(p);
    }
    Ok(Superoperator { dim: d, mat })
}

/// `S` composed with itself `k` times; `k = 0` is the identity channel.
pub fn channel_power<T: Real>(s: &Superoperator<T>, k: u64) -> Superoperator<T> {
    Superoperator {
        dim: s.dim,
        mat: s.mat.pow(k),
    }
}

/// Applies `s` and validates the output against [`tol::CHANNEL_OUTPUT`].
pub fn apply_channel<T: Real>(s: &Superoperator<T>, rho: &DensityMatrix<T>) -> Result<DensityMatrix<T>> {
    if rho.dim() != s.dim {
        return Err(Error::DimensionMismatch {
            expected: s.dim,
            found: rho.dim(),
        });
    }
    DensityMatrix::with_tolerance(s.apply_raw(rho.matrix()), T::tol(tol::CHANNEL_OUTPUT))
}

/// `E(U_ω) = Σ_ω p_ω U_ω`; generally not unitary.
pub fn mean_unitary<T: Real>(ts: &TermSet<T>, mix: &UnitaryMixture<T>) -> Result<Matrix<T>> {
    let d = ts.dim();
    Ok(mixture_unitaries(ts, mix)?
        .into_iter()
        .fold(Matrix::zeros(d, d), |acc, (p, u)| &acc + &u.scale_real(p)))
}

/// `E‖U_ω − U₀‖²` in the spectral norm.
pub fn expected_sq_deviation<T: Real>(ts: &TermSet<T>, mix: &UnitaryMixture<T>, u0: &Matrix<T>) -> Result<T> {
    Ok(stage_deviation(ts, mix, u0)?.sq_dev)
}

/// The two mixture-dependent ingredients of the error bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StageDeviation<T> {
    /// `‖E(U_ω) − U₀‖`.
    pub mean_dev: T,
    /// `E‖U_ω − U₀‖²`.
    pub sq_dev: T,
}

impl<T: Real> StageDeviation<T> {
    /// `2‖E(U_ω) − U₀‖ + E‖U_ω − U₀‖²`.
    pub fn bound(&self) -> T {
        self.mean_dev + self.mean_dev + self.sq_dev
    }
}

pub fn stage_deviation<T: Real>(ts: &TermSet<T>, mix: &UnitaryMixture<T>, u0: &Matrix<T>) -> Result<StageDeviation<T>> {
    let d = ts.dim();
    if u0.rows() != d || u0.cols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: u0.rows(),
        });
    }
    let mut mean = Matrix::zeros(d, d);
    let mut sq_dev = T::zero();
    for (p, u) in mixture_unitaries(ts, mix)? {
        let dev = spectral_norm(&(&u - u0));
        sq_dev = sq_dev + p * dev * dev;
        mean = &mean + &u.scale_real(p);
    }
    Ok(StageDeviation {
        mean_dev: spectral_norm(&(&mean - u0)),
        sq_dev,
    })
}

/// Instance metadata carried alongside a [`BoundReport`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub d: usize,
    pub m: usize,
    pub dt: f64,
    #[serde(rename = "K")]
    pub k: u64,
    pub seed: Option<u64>,
}

/// Error-bound bookkeeping for one randomized run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    /// `‖E(U_ω) − U₀‖` of one stage.
    pub mean_dev: f64,
    /// `E‖U_ω − U₀‖²` of one stage.
    pub sq_dev: f64,
    /// `D(ρ₀, |ψ₀⟩⟨ψ₀|)`.
    pub input_dist: f64,
    /// `input_dist + K (2 mean_dev + sq_dev)`.
    pub bound: f64,
    /// Increase in trace distance, clamped at 0.
    pub observed: f64,
    /// Unclamped increase; may be slightly negative from rounding.
    pub raw_observed: f64,
    pub meta: InstanceMeta,
}

impl BoundReport {
    pub fn dominated(&self) -> bool {
        self.observed <= self.bound + tol::DOMINANCE
    }
}

fn require_pure<T: Real>(psi0: &DensityMatrix<T>) -> Result<()> {
    let purity = psi0.matrix().matmul(psi0.matrix()).trace().re;
    if (purity - T::one()).abs() > T::tol(1e-8) {
        return Err(Error::InvalidDensity(format!(
            "reference state is not pure (purity {purity})"
        )));
    }
    Ok(())
}

/// Runs `k` independent stages of `mix` on `rho0` over total time `t` and
/// compares with `e^{-iHt} |ψ₀⟩⟨ψ₀| e^{iHt}`.
///
/// The stage quantities are taken against `U₀ = e^{-iH t/k}`; the bound is
/// the single-stage bound accumulated over the `k` stages, which reduces to
/// `D(ρ₀, ψ₀) + 2‖E(U_ω) − U₀‖ + E‖U_ω − U₀‖²` at `k = 1`.
pub fn lemma1_report<T: Real>(
    ts: &TermSet<T>,
    mix: &UnitaryMixture<T>,
    k: u64,
    t: T,
    rho0: &DensityMatrix<T>,
    psi0: &DensityMatrix<T>,
) -> Result<BoundReport> {
    let d = ts.dim();
    for state in [rho0, psi0] {
        if state.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: state.dim(),
            });
        }
    }
    if k == 0 {
        return Err(Error::InvalidArgument("stage count must be at least 1".into()));
    }
    require_pure(psi0)?;

    let dt = t / T::lit(k as f64);
    let stage = stage_deviation(ts, mix, &exact_evolution(ts, dt)?)?;
    let channel = channel_power(&mixture_superoperator(ts, mix)?, k);
    let out = DensityMatrix::with_tolerance(channel.apply_raw(rho0.matrix()), T::tol(tol::CHANNEL_OUTPUT))?;
    let target = psi0.conjugate(&exact_evolution(ts, t)?)?;

    let input_dist = trace_distance(rho0, psi0)?.as_f64();
    let final_dist = trace_distance(&out, &target)?.as_f64();
    let raw = final_dist - input_dist;
    let (mean_dev, sq_dev) = (stage.mean_dev.as_f64(), stage.sq_dev.as_f64());
    Ok(BoundReport {
        mean_dev,
        sq_dev,
        input_dist,
        bound: input_dist + k as f64 * (2.0 * mean_dev + sq_dev),
        observed: raw.max(0.0),
        raw_observed: raw,
        meta: InstanceMeta {
            d,
            m: ts.len(),
            dt: dt.as_f64(),
            k,
            seed: None,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::random_termset;
    use crate::matkernel::expm_hermitian;
    use crate::scalar::{c, cr};
    use crate::schedules::{alg1_group_mixture, alg1_stage_mixture, alg2_stage_mixture, word_unitary, Word};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_pure(d: usize, rng: &mut ChaCha8Rng) -> DensityMatrix<f64> {
        let v: Vec<_> = (0..d)
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        DensityMatrix::pure(&v).unwrap()
    }

    fn pauli_z() -> Matrix<f64> {
        Matrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]).unwrap()
    }

    #[test]
    fn vectorization_round_trip_and_convention() {
        let m = Matrix::<f64>::from_real(2, 2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let v = vectorize(&m);
        assert_eq!(v, vec![cr(1.0), cr(3.0), cr(2.0), cr(4.0)]);
        assert_eq!(unvectorize(&v, 2), m);
    }

    #[test]
    fn exact_evolution_cases() {
        let ts = random_termset::<f64>(3, 2, 1.0, 1).unwrap();
        assert!((&exact_evolution(&ts, 0.0).unwrap() - &Matrix::identity(3)).max_abs() < 1e-15);
        let z = pauli_z();
        let halves = TermSet::from_terms(vec![z.scale_real(0.5), z.scale_real(0.5)]).unwrap();
        let pi = std::f64::consts::PI;
        let u = exact_evolution(&halves, pi).unwrap();
        assert!((&u - &expm_hermitian(&z, pi).unwrap()).max_abs() < 1e-14);
        let product = &expm_hermitian(halves.term(1), pi).unwrap() * &expm_hermitian(halves.term(0), pi).unwrap();
        assert!((&u - &product).max_abs() <= 1e-10);
    }

    #[test]
    fn single_word_mixture_is_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ts = random_termset::<f64>(3, 2, 1.0, 2).unwrap();
        let w = Word::from_pairs(&[(0, 0.3), (1, 0.2), (0, 0.1)]).unwrap();
        let s = mixture_superoperator(&ts, &UnitaryMixture::single(w.clone())).unwrap();
        let rho = random_pure(3, &mut rng);
        let direct = rho.conjugate(&word_unitary(&ts, &w).unwrap()).unwrap();
        let via = apply_channel(&s, &rho).unwrap();
        assert!((via.matrix() - direct.matrix()).max_abs() <= 1e-12);
        let id = mixture_superoperator(&ts, &UnitaryMixture::single(Word::empty())).unwrap();
        assert!((id.matrix() - Superoperator::<f64>::identity(3).matrix()).max_abs() < 1e-15);
    }

    #[test]
    fn mixtures_are_unital() {
        let ts = random_termset::<f64>(4, 2, 1.0, 5).unwrap();
        let s = mixture_superoperator(&ts, &alg1_stage_mixture(2, 0.1).unwrap()).unwrap();
        let mm = DensityMatrix::maximally_mixed(4);
        let out = apply_channel(&s, &mm).unwrap();
        assert!((out.matrix() - mm.matrix()).max_abs() < 1e-14);
    }

    #[test]
    fn channel_power_composes() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let ts = random_termset::<f64>(3, 3, 1.0, 7).unwrap();
        let s = mixture_superoperator(&ts, &alg2_stage_mixture(3, 0.2).unwrap()).unwrap();
        assert_eq!(channel_power(&s, 0), Superoperator::identity(3));
        let rho = random_pure(3, &mut rng);
        let twice = apply_channel(&s, &apply_channel(&s, &rho).unwrap()).unwrap();
        let squared = apply_channel(&channel_power(&s, 2), &rho).unwrap();
        assert!((twice.matrix() - squared.matrix()).max_abs() <= 1e-12);
        for k in [1, 5, 17, 64] {
            let out = apply_channel(&channel_power(&s, k), &rho).unwrap();
            assert!((out.matrix().trace().re - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn bit_flip() {
        let x = Matrix::<f64>::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let s = Superoperator::unitary(&x);
        let out = apply_channel(&s, &DensityMatrix::basis(2, 0).unwrap()).unwrap();
        assert!((out.matrix() - DensityMatrix::<f64>::basis(2, 1).unwrap().matrix()).max_abs() < 1e-15);
        assert!(apply_channel(&s, &DensityMatrix::maximally_mixed(3)).is_err());
    }

    #[test]
    fn random_channel_outputs_are_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for seed in 0..10 {
            let ts = random_termset::<f64>(4, 3, 1.0, seed).unwrap();
            let s = mixture_superoperator(&ts, &alg2_stage_mixture(3, 0.15).unwrap()).unwrap();
            let out = apply_channel(&channel_power(&s, 3), &random_pure(4, &mut rng)).unwrap();
            assert!((out.matrix().trace().re - 1.0).abs() <= 1e-10);
            assert!(out.min_eigenvalue() >= -1e-9);
        }
    }

    #[test]
    fn mean_unitary_cases() {
        let ts = random_termset::<f64>(2, 2, 1.0, 9).unwrap();
        let dt = 0.3;
        let w = Word::from_pairs(&[(1, dt)]).unwrap();
        let single = mean_unitary(&ts, &UnitaryMixture::single(w.clone())).unwrap();
        assert_eq!(single, word_unitary(&ts, &w).unwrap());
        let u1 = expm_hermitian(ts.term(0), dt).unwrap();
        let u2 = expm_hermitian(ts.term(1), dt).unwrap();
        // word (1,2) is U2·U1, word (2,1) is U1·U2
        let expect = (&(&u2 * &u1) + &(&u1 * &u2)).scale_real(0.5);
        let mean = mean_unitary(&ts, &alg2_stage_mixture(2, dt).unwrap()).unwrap();
        assert!((&mean - &expect).max_abs() < 1e-14);
        for seed in 0..10 {
            let ts = random_termset::<f64>(3, 3, 2.0, seed).unwrap();
            let mean = mean_unitary(&ts, &alg1_group_mixture(3, 0.5).unwrap()).unwrap();
            assert!(spectral_norm(&mean) <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn sq_deviation_cases() {
        let ts = random_termset::<f64>(3, 2, 1.0, 10).unwrap();
        let w = Word::from_pairs(&[(0, 0.2), (1, 0.3)]).unwrap();
        let u = word_unitary(&ts, &w).unwrap();
        assert!(expected_sq_deviation(&ts, &UnitaryMixture::single(w), &u).unwrap() < 1e-24);
        let far = exact_evolution(&ts, 7.0).unwrap();
        let v = expected_sq_deviation(&ts, &alg2_stage_mixture(2, 1.3).unwrap(), &far).unwrap();
        assert!(v <= 4.0 + 1e-12);
    }

    #[test]
    fn alg1_stage_sq_deviation_is_second_order() {
        let ts = random_termset::<f64>(4, 2, 1.0, 11).unwrap();
        let sq = |dt: f64| {
            let u0 = exact_evolution(&ts, dt).unwrap();
            expected_sq_deviation(&ts, &alg1_stage_mixture(2, dt).unwrap(), &u0).unwrap()
        };
        let ratio = sq(0.02) / sq(0.01);
        assert!((ratio - 4.0).abs() <= 0.8, "{ratio}");
    }

    #[test]
    fn lemma1_exact_control() {
        let a = Matrix::<f64>::from_real(2, 2, &[1.0, 0.0, 0.0, -0.5]).unwrap();
        let b = Matrix::<f64>::from_real(2, 2, &[0.2, 0.0, 0.0, 0.7]).unwrap();
        let ts = TermSet::from_terms(vec![a, b]).unwrap();
        let dt = 0.4;
        let mix = UnitaryMixture::single(Word::from_pairs(&[(0, dt), (1, dt)]).unwrap());
        let psi = DensityMatrix::pure(&[c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let r = lemma1_report(&ts, &mix, 1, dt, &psi, &psi).unwrap();
        assert!(r.bound < 1e-12 && r.observed < 1e-12, "{r:?}");
        assert_eq!(r.meta.d, 2);
    }

    #[test]
    fn lemma1_dominance_on_alg2_stage() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let ts = random_termset::<f64>(4, 2, 1.0, 13).unwrap();
        let psi = random_pure(4, &mut rng);
        let r = lemma1_report(&ts, &alg2_stage_mixture(2, 0.05).unwrap(), 1, 0.05, &psi, &psi).unwrap();
        assert!(r.observed <= r.bound);
        assert_eq!(r.input_dist, 0.0);
        // the lemma's own statement: the increase is bounded without the input term
        assert!(r.raw_observed <= r.bound - r.input_dist + 1e-12);
    }

    #[test]
    fn lemma1_mixed_input_counts_input_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let ts = random_termset::<f64>(3, 2, 1.0, 15).unwrap();
        let psi = random_pure(3, &mut rng);
        let rho = psi.mix(&DensityMatrix::maximally_mixed(3), 0.2).unwrap();
        let r = lemma1_report(&ts, &alg1_group_mixture(2, 0.1).unwrap(), 2, 0.2, &rho, &psi).unwrap();
        let expect = trace_distance(&rho, &psi).unwrap();
        assert!((r.input_dist - expect).abs() < 1e-15 && r.input_dist > 0.0);
        assert!(r.dominated());
        assert_eq!(r.meta.k, 2);
        assert!((r.meta.dt - 0.1).abs() < 1e-15);
    }

    #[test]
    fn lemma1_rejects_bad_inputs() {
        let ts = random_termset::<f64>(3, 2, 1.0, 16).unwrap();
        let mix = alg1_stage_mixture(2, 0.1).unwrap();
        let mm = DensityMatrix::maximally_mixed(3);
        assert!(lemma1_report(&ts, &mix, 1, 0.1, &mm, &mm).is_err());
        let psi2 = DensityMatrix::basis(2, 0).unwrap();
        assert!(matches!(
            lemma1_report(&ts, &mix, 1, 0.1, &psi2, &psi2),
            Err(Error::DimensionMismatch { .. })
        ));
        let report = serde_json::to_value(
            lemma1_report(
                &ts,
                &mix,
                1,
                0.1,
                &DensityMatrix::basis(3, 0).unwrap(),
                &DensityMatrix::basis(3, 0).unwrap(),
            )
            .unwrap(),
        )
        .unwrap();
        for key in ["mean_dev", "sq_dev", "input_dist", "bound", "observed"] {
            assert!(report[key].is_number(), "{key}");
        }
        assert_eq!(report["meta"]["K"], 1);
    }
}
