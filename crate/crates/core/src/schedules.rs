//! Positive-duration exponential sequences and the stage mixtures of the
//! randomized schemes.
//!
//! Term indices are zero-based in the Rust API and one-based in JSON.

use itertools::Itertools;
use rand::distr::weighted::WeightedIndex;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonians::TermSet;
use crate::matkernel::{HermitianEigen, Matrix};
use crate::scalar::Real;
use crate::tol;

/// Largest term count for which the permutation mixture is enumerated.
pub const MAX_PERMUTATION_TERMS: usize = 6;

/// One factor `e^{-i H_term duration}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Step<T> {
    pub term: usize,
    pub duration: T,
}

/// An ordered product of exponentials, first step applied first.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Word<T> {
    steps: Vec<Step<T>>,
}

impl<T: Real> Word<T> {
    /// Rejects non-positive or non-finite durations.
    pub fn new(steps: Vec<Step<T>>) -> Result<Self> {
        for (j, s) in steps.iter().enumerate() {
            if !(s.duration > T::zero() && s.duration.is_finite()) {
                return Err(Error::InvalidWord(format!(
                    "step {} has duration {}; durations must be strictly positive",
                    j + 1,
                    s.duration
                )));
            }
        }
        Ok(Self { steps })
    }

    /// Builds from `(term, duration)` pairs with zero-based terms.
    pub fn from_pairs(pairs: &[(usize, T)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(term, duration)| Step { term, duration }).collect())
    }

    pub fn empty() -> Self {
        Self { steps: Vec::new() }
    }

    pub fn steps(&self) -> &[Step<T>] {
        &self.steps
    }

    /// Number of exponentials.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Smallest term count the word is valid against.
    pub fn min_terms(&self) -> usize {
        self.steps.iter().map(|s| s.term + 1).max().unwrap_or(0)
    }

    pub fn check_terms(&self, m: usize) -> Result<()> {
        match self.steps.iter().position(|s| s.term >= m) {
            Some(j) => Err(Error::InvalidWord(format!(
                "step {} uses term {} but only {m} terms exist",
                j + 1,
                self.steps[j].term + 1
            ))),
            None => Ok(()),
        }
    }

    /// Total duration per term.
    pub fn term_totals(&self, m: usize) -> Vec<T> {
        let mut totals = vec![T::zero(); m.max(self.min_terms())];
        for s in &self.steps {
            totals[s.term] = totals[s.term] + s.duration;
        }
        totals
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut steps = self.steps.clone();
        steps.extend_from_slice(&other.steps);
        Self { steps }
    }

    pub fn repeat(&self, k: usize) -> Self {
        Self {
            steps: self.steps.iter().copied().cycle().take(self.steps.len() * k).collect(),
        }
    }

    pub fn reversed(&self) -> Self {
        Self {
            steps: self.steps.iter().rev().copied().collect(),
        }
    }

    /// Adjacent steps of the same term fused into one (durations summed).
    pub fn merged(&self) -> Self {
        let mut steps: Vec<Step<T>> = Vec::with_capacity(self.steps.len());
        for &s in &self.steps {
            match steps.last_mut() {
                Some(last) if last.term == s.term => last.duration = last.duration + s.duration,
                _ => steps.push(s),
            }
        }
        Self { steps }
    }

    /// Durations divided by `unit`.
    pub fn rescaled(&self, unit: T) -> Result<Self> {
        Self::new(
            self.steps
                .iter()
                .map(|s| Step {
                    term: s.term,
                    duration: s.duration / unit,
                })
                .collect(),
        )
    }

    pub fn to_doc(&self) -> WordDoc {
        WordDoc {
            steps: self.steps.iter().map(|s| (s.term + 1, s.duration.as_f64())).collect(),
        }
    }

    pub fn from_doc(doc: &WordDoc) -> Result<Self> {
        let steps = doc
            .steps
            .iter()
            .map(|&(index, duration)| {
                if index == 0 {
                    Err(Error::InvalidWord("term indices are 1-based".into()))
                } else {
                    Ok(Step {
                        term: index - 1,
                        duration: T::lit(duration),
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(steps)
    }
}

/// JSON layout: `{steps: [[index, duration], ...]}`, indices 1-based.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WordDoc {
    pub steps: Vec<(usize, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MixtureEntry<T> {
    pub probability: T,
    pub word: Word<T>,
}

/// A finite probability distribution over words: one stage of a randomized
/// scheme.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMixture<T> {
    entries: Vec<MixtureEntry<T>>,
}

impl<T: Real> UnitaryMixture<T> {
    pub fn new(entries: Vec<MixtureEntry<T>>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidMixture("mixture has no entries".into()));
        }
        if let Some(e) = entries
            .iter()
            .find(|e| !(e.probability > T::zero() && e.probability <= T::one()))
        {
            return Err(Error::InvalidMixture(format!(
                "probability {} outside (0, 1]",
                e.probability
            )));
        }
        let total: T = entries.iter().map(|e| e.probability).sum();
        if !((total - T::one()).abs() <= T::tol(tol::PROBABILITY_SUM)) {
            return Err(Error::InvalidMixture(format!("probabilities sum to {total}")));
        }
        Ok(Self { entries })
    }

    /// Equal weights over `words`.
    pub fn uniform(words: Vec<Word<T>>) -> Result<Self> {
        let p = T::one() / T::lit(words.len().max(1) as f64);
        Self::new(
            words
                .into_iter()
                .map(|word| MixtureEntry { probability: p, word })
                .collect(),
        )
    }

    /// A deterministic stage.
    pub fn single(word: Word<T>) -> Self {
        Self {
            entries: vec![MixtureEntry {
                probability: T::one(),
                word,
            }],
        }
    }

    pub fn entries(&self) -> &[MixtureEntry<T>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn min_terms(&self) -> usize {
        self.entries.iter().map(|e| e.word.min_terms()).max().unwrap_or(0)
    }

    pub fn to_doc(&self) -> MixtureDoc {
        MixtureDoc {
            entries: self
                .entries
                .iter()
                .map(|e| MixtureEntryDoc {
                    p: e.probability.as_f64(),
                    word: e.word.to_doc(),
                })
                .collect(),
        }
    }

    pub fn from_doc(doc: &MixtureDoc) -> Result<Self> {
        Self::new(
            doc.entries
                .iter()
                .map(|e| {
                    Ok(MixtureEntry {
                        probability: T::lit(e.p),
                        word: Word::from_doc(&e.word)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?,
        )
    }
}

/// JSON layout: `{entries: [{p, word}, ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureDoc {
    pub entries: Vec<MixtureEntryDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureEntryDoc {
    pub p: f64,
    pub word: WordDoc,
}

/// `e^{-i H_{A_N} t_N} ⋯ e^{-i H_{A_1} t_1}`: the last step is the leftmost
/// operator factor.
pub fn word_unitary<T: Real>(ts: &TermSet<T>, w: &Word<T>) -> Result<Matrix<T>> {
    w.check_terms(ts.len())?;
    Ok(word_unitary_from_spectra(&ts.spectra(), ts.dim(), w))
}

/// Same as [`word_unitary`] with the term spectra precomputed. The word must
/// already be checked against the term count.
pub fn word_unitary_from_spectra<T: Real>(spectra: &[HermitianEigen<T>], dim: usize, w: &Word<T>) -> Matrix<T> {
    w.steps().iter().fold(Matrix::identity(dim), |u, s| {
        spectra[s.term].exp_minus_i(s.duration).matmul(&u)
    })
}

/// `K` repetitions of `[(1, dt), ..., (m, dt)]`.
pub fn trotter_word<T: Real>(m: usize, dt: T, k: usize) -> Result<Word<T>> {
    let segment = Word::new((0..m).map(|term| Step { term, duration: dt }).collect())?;
    Ok(segment.repeat(k))
}

/// Whether Strang half-steps are fused.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrangForm {
    /// Adjacent equal-term steps merged, including across segment boundaries.
    #[default]
    Merged,
    /// The literal palindrome, `2mK` half-steps.
    Palindrome,
}

/// `K` repetitions of `[(1, dt/2), ..., (m, dt/2), (m, dt/2), ..., (1, dt/2)]`.
pub fn strang_word<T: Real>(m: usize, dt: T, k: usize, form: StrangForm) -> Result<Word<T>> {
    let half = dt * T::lit(0.5);
    let forward = (0..m).map(|term| Step { term, duration: half });
    let backward = (0..m).rev().map(|term| Step { term, duration: half });
    let segment = Word::new(forward.chain(backward).collect())?;
    let word = segment.repeat(k);
    Ok(match form {
        StrangForm::Merged => word.merged(),
        StrangForm::Palindrome => word,
    })
}

/// One stage of the uniform single-term scheme: `e^{-i H_k dt}` with
/// probability `1/m` each.
pub fn alg1_stage_mixture<T: Real>(m: usize, dt: T) -> Result<UnitaryMixture<T>> {
    if m == 0 {
        return Err(Error::InvalidArgument("need at least one term".into()));
    }
    UnitaryMixture::uniform(
        (0..m)
            .map(|term| Word::new(vec![Step { term, duration: dt }]))
            .collect::<Result<_>>()?,
    )
}

/// `m` consecutive independent single-term stages as one mixture over the
/// `m^m` words; this is the unit that approximates `e^{-iH dt}`.
pub fn alg1_group_mixture<T: Real>(m: usize, dt: T) -> Result<UnitaryMixture<T>> {
    if m == 0 || m > MAX_PERMUTATION_TERMS {
        return Err(Error::InvalidArgument(format!(
            "group mixture needs 1..={MAX_PERMUTATION_TERMS} terms"
        )));
    }
    let words = (0..m)
        .map(|_| 0..m)
        .multi_cartesian_product()
        .map(|seq| Word::new(seq.into_iter().map(|term| Step { term, duration: dt }).collect()))
        .collect::<Result<Vec<_>>>()?;
    UnitaryMixture::uniform(words)
}

/// One stage of the uniform-permutation scheme: `∏_j e^{-i H_σ(j) dt}` for
/// every permutation `σ`, each with probability `1/m!`. Permutations are
/// listed in lexicographic order.
pub fn alg2_stage_mixture<T: Real>(m: usize, dt: T) -> Result<UnitaryMixture<T>> {
    if m == 0 {
        return Err(Error::InvalidArgument("need at least one term".into()));
    }
    if m > MAX_PERMUTATION_TERMS {
        return Err(Error::InvalidArgument(format!(
            "{m} terms give {m}! permutations; enumeration is capped at {MAX_PERMUTATION_TERMS} terms, \
             draw stages with sample_schedule over a sampled mixture instead"
        )));
    }
    let words = (0..m)
        .permutations(m)
        .map(|perm| Word::new(perm.into_iter().map(|term| Step { term, duration: dt }).collect()))
        .collect::<Result<Vec<_>>>()?;
    UnitaryMixture::uniform(words)
}

/// Concatenation of `stages` independent draws from `mix` (ChaCha20, seeded).
pub fn sample_schedule<T: Real>(mix: &UnitaryMixture<T>, stages: usize, seed: u64) -> Result<Word<T>> {
    let weights: Vec<f64> = mix.entries().iter().map(|e| e.probability.as_f64()).collect();
    let dist = WeightedIndex::new(&weights).map_err(|e| Error::InvalidMixture(e.to_string()))?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut steps = Vec::new();
    for _ in 0..stages {
        steps.extend_from_slice(mix.entries()[dist.sample(&mut rng)].word.steps());
    }
    Ok(Word { steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::exact_evolution;
    use crate::hamiltonians::{random_termset, TermSet};
    use crate::matkernel::{expm_hermitian, spectral_norm};

    fn pairs(w: &Word<f64>) -> Vec<(usize, f64)> {
        w.steps().iter().map(|s| (s.term + 1, s.duration)).collect()
    }

    fn commuting_termset() -> TermSet<f64> {
        let a = Matrix::from_real(3, 3, &[1.0, 0.0, 0.0, 0.0, -0.5, 0.0, 0.0, 0.0, 0.2]).unwrap();
        let b = Matrix::from_real(3, 3, &[0.3, 0.0, 0.0, 0.0, 0.9, 0.0, 0.0, 0.0, -1.0]).unwrap();
        TermSet::from_terms(vec![a, b]).unwrap()
    }

    #[test]
    fn words_reject_non_positive_durations() {
        assert!(Word::from_pairs(&[(0, 0.0)]).is_err());
        assert!(Word::from_pairs(&[(0, -0.1)]).is_err());
        assert!(Word::from_pairs(&[(0, f64::NAN)]).is_err());
        assert!(Word::from_pairs(&[(0, 0.1)]).is_ok());
    }

    #[test]
    fn word_unitary_basics() {
        let ts = random_termset::<f64>(3, 2, 1.0, 4).unwrap();
        assert_eq!(word_unitary(&ts, &Word::empty()).unwrap(), Matrix::identity(3));
        let single = word_unitary(&ts, &Word::from_pairs(&[(1, 0.4)]).unwrap()).unwrap();
        assert!((&single - &expm_hermitian(ts.term(1), 0.4).unwrap()).max_abs() < 1e-14);
        let split = word_unitary(&ts, &Word::from_pairs(&[(0, 0.3), (0, 0.5)]).unwrap()).unwrap();
        let whole = word_unitary(&ts, &Word::from_pairs(&[(0, 0.8)]).unwrap()).unwrap();
        assert!((&split - &whole).max_abs() <= 1e-10);
        assert!(word_unitary(&ts, &Word::from_pairs(&[(2, 0.1)]).unwrap()).is_err());
    }

    #[test]
    fn word_unitary_puts_last_step_leftmost() {
        let ts = random_termset::<f64>(2, 2, 1.0, 5).unwrap();
        let u = word_unitary(&ts, &Word::from_pairs(&[(0, 0.2), (1, 0.3)]).unwrap()).unwrap();
        let expect = &expm_hermitian(ts.term(1), 0.3).unwrap() * &expm_hermitian(ts.term(0), 0.2).unwrap();
        assert!((&u - &expect).max_abs() < 1e-14);
    }

    #[test]
    fn trotter_words() {
        assert_eq!(pairs(&trotter_word(2, 0.5, 1).unwrap()), vec![(1, 0.5), (2, 0.5)]);
        assert_eq!(
            pairs(&trotter_word(2, 0.5, 2).unwrap()),
            vec![(1, 0.5), (2, 0.5), (1, 0.5), (2, 0.5)]
        );
        let w = trotter_word(3, 0.1f64, 4).unwrap();
        assert_eq!(w.len(), 12);
        assert!(w.term_totals(3).iter().all(|&t| (t - 0.4f64).abs() < 1e-15));
    }

    #[test]
    fn strang_words() {
        assert_eq!(
            pairs(&strang_word(2, 1.0, 1, StrangForm::Merged).unwrap()),
            vec![(1, 0.5), (2, 1.0), (1, 0.5)]
        );
        assert_eq!(
            pairs(&strang_word(2, 1.0, 1, StrangForm::Palindrome).unwrap()),
            vec![(1, 0.5), (2, 0.5), (2, 0.5), (1, 0.5)]
        );
        let merged = strang_word(3, 0.2f64, 2, StrangForm::Merged).unwrap();
        let literal = strang_word(3, 0.2, 2, StrangForm::Palindrome).unwrap();
        assert_eq!(literal.len(), 12);
        assert_eq!(merged.len(), 2 * (2 * 3 - 2) + 1);
        for w in [&merged, &literal] {
            assert!(w.term_totals(3).iter().all(|&t| (t - 0.4f64).abs() < 1e-15));
        }
        let ts = random_termset::<f64>(3, 3, 1.0, 6).unwrap();
        let (um, ul) = (
            word_unitary(&ts, &merged).unwrap(),
            word_unitary(&ts, &literal).unwrap(),
        );
        assert!((&um - &ul).max_abs() < 1e-12);
    }

    #[test]
    fn strang_reversal_keeps_error_norm() {
        let ts = random_termset::<f64>(3, 3, 1.0, 12).unwrap();
        let w = strang_word(3, 0.1, 3, StrangForm::Merged).unwrap();
        let u0 = exact_evolution(&ts, 0.3).unwrap();
        let fwd = spectral_norm(&(&word_unitary(&ts, &w).unwrap() - &u0));
        let rev = spectral_norm(&(&word_unitary(&ts, &w.reversed()).unwrap() - &u0));
        assert!((fwd - rev).abs() < 1e-12, "{fwd} vs {rev}");
    }

    #[test]
    fn all_schemes_exact_on_commuting_terms() {
        let ts = commuting_termset();
        let t = 0.9;
        let u0 = exact_evolution(&ts, t).unwrap();
        let k = 3;
        let dt = t / k as f64;
        let mut words = vec![
            trotter_word(2, dt, k).unwrap(),
            strang_word(2, dt, k, StrangForm::Merged).unwrap(),
        ];
        words.extend(
            alg2_stage_mixture(2, dt)
                .unwrap()
                .entries()
                .iter()
                .map(|e| e.word.repeat(k)),
        );
        for w in words {
            assert!((&word_unitary(&ts, &w).unwrap() - &u0).max_abs() <= 1e-10);
        }
        // single-term stages draw random per-term totals, so they are not exact
        let skewed = Word::from_pairs(&[(0, dt), (0, dt), (1, dt)]).unwrap().repeat(k);
        assert!((&word_unitary(&ts, &skewed).unwrap() - &u0).max_abs() > 1e-3);
    }

    #[test]
    fn alg1_mixture_shape() {
        let mix = alg1_stage_mixture(2, 0.1).unwrap();
        assert_eq!(mix.len(), 2);
        assert_eq!(pairs(&mix.entries()[0].word), vec![(1, 0.1)]);
        assert_eq!(pairs(&mix.entries()[1].word), vec![(2, 0.1)]);
        assert!(mix.entries().iter().all(|e| e.probability == 0.5));
        let three = alg1_stage_mixture(3, 0.1).unwrap();
        assert_eq!(three.len(), 3);
        let sum: f64 = three.entries().iter().map(|e| e.probability).sum();
        assert!((sum - 1.0).abs() <= 1e-15);
        assert_eq!(alg1_group_mixture(3, 0.1).unwrap().len(), 27);
    }

    #[test]
    fn alg2_mixture_shape() {
        let mix = alg2_stage_mixture(2, 0.25).unwrap();
        assert_eq!(mix.len(), 2);
        assert_eq!(pairs(&mix.entries()[0].word), vec![(1, 0.25), (2, 0.25)]);
        assert_eq!(pairs(&mix.entries()[1].word), vec![(2, 0.25), (1, 0.25)]);
        let m3 = alg2_stage_mixture(3, 0.1).unwrap();
        assert_eq!(m3.len(), 6);
        for e in m3.entries() {
            assert!(e.word.term_totals(3).iter().all(|&t| t == 0.1));
        }
        assert_eq!(alg2_stage_mixture(6, 0.1).unwrap().len(), 720);
        let err = alg2_stage_mixture::<f64>(7, 0.1).unwrap_err();
        assert!(err.to_string().contains("sample_schedule"));
    }

    #[test]
    fn mixture_validation() {
        let w = Word::from_pairs(&[(0, 0.1)]).unwrap();
        assert!(UnitaryMixture::<f64>::new(vec![]).is_err());
        let bad = vec![
            MixtureEntry {
                probability: 0.5,
                word: w.clone(),
            },
            MixtureEntry {
                probability: 0.4,
                word: w.clone(),
            },
        ];
        assert!(UnitaryMixture::new(bad).is_err());
        let zero = vec![
            MixtureEntry {
                probability: 1.0,
                word: w.clone(),
            },
            MixtureEntry {
                probability: 0.0,
                word: w,
            },
        ];
        assert!(UnitaryMixture::new(zero).is_err());
    }

    #[test]
    fn sampling_is_seeded() {
        let mix = alg2_stage_mixture(3, 0.1).unwrap();
        let a = sample_schedule(&mix, 20, 99).unwrap();
        assert_eq!(a, sample_schedule(&mix, 20, 99).unwrap());
        assert_eq!(a.len(), 60);
        let single = UnitaryMixture::single(Word::from_pairs(&[(1, 0.3), (0, 0.2)]).unwrap());
        assert_eq!(sample_schedule(&single, 1, 0).unwrap(), single.entries()[0].word);
    }

    #[test]
    fn sampling_frequencies_match_probabilities() {
        let mix = alg2_stage_mixture(3, 0.1).unwrap();
        let draws = 10_000;
        let w = sample_schedule(&mix, draws, 2024).unwrap();
        let mut counts = vec![0usize; mix.len()];
        for chunk in w.steps().chunks(3) {
            let idx = mix.entries().iter().position(|e| e.word.steps() == chunk).unwrap();
            counts[idx] += 1;
        }
        let p = 1.0 / 6.0;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        for &c in &counts {
            assert!((c as f64 - draws as f64 * p).abs() <= 3.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn json_layouts() {
        let w = Word::from_pairs(&[(0, 0.5), (1, 0.25)]).unwrap();
        let s = serde_json::to_string(&w.to_doc()).unwrap();
        assert_eq!(s, r#"{"steps":[[1,0.5],[2,0.25]]}"#);
        let back = Word::<f64>::from_doc(&serde_json::from_str(&s).unwrap()).unwrap();
        assert_eq!(back, w);
        assert!(Word::<f64>::from_doc(&serde_json::from_str(r#"{"steps":[[0,0.5]]}"#).unwrap()).is_err());
        let mix = alg2_stage_mixture(2, 0.1).unwrap();
        let doc = serde_json::to_value(mix.to_doc()).unwrap();
        assert_eq!(doc["entries"][1]["p"], 0.5);
        assert_eq!(
            UnitaryMixture::<f64>::from_doc(&serde_json::from_value(doc).unwrap()).unwrap(),
            mix
        );
    }
}
