//! Truncated noncommutative power series in the term symbols `H_1 … H_m`.
//!
//! A [`TruncatedSeries`] stores one complex coefficient per ordered symbol
//! word of length at most 3. Words are read as operator products with the
//! leftmost symbol as the leftmost factor, the same order in which
//! [`word_unitary`](crate::schedules::word_unitary) multiplies exponentials.
//! Durations enter numerically through the coefficients.

use std::collections::BTreeMap;

use num_complex::Complex;
use num_traits::Num;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matkernel::Matrix;
use crate::scalar::{c, cr, Real};
use crate::schedules::{UnitaryMixture, Word};
use crate::tol;

/// Highest retained total degree.
pub const MAX_DEGREE: usize = 3;

/// An ordered symbol word of length 0 to 3 with zero-based symbols.
///
/// Ordering is by length first, then lexicographic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    len: u8,
    symbols: [u16; MAX_DEGREE],
}

impl Monomial {
    pub const IDENTITY: Self = Self {
        len: 0,
        symbols: [0; MAX_DEGREE],
    };

    /// `None` if longer than [`MAX_DEGREE`].
    pub fn new(symbols: &[usize]) -> Option<Self> {
        if symbols.len() > MAX_DEGREE {
            return None;
        }
        let mut out = Self::IDENTITY;
        for (slot, &s) in out.symbols.iter_mut().zip(symbols) {
            *slot = u16::try_from(s).ok()?;
        }
        out.len = symbols.len() as u8;
        Some(out)
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn symbols(&self) -> Vec<usize> {
        self.symbols[..self.len()].iter().map(|&s| s as usize).collect()
    }

    fn concat(&self, rhs: &Self) -> Option<Self> {
        let n = self.len() + rhs.len();
        if n > MAX_DEGREE {
            return None;
        }
        let mut out = *self;
        out.symbols[self.len()..n].copy_from_slice(&rhs.symbols[..rhs.len()]);
        out.len = n as u8;
        Some(out)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSeries<T> {
    m: usize,
    coeffs: BTreeMap<Monomial, Complex<T>>,
}

impl<T: Real> TruncatedSeries<T> {
    /// The constant series `1`.
    pub fn identity(m: usize) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(Monomial::IDENTITY, cr(T::one()));
        Self { m, coeffs }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Coefficient of an ordered word; zero if absent or longer than 3.
    pub fn coeff(&self, word: &[usize]) -> Complex<T> {
        Monomial::new(word)
            .and_then(|k| self.coeffs.get(&k).copied())
            .unwrap_or_else(|| cr(T::zero()))
    }

    /// Nonzero coefficients in (length, lexicographic) order. The identity
    /// coefficient is always included.
    pub fn iter(&self) -> impl Iterator<Item = (&Monomial, &Complex<T>)> {
        self.coeffs.iter()
    }

    fn add_to(&mut self, key: Monomial, z: Complex<T>) {
        let slot = self.coeffs.entry(key).or_insert_with(|| cr(T::zero()));
        *slot = *slot + z;
    }

    /// Coefficientwise `self + w * other`.
    fn axpy(&mut self, w: T, other: &Self) {
        for (&k, &z) in &other.coeffs {
            self.add_to(k, z * w);
        }
    }

    fn check_symbols(&self, symbols: &[usize]) -> Result<()> {
        match symbols.iter().find(|&&s| s >= self.m) {
            Some(&s) => Err(Error::InvalidArgument(format!(
                "term index {} out of range for {} symbols",
                s + 1,
                self.m
            ))),
            None => Ok(()),
        }
    }

    /// Substitutes concrete matrices for the symbols.
    pub fn evaluate(&self, terms: &[Matrix<T>]) -> Result<Matrix<T>> {
        if terms.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                found: terms.len(),
            });
        }
        let dim = terms.first().map_or(0, Matrix::rows);
        let mut out = Matrix::zeros(dim, dim);
        for (k, &z) in &self.coeffs {
            let product = k
                .symbols()
                .into_iter()
                .fold(Matrix::identity(dim), |acc, s| acc.matmul(&terms[s]));
            out = &out + &product.scale(z);
        }
        Ok(out)
    }

    pub fn to_doc(&self) -> SeriesDoc {
        SeriesDoc {
            m: self.m,
            coeffs: self
                .coeffs
                .iter()
                .map(|(k, z)| CoeffDoc {
                    word: k.symbols().into_iter().map(|s| s + 1).collect(),
                    re: z.re.as_f64(),
                    im: z.im.as_f64(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_doc())?)
    }
}

/// JSON form: one-based symbol words sorted by length, then lexicographically.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesDoc {
    pub m: usize,
    pub coeffs: Vec<CoeffDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoeffDoc {
    pub word: Vec<usize>,
    pub re: f64,
    pub im: f64,
}

/// `e^{-i H_k tau}` to third order: `1 - iτ H_k - τ²/2 H_k² + iτ³/6 H_k³`.
pub fn exp_step_series<T: Real>(k: usize, tau: T, m: usize) -> Result<TruncatedSeries<T>> {
    let mut s = TruncatedSeries::identity(m);
    s.check_symbols(&[k])?;
    if tau == T::zero() {
        return Ok(s);
    }
    let mut power = cr(T::one());
    let mut factorial = T::one();
    let minus_i_tau = c(T::zero(), -tau);
    for n in 1..=MAX_DEGREE {
        power = power * minus_i_tau;
        factorial = factorial * T::lit(n as f64);
        let key = Monomial::new(&vec![k; n]).expect("degree within bound");
        s.coeffs.insert(key, power / factorial);
    }
    Ok(s)
}

/// Product `a · b`, dropping words longer than 3.
pub fn series_mul<T: Real>(a: &TruncatedSeries<T>, b: &TruncatedSeries<T>) -> Result<TruncatedSeries<T>> {
    if a.m != b.m {
        return Err(Error::DimensionMismatch {
            expected: a.m,
            found: b.m,
        });
    }
    let mut out = TruncatedSeries {
        m: a.m,
        coeffs: BTreeMap::new(),
    };
    for (ka, &za) in &a.coeffs {
        for (kb, &zb) in &b.coeffs {
            if let Some(k) = ka.concat(kb) {
                out.add_to(k, za * zb);
            }
        }
    }
    out.coeffs.entry(Monomial::IDENTITY).or_insert_with(|| cr(T::zero()));
    Ok(out)
}

/// Series of [`word_unitary`](crate::schedules::word_unitary): the last step
/// is the leftmost factor.
pub fn word_series<T: Real>(w: &Word<T>, m: usize) -> Result<TruncatedSeries<T>> {
    w.check_terms(m)?;
    w.steps().iter().try_fold(TruncatedSeries::identity(m), |acc, s| {
        series_mul(&exp_step_series(s.term, s.duration, m)?, &acc)
    })
}

/// `e^{-i(H_1 + … + H_m)t}` to third order: every word of length `ℓ` gets
/// `(-it)^ℓ / ℓ!`.
pub fn exact_series<T: Real>(m: usize, t: T) -> TruncatedSeries<T> {
    let mut s = TruncatedSeries::identity(m);
    let minus_i_t = c(T::zero(), -t);
    let mut words: Vec<Vec<usize>> = vec![Vec::new()];
    let mut coeff = cr(T::one());
    for n in 1..=MAX_DEGREE {
        coeff = coeff * minus_i_t / T::lit(n as f64);
        words = words
            .into_iter()
            .flat_map(|w| {
                (0..m).map(move |k| {
                    let mut longer = w.clone();
                    longer.push(k);
                    longer
                })
            })
            .collect();
        for w in &words {
            s.coeffs.insert(Monomial::new(w).expect("degree within bound"), coeff);
        }
    }
    s
}

/// Probability-weighted mean of the entries' word series.
pub fn mixture_mean_series<T: Real>(mix: &UnitaryMixture<T>, m: usize) -> Result<TruncatedSeries<T>> {
    let mut out = TruncatedSeries {
        m,
        coeffs: BTreeMap::new(),
    };
    for e in mix.entries() {
        out.axpy(e.probability, &word_series(&e.word, m)?);
    }
    Ok(out)
}

/// Combined coefficient of `H_a H_b H_a` and `H_b H_a H_b` in units of `i`,
/// i.e. `Im(c_aba + c_bab)`.
///
/// The series must be normalized for the pair: the linear coefficients of
/// `H_a` and `H_b` must both equal `-i` (unit total duration for each term).
pub fn third_order_pair_sum<T: Real>(s: &TruncatedSeries<T>, a: usize, b: usize) -> Result<T> {
    s.check_symbols(&[a, b])?;
    if a == b {
        return Err(Error::InvalidArgument("pair terms must differ".into()));
    }
    let total = |k: usize| -s.coeff(&[k]).im;
    let (ta, tb) = (total(a), total(b));
    let slack = T::tol(tol::NORMALIZED_TOTAL);
    let linear_ok = |k: usize, t: T| (t - T::one()).abs() <= slack && s.coeff(&[k]).re.abs() <= slack;
    if !(linear_ok(a, ta) && linear_ok(b, tb)) {
        return Err(Error::NotNormalized {
            a_total: ta.as_f64(),
            b_total: tb.as_f64(),
        });
    }
    Ok((s.coeff(&[a, b, a]) + s.coeff(&[b, a, b])).im)
}

/// [`third_order_pair_sum`] of a word's series.
pub fn word_pair_sum<T: Real>(w: &Word<T>, a: usize, b: usize) -> Result<T> {
    let m = w.min_terms().max(a + 1).max(b + 1);
    third_order_pair_sum(&word_series(w, m)?, a, b)
}

/// Alternating block durations of two terms within a word.
#[derive(Clone, Debug, PartialEq)]
pub struct InterleavingProfile<T> {
    pub pair: (usize, usize),
    /// Term owning the first block (`x[0]`); blocks alternate from there.
    pub first: usize,
    pub x: Vec<T>,
    pub total: T,
}

impl<T: Real> InterleavingProfile<T> {
    /// Number of blocks belonging to term `a` and to term `b`.
    pub fn block_counts(&self) -> (usize, usize) {
        let leading = self.x.len().div_ceil(2);
        let trailing = self.x.len() / 2;
        if self.first == self.pair.0 {
            (leading, trailing)
        } else {
            (trailing, leading)
        }
    }
}

/// Projects `w` onto the steps of terms `a` and `b` and fuses consecutive
/// blocks of the same term. Steps of other terms are skipped entirely.
pub fn interleaving_profile<T: Real>(w: &Word<T>, a: usize, b: usize) -> Result<InterleavingProfile<T>> {
    if a == b {
        return Err(Error::InvalidArgument("pair terms must differ".into()));
    }
    let mut blocks: Vec<(usize, T)> = Vec::new();
    for s in w.steps().iter().filter(|s| s.term == a || s.term == b) {
        match blocks.last_mut() {
            Some((term, d)) if *term == s.term => *d = *d + s.duration,
            _ => blocks.push((s.term, s.duration)),
        }
    }
    for k in [a, b] {
        if !blocks.iter().any(|&(term, _)| term == k) {
            return Err(Error::InvalidWord(format!("term {} does not occur in the word", k + 1)));
        }
    }
    let x: Vec<T> = blocks.iter().map(|&(_, d)| d).collect();
    Ok(InterleavingProfile {
        pair: (a, b),
        first: blocks[0].0,
        total: x.iter().copied().sum(),
        x,
    })
}

/// `Σ x_i x_j x_k` over `i < j < k` with `k - i` even and `j - i` odd.
///
/// Generic over any numeric type so exact rationals can be used.
pub fn s_value<N: Num + Copy>(x: &[N]) -> N {
    let n = x.len();
    let mut total = N::zero();
    for i in 0..n {
        for j in (i + 1..n).step_by(2) {
            let xij = x[i] * x[j];
            for k in (j + 1..n).step_by(2) {
                total = total + xij * x[k];
            }
        }
    }
    total
}
