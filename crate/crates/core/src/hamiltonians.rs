//! Term-set decompositions `H = Σ_k H_k`.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matkernel::{hermitian_eig, kron, spectral_norm, HermitianEigen, Matrix};
use crate::scalar::{c, Real};
use crate::tol;

/// Name of the pseudorandom generator behind every seeded construction.
pub const RNG_NAME: &str = "chacha20";

/// A Hamiltonian split into `m >= 2` Hermitian terms of a common dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct TermSet<T> {
    dim: usize,
    terms: Vec<Matrix<T>>,
    labels: Vec<String>,
}

impl<T: Real> TermSet<T> {
    pub fn new(terms: Vec<Matrix<T>>, labels: Vec<String>) -> Result<Self> {
        if terms.len() < 2 {
            return Err(Error::InvalidTermSet(format!(
                "need at least 2 terms, got {}",
                terms.len()
            )));
        }
        if labels.len() != terms.len() {
            return Err(Error::InvalidTermSet(format!(
                "{} labels for {} terms",
                labels.len(),
                terms.len()
            )));
        }
        let dim = terms[0].rows();
        if dim == 0 {
            return Err(Error::InvalidTermSet("dimension must be positive".into()));
        }
        for (k, h) in terms.iter().enumerate() {
            if h.rows() != dim || h.cols() != dim {
                return Err(Error::InvalidTermSet(format!(
                    "term {} is {}x{}, expected {dim}x{dim}",
                    k + 1,
                    h.rows(),
                    h.cols()
                )));
            }
            let defect = h.hermitian_defect();
            if !(defect <= T::tol(tol::HERMITIAN_CONSTRUCTED)) {
                return Err(Error::InvalidTermSet(format!(
                    "term {} is not Hermitian (defect {:e})",
                    k + 1,
                    defect.as_f64()
                )));
            }
            if h.max_abs() == T::zero() {
                return Err(Error::InvalidTermSet(format!("term {} is identically zero", k + 1)));
            }
        }
        Ok(Self { dim, terms, labels })
    }

    /// Terms labelled `H1, H2, ...`.
    pub fn from_terms(terms: Vec<Matrix<T>>) -> Result<Self> {
        let labels = (1..=terms.len()).map(|k| format!("H{k}")).collect();
        Self::new(terms, labels)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of terms `m`.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[Matrix<T>] {
        &self.terms
    }

    /// Zero-based term access.
    pub fn term(&self, k: usize) -> &Matrix<T> {
        &self.terms[k]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// `H = Σ_k H_k`.
    pub fn total(&self) -> Matrix<T> {
        let mut sum = self.terms[0].clone();
        for h in &self.terms[1..] {
            sum = &sum + h;
        }
        sum
    }

    /// Eigendecompositions of every term, for repeated exponentiation.
    pub fn spectra(&self) -> Vec<HermitianEigen<T>> {
        self.terms
            .iter()
            .map(|h| hermitian_eig(h).expect("terms are validated Hermitian"))
            .collect()
    }

    /// `max_{j<k} ‖[H_j, H_k]‖`.
    pub fn max_commutator_norm(&self) -> T {
        let mut best = T::zero();
        for j in 0..self.len() {
            for k in (j + 1)..self.len() {
                best = best.max(spectral_norm(&self.terms[j].commutator(&self.terms[k])));
            }
        }
        best
    }

    /// All pairs commute within [`tol::COMMUTING`]; every splitting is then exact.
    pub fn is_commuting(&self) -> bool {
        self.max_commutator_norm() < T::tol(tol::COMMUTING)
    }

    pub fn to_doc(&self) -> TermSetDoc {
        TermSetDoc {
            dim: self.dim,
            labels: self.labels.clone(),
            terms: self
                .terms
                .iter()
                .map(|h| h.as_slice().iter().map(|z| [z.re.as_f64(), z.im.as_f64()]).collect())
                .collect(),
        }
    }

    pub fn from_doc(doc: &TermSetDoc) -> Result<Self> {
        let terms = doc
            .terms
            .iter()
            .map(|entries| {
                Matrix::from_vec(
                    doc.dim,
                    doc.dim,
                    entries.iter().map(|&[re, im]| c(T::lit(re), T::lit(im))).collect(),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(terms, doc.labels.clone())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_doc())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_doc(&serde_json::from_str(s)?)
    }
}

/// JSON layout: `{dim, labels, terms: [[[re, im], ...] row-major per term]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermSetDoc {
    pub dim: usize,
    pub labels: Vec<String>,
    pub terms: Vec<Vec<[f64; 2]>>,
}

/// Gaussian Hermitian ensemble: `(A + A^H) / 2` with standard-normal real and
/// imaginary parts, each term rescaled to spectral norm `norm_bound`.
///
/// Deterministic in `(d, m, norm_bound, seed)`: a single ChaCha20 stream
/// seeded with `seed` fills the terms in order, row-major, real part first.
pub fn random_termset<T: Real>(d: usize, m: usize, norm_bound: f64, seed: u64) -> Result<TermSet<T>> {
    if d < 2 || m < 2 {
        return Err(Error::InvalidArgument(format!(
            "random_termset needs d >= 2 and m >= 2, got d={d}, m={m}"
        )));
    }
    if !(norm_bound > 0.0 && norm_bound.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "norm_bound must be positive, got {norm_bound}"
        )));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut terms = Vec::with_capacity(m);
    for _ in 0..m {
        let a = Matrix::<f64>::from_fn(d, d, |_, _| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            c(re, im)
        });
        let h = a.hermitian_part();
        let h = h.scale_real(norm_bound / spectral_norm(&h));
        terms.push(Matrix::from_fn(d, d, |i, j| {
            c(T::lit(h[(i, j)].re), T::lit(h[(i, j)].im))
        }));
    }
    TermSet::from_terms(terms)
}

fn pauli<T: Real>(name: char) -> Matrix<T> {
    let entries: [f64; 4] = match name {
        'X' => [0.0, 1.0, 1.0, 0.0],
        'Z' => [1.0, 0.0, 0.0, -1.0],
        _ => [1.0, 0.0, 0.0, 1.0],
    };
    Matrix::from_real(2, 2, &entries).expect("2x2 literal")
}

/// Operator acting as `ops[i]` on qubit `i` (qubit 0 is the leftmost factor).
fn site_product<T: Real>(n: usize, ops: &[(usize, char)]) -> Matrix<T> {
    let mut out = Matrix::identity(1);
    for q in 0..n {
        let p = ops.iter().find(|(site, _)| *site == q).map(|&(_, p)| p).unwrap_or('I');
        out = kron(&out, &pauli(p));
    }
    out
}

/// Open spin chain split into an XX-coupling part and a ZZ-coupling plus
/// longitudinal-field part:
///
/// `H1 = Σ_i jx X_i X_{i+1}`, `H2 = Σ_i jz Z_i Z_{i+1} + Σ_i hz Z_i`.
///
/// At two sites `X⊗X` commutes with `Z⊗Z`, so the pair is noncommuting
/// exactly when `jx·hz ≠ 0`; from three sites on `jx·jz ≠ 0` suffices.
pub fn spin_chain_termset<T: Real>(n_qubits: usize, jx: f64, jz: f64, hz: f64) -> Result<TermSet<T>> {
    if !(2..=6).contains(&n_qubits) {
        return Err(Error::InvalidArgument(format!(
            "spin chain needs 2..=6 qubits, got {n_qubits}"
        )));
    }
    let d = 1usize << n_qubits;
    let mut h1 = Matrix::<T>::zeros(d, d);
    let mut h2 = Matrix::<T>::zeros(d, d);
    for i in 0..n_qubits - 1 {
        h1 = &h1 + &site_product::<T>(n_qubits, &[(i, 'X'), (i + 1, 'X')]).scale_real(T::lit(jx));
        h2 = &h2 + &site_product::<T>(n_qubits, &[(i, 'Z'), (i + 1, 'Z')]).scale_real(T::lit(jz));
    }
    for i in 0..n_qubits {
        h2 = &h2 + &site_product::<T>(n_qubits, &[(i, 'Z')]).scale_real(T::lit(hz));
    }
    TermSet::new(vec![h1, h2], vec!["XX".into(), "ZZ+Z".into()])
        .map_err(|e| Error::InvalidArgument(format!("degenerate spin chain couplings: {e}")))
}
