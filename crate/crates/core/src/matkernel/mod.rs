//! Dense complex matrix kernels: Hermitian eigendecomposition, unitary
//! exponentials of Hermitian generators, operator norms and Kronecker
//! products.
//!
//! Norm conventions used throughout the crate:
//!
//! * `‖·‖` is the spectral (operator 2-) norm, the largest singular value.
//! * The trace distance is `Tr|ρ - σ|` with **no** factor ½, so it ranges
//!   over `[0, 2]` and orthogonal pure states sit at distance 2. This is
//!   twice the textbook normalization.

mod density;
mod eig;
mod matrix;

pub use density::{trace_distance, DensityMatrix};
pub use eig::{hermitian_eig, HermitianEigen};
pub use matrix::{kron, Matrix};

use crate::error::Result;
use crate::scalar::Real;

/// `e^{-i A tau}` for Hermitian `A`, computed spectrally.
pub fn expm_hermitian<T: Real>(a: &Matrix<T>, tau: T) -> Result<Matrix<T>> {
    Ok(hermitian_eig(a)?.exp_minus_i(tau))
}

/// Largest singular value.
pub fn spectral_norm<T: Real>(m: &Matrix<T>) -> T {
    singular_values(m).into_iter().fold(T::zero(), T::max)
}

/// Sum of singular values.
pub fn trace_norm<T: Real>(m: &Matrix<T>) -> T {
    singular_values(m).into_iter().sum()
}

/// Singular values, unordered.
///
/// Hermitian input uses `|λ_k|` directly. Otherwise the Hermitian dilation
/// `[[0, M], [M^H, 0]]` is diagonalized: its spectrum is `±σ_k` (padded with
/// zeros), which keeps small singular values accurate where `eig(M^H M)`
/// would lose half the digits.
pub fn singular_values<T: Real>(m: &Matrix<T>) -> Vec<T> {
    let (r, c) = (m.rows(), m.cols());
    if r == 0 || c == 0 {
        return Vec::new();
    }
    let scale = m.max_abs();
    if scale == T::zero() {
        return vec![T::zero(); r.min(c)];
    }
    if m.is_square() && m.hermitian_defect() <= T::epsilon() * T::lit(16.0) * scale {
        return eig::jacobi(m.hermitian_part()).values.into_iter().map(T::abs).collect();
    }
    let n = r + c;
    let dilation = Matrix::from_fn(n, n, |i, j| {
        if i < r && j >= r {
            m[(i, j - r)]
        } else if i >= r && j < r {
            m[(j, i - r)].conj()
        } else {
            crate::scalar::cr(T::zero())
        }
    });
    let values = eig::jacobi(dilation).values;
    // descending: the first min(r, c) are the +σ_k
    values.into_iter().take(r.min(c)).map(|v| v.max(T::zero())).collect()
}
