//! Hermitian eigendecomposition by cyclic complex Jacobi rotations.
//!
//! Each rotation first removes the phase of the pivot `a_pq` with a diagonal
//! unitary, then applies the classical real Jacobi rotation, so the combined
//! transform `G = P R` is unitary and annihilates `a_pq` exactly. Sweeps stop
//! once the off-diagonal Frobenius mass drops below machine precision.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::matkernel::Matrix;
use crate::scalar::{cr, Real};
use crate::tol;

const MAX_SWEEPS: usize = 100;

/// Eigenpairs of a Hermitian matrix, eigenvalues in descending order.
#[derive(Clone, Debug)]
pub struct HermitianEigen<T> {
    pub values: Vec<T>,
    /// Unitary whose k-th column is the eigenvector of `values[k]`.
    pub vectors: Matrix<T>,
}

impl<T: Real> HermitianEigen<T> {
    /// `V f(Λ) V^H`.
    pub fn map_spectrum(&self, f: impl Fn(T) -> Complex<T>) -> Matrix<T> {
        let n = self.values.len();
        let fv: Vec<Complex<T>> = self.values.iter().map(|&l| f(l)).collect();
        let v = &self.vectors;
        let mut out = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = cr(T::zero());
                for k in 0..n {
                    acc = acc + v[(i, k)] * fv[k] * v[(j, k)].conj();
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    /// `V Λ V^H`.
    pub fn reconstruct(&self) -> Matrix<T> {
        self.map_spectrum(cr)
    }

    /// `e^{-i A tau}` from the stored spectrum.
    pub fn exp_minus_i(&self, tau: T) -> Matrix<T> {
        self.map_spectrum(|l| {
            let phase = -l * tau;
            Complex::new(phase.cos(), phase.sin())
        })
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Rejects non-square input and input whose Hermiticity defect exceeds
/// [`tol::HERMITIAN_INPUT`]. The (tiny) anti-Hermitian part of accepted input
/// is discarded.
pub fn hermitian_eig<T: Real>(a: &Matrix<T>) -> Result<HermitianEigen<T>> {
    a.require_square()?;
    let defect = a.hermitian_defect();
    let allowed = T::tol(tol::HERMITIAN_INPUT);
    if !(defect <= allowed) {
        return Err(Error::NotHermitian {
            defect: defect.as_f64(),
            tol: allowed.as_f64(),
        });
    }
    Ok(jacobi(a.hermitian_part()))
}

/// Jacobi iteration on a matrix that is Hermitian up to rounding.
pub(crate) fn jacobi<T: Real>(mut a: Matrix<T>) -> HermitianEigen<T> {
    let n = a.rows();
    let mut v = Matrix::identity(n);
    let scale = a.frobenius_norm();
    let two = T::lit(2.0);

    for _ in 0..MAX_SWEEPS {
        let off = off_diagonal_norm(&a);
        if off <= T::epsilon() * scale || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag == T::zero() {
                    continue;
                }
                let phase = apq / mag;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (two * mag);
                let t = if theta.abs() > T::lit(1e150) {
                    T::one() / (two * theta)
                } else {
                    let sign = if theta < T::zero() { -T::one() } else { T::one() };
                    sign / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let cs = T::one() / (t * t + T::one()).sqrt();
                let sn = t * cs;
                let ph_conj = phase.conj();

                // A <- A G on columns p, q
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * cs - akq * ph_conj * sn;
                    a[(k, q)] = akp * sn + akq * ph_conj * cs;
                }
                // A <- G^H A on rows p, q
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * cs - aqk * phase * sn;
                    a[(q, k)] = apk * sn + aqk * phase * cs;
                }
                a[(p, q)] = cr(T::zero());
                a[(q, p)] = cr(T::zero());
                a[(p, p)] = cr(a[(p, p)].re);
                a[(q, q)] = cr(a[(q, q)].re);

                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * cs - vkq * ph_conj * sn;
                    v[(k, q)] = vkp * sn + vkq * ph_conj * cs;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[(j, j)]
            .re
            .partial_cmp(&a[(i, i)].re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let values = order.iter().map(|&k| a[(k, k)].re).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let norm = (0..n).map(|i| v[(i, src)].norm_sqr()).sum::<T>().sqrt();
        for i in 0..n {
            vectors[(i, dst)] = v[(i, src)] / norm;
        }
    }
    HermitianEigen { values, vectors }
}

fn off_diagonal_norm<T: Real>(a: &Matrix<T>) -> T {
    let n = a.rows();
    let mut acc = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc = acc + a[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}
