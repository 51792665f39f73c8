use num_complex::Complex;

use crate::error::{Error, Result};
use crate::matkernel::{eig, trace_norm, Matrix};
use crate::scalar::{cr, Real};
use crate::tol;

/// A validated density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T> {
    mat: Matrix<T>,
}

impl<T: Real> DensityMatrix<T> {
    /// Validates against [`tol::DENSITY`].
    pub fn new(mat: Matrix<T>) -> Result<Self> {
        Self::with_tolerance(mat, T::tol(tol::DENSITY))
    }

    pub fn with_tolerance(mat: Matrix<T>, tol: T) -> Result<Self> {
        check_density(&mat, tol)?;
        Ok(Self { mat })
    }

    /// `|ψ><ψ|` for a (not necessarily normalized) nonzero vector.
    pub fn pure(psi: &[Complex<T>]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if psi.is_empty() || !(norm > T::zero()) {
            return Err(Error::InvalidDensity("pure state vector is zero or empty".into()));
        }
        let unit: Vec<Complex<T>> = psi.iter().map(|&z| z / norm).collect();
        Ok(Self {
            mat: Matrix::outer(&unit, &unit),
        })
    }

    /// Computational basis state `|k><k|`.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {k} out of range for dim {dim}"
            )));
        }
        let mut psi = vec![cr(T::zero()); dim];
        psi[k] = cr(T::one());
        Self::pure(&psi)
    }

    /// `I / d`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            mat: Matrix::identity(dim).scale_real(T::one() / T::lit(dim as f64)),
        }
    }

    /// Convex combination `(1 - w) self + w other`.
    pub fn mix(&self, other: &Self, w: T) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        if !(w >= T::zero() && w <= T::one()) {
            return Err(Error::InvalidArgument("mixing weight must lie in [0, 1]".into()));
        }
        Ok(Self {
            mat: &self.mat.scale_real(T::one() - w) + &other.mat.scale_real(w),
        })
    }

    /// `U ρ U^H` for unitary `U`.
    pub fn conjugate(&self, u: &Matrix<T>) -> Result<Self> {
        if u.rows() != self.dim() || u.cols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: u.rows(),
            });
        }
        Ok(Self {
            mat: &(u * &self.mat) * &u.adjoint(),
        })
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.mat
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.mat
    }

    /// Smallest eigenvalue.
    pub fn min_eigenvalue(&self) -> T {
        eig::jacobi(self.mat.hermitian_part())
            .values
            .last()
            .copied()
            .unwrap_or_else(T::zero)
    }
}

pub(crate) fn check_density<T: Real>(mat: &Matrix<T>, tol: T) -> Result<()> {
    let n = mat.require_square()?;
    if n == 0 {
        return Err(Error::InvalidDensity("dimension must be positive".into()));
    }
    let defect = mat.hermitian_defect();
    if !(defect <= tol) {
        return Err(Error::InvalidDensity(format!(
            "Hermiticity defect {:e}",
            defect.as_f64()
        )));
    }
    let tr = mat.trace();
    if !((tr - cr(T::one())).norm() <= tol) {
        return Err(Error::InvalidDensity(format!(
            "trace {}+{}i is not 1",
            tr.re.as_f64(),
            tr.im.as_f64()
        )));
    }
    let min_eig = eig::jacobi(mat.hermitian_part())
        .values
        .last()
        .copied()
        .unwrap_or_else(T::zero);
    if !(min_eig >= -tol) {
        return Err(Error::InvalidDensity(format!(
            "negative eigenvalue {:e}",
            min_eig.as_f64()
        )));
    }
    Ok(())
}

/// `Tr|ρ - σ|`, without the customary factor ½ (range `[0, 2]`).
pub fn trace_distance<T: Real>(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>) -> Result<T> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    Ok(trace_norm(&(&rho.mat - &sigma.mat)))
}
