//! Positive-time product formulas for simulating `e^{-iHt}`.
//!
//! The crate evaluates deterministic (Trotter, Strang) and randomized
//! (uniform single-term stages, uniform-permutation stages) splitting
//! schedules exactly, measures trace-distance error against exact
//! evolution, evaluates the mixed-unitary error bound
//! `D(ρ₀, ψ₀) + 2‖E(U) − U₀‖ + E‖U − U₀‖²`, and audits the third-order
//! word coefficients that no positive-time schedule can match.
//!
//! Numeric modules are generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`, which is what the experiment harness uses.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod channels;
pub mod error;
pub mod hamiltonians;
pub mod harness;
pub mod matkernel;
pub mod scalar;
pub mod schedules;
pub mod series;
pub mod tol;

pub use error::{Error, Result};
pub use scalar::Real;

pub type ComplexMatrix = matkernel::Matrix<f64>;
pub type DensityMatrix = matkernel::DensityMatrix<f64>;
pub type TermSet = hamiltonians::TermSet<f64>;
pub type Word = schedules::Word<f64>;
pub type UnitaryMixture = schedules::UnitaryMixture<f64>;
pub type Superoperator = channels::Superoperator<f64>;
pub type BoundReport = channels::BoundReport;

pub type TruncatedSeries = series::TruncatedSeries<f64>;
pub type InterleavingProfile = series::InterleavingProfile<f64>;
