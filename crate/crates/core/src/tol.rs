//! Numeric tolerances, in `f64` units. Generic code converts them with
//! [`Real::tol`](crate::Real::tol).

/// Maximum entrywise `|A - A^H|` accepted for Hermitian inputs.
pub const HERMITIAN_INPUT: f64 = 1e-8;

/// Maximum Hermiticity defect of matrices this crate constructs.
pub const HERMITIAN_CONSTRUCTED: f64 = 1e-10;

/// Density-matrix invariants (Hermitian, unit trace, PSD) on construction.
pub const DENSITY: f64 = 1e-10;

/// Density-matrix invariants on channel outputs.
pub const CHANNEL_OUTPUT: f64 = 1e-9;

/// Mixture probabilities must sum to one within this.
pub const PROBABILITY_SUM: f64 = 1e-12;

/// Per-term duration totals count as normalized within this.
pub const NORMALIZED_TOTAL: f64 = 1e-9;

/// Commutator norm below which a pair of terms is treated as commuting.
pub const COMMUTING: f64 = 1e-8;

/// Slack on the Lemma-1 style dominance check `observed <= bound`.
pub const DOMINANCE: f64 = 1e-8;
