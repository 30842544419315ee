//! The numerical tolerances used across the crate.
//!
//! Tensors are built analytically here, so the residuals these tolerances
//! absorb are pure rounding noise, not discretization or solver error.

/// Absolute tolerance for simplex membership and normalization checks:
/// entries may be as low as `-ATOL` and totals must be within `ATOL` of 1.
pub const ATOL: f64 = 1e-9;

/// Threshold below which a probability counts as zero when it appears in a
/// conditioning denominator. Conditionals with a denominator under `ZTOL`
/// are reported as undefined rather than divided out.
pub const ZTOL: f64 = 1e-12;

/// Constraint-residual tolerance for the P-divisibility feasibility solver.
pub const FTOL: f64 = 1e-8;

/// Two feasibility witnesses are considered distinct when some entry
/// differs by more than this.
pub const WITNESS_TOL: f64 = 1e-6;
