//! Numerical thresholds shared across the crate.
//!
//! Every guard that turns a near-singular situation into an error, and every
//! convergence threshold, is defined here so that callers and tests agree.

/// Minimum separation between consecutive eigenvalues that the perturbation
/// formulas divide by. Smaller gaps are rejected.
pub const EIGENGAP: f64 = 1e-12;

/// Minimum `|t_i - mu|` accepted by the truncated formulas.
pub const SHIFT_DENOMINATOR: f64 = 1e-12;

/// Nyström pivots `|lambda'_i - mu|` below this multiple of the kernel norm
/// are rejected instead of pseudo-inverted.
pub const NYSTROM_PIVOT: f64 = 1e-12;

/// Jacobi stops once the off-diagonal Frobenius norm falls below this
/// multiple of the Frobenius norm of the input.
pub const JACOBI_OFF_DIAGONAL: f64 = 1e-14;

/// Sweep cap for the cyclic Jacobi solver.
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Dimension at or below which the partial solver hands off to Jacobi.
pub const DENSE_FALLBACK_DIM: usize = 256;

/// Relative Ritz residual `|Ay - theta y| / |A|` accepted by Lanczos.
pub const LANCZOS_RESIDUAL: f64 = 1e-11;

/// Restart cap for the thick-restart Lanczos solver.
pub const LANCZOS_MAX_RESTARTS: usize = 2000;

/// Relative norm below which a column is considered linearly dependent
/// during orthonormalization.
pub const RANK_DEFICIENCY: f64 = 1e-12;

/// Slack on the minimum eigenvalue when checking positive semidefiniteness,
/// relative to the spectral norm.
pub const PSD_SLACK: f64 = 1e-8;
