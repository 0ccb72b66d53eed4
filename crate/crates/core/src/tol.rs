//! Numerical tolerances shared by every module.

/// Algebraic identities evaluated with a few dozen flops.
pub const ALGEBRAIC: f64 = 1e-12;

/// Slack allowed below zero for eigenvalues of positive semidefinite matrices.
pub const PSD_SLACK: f64 = 1e-9;

/// Trace-power comparisons on composite spin/momentum states.
pub const TRACE_POWER: f64 = 1e-10;

/// Sorted-spectrum comparisons.
pub const SPECTRUM: f64 = 1e-9;

/// Invariants preserved by unitary evolution.
pub const EVOLUTION: f64 = 1e-8;

/// Denominators below this are treated as zero-weight configurations.
pub const DENOMINATOR: f64 = 1e-12;
