//! Solver and verification tolerances, fixed in one place.

/// Inner residual tolerance is `TOL_RES_FACTOR * (1 + variation(mu))`.
pub const TOL_RES_FACTOR: f64 = 1e-9;

/// Maximum damped-Newton iterations per regularized solve.
pub const MAX_INNER_ITER: usize = 500;

/// Default Cauchy tolerance for the epsilon scheme.
pub const DEFAULT_TOL_SCHEME: f64 = 1e-7;

/// Contact detection margin is `CONC_FACTOR * tol_scheme`.
pub const CONC_FACTOR: f64 = 10.0;

/// Identity/entropy residual tolerance is `TOL_IDENTITY_FACTOR * (1 + variation(mu))`.
pub const TOL_IDENTITY_FACTOR: f64 = 1e-6;

/// Complementarity defect bound for converged bundles.
pub const TOL_COMPLEMENTARITY: f64 = 1e-8;

/// Two-start agreement bound for the uniqueness check.
pub const TOL_UNIQUE: f64 = 1e-8;

/// Multiplicative headroom on the linear truncation-energy bound.
pub const ESTIMATE_HEADROOM: f64 = 1.05;

/// Sign slack for concentration checks is `TOL_SIGN_FACTOR * (1 + variation(mu))`.
pub const TOL_SIGN_FACTOR: f64 = 1e-9;
