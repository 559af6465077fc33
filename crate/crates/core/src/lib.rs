// indexed loops over nodal/edge arrays are the house style for the stencil code
#![allow(clippy::needless_range_loop)]

//! Numerical laboratory for the anisotropic elliptic inclusion
//! `beta(u) - div a(x, Du) = mu` with diffuse measure data on box domains.
//!
//! The crate provides maximal monotone graphs with resolvents and Moreau
//! envelopes, a finite-difference grid with anisotropic energies, diffuse
//! measure data `f - div F`, a variational capacity minimizer, the
//! epsilon-regularization scheme extracting the triple `(u, w, nu)`, and
//! post-hoc diagnostics for the renormalized/entropy solution identities.

pub mod calculus;
pub mod capacity;
pub mod config;
pub mod csvio;
pub mod diagnostics;
pub mod error;
pub mod expr;
pub mod graph;
pub mod grid;
pub mod measure;
pub mod solver;
pub mod tolerances;

pub use capacity::{
    capacity_compact, capacity_general, capacity_minimizer, capacity_open, NodeSet,
};
pub use error::{BuildError, ConfigError, DiagnosticsError, SolverError};
pub use graph::{MonotoneGraph, SubgradientSpan};
pub use grid::{
    anisotropic_energy, apply_operator, check_embeddings, derivative, EmbeddingReport, FluxField,
    Grid, GridFunction, LerayLionsField,
};
pub use measure::MeasureData;
pub use solver::{
    run_scheme, run_scheme_from, solve_regularized, solve_twice_uniqueness, EpsilonSchedule,
    SolutionBundle, SolverOptions, TraceRow, UniquenessReport,
};
