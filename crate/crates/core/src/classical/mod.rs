//! Two-segment formulation for strings split by supports: a finite-difference
//! solver enforcing continuity and the slope jump at each support node, and
//! for one support the explicit series solution with its residual checks.

pub mod fd;
pub mod series;

pub use fd::{solve_fd_coupled, solve_fd_coupled_with, FdOptions, InterfaceTrace, TraceSampling};
pub use series::{
    compatibility_flags, compatibility_sweep, evaluate_series_solution, fourier_coefficients,
    h_consistency_residual, initial_compatibility_residual, CompatibilityFlags, CompatibilitySweep,
    Segment, SeriesExpansion,
};
