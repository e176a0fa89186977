//! Transverse vibration of a fixed-end string resting on interior elastic
//! point supports.
//!
//! Three independent solvers cover the same model
//! `u_tt − a²u_xx = −Σ_k β_k u(x_k) δ(x − x_k)`:
//! a sine-basis Galerkin solver ([`galerkin`]), a finite-difference solver
//! coupling two segments through continuity and the slope jump `σu(l)`
//! ([`classical`]), and a separated-variables series with a Duhamel term
//! driven by the support displacement `h(t)` ([`classical::series`]).
//! [`diagnostics`] measures energy, stability bounds and collocation
//! residuals; [`tension`] turns frequencies into cable tension.

// `!(x > 0.0)` rejects NaN together with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classical;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod field;
pub mod galerkin;
pub mod io;
pub mod model;
pub mod quadrature;
pub mod tension;

pub use error::{Error, Result};
