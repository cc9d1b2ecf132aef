//! Numerical laboratory for thermodynamic-limit operator dynamics at finite
//! truncation.
//!
//! The crate builds a scale operator `S` with discrete spectrum, regularized
//! Hamiltonian families `H_L`, and the weighted operator seminorms
//! `|X|^{f,k} = max(|f(S) X S^k|, |S^k X f(S)|)` that generate the graph
//! topology on the truncated operator algebra. On top of those it runs
//! convergence suites: Cauchy profiling of propagator and Heisenberg-evolution
//! sequences, Taylor reconstruction of the dynamics from the regularized
//! derivation, conjugation-membership chains, and Gibbs-state profiles.

pub mod alpha_sets;
pub mod dynamics;
pub mod error;
pub mod fermion;
pub mod hamiltonian;
pub mod models;
pub mod operator;
pub mod sampler;
pub mod seminorm;
pub mod spectral;

pub use error::CoreError;
pub use operator::Operator;
pub use seminorm::{ConvergenceReport, Pairing, SeminormSpec, Verdict};
pub use spectral::{Spectrum, SpectrumKind, TestFunction};
