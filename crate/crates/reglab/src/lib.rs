//! reglab — a desk-scale numerical laboratory for weighted gradient
//! estimates of quasilinear elliptic double-obstacle problems.
//!
//! The crate solves the variational inequality
//!
//! ```text
//! ∫ ⟨a(x)|∇u|^{p-2}∇u, ∇(u-φ)⟩ ≤ ∫ ⟨b(x)|F|^{p-2}F, ∇(u-φ)⟩ + ∫ g (u-φ),
//!     ψ₁ ≤ u ≤ ψ₂,  u|∂Ω = 0,
//! ```
//!
//! on structured 2-D grids and then measures, instance by instance, the
//! empirical constants in the level-set, norm-domination and comparison
//! inequalities that govern its regularity theory: good-λ decay of
//! weighted distribution functions of `M_α(|∇u|^p)`, Lorentz and
//! Orlicz-Lorentz norm ratios against the composite datum, pointwise
//! Riesz-potential domination, reverse Hölder constants of frozen
//! coefficient solutions, and the weak-type bound of the fractional
//! maximal operator.
//!
//! Everything is deterministic: estimators take explicit seeds, all
//! reductions run in fixed index order, and experiment CSV output is
//! byte-identical across reruns.
//!
//! The `examples/` directory holds one runnable program per capability;
//! the `reglab` binary exposes the same machinery behind subcommands.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod field;
pub mod geometry;
pub mod norms;
pub mod operators;
pub mod report;
pub mod solver;
pub mod weights;

pub use error::{Error, Result};
pub use field::{ScalarField, VectorField};
pub use geometry::{Ball, CellSet, Domain, DomainKind, Grid, Vec2};
pub use norms::{LorentzParams, LorentzSecondary, YoungFamily, YoungFunction};
pub use operators::{MaximalMode, RadiusFamily};
pub use solver::{DiscreteProblem, ProblemSpec, RhsMode, Solution, SolverConfig};
pub use weights::{CoefficientField, Weight};
