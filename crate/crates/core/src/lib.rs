//! Numerical laboratory for the curvature-operator algebra of oriented
//! four-manifolds.
//!
//! The crate is organised around five pieces:
//!
//! * [`algebra`]: the `(A, B, C)` block decomposition of a curvature operator on
//!   two-forms, spectral summaries, curvature-cone predicates and frame-based
//!   isotropic curvature.
//! * [`metric`]: an explicit catalog of soliton and model metrics, curvature
//!   evaluation (exact jets or finite differences) and soliton identities,
//!   including a numerically shot Bryant profile.
//! * [`flow`]: the reaction part of the curvature evolution (block system and
//!   the three-dimensional eigenvalue system) with cone monitors.
//! * [`audit`]: seeded sampling of algebraic curvature operators and frames,
//!   identity and implication campaigns, falsification searches.
//! * [`exec`]: the sequential / rayon execution switch used by every sweep.

pub mod algebra;
pub mod audit;
pub mod error;
pub mod exec;
pub mod flow;
pub mod metric;
pub mod ode;

pub use error::{Error, Result};
