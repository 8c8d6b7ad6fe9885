//! Explicit soliton and model metrics in coordinates, their curvature, and
//! the gradient-soliton identities.
//!
//! Curvature is computed in coordinates from the metric entries and then
//! expressed in the orthonormal frame `E = L^{-T}`, where `g = L L^T` is the
//! Cholesky factorisation at the point. The frame is deterministic, so block
//! signs downstream are reproducible.

mod bryant;
mod chart;
mod curvature;
mod dd;
pub(crate) mod jet;
mod soliton;

pub use bryant::{bryant_profile, BryantProfile, ProfilePoint};
pub use chart::{catalog_metric, DomainHint, Factor, MetricChart, CATALOG};
pub use curvature::{riemann_at, scalar_at, PointCurvature, Scheme, DEFAULT_FD_STEP};
pub use soliton::{
    energy_at, normalize_steady, soliton_residuals, soliton_survey, ProbeRecord, SolitonResiduals, SolitonSurvey,
};
