//! Curvature-operator algebra in dimension four.
//!
//! Conventions used throughout:
//!
//! * Components `R_ijkl` are taken in an orthonormal frame with `R_ijij` equal
//!   to the sectional curvature of the plane `e_i ^ e_j` (round unit sphere:
//!   `R_ijkl = d_ik d_jl - d_il d_jk`).
//! * Two-forms `e_i ^ e_j` (`i < j`) have unit length, and the curvature operator
//!   acts by `Rm(e_i ^ e_j) = sum_{k<l} R_ijkl e_k ^ e_l`.
//! * `Lambda^+` is spanned by `(e12 + e34)/sqrt2, (e13 + e42)/sqrt2, (e14 + e23)/sqrt2`
//!   and `Lambda^-` by the same combinations with a minus sign.
//!
//! With these choices `tr A = tr C = R/4` and `|Rc|^2 = 4|B|^2 + R^2/4` hold
//! exactly; the tests in `blocks` pin both identities.

mod blocks;
mod cones;
mod isotropic;
mod spectral;
mod tensor;

pub use blocks::{build_from_riemann, lambda_basis, CurvOp4, Orientation};
pub use cones::{classify_cones, norm_bound_check, ConeMargins, ConeReport, NormBound, DEFAULT_TOL};
pub use isotropic::{
    frame_components, isotropic_curvature, isotropic_of_components, wpic_frame_margins,
    FrameMargins, ISOTROPIC_BLOCK_FACTOR,
};
pub use spectral::{ricci_from_blocks, spectral_summary, RicciFromBlocks, SpectralSummary};
pub use tensor::CurvatureTensor;

pub(crate) mod rowmajor;
pub(crate) use blocks::PAIRS;
