use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use super::tensor::CurvatureTensor;
use crate::error::{Error, Result};

/// Ratio between the minimum of the isotropic curvature over four-frames of
/// both orientations and `min(A1 + A2, C1 + C2)`. Fixed by the round sphere,
/// where every frame gives 4 and both eigenvalue sums equal 2.
pub const ISOTROPIC_BLOCK_FACTOR: f64 = 2.0;

/// `R_1313 + R_1414 + R_2323 + R_2424 - 2 R_1234` read from frame components.
pub fn isotropic_of_components(t: &CurvatureTensor) -> f64 {
    t.get(0, 2, 0, 2) + t.get(0, 3, 0, 3) + t.get(1, 2, 1, 2) + t.get(1, 3, 1, 3) - 2.0 * t.get(0, 1, 2, 3)
}

fn frame_residual(frame: &Matrix4<f64>) -> f64 {
    (frame.transpose() * frame - Matrix4::identity()).amax()
}

/// Components of `riemann` in the frame whose vectors are the columns of `frame`.
pub fn frame_components(riemann: &CurvatureTensor, frame: &Matrix4<f64>) -> Result<CurvatureTensor> {
    let residual = frame_residual(frame);
    if residual > 1e-10 {
        return Err(Error::NonOrthonormalFrame { residual });
    }
    Ok(riemann.in_frame4(frame))
}

/// Isotropic curvature of the four-frame given by the columns of `frame`.
pub fn isotropic_curvature(riemann: &CurvatureTensor, frame: &Matrix4<f64>) -> Result<f64> {
    riemann.check_orthonormal(1e-10)?;
    Ok(isotropic_of_components(&frame_components(riemann, frame)?))
}

/// Worst values of the frame inequalities implied by nonnegative isotropic
/// curvature in dimension four.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameMargins {
    /// min over distinct `i, j, k, l` of `R_ikik + R_ilil + R_jkjk + R_jljl`
    pub four_sectional: f64,
    /// min over `i != j` of `R_ii + R_jj - 2 R_ijij`
    pub ricci_pair: f64,
    pub scalar: f64,
}

impl FrameMargins {
    pub fn min(&self) -> f64 {
        self.four_sectional.min(self.ricci_pair).min(self.scalar)
    }
}

pub fn wpic_frame_margins(t: &CurvatureTensor) -> FrameMargins {
    let ric = t.ricci();
    let mut four_sectional = f64::INFINITY;
    let mut ricci_pair = f64::INFINITY;
    for i in 0..4 {
        for j in 0..4 {
            if i == j {
                continue;
            }
            ricci_pair = ricci_pair.min(ric[(i, i)] + ric[(j, j)] - 2.0 * t.get(i, j, i, j));
            for k in 0..4 {
                if k == i || k == j {
                    continue;
                }
                let l = 6 - i - j - k;
                let s = t.get(i, k, i, k) + t.get(i, l, i, l) + t.get(j, k, j, k) + t.get(j, l, j, l);
                four_sectional = four_sectional.min(s);
            }
        }
    }
    FrameMargins {
        four_sectional,
        ricci_pair,
        scalar: ric.trace(),
    }
}
