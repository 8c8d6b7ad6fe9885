use nalgebra::{Matrix3, Matrix4};
use serde::{Deserialize, Serialize};

use super::blocks::CurvOp4;
use crate::error::{Error, Result};

/// Sorted spectral data of a block curvature operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSummary {
    pub a_eigs: [f64; 3],
    pub c_eigs: [f64; 3],
    /// Singular values of `B`, ascending.
    pub b_singular: [f64; 3],
    pub b_det_sign: i8,
    /// Ascending sort of `(sign(det B) s1, s2, s3)`.
    pub b_signed: [f64; 3],
    pub ricci_eigs: [f64; 4],
    pub traceless_ricci_eigs: [f64; 4],
    pub scalar: f64,
    pub rm_norm: f64,
    pub ricci_norm_sq: f64,
}

impl SpectralSummary {
    /// `|B|^2` as the sum of squared singular values.
    pub fn b_norm_sq(&self) -> f64 {
        self.b_singular.iter().map(|s| s * s).sum()
    }

    pub fn a_norm_sq(&self) -> f64 {
        self.a_eigs.iter().map(|s| s * s).sum()
    }

    pub fn c_norm_sq(&self) -> f64 {
        self.c_eigs.iter().map(|s| s * s).sum()
    }

    /// `u = R + 4 B1 - 4 (B2 + B3)` on the signed B-spectrum; equals `4 Lambda_1`.
    pub fn u_monitor(&self) -> f64 {
        let [b1, b2, b3] = self.b_signed;
        self.scalar + 4.0 * b1 - 4.0 * (b2 + b3)
    }

    /// Literal reading of `u` with nonnegative singular values.
    pub fn u_monitor_unsigned(&self) -> f64 {
        let [b1, b2, b3] = self.b_singular;
        self.scalar + 4.0 * b1 - 4.0 * (b2 + b3)
    }

    /// `v = R - 4 s3`; equals `2 (Lambda_1 + Lambda_2)`.
    pub fn v_monitor(&self) -> f64 {
        self.scalar - 4.0 * self.b_singular[2]
    }
}

fn sort3(mut v: [f64; 3]) -> [f64; 3] {
    v.sort_by(f64::total_cmp);
    v
}

fn sort4(mut v: [f64; 4]) -> [f64; 4] {
    v.sort_by(f64::total_cmp);
    v
}

pub(crate) fn sym_eigs(m: &Matrix3<f64>) -> [f64; 3] {
    let e = m.symmetric_eigenvalues();
    sort3([e[0], e[1], e[2]])
}

/// Ricci endomorphism of the algebraic curvature tensor with blocks
/// `((R/12) I, B, (R/12) I)`, contracted directly from its components.
pub(crate) fn ricci_matrix(scalar: f64, b: &Matrix3<f64>) -> Matrix4<f64> {
    let iso = Matrix3::identity() * (scalar / 12.0);
    let t = CurvOp4::new(iso, *b, iso).to_riemann();
    Matrix4::from_fn(|i, k| (0..4).map(|j| t.get(i, j, k, j)).sum())
}

pub fn spectral_summary(op: &CurvOp4) -> SpectralSummary {
    let a_eigs = sym_eigs(op.a());
    let c_eigs = sym_eigs(op.c());
    let svd = op.b().svd(false, false);
    let b_singular = sort3([
        svd.singular_values[0],
        svd.singular_values[1],
        svd.singular_values[2],
    ]);
    let det = op.b().determinant();
    let degenerate = b_singular[0] <= 1e-13 * (1.0 + b_singular[2]);
    let b_det_sign: i8 = if degenerate || det == 0.0 {
        0
    } else if det > 0.0 {
        1
    } else {
        -1
    };
    let s = if b_det_sign < 0 { -1.0 } else { 1.0 };
    let b_signed = sort3([s * b_singular[0], b_singular[1], b_singular[2]]);

    let scalar = op.scalar();
    let ric = ricci_matrix(scalar, op.b());
    let ric = (ric + ric.transpose()) * 0.5;
    let e = ric.symmetric_eigenvalues();
    let ricci_eigs = sort4([e[0], e[1], e[2], e[3]]);
    let traceless_ricci_eigs = ricci_eigs.map(|l| l - scalar / 4.0);
    SpectralSummary {
        a_eigs,
        c_eigs,
        b_singular,
        b_det_sign,
        b_signed,
        ricci_eigs,
        traceless_ricci_eigs,
        scalar,
        rm_norm: op.norm(),
        ricci_norm_sq: ricci_eigs.iter().map(|l| l * l).sum(),
    }
}

/// Outcome of reconstructing the Ricci spectrum from the B-spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RicciFromBlocks {
    pub eigs: [f64; 4],
    /// Sign attached to the smallest singular value that produced `eigs`.
    pub sign_used: i8,
    pub deviation: f64,
}

/// The four values `{B1-B2-B3, B2-B1-B3, B3-B1-B2, B1+B2+B3} + R/4`, sorted.
pub fn ricci_formula(b: [f64; 3], scalar: f64) -> [f64; 4] {
    let [b1, b2, b3] = b;
    let q = scalar / 4.0;
    sort4([
        b1 - b2 - b3 + q,
        b2 - b1 - b3 + q,
        b3 - b1 - b2 + q,
        b1 + b2 + b3 + q,
    ])
}

fn max_dev(x: &[f64; 4], y: &[f64; 4]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// Ricci spectrum from the signed B-spectrum, checked against the direct
/// spectrum at `1e-9 (1 + |Rm|)`.
///
/// When `det B = 0` the `+1` gauge is tried before `-1`. On a mismatch every
/// sign pattern on the singular values is tried and the one that matches, if
/// any, is reported in the error.
pub fn ricci_from_blocks(summary: &SpectralSummary) -> Result<RicciFromBlocks> {
    let tol = 1e-9 * (1.0 + summary.rm_norm);
    let sigma = summary.b_singular;
    let candidates: &[i8] = match summary.b_det_sign {
        0 => &[1, -1],
        s if s > 0 => &[1],
        _ => &[-1],
    };
    let mut best: Option<RicciFromBlocks> = None;
    for &sign in candidates {
        let b = sort3([f64::from(sign) * sigma[0], sigma[1], sigma[2]]);
        let eigs = ricci_formula(b, summary.scalar);
        let deviation = max_dev(&eigs, &summary.ricci_eigs);
        let cand = RicciFromBlocks {
            eigs,
            sign_used: sign,
            deviation,
        };
        if deviation <= tol {
            return Ok(cand);
        }
        if best.as_ref().map_or(true, |b| deviation < b.deviation) {
            best = Some(cand);
        }
    }
    let mut matched = None;
    'search: for s0 in [1i8, -1] {
        for s1 in [1i8, -1] {
            for s2 in [1i8, -1] {
                let b = [
                    f64::from(s0) * sigma[0],
                    f64::from(s1) * sigma[1],
                    f64::from(s2) * sigma[2],
                ];
                if max_dev(&ricci_formula(b, summary.scalar), &summary.ricci_eigs) <= tol {
                    matched = Some([s0, s1, s2]);
                    break 'search;
                }
            }
        }
    }
    Err(Error::ConventionMismatch {
        deviation: best.map_or(f64::INFINITY, |b| b.deviation),
        matched,
    })
}
