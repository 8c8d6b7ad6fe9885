use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::algebra::{spectral_summary, CurvOp4};

/// Transpose of the adjugate, i.e. the cofactor matrix: `D sharp(D)^t = det(D) I`.
pub fn sharp(d: &Matrix3<f64>) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| {
        let (i1, i2) = ((i + 1) % 3, (i + 2) % 3);
        let (j1, j2) = ((j + 1) % 3, (j + 2) % 3);
        d[(i1, j1)] * d[(i2, j2)] - d[(i1, j2)] * d[(i2, j1)]
    })
}

/// Time derivative of `(A, B, C)` under the reaction part of the curvature
/// evolution (no Laplacian):
///
/// `A' = 2(A^2 + 2 A# + B B^t)`, `B' = 2(A B + B C + 2 B#)`, `C' = 2(C^2 + 2 C# + B^t B)`.
///
/// The sign of the `B#` term depends on the relative handedness of the bases
/// of `Lambda^+` and `Lambda^-`. The formula above holds in bases with matching
/// handedness; the crate's `Lambda^-` basis (the one in which the signed
/// B-spectrum gives the Ricci eigenvalues) has the other handedness, so here
/// the term enters as `-2 B#`. Both forms are the same geometric equation: the
/// shrinking cylinders and the Lie-algebra square in the tests pin the sign.
///
/// Returned as a `CurvOp4` holding the three derivative blocks.
pub fn reaction_rhs4(op: &CurvOp4) -> CurvOp4 {
    let (a, b, c) = (op.a(), op.b(), op.c());
    let da = (a * a + sharp(a) * 2.0 + b * b.transpose()) * 2.0;
    let db = (a * b + b * c - sharp(b) * 2.0) * 2.0;
    let dc = (c * c + sharp(c) * 2.0 + b.transpose() * b) * 2.0;
    CurvOp4::new(da, db, dc)
}

/// Three-dimensional eigenvalue system `m1' = m1^2 + m2 m3` and cyclic.
pub fn reaction_rhs3(m: [f64; 3]) -> [f64; 3] {
    [
        m[0] * m[0] + m[1] * m[2],
        m[1] * m[1] + m[0] * m[2],
        m[2] * m[2] + m[0] * m[1],
    ]
}

/// Cone quantities tracked along four-dimensional trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Monitors {
    /// `R + 4 B1 - 4 (B2 + B3)` on the signed B-spectrum (`= 4 Lambda_1`)
    pub u: f64,
    /// `R - 4 s3` (`= 2 (Lambda_1 + Lambda_2)`)
    pub v: f64,
    pub a12: f64,
    pub c12: f64,
    /// `tr A - tr C`
    pub trace_defect: f64,
    pub rm_norm: f64,
    #[serde(rename = "R")]
    pub scalar: f64,
}

pub const CHANNELS_4: [&str; 7] = ["u", "v", "a12", "c12", "trace_defect", "rm_norm", "R"];
pub const CHANNELS_3: [&str; 4] = ["ricci2", "m12", "m_norm", "R"];

impl Monitors {
    pub fn wpic_margin(&self) -> f64 {
        self.a12.min(self.c12)
    }

    pub fn values(&self) -> [f64; 7] {
        [self.u, self.v, self.a12, self.c12, self.trace_defect, self.rm_norm, self.scalar]
    }
}

pub fn monitor_functionals(op: &CurvOp4) -> Monitors {
    let s = spectral_summary(op);
    Monitors {
        u: s.u_monitor(),
        v: s.v_monitor(),
        a12: s.a_eigs[0] + s.a_eigs[1],
        c12: s.c_eigs[0] + s.c_eigs[1],
        trace_defect: op.a().trace() - op.c().trace(),
        rm_norm: s.rm_norm,
        scalar: s.scalar,
    }
}

/// `[2 m1 + m2 + m3, m1 + m2, |m|, m1 + m2 + m3]` for a sorted triple.
pub fn monitors3(m: [f64; 3]) -> [f64; 4] {
    [
        2.0 * m[0] + m[1] + m[2],
        m[0] + m[1],
        (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]).sqrt(),
        m[0] + m[1] + m[2],
    ]
}
