use serde::{Deserialize, Serialize};

use super::spectral::SpectralSummary;

/// Default absolute-plus-relative tolerance for the `>= 0` tests.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Signed distances of a curvature operator to the cone boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeMargins {
    /// `A1 + A2`
    pub a12: f64,
    /// `C1 + C2`
    pub c12: f64,
    /// `Lambda_1`
    pub ricci_min: f64,
    /// `Lambda_1 + Lambda_2`
    pub ricci_two_min: f64,
    /// `R - 4 s3`
    pub r_minus_4_sigma3: f64,
}

impl ConeMargins {
    pub fn from_summary(s: &SpectralSummary) -> Self {
        Self {
            a12: s.a_eigs[0] + s.a_eigs[1],
            c12: s.c_eigs[0] + s.c_eigs[1],
            ricci_min: s.ricci_eigs[0],
            ricci_two_min: s.ricci_eigs[0] + s.ricci_eigs[1],
            r_minus_4_sigma3: s.v_monitor(),
        }
    }

    pub fn wpic_margin(&self) -> f64 {
        self.a12.min(self.c12)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeReport {
    pub pic: bool,
    pub wpic: bool,
    pub half_pic: bool,
    pub half_wpic: bool,
    pub a_nonneg: bool,
    pub c_nonneg: bool,
    pub ricci_nonneg: bool,
    pub ricci_2nonneg: bool,
    /// Least `L` with `max{A3, s3, C3} <= L min{A1 + A2, C1 + C2}`.
    pub uniform_pic_lambda: Option<f64>,
    pub margins: ConeMargins,
}

/// Cone predicates with tolerance `tol (1 + |Rm|)` per eigenvalue; margins that
/// sum two eigenvalues get twice that, so every implication between the
/// predicates survives the tolerance.
pub fn classify_cones(summary: &SpectralSummary, tol: f64) -> ConeReport {
    assert!(tol >= 0.0, "tolerance must be nonnegative");
    let eps = tol * (1.0 + summary.rm_norm);
    let m = ConeMargins::from_summary(summary);
    let pos2 = |x: f64| x > 2.0 * eps;
    let nonneg2 = |x: f64| x >= -2.0 * eps;
    let pic = pos2(m.a12) && pos2(m.c12);
    let wpic = nonneg2(m.a12) && nonneg2(m.c12);
    let half_pic = pos2(m.a12) || pos2(m.c12);
    let half_wpic = nonneg2(m.a12) || nonneg2(m.c12);
    let denom = m.a12.min(m.c12);
    let uniform_pic_lambda = (denom > 2.0 * eps).then(|| {
        let top = summary.a_eigs[2].max(summary.b_singular[2]).max(summary.c_eigs[2]);
        top / denom
    });
    ConeReport {
        pic,
        wpic,
        half_pic,
        half_wpic,
        a_nonneg: summary.a_eigs[0] >= -eps,
        c_nonneg: summary.c_eigs[0] >= -eps,
        ricci_nonneg: m.ricci_min >= -eps,
        ricci_2nonneg: nonneg2(m.ricci_two_min),
        uniform_pic_lambda,
        margins: m,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormBound {
    pub applicable: bool,
    pub rm_norm: f64,
    #[serde(rename = "R")]
    pub scalar: f64,
    pub holds: bool,
}

/// `|Rm| <= R` under `A >= 0`, `C >= 0`, `Rc >= 0`.
pub fn norm_bound_check(summary: &SpectralSummary, tol: f64) -> NormBound {
    let eps = tol * (1.0 + summary.rm_norm);
    let applicable = summary.a_eigs[0] >= -eps && summary.c_eigs[0] >= -eps && summary.ricci_eigs[0] >= -eps;
    let rm_norm = (summary.a_norm_sq() + summary.c_norm_sq() + 2.0 * summary.b_norm_sq()).sqrt();
    NormBound {
        applicable,
        rm_norm,
        scalar: summary.scalar,
        holds: applicable && rm_norm <= summary.scalar * (1.0 + 1e-9) + eps,
    }
}
