use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{Matrix3, Matrix6, SMatrix};
use serde::{Deserialize, Serialize};

use super::tensor::CurvatureTensor;
use crate::error::{Error, Result};

/// Index pairs `(i, j)`, `i < j`, labelling the unit two-forms `e_i ^ e_j`.
pub(crate) const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Orientation of the orthonormal frame relative to the chosen orientation of
/// the manifold. Reversing it exchanges the roles of `A` and `C`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    Positive,
    Negative,
}

impl Orientation {
    pub fn from_sign(sign: i32) -> Self {
        if sign < 0 {
            Orientation::Negative
        } else {
            Orientation::Positive
        }
    }
}

/// Columns of the first matrix span `Lambda^+`, of the second `Lambda^-`,
/// expressed in the `PAIRS` basis.
pub fn lambda_basis() -> (SMatrix<f64, 6, 3>, SMatrix<f64, 6, 3>) {
    let h = FRAC_1_SQRT_2;
    // e12 +- e34, e13 +- e42 = e13 -+ e24, e14 +- e23
    let plus = SMatrix::<f64, 6, 3>::from_row_slice(&[
        h, 0.0, 0.0, //
        0.0, h, 0.0, //
        0.0, 0.0, h, //
        0.0, 0.0, h, //
        0.0, -h, 0.0, //
        h, 0.0, 0.0,
    ]);
    let minus = SMatrix::<f64, 6, 3>::from_row_slice(&[
        h, 0.0, 0.0, //
        0.0, h, 0.0, //
        0.0, 0.0, h, //
        0.0, 0.0, -h, //
        0.0, h, 0.0, //
        -h, 0.0, 0.0,
    ]);
    (plus, minus)
}

/// Curvature operator of an oriented four-dimensional inner-product space in
/// block form: `A` on self-dual forms, `C` on anti-self-dual forms, `B` the
/// mixed block mapping `Lambda^-` to `Lambda^+`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvOp4 {
    #[serde(rename = "A", with = "super::rowmajor")]
    a: Matrix3<f64>,
    #[serde(rename = "B", with = "super::rowmajor")]
    b: Matrix3<f64>,
    #[serde(rename = "C", with = "super::rowmajor")]
    c: Matrix3<f64>,
    bianchi_flag: bool,
}

fn symmetrize(m: &Matrix3<f64>) -> Matrix3<f64> {
    (m + m.transpose()) * 0.5
}

impl CurvOp4 {
    /// Raw blocks. `A` and `C` are symmetrised; the Bianchi flag records whether
    /// `tr A = tr C` holds on input.
    pub fn new(a: Matrix3<f64>, b: Matrix3<f64>, c: Matrix3<f64>) -> Self {
        let a = symmetrize(&a);
        let c = symmetrize(&c);
        let bianchi_flag = (a.trace() - c.trace()).abs() <= 1e-10 * (1.0 + a.trace().abs());
        Self {
            a,
            b,
            c,
            bianchi_flag,
        }
    }

    /// Blocks with the trace of `C` shifted onto that of `A`.
    pub fn with_bianchi(a: Matrix3<f64>, b: Matrix3<f64>, c: Matrix3<f64>) -> Self {
        let a = symmetrize(&a);
        let mut c = symmetrize(&c);
        let shift = (a.trace() - c.trace()) / 3.0;
        for i in 0..3 {
            c[(i, i)] += shift;
        }
        Self {
            a,
            b,
            c,
            bianchi_flag: true,
        }
    }

    pub fn zero() -> Self {
        Self::new(Matrix3::zeros(), Matrix3::zeros(), Matrix3::zeros())
    }

    pub fn a(&self) -> &Matrix3<f64> {
        &self.a
    }

    pub fn b(&self) -> &Matrix3<f64> {
        &self.b
    }

    pub fn c(&self) -> &Matrix3<f64> {
        &self.c
    }

    pub fn bianchi_flag(&self) -> bool {
        self.bianchi_flag
    }

    pub fn scalar(&self) -> f64 {
        4.0 * self.a.trace()
    }

    /// Frobenius norm of the full operator on two-forms.
    pub fn norm(&self) -> f64 {
        (self.a.norm_squared() + self.c.norm_squared() + 2.0 * self.b.norm_squared()).sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            a: self.a * s,
            b: self.b * s,
            c: self.c * s,
            bianchi_flag: self.bianchi_flag,
        }
    }

    /// Shifts `A` and `C` by the same multiple of the identity.
    pub fn shifted(&self, s: f64) -> Self {
        let id = Matrix3::identity() * s;
        Self {
            a: self.a + id,
            b: self.b,
            c: self.c + id,
            bianchi_flag: self.bianchi_flag,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.a.iter().chain(self.b.iter()).chain(self.c.iter()).all(|v| v.is_finite())
    }

    /// Operator matrix on two-forms in the `e_i ^ e_j` basis.
    pub fn operator_matrix(&self) -> Matrix6<f64> {
        let (p, m) = lambda_basis();
        p * self.a * p.transpose()
            + p * self.b * m.transpose()
            + m * self.b.transpose() * p.transpose()
            + m * self.c * m.transpose()
    }

    /// Reassembles `R_ijkl` in the positively oriented orthonormal frame.
    pub fn to_riemann(&self) -> CurvatureTensor {
        let op = self.operator_matrix();
        let mut t = CurvatureTensor::zeros(4);
        for (p, &(i, j)) in PAIRS.iter().enumerate() {
            for (q, &(k, l)) in PAIRS.iter().enumerate() {
                let v = op[(p, q)];
                t.set(i, j, k, l, v);
                t.set(j, i, k, l, -v);
                t.set(i, j, l, k, -v);
                t.set(j, i, l, k, v);
            }
        }
        t
    }
}

/// Decomposes an orthonormal-frame curvature tensor into `(A, B, C)`.
///
/// With `Orientation::Negative` the frame is treated as negatively oriented
/// (equivalently `e_4` is reversed), which swaps `A` and `C`.
pub fn build_from_riemann(riemann: &CurvatureTensor, orientation: Orientation) -> Result<CurvOp4> {
    if riemann.dim() != 4 {
        return Err(Error::SymmetryViolation(format!(
            "expected a four-dimensional tensor, got dimension {}",
            riemann.dim()
        )));
    }
    riemann.check_orthonormal(1e-10)?;
    let scale = riemann.max_abs();
    let defect = riemann.pair_symmetry_defect();
    if defect > 1e-8 * (1.0 + scale) {
        return Err(Error::SymmetryViolation(format!(
            "pair symmetry defect {defect:e} at scale {scale:e}"
        )));
    }
    let sign = |i: usize| match orientation {
        Orientation::Negative if i == 3 => -1.0,
        _ => 1.0,
    };
    let mut op = Matrix6::zeros();
    for (p, &(i, j)) in PAIRS.iter().enumerate() {
        for (q, &(k, l)) in PAIRS.iter().enumerate() {
            op[(p, q)] = sign(i) * sign(j) * sign(k) * sign(l) * riemann.get(i, j, k, l);
        }
    }
    let op = (op + op.transpose()) * 0.5;
    let (plus, minus) = lambda_basis();
    let a = plus.transpose() * op * plus;
    let b = plus.transpose() * op * minus;
    let c = minus.transpose() * op * minus;
    let mut out = CurvOp4::new(a, b, c);
    out.bianchi_flag = riemann.bianchi_defect() <= 1e-8 * (1.0 + scale);
    Ok(out)
}
