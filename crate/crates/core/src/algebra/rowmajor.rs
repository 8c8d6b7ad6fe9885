//! Row-major `[[f64; 3]; 3]` serde shape for `Matrix3<f64>`.

use nalgebra::Matrix3;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub fn to_rows(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = m[(i, j)];
        }
    }
    out
}

pub fn from_rows(rows: &[[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| rows[i][j])
}

pub fn serialize<S: Serializer>(m: &Matrix3<f64>, s: S) -> Result<S::Ok, S::Error> {
    to_rows(m).serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Matrix3<f64>, D::Error> {
    let rows = <[[f64; 3]; 3]>::deserialize(d)?;
    Ok(from_rows(&rows))
}
