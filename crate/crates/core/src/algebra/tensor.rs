use nalgebra::{DMatrix, Matrix4};

use crate::error::{Error, Result};

/// Covariant rank-4 tensor components `R_ijkl` in some frame, together with the
/// Gram matrix of that frame (identity for an orthonormal frame).
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureTensor {
    dim: usize,
    data: Vec<f64>,
    gram: DMatrix<f64>,
}

impl CurvatureTensor {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim.pow(4)],
            gram: DMatrix::identity(dim, dim),
        }
    }

    /// Builds components in an orthonormal frame from a closure.
    pub fn from_fn(dim: usize, f: impl Fn(usize, usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    for l in 0..dim {
                        t.set(i, j, k, l, f(i, j, k, l));
                    }
                }
            }
        }
        t
    }

    /// Constant sectional curvature `kappa`.
    pub fn constant_curvature(dim: usize, kappa: f64) -> Self {
        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        Self::from_fn(dim, |i, j, k, l| kappa * (d(i, k) * d(j, l) - d(i, l) * d(j, k)))
    }

    pub fn with_gram(mut self, gram: DMatrix<f64>) -> Self {
        assert_eq!(gram.nrows(), self.dim);
        self.gram = gram;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.dim + j) * self.dim + k) * self.dim + l
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.data[self.idx(i, j, k, l)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        let n = self.idx(i, j, k, l);
        self.data[n] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// Components in the frame `f_a = sum_i frame[(i, a)] e_i`.
    pub fn in_frame(&self, frame: &DMatrix<f64>) -> Self {
        let n = self.dim;
        assert_eq!(frame.nrows(), n);
        // contract one slot at a time: n^5 work instead of n^8
        let mut cur = self.data.clone();
        for slot in 0..4 {
            let mut next = vec![0.0; cur.len()];
            let stride = n.pow(3 - slot as u32);
            for (pos, out) in next.iter_mut().enumerate() {
                let a = (pos / stride) % n;
                let base = pos - a * stride;
                let mut acc = 0.0;
                for i in 0..n {
                    acc += frame[(i, a)] * cur[base + i * stride];
                }
                *out = acc;
            }
            cur = next;
        }
        let gram = frame.transpose() * &self.gram * frame;
        Self {
            dim: n,
            data: cur,
            gram,
        }
    }

    pub fn in_frame4(&self, frame: &Matrix4<f64>) -> Self {
        self.in_frame(&DMatrix::from_iterator(4, 4, frame.iter().copied()))
    }

    /// Largest violation of `R_ijkl = -R_jikl = -R_ijlk = R_klij`.
    pub fn pair_symmetry_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let v = self.get(i, j, k, l);
                        worst = worst
                            .max((v + self.get(j, i, k, l)).abs())
                            .max((v + self.get(i, j, l, k)).abs())
                            .max((v - self.get(k, l, i, j)).abs());
                    }
                }
            }
        }
        worst
    }

    /// Largest violation of the first Bianchi identity.
    pub fn bianchi_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let s = self.get(i, j, k, l) + self.get(i, k, l, j) + self.get(i, l, j, k);
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }

    /// `Ric_ik = sum_j R_ijkj` (orthonormal frame).
    pub fn ricci(&self) -> DMatrix<f64> {
        let n = self.dim;
        DMatrix::from_fn(n, n, |i, k| (0..n).map(|j| self.get(i, j, k, j)).sum())
    }

    pub fn scalar(&self) -> f64 {
        self.ricci().trace()
    }

    pub fn check_orthonormal(&self, tol: f64) -> Result<()> {
        let residual = (&self.gram - DMatrix::identity(self.dim, self.dim)).amax();
        if residual > tol {
            return Err(Error::NonOrthonormalFrame { residual });
        }
        Ok(())
    }

    /// Orthogonal direct sum of two tensors (product manifold curvature).
    pub fn direct_sum(&self, other: &Self) -> Self {
        let n = self.dim + other.dim;
        let p = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let idx = [i, j, k, l];
                        let v = if idx.iter().all(|&x| x < p) {
                            self.get(i, j, k, l)
                        } else if idx.iter().all(|&x| x >= p) {
                            other.get(i - p, j - p, k - p, l - p)
                        } else {
                            0.0
                        };
                        out.set(i, j, k, l, v);
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_sphere_contractions() {
        let t = CurvatureTensor::constant_curvature(4, 1.0);
        assert_eq!(t.get(0, 1, 0, 1), 1.0);
        assert_eq!(t.get(0, 1, 1, 0), -1.0);
        assert!((t.scalar() - 12.0).abs() < 1e-15);
        assert_eq!(t.bianchi_defect(), 0.0);
        assert_eq!(t.pair_symmetry_defect(), 0.0);
    }

    #[test]
    fn rotation_preserves_constant_curvature() {
        let t = CurvatureTensor::constant_curvature(4, 2.0);
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        let mut f = DMatrix::identity(4, 4);
        f[(0, 0)] = c;
        f[(0, 2)] = -s;
        f[(2, 0)] = s;
        f[(2, 2)] = c;
        let r = t.in_frame(&f);
        let diff: f64 = r
            .as_slice()
            .iter()
            .zip(t.as_slice())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(diff < 1e-14);
        r.check_orthonormal(1e-12).unwrap();
    }
}
