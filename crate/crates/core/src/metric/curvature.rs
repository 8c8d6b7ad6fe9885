//! Christoffel symbols, Riemann tensor and potential Hessian at a point of a chart.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::chart::{Factor, MetricChart};
use super::dd::DoubleDouble;
use super::jet::{Dual, Jet, Scalar};
use crate::algebra::CurvatureTensor;
use crate::error::{Error, Result};

pub const DEFAULT_FD_STEP: f64 = 1e-4;
/// Step of the five-point stencil that differentiates exact scalar curvature.
const CLOSED_FORM_GRADIENT_STEP: f64 = 5e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Exact derivatives of the closed-form entries (profile formulas for Bryant factors).
    ClosedForm,
    /// Central differences of the metric entries with step `h`.
    FiniteDifference { h: f64 },
}

impl Default for Scheme {
    fn default() -> Self {
        Scheme::ClosedForm
    }
}

/// Curvature at a point, expressed in the orthonormal frame `frame` (columns,
/// coordinate components).
#[derive(Debug, Clone, PartialEq)]
pub struct PointCurvature {
    pub point: Vec<f64>,
    pub metric: DMatrix<f64>,
    pub frame: DMatrix<f64>,
    pub riemann: CurvatureTensor,
    pub ricci: DMatrix<f64>,
    pub scalar: f64,
    /// Largest change of any frame component between steps `h` and `h/2`
    /// (zero for the closed-form scheme).
    pub error_bar: f64,
}

/// Frame components of everything the soliton identities need.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct FrameGeometry {
    pub curvature: PointCurvature,
    pub potential: f64,
    pub grad_potential: DVector<f64>,
    pub hess_potential: DMatrix<f64>,
}

/// Coordinate-basis geometry: metric, lower-index Riemann tensor and potential data.
#[derive(Debug, Clone)]
struct LocalGeometry {
    g: DMatrix<f64>,
    riemann: CurvatureTensor,
    f: f64,
    df: DVector<f64>,
    hess: DMatrix<f64>,
}

/// Value, first and second partials of each metric entry and of the potential.
struct Derivatives<T = f64> {
    k: usize,
    g: Vec<T>,
    /// `dg[c][a * k + b]` is the partial of `g_ab` along `x_c`.
    dg: Vec<Vec<T>>,
    ddg: Vec<Vec<Vec<T>>>,
    f: T,
    df: Vec<T>,
    ddf: Vec<Vec<T>>,
}

/// Inverse of a small symmetric positive definite matrix by Gauss-Jordan
/// elimination (no pivoting needed).
fn spd_inverse<T: Scalar>(k: usize, g: &[T]) -> Vec<T> {
    let mut a = g.to_vec();
    let mut inv: Vec<T> = (0..k * k).map(|i| T::cst(if i / k == i % k { 1.0 } else { 0.0 })).collect();
    for c in 0..k {
        let piv = a[c * k + c].recip();
        for j in 0..k {
            a[c * k + j] = a[c * k + j] * piv;
            inv[c * k + j] = inv[c * k + j] * piv;
        }
        for r in 0..k {
            if r != c {
                let factor = a[r * k + c];
                for j in 0..k {
                    a[r * k + j] = a[r * k + j] - factor * a[c * k + j];
                    inv[r * k + j] = inv[r * k + j] - factor * inv[c * k + j];
                }
            }
        }
    }
    inv
}

/// Christoffel symbols `Gamma^n_bc` (flattened `(n * k + b) * k + c`) and
/// the inverse metric.
fn christoffel<T: Scalar>(d: &Derivatives<T>) -> (Vec<T>, Vec<T>) {
    let k = d.k;
    let g_inv = spd_inverse(k, &d.g);
    let dg = |c: usize, a: usize, b: usize| d.dg[c][a * k + b];
    let mut gamma = vec![T::cst(0.0); k * k * k];
    for n in 0..k {
        for b in 0..k {
            for c in 0..k {
                let mut acc = T::cst(0.0);
                for m in 0..k {
                    acc = acc + g_inv[n * k + m] * (dg(b, m, c) + dg(c, m, b) - dg(m, b, c));
                }
                gamma[(n * k + b) * k + c] = acc * 0.5;
            }
        }
    }
    (gamma, g_inv)
}

/// Lower-index Riemann tensor in coordinates, with `R_abab` the sectional
/// curvature times the area factor.
fn riemann_lower<T: Scalar>(d: &Derivatives<T>, gamma: &[T]) -> Vec<T> {
    let k = d.k;
    let dd = |c: usize, e: usize, a: usize, b: usize| d.ddg[c][e][a * k + b];
    let gam = |n: usize, b: usize, c: usize| gamma[(n * k + b) * k + c];
    let mut out = vec![T::cst(0.0); k * k * k * k];
    for a in 0..k {
        for b in 0..k {
            for c in 0..k {
                for e in 0..k {
                    let mut v = (dd(b, c, a, e) + dd(a, e, b, c) - dd(b, e, a, c) - dd(a, c, b, e)) * 0.5;
                    for n in 0..k {
                        for p in 0..k {
                            v = v + d.g[n * k + p] * (gam(n, b, c) * gam(p, a, e) - gam(n, b, e) * gam(p, a, c));
                        }
                    }
                    out[((a * k + b) * k + c) * k + e] = v;
                }
            }
        }
    }
    out
}

/// Scalar curvature `g^ac g^bd R_abcd` in any scalar type.
fn scalar_generic<T: Scalar>(d: &Derivatives<T>) -> T {
    let k = d.k;
    let (gamma, g_inv) = christoffel(d);
    let riem = riemann_lower(d, &gamma);
    let mut acc = T::cst(0.0);
    for a in 0..k {
        for b in 0..k {
            for c in 0..k {
                for e in 0..k {
                    acc = acc + g_inv[a * k + c] * g_inv[b * k + e] * riem[((a * k + b) * k + c) * k + e];
                }
            }
        }
    }
    acc
}

impl Derivatives<f64> {
    fn assemble(&self) -> Result<LocalGeometry> {
        let k = self.k;
        if !self.g.iter().all(|v| v.is_finite()) || DMatrix::from_row_slice(k, k, &self.g).cholesky().is_none() {
            return Err(Error::SingularMetric { point: vec![] });
        }
        let (gamma, _) = christoffel(self);
        let riem = riemann_lower(self, &gamma);
        let g = DMatrix::from_row_slice(k, k, &self.g);
        let riemann = CurvatureTensor::from_fn(k, |a, b, c, e| riem[((a * k + b) * k + c) * k + e]).with_gram(g.clone());
        let hess = DMatrix::from_fn(k, k, |a, b| {
            let mut v = self.ddf[a][b];
            for n in 0..k {
                v -= gamma[(n * k + a) * k + b] * self.df[n];
            }
            v
        });
        Ok(LocalGeometry {
            g,
            riemann,
            f: self.f,
            df: DVector::from_column_slice(&self.df),
            hess,
        })
    }
}

fn jet_derivatives<T: Scalar>(factor: &Factor, x: &[T], rho: f64) -> Derivatives<T> {
    let k = x.len();
    let vars: Vec<Jet<T>> = x.iter().enumerate().map(|(i, &v)| Jet::var(v, i)).collect();
    let g = factor.metric_generic(&vars);
    let f = factor.potential_generic(&vars, rho);
    Derivatives {
        k,
        g: g.iter().map(|j| j.v).collect(),
        dg: (0..k).map(|c| g.iter().map(|j| j.g[c]).collect()).collect(),
        ddg: (0..k)
            .map(|c| (0..k).map(|e| g.iter().map(|j| j.h[c][e]).collect()).collect())
            .collect(),
        f: f.v,
        df: f.g[..k].to_vec(),
        ddf: (0..k).map(|c| f.h[c][..k].to_vec()).collect(),
    }
}

/// Fourth-order central weights (times 12) for the first derivative.
const D1: [(f64, f64); 4] = [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)];
/// Fourth-order central weights (times 12) for the second derivative.
const D2: [(f64, f64); 5] = [(-2.0, -1.0), (-1.0, 16.0), (0.0, -30.0), (1.0, 16.0), (2.0, -1.0)];

/// Fourth-order central differences of metric entries and potential with
/// step `h`. Stencil values are computed in double-double arithmetic, so
/// the result is limited by truncation rather than by rounding.
fn fd_derivatives(factor: &Factor, x: &[f64], rho: f64, h: f64) -> Derivatives {
    let k = x.len();
    let eval = |shift: &[(usize, f64)]| -> Vec<DoubleDouble> {
        let mut y: Vec<DoubleDouble> = x.iter().map(|&v| DoubleDouble::new(v)).collect();
        for &(i, s) in shift {
            // exact: the offset is a small multiple of h
            y[i] = DoubleDouble::sum(x[i], s * h);
        }
        let mut v = factor.metric_generic(&y);
        v.push(factor.potential_generic(&y, rho));
        v
    };
    let center = eval(&[]);
    let m = center.len();
    let hh = DoubleDouble::new(h);
    let zero = DoubleDouble::new(0.0);
    let mut first = vec![vec![0.0; m]; k];
    let mut second = vec![vec![vec![0.0; m]; k]; k];
    for c in 0..k {
        let mut d1 = vec![zero; m];
        let mut d2 = vec![zero; m];
        for &(s, w) in &D2 {
            let vals = if s == 0.0 { center.clone() } else { eval(&[(c, s)]) };
            for i in 0..m {
                d2[i] = d2[i] + vals[i] * w;
                if let Some(&(_, w1)) = D1.iter().find(|(o, _)| *o == s) {
                    d1[i] = d1[i] + vals[i] * w1;
                }
            }
        }
        for i in 0..m {
            first[c][i] = (d1[i] / (hh * 12.0)).to_f64();
            second[c][c][i] = (d2[i] / (hh * hh * 12.0)).to_f64();
        }
        for e in 0..c {
            let mut acc = vec![zero; m];
            for &(s, ws) in &D1 {
                for &(t, wt) in &D1 {
                    let vals = eval(&[(c, s), (e, t)]);
                    for i in 0..m {
                        acc[i] = acc[i] + vals[i] * (ws * wt);
                    }
                }
            }
            for i in 0..m {
                let v = (acc[i] / (hh * hh * 144.0)).to_f64();
                second[c][e][i] = v;
                second[e][c][i] = v;
            }
        }
    }
    let n = k * k;
    Derivatives {
        k,
        g: center[..n].iter().map(|v| v.to_f64()).collect(),
        dg: first.iter().map(|v| v[..n].to_vec()).collect(),
        ddg: second.iter().map(|row| row.iter().map(|v| v[..n].to_vec()).collect()).collect(),
        f: center[n].to_f64(),
        df: first.iter().map(|v| v[n]).collect(),
        ddf: second.iter().map(|row| row.iter().map(|v| v[n]).collect()).collect(),
    }
}

/// Kulkarni-Nomizu product of two symmetric forms.
fn kulkarni_nomizu(h: &DMatrix<f64>, k: &DMatrix<f64>, a: usize, b: usize, c: usize, d: usize) -> f64 {
    h[(a, c)] * k[(b, d)] + h[(b, d)] * k[(a, c)] - h[(a, d)] * k[(b, c)] - h[(b, c)] * k[(a, d)]
}

fn bryant_geometry(factor: &Factor, x: &[f64]) -> LocalGeometry {
    let Factor::Bryant(profile) = factor else {
        unreachable!("bryant_geometry on a closed-form factor")
    };
    let k = x.len();
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let pt = profile.at(r);
    let (k_rad, k_tan) = profile.sectional(r);
    let (nu, t, cone) = if r > 0.0 {
        let w_over_r = pt.w / r;
        (
            DVector::from_iterator(k, x.iter().map(|v| v / r)),
            w_over_r * w_over_r,
            pt.p() / pt.w,
        )
    } else {
        (DVector::zeros(k), 1.0, 0.0)
    };
    let radial = &nu * nu.transpose();
    let g = &radial * (1.0 - t) + DMatrix::identity(k, k) * t;
    let riemann = CurvatureTensor::from_fn(k, |a, b, c, d| {
        k_tan * (g[(a, c)] * g[(b, d)] - g[(a, d)] * g[(b, c)])
            + (k_rad - k_tan) * kulkarni_nomizu(&radial, &g, a, b, c, d)
    })
    .with_gram(g.clone());
    let hess = if r > 0.0 {
        &radial * pt.dq + (&g - &radial) * (pt.q * cone)
    } else {
        DMatrix::identity(k, k) * pt.dq
    };
    LocalGeometry {
        df: &nu * pt.q,
        f: pt.f,
        g,
        riemann,
        hess,
    }
}

fn chart_geometry(chart: &MetricChart, x: &[f64], scheme: Scheme) -> Result<LocalGeometry> {
    let rho = chart.base_rho();
    let mut parts = Vec::with_capacity(chart.factors.len());
    for (factor, (a, b)) in chart.factors.iter().zip(chart.blocks()) {
        let y = &x[a..b];
        let geom = match scheme {
            Scheme::ClosedForm if factor.is_closed_form() => jet_derivatives(factor, y, rho).assemble(),
            Scheme::ClosedForm => Ok(bryant_geometry(factor, y)),
            Scheme::FiniteDifference { h } => fd_derivatives(factor, y, rho, h).assemble(),
        }
        .map_err(|_| Error::SingularMetric { point: x.to_vec() })?;
        parts.push(geom);
    }
    let n = chart.dim;
    let s = chart.scale;
    let mut g = DMatrix::zeros(n, n);
    let mut hess = DMatrix::zeros(n, n);
    let mut df = DVector::zeros(n);
    let mut f = 0.0;
    let mut riemann: Option<CurvatureTensor> = None;
    for (p, (a, b)) in parts.iter().zip(chart.blocks()) {
        let k = b - a;
        g.view_mut((a, a), (k, k)).copy_from(&(&p.g * s));
        hess.view_mut((a, a), (k, k)).copy_from(&p.hess);
        df.rows_mut(a, k).copy_from(&p.df);
        f += p.f;
        riemann = Some(match riemann {
            None => p.riemann.clone(),
            Some(r) => r.direct_sum(&p.riemann),
        });
    }
    let riemann = riemann.expect("chart has at least one factor").scaled(s).with_gram(g.clone());
    Ok(LocalGeometry {
        g,
        riemann,
        f,
        df,
        hess,
    })
}

/// `E = L^{-T}` for `g = L L^T`; the columns are a g-orthonormal frame.
fn orthonormal_frame(g: &DMatrix<f64>, x: &[f64]) -> Result<DMatrix<f64>> {
    let chol = g.clone().cholesky().ok_or_else(|| Error::SingularMetric { point: x.to_vec() })?;
    let l_inv = chol
        .l()
        .try_inverse()
        .ok_or_else(|| Error::SingularMetric { point: x.to_vec() })?;
    Ok(l_inv.transpose())
}

fn check_scheme(chart: &MetricChart, x: &[f64], scheme: Scheme) -> Result<()> {
    chart.check_point(x)?;
    if let Scheme::FiniteDifference { h } = scheme {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::BadParams(format!("finite-difference step must be positive, got {h}")));
        }
        if chart.distance_to_boundary(x) <= 2.0 * h {
            return Err(Error::OutOfDomain { point: x.to_vec() });
        }
    }
    Ok(())
}

fn frame_geometry_unchecked(chart: &MetricChart, x: &[f64], scheme: Scheme) -> Result<FrameGeometry> {
    let local = chart_geometry(chart, x, scheme)?;
    let frame = orthonormal_frame(&local.g, x)?;
    let riemann = local.riemann.in_frame(&frame);
    let ricci = riemann.ricci();
    let scalar = ricci.trace();
    Ok(FrameGeometry {
        potential: local.f,
        grad_potential: frame.transpose() * &local.df,
        hess_potential: frame.transpose() * &local.hess * &frame,
        curvature: PointCurvature {
            point: x.to_vec(),
            metric: local.g,
            frame,
            riemann,
            ricci,
            scalar,
            error_bar: 0.0,
        },
    })
}

pub(crate) fn frame_geometry(chart: &MetricChart, x: &[f64], scheme: Scheme) -> Result<FrameGeometry> {
    check_scheme(chart, x, scheme)?;
    let mut out = frame_geometry_unchecked(chart, x, scheme)?;
    if let Scheme::FiniteDifference { h } = scheme {
        let half = frame_geometry_unchecked(chart, x, Scheme::FiniteDifference { h: 0.5 * h })?;
        let diff = out
            .curvature
            .riemann
            .as_slice()
            .iter()
            .zip(half.curvature.riemann.as_slice())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        out.curvature.error_bar = diff;
    }
    Ok(out)
}

/// Orthonormal-frame Riemann tensor, Ricci tensor and scalar curvature.
pub fn riemann_at(chart: &MetricChart, x: &[f64], scheme: Scheme) -> Result<PointCurvature> {
    Ok(frame_geometry(chart, x, scheme)?.curvature)
}

/// Scalar curvature without the error-bar pass.
pub fn scalar_at(chart: &MetricChart, x: &[f64], scheme: Scheme) -> Result<f64> {
    check_scheme(chart, x, scheme)?;
    Ok(frame_geometry_unchecked(chart, x, scheme)?.curvature.scalar)
}

/// Scalar curvature of a single factor in its own coordinates.
fn factor_scalar(factor: &Factor, y: &[f64], scheme: Scheme, rho: f64) -> Result<f64> {
    let geom = match scheme {
        Scheme::ClosedForm if factor.is_closed_form() => jet_derivatives(factor, y, rho).assemble()?,
        Scheme::ClosedForm => bryant_geometry(factor, y),
        Scheme::FiniteDifference { h } => fd_derivatives(factor, y, rho, h).assemble()?,
    };
    let k = y.len();
    let g_inv = geom.g.clone().try_inverse().ok_or(Error::SingularMetric { point: y.to_vec() })?;
    let mut acc = 0.0;
    for a in 0..k {
        for b in 0..k {
            for c in 0..k {
                for d in 0..k {
                    acc += g_inv[(a, c)] * g_inv[(b, d)] * geom.riemann.get(a, b, c, d);
                }
            }
        }
    }
    Ok(acc)
}

/// Coordinate differential of the scalar curvature.
///
/// The scalar curvature of a product is the sum over factors, so each block
/// is differentiated on its own: closed-form factors exactly (nested dual
/// numbers), profile factors and the finite-difference scheme by a
/// five-point stencil on the factor's scalar curvature.
pub(crate) fn scalar_differential(chart: &MetricChart, x: &[f64], scheme: Scheme) -> Result<DVector<f64>> {
    let rho = chart.base_rho();
    let mut out = DVector::zeros(chart.dim);
    for (factor, (a, b)) in chart.factors.iter().zip(chart.blocks()) {
        let y = &x[a..b];
        if scheme == Scheme::ClosedForm && factor.is_closed_form() {
            let duals: Vec<Dual> = y.iter().enumerate().map(|(i, &v)| Dual::var(v, i)).collect();
            let r = scalar_generic(&jet_derivatives(factor, &duals, rho));
            for i in 0..b - a {
                out[a + i] = r.d[i];
            }
            continue;
        }
        let delta = match scheme {
            Scheme::ClosedForm => CLOSED_FORM_GRADIENT_STEP,
            Scheme::FiniteDifference { h } => FD_GRADIENT_FACTOR * h,
        };
        for c in 0..b - a {
            let at = |s: f64| -> Result<f64> {
                let mut z = y.to_vec();
                z[c] += s * delta;
                factor_scalar(factor, &z, scheme, rho)
            };
            out[a + c] = (at(-2.0)? - 8.0 * at(-1.0)? + 8.0 * at(1.0)? - at(2.0)?) / (12.0 * delta);
        }
    }
    Ok(out / chart.scale)
}

/// Step of the gradient stencil in units of the finite-difference step.
const FD_GRADIENT_FACTOR: f64 = 10.0;
