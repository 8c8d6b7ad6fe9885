//! Coordinate charts for the soliton and model-space catalog.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::bryant::{bryant_profile, BryantProfile};
use super::jet::Scalar;
use crate::error::{Error, Result};

pub const CATALOG: [&str; 12] = [
    "cigar",
    "cigar_x_r2",
    "cigar_x_cigar",
    "gaussian_shrinker",
    "gaussian_expander",
    "s4_round",
    "cp2_fubini_study",
    "s2xs2",
    "s3xr",
    "bryant3_x_r",
    "bryant4",
    "flat4",
];

/// One block of a product chart, in its own coordinates.
#[derive(Debug, Clone, PartialEq)]
pub enum Factor {
    /// Flat `R^k` with potential `rho |x|^2 / 2`.
    Euclidean { dim: usize },
    /// `(dx^2 + dy^2)/(1 + x^2 + y^2)`, `f = -log(1 + x^2 + y^2)`.
    Cigar,
    /// Round sphere of the given radius in stereographic coordinates.
    Sphere { dim: usize, radius: f64 },
    /// `scale` times the Fubini-Study metric of holomorphic curvature 4, in
    /// the affine chart `(x1, y1, x2, y2)` with `z_j = x_j + i y_j`.
    FubiniStudy { scale: f64 },
    /// `dr^2 + w(r)^2 g_sphere` with the profile potential.
    Bryant(Arc<BryantProfile>),
}

/// Region of validity of one factor, centred at the coordinate origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainHint {
    Box { half_width: f64 },
    Ball { radius: f64 },
}

impl DomainHint {
    fn distance_to_boundary(&self, x: &[f64]) -> f64 {
        match *self {
            DomainHint::Box { half_width } => x.iter().map(|v| half_width - v.abs()).fold(f64::INFINITY, f64::min),
            DomainHint::Ball { radius } => radius - x.iter().map(|v| v * v).sum::<f64>().sqrt(),
        }
    }
}

impl Factor {
    pub fn dim(&self) -> usize {
        match self {
            Factor::Euclidean { dim } | Factor::Sphere { dim, .. } => *dim,
            Factor::Cigar => 2,
            Factor::FubiniStudy { .. } => 4,
            Factor::Bryant(p) => p.dim,
        }
    }

    /// Soliton constant forced by the factor, if any.
    fn rigid_rho(&self) -> Option<f64> {
        match self {
            Factor::Euclidean { .. } => None,
            Factor::Cigar | Factor::Bryant(_) => Some(0.0),
            Factor::Sphere { dim, radius } => Some((*dim as f64 - 1.0) / (radius * radius)),
            Factor::FubiniStudy { scale } => Some(6.0 / scale),
        }
    }

    pub fn domain(&self) -> DomainHint {
        match self {
            Factor::Euclidean { .. } | Factor::Cigar => DomainHint::Box { half_width: 10.0 },
            Factor::Sphere { .. } => DomainHint::Ball { radius: 10.0 },
            Factor::FubiniStudy { .. } => DomainHint::Box { half_width: 5.0 },
            Factor::Bryant(p) => DomainHint::Ball { radius: 0.9 * p.r_max() },
        }
    }

    /// Half width of the box probe points are drawn from.
    fn probe_extent(&self) -> f64 {
        match self {
            Factor::Euclidean { .. } | Factor::Sphere { .. } | Factor::FubiniStudy { .. } => 2.0,
            Factor::Cigar => 3.0,
            Factor::Bryant(p) => (0.5 * p.r_max()).min(10.0) / (p.dim as f64).sqrt(),
        }
    }

    /// Whether the metric is an explicit formula rather than an interpolated profile.
    pub fn is_closed_form(&self) -> bool {
        !matches!(self, Factor::Bryant(_))
    }

    /// Row-major metric entries. Bryant factors go through the profile
    /// interpolant, which is itself generic in the scalar type.
    pub(crate) fn metric_generic<T: Scalar>(&self, x: &[T]) -> Vec<T> {
        let k = self.dim();
        let sq = |x: &[T]| x.iter().fold(T::cst(0.0), |acc, &v| acc + v * v);
        let conformal = |phi: T| {
            let mut g = vec![T::cst(0.0); k * k];
            for i in 0..k {
                g[i * k + i] = phi;
            }
            g
        };
        match self {
            Factor::Euclidean { .. } => conformal(T::cst(1.0)),
            Factor::Cigar => conformal(T::cst(1.0) / (sq(x) + 1.0)),
            Factor::Sphere { radius, .. } => {
                let d = sq(x) + 1.0;
                conformal(T::cst(4.0 * radius * radius) / (d * d))
            }
            Factor::FubiniStudy { scale } => fubini_study_metric(x, *scale),
            Factor::Bryant(p) => {
                let r = sq(x).sqrt();
                if r.value() == 0.0 {
                    return conformal(T::cst(1.0));
                }
                let ratio = p.state(r)[0] / r;
                let t = ratio * ratio;
                let mut g = vec![T::cst(0.0); k * k];
                for i in 0..k {
                    for j in 0..k {
                        let nn = x[i] * x[j] / (r * r);
                        g[i * k + j] = if i == j { nn + t * (-nn + 1.0) } else { nn - t * nn };
                    }
                }
                g
            }
        }
    }

    pub(crate) fn potential_generic<T: Scalar>(&self, x: &[T], rho: f64) -> T {
        let sq = x.iter().fold(T::cst(0.0), |acc, &v| acc + v * v);
        match self {
            Factor::Euclidean { .. } => sq * (0.5 * rho),
            Factor::Cigar => -(sq + 1.0).ln(),
            Factor::Sphere { .. } | Factor::FubiniStudy { .. } => T::cst(0.0),
            Factor::Bryant(p) => {
                if sq.value() == 0.0 {
                    T::cst(0.0)
                } else {
                    p.state(sq.sqrt())[3]
                }
            }
        }
    }

    pub(crate) fn metric_f64(&self, x: &[f64]) -> Vec<f64> {
        self.metric_generic(x)
    }

    pub(crate) fn potential_f64(&self, x: &[f64], rho: f64) -> f64 {
        self.potential_generic(x, rho)
    }
}

/// Real 4x4 form of the Fubini-Study Hermitian metric
/// `h_jk = ((1+|z|^2) delta_jk - conj(z_j) z_k) / (1+|z|^2)^2`.
fn fubini_study_metric<T: Scalar>(x: &[T], scale: f64) -> Vec<T> {
    let (xs, ys) = ([x[0], x[2]], [x[1], x[3]]);
    let d = x.iter().fold(T::cst(0.0), |acc, &v| acc + v * v) + 1.0;
    let d2 = d * d;
    let mut g = vec![T::cst(0.0); 16];
    for j in 0..2 {
        for k in 0..2 {
            let delta = if j == k { d } else { T::cst(0.0) };
            let re = (delta - (xs[j] * xs[k] + ys[j] * ys[k])) / d2;
            let im = -(xs[j] * ys[k] - ys[j] * xs[k]) / d2;
            let (rj, ij, rk, ik) = (2 * j, 2 * j + 1, 2 * k, 2 * k + 1);
            g[rj * 4 + rk] = re * scale;
            g[ij * 4 + ik] = re * scale;
            g[rj * 4 + ik] = im * scale;
            g[ij * 4 + rk] = -im * scale;
        }
    }
    g
}

/// A product of catalog factors, optionally rescaled by a constant.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricChart {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub dim: usize,
    /// Soliton constant of the (scaled) chart.
    pub rho: f64,
    pub factors: Vec<Factor>,
    /// Constant multiplier of the product metric.
    pub scale: f64,
    pub has_potential: bool,
    pub domain: Vec<DomainHint>,
}

impl MetricChart {
    pub fn product(name: &str, params: BTreeMap<String, f64>, factors: Vec<Factor>, free_rho: f64) -> Result<Self> {
        let mut rho = None;
        for f in &factors {
            if let Some(r) = f.rigid_rho() {
                match rho {
                    None => rho = Some(r),
                    Some(prev) if (prev - r).abs() > 1e-12 * (1.0 + r.abs()) => {
                        return Err(Error::BadParams(format!(
                            "factors of {name} have different soliton constants {prev} and {r}"
                        )))
                    }
                    _ => {}
                }
            }
        }
        let dim = factors.iter().map(Factor::dim).sum();
        if !(2..=4).contains(&dim) {
            return Err(Error::BadParams(format!("chart dimension {dim} outside 2..=4")));
        }
        Ok(Self {
            name: name.to_string(),
            params,
            dim,
            rho: rho.unwrap_or(free_rho),
            domain: factors.iter().map(Factor::domain).collect(),
            factors,
            scale: 1.0,
            has_potential: true,
        })
    }

    pub fn without_potential(mut self) -> Self {
        self.has_potential = false;
        self
    }

    /// Coordinate ranges `[start, end)` of each factor.
    pub(crate) fn blocks(&self) -> Vec<(usize, usize)> {
        let mut start = 0;
        self.factors
            .iter()
            .map(|f| {
                let b = (start, start + f.dim());
                start = b.1;
                b
            })
            .collect()
    }

    /// Soliton constant of the unscaled factors.
    pub(crate) fn base_rho(&self) -> f64 {
        self.rho * self.scale
    }

    /// Distance from the point to the edge of the domain (negative outside).
    pub fn distance_to_boundary(&self, x: &[f64]) -> f64 {
        self.blocks()
            .iter()
            .zip(&self.domain)
            .map(|(&(a, b), d)| d.distance_to_boundary(&x[a..b]))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim || x.iter().any(|v| !v.is_finite()) || self.distance_to_boundary(x) <= 0.0 {
            return Err(Error::OutOfDomain { point: x.to_vec() });
        }
        Ok(())
    }

    pub fn metric_at(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_point(x)?;
        let g = self.metric_unchecked(x);
        if g.clone().cholesky().is_none() {
            return Err(Error::SingularMetric { point: x.to_vec() });
        }
        Ok(g)
    }

    pub(crate) fn metric_unchecked(&self, x: &[f64]) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(self.dim, self.dim);
        for (f, (a, b)) in self.factors.iter().zip(self.blocks()) {
            let k = b - a;
            let block = f.metric_f64(&x[a..b]);
            for i in 0..k {
                for j in 0..k {
                    g[(a + i, a + j)] = self.scale * block[i * k + j];
                }
            }
        }
        g
    }

    pub fn potential_at(&self, x: &[f64]) -> Option<f64> {
        if !self.has_potential {
            return None;
        }
        let rho = self.base_rho();
        Some(
            self.factors
                .iter()
                .zip(self.blocks())
                .map(|(f, (a, b))| f.potential_f64(&x[a..b], rho))
                .sum(),
        )
    }

    pub fn is_closed_form(&self) -> bool {
        self.factors.iter().all(Factor::is_closed_form)
    }

    /// Pseudo-random probe points, deterministic in `seed`.
    pub fn probe_points(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let mut x = Vec::with_capacity(self.dim);
                for f in &self.factors {
                    let e = f.probe_extent();
                    for _ in 0..f.dim() {
                        x.push(rng.random_range(-e..e));
                    }
                }
                x
            })
            .collect()
    }

    /// Points along the diagonal direction at evenly spaced radii in `(0, r_max]`.
    pub fn radial_probes(&self, count: usize, r_max: f64) -> Vec<Vec<f64>> {
        let dir = 1.0 / (self.dim as f64).sqrt();
        (1..=count)
            .map(|i| {
                let r = r_max * i as f64 / count as f64;
                vec![r * dir; self.dim]
            })
            .collect()
    }
}

fn take(params: &mut BTreeMap<String, f64>, key: &str, default: f64) -> f64 {
    params.remove(key).unwrap_or(default)
}

/// Builds a named catalog chart. Unknown parameters are rejected.
pub fn catalog_metric(name: &str, params: &BTreeMap<String, f64>) -> Result<MetricChart> {
    let mut rest = params.clone();
    let positive = |key: &str, v: f64| -> Result<f64> {
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(Error::BadParams(format!("{key} must be positive, got {v}")))
        }
    };
    let mut used = BTreeMap::new();
    let mut param = |rest: &mut BTreeMap<String, f64>, key: &str, default: f64| -> Result<f64> {
        let v = positive(key, take(rest, key, default))?;
        used.insert(key.to_string(), v);
        Ok(v)
    };
    let bryant = |dim: usize, r_max: f64, tol: f64| -> Result<Factor> {
        Ok(Factor::Bryant(Arc::new(bryant_profile(dim, r_max, tol)?)))
    };
    let (factors, free_rho) = match name {
        "cigar" => (vec![Factor::Cigar], 0.0),
        "cigar_x_r2" => (vec![Factor::Cigar, Factor::Euclidean { dim: 2 }], 0.0),
        "cigar_x_cigar" => (vec![Factor::Cigar, Factor::Cigar], 0.0),
        "gaussian_shrinker" => (vec![Factor::Euclidean { dim: 4 }], 0.5),
        "gaussian_expander" => (vec![Factor::Euclidean { dim: 4 }], -0.5),
        "flat4" => (vec![Factor::Euclidean { dim: 4 }], 0.0),
        "s4_round" => {
            let radius = param(&mut rest, "radius", 1.0)?;
            (vec![Factor::Sphere { dim: 4, radius }], 0.0)
        }
        "cp2_fubini_study" => {
            let scale = param(&mut rest, "scale", 1.0)?;
            (vec![Factor::FubiniStudy { scale }], 0.0)
        }
        "s2xs2" => {
            let radius = param(&mut rest, "radius", 1.0)?;
            (vec![Factor::Sphere { dim: 2, radius }, Factor::Sphere { dim: 2, radius }], 0.0)
        }
        "s3xr" => {
            let radius = param(&mut rest, "radius", 1.0)?;
            (vec![Factor::Sphere { dim: 3, radius }, Factor::Euclidean { dim: 1 }], 0.0)
        }
        "bryant3_x_r" => {
            let r_max = param(&mut rest, "r_max", 30.0)?;
            let tol = param(&mut rest, "shoot_tol", 1e-8)?;
            (vec![bryant(3, r_max, tol)?, Factor::Euclidean { dim: 1 }], 0.0)
        }
        "bryant4" => {
            let r_max = param(&mut rest, "r_max", 20.0)?;
            let tol = param(&mut rest, "shoot_tol", 1e-8)?;
            (vec![bryant(4, r_max, tol)?], 0.0)
        }
        _ => return Err(Error::UnknownName(name.to_string())),
    };
    if let Some(key) = rest.keys().next() {
        return Err(Error::BadParams(format!("unknown parameter {key} for {name}")));
    }
    MetricChart::product(name, used, factors, free_rho)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart(name: &str) -> MetricChart {
        catalog_metric(name, &BTreeMap::new()).unwrap()
    }

    #[test]
    fn cigar_entries() {
        let c = chart("cigar");
        assert_eq!(c.dim, 2);
        assert_eq!(c.rho, 0.0);
        let g = c.metric_at(&[1.0, 1.0]).unwrap();
        assert_eq!(g[(0, 0)], 1.0 / 3.0);
        assert_eq!(g[(0, 1)], 0.0);
        assert_eq!(c.potential_at(&[1.0, 1.0]).unwrap(), -(3.0f64).ln());
    }

    #[test]
    fn soliton_constants() {
        assert_eq!(chart("gaussian_shrinker").rho, 0.5);
        assert_eq!(chart("gaussian_expander").rho, -0.5);
        assert_eq!(chart("s4_round").rho, 3.0);
        assert_eq!(chart("cp2_fubini_study").rho, 6.0);
        assert_eq!(chart("s2xs2").rho, 1.0);
        assert_eq!(chart("s3xr").rho, 2.0);
        assert_eq!(chart("cigar_x_cigar").dim, 4);
    }

    #[test]
    fn s3xr_potential_on_line() {
        let c = chart("s3xr");
        assert_eq!(c.potential_at(&[0.3, 0.1, 0.2, 1.5]).unwrap(), 2.25);
    }

    #[test]
    fn fubini_study_is_hermitian_positive() {
        let c = chart("cp2_fubini_study");
        let g = c.metric_at(&[0.3, -0.7, 1.1, 0.2]).unwrap();
        assert!((&g - g.transpose()).amax() < 1e-15);
        // complex structure J(x_j) = y_j is an isometry
        let mut j = DMatrix::zeros(4, 4);
        for b in 0..2 {
            j[(2 * b + 1, 2 * b)] = 1.0;
            j[(2 * b, 2 * b + 1)] = -1.0;
        }
        assert!((j.transpose() * &g * &j - &g).amax() < 1e-15);
        assert_eq!(c.metric_at(&[0.0; 4]).unwrap(), DMatrix::identity(4, 4));
    }

    #[test]
    fn errors() {
        assert!(matches!(catalog_metric("torus", &BTreeMap::new()), Err(Error::UnknownName(_))));
        let bad = BTreeMap::from([("radius".to_string(), -1.0)]);
        assert!(matches!(catalog_metric("s4_round", &bad), Err(Error::BadParams(_))));
        let extra = BTreeMap::from([("radius".to_string(), 1.0)]);
        assert!(matches!(catalog_metric("cigar", &extra), Err(Error::BadParams(_))));
        let mixed = MetricChart::product(
            "mixed",
            BTreeMap::new(),
            vec![Factor::Cigar, Factor::Sphere { dim: 2, radius: 1.0 }],
            0.0,
        );
        assert!(matches!(mixed, Err(Error::BadParams(_))));
        assert!(matches!(chart("cigar").metric_at(&[11.0, 0.0]), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn probes_are_deterministic_and_inside() {
        let c = chart("s3xr");
        let p = c.probe_points(32, 7);
        assert_eq!(p, c.probe_points(32, 7));
        assert!(p.iter().all(|x| c.check_point(x).is_ok()));
    }
}
