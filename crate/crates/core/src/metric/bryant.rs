//! Rotationally symmetric steady gradient soliton (Bryant soliton) profile.
//!
//! For `g = dr^2 + w(r)^2 g_{S^m}` on `R^n` (`m = n - 1`) and `f = f(r)`, the
//! steady equation `Rc + Hess f = 0` splits into
//!
//! ```text
//! radial:      -m w''/w + f''                         = 0
//! tangential:  -w''/w + (m-1)(1 - w'^2)/w^2 + f' w'/w = 0
//! ```
//!
//! which gives the first-order system in `(w, w', f', f)`:
//!
//! ```text
//! w'  = p
//! p'  = (m-1)(1 - p^2)/w + q p
//! q'  = m p'/w
//! f'  = q
//! ```
//!
//! The integrator carries `P = p - 1` instead of `p`: near the tip `1 - p^2`
//! is of order `r^2`, and forming it from `p` would lose most of its digits.
//!
//! Smooth closure at the tip forces `w(0) = 0, w'(0) = 1, f'(0) = 0`; the free
//! parameter is `alpha = f''(0) = -R(0)/n`. A regular solution has the series
//! `w = r + c r^3 + d r^5`, `f' = alpha r + beta r^3` with
//! `c = alpha/(6m)`, `d = 3c^2(13m+3)/(10(m+3))`, `beta = 24 c^2 m^2/(m+3)`.
//!
//! The energy `R + f'^2` is constant along every solution. The shooting
//! bisects on `alpha` until the energy measured at `r_max` equals one, which
//! is the normalisation `R + |grad f|^2 = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use super::dd::DoubleDouble;
use super::jet::Scalar;
use crate::ode::{DormandPrince, StepControl};

/// Series start radius. The `r^7` term dropped from the series is below
/// 1e-14 here; starting closer to the tip costs accuracy, because scalar
/// curvature amplifies errors in `w'` by `1/w^2`.
const SERIES_RADIUS: f64 = 1e-2;
const GRID_STEP: f64 = 1.0 / 64.0;
const MAX_BISECTIONS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BryantProfile {
    pub dim: usize,
    pub grid: Vec<f64>,
    pub warping: Vec<f64>,
    pub warping_rate: Vec<f64>,
    pub potential_rate: Vec<f64>,
    pub potential: Vec<f64>,
    pub shoot_residual: f64,
    /// `f''(0)`.
    pub tip_hessian: f64,
    /// Integration state `(w, w' - 1, f', f)` at each node as double-double
    /// `[hi, lo]` pairs; the interpolant restarts from these.
    pub restart: Vec<[[f64; 2]; 4]>,
}

/// Profile state at one radius, with the second derivatives from the ODE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub r: f64,
    pub w: f64,
    /// `w' - 1`, kept separately to avoid cancellation near the tip.
    pub p_minus_one: f64,
    pub q: f64,
    pub f: f64,
    pub dp: f64,
    pub dq: f64,
}

impl ProfilePoint {
    pub fn p(&self) -> f64 {
        1.0 + self.p_minus_one
    }
}

#[derive(Debug, Clone, Copy)]
struct Series {
    m: f64,
    alpha: f64,
    c: f64,
    d: f64,
    beta: f64,
}

impl Series {
    fn new(dim: usize, alpha: f64) -> Self {
        let m = (dim - 1) as f64;
        let c = alpha / (6.0 * m);
        Self {
            m,
            alpha,
            c,
            d: 3.0 * c * c * (13.0 * m + 3.0) / (10.0 * (m + 3.0)),
            beta: 24.0 * c * c * m * m / (m + 3.0),
        }
    }

    /// `(w, w' - 1, f', f)` on the tip series.
    fn state<T: Scalar>(&self, r: T) -> [T; 4] {
        let r2 = r * r;
        [
            r * (r2 * self.c + r2 * r2 * self.d + 1.0),
            r2 * (3.0 * self.c) + r2 * r2 * (5.0 * self.d),
            r * (r2 * self.beta + self.alpha),
            r2 * (r2 * (self.beta / 4.0) + self.alpha / 2.0),
        ]
    }

    fn point(&self, r: f64) -> ProfilePoint {
        let r2 = r * r;
        ProfilePoint {
            r,
            w: r * (1.0 + self.c * r2 + self.d * r2 * r2),
            p_minus_one: 3.0 * self.c * r2 + 5.0 * self.d * r2 * r2,
            q: r * (self.alpha + self.beta * r2),
            f: r2 * (self.alpha / 2.0 + self.beta * r2 / 4.0),
            dp: r * (6.0 * self.c + 20.0 * self.d * r2),
            dq: self.alpha + 3.0 * self.beta * r2,
        }
    }
}

/// Right-hand side in `(w, P, q, f)` with `P = w' - 1`.
fn rhs<T: Scalar>(m: f64, y: &[T; 4]) -> [T; 4] {
    let [w, pm1, q, _f] = *y;
    let p = pm1 + 1.0;
    let dp = -(pm1 * (pm1 + 2.0)) * (m - 1.0) / w + q * p;
    [p, dp, dp * m / w, q]
}

/// Classical RK4 from `(r0, y0)` to `r0 + span` with a deterministic number of
/// substeps: at least 64 per grid cell, and a step below `w/300` so the `1/w`
/// terms near the tip stay resolved.
fn rk4<T: Scalar>(m: f64, y0: [T; 4], w0: f64, span: T) -> [T; 4] {
    let sv = span.value();
    let steps = ((64.0 * sv / GRID_STEP).ceil().max((300.0 * sv / w0).ceil()).max(1.0)) as usize;
    let h = span * (1.0 / steps as f64);
    let mut y = y0;
    let shifted = |y: &[T; 4], k: &[T; 4], c: f64| -> [T; 4] { std::array::from_fn(|i| y[i] + k[i] * h * c) };
    for _ in 0..steps {
        let k1 = rhs(m, &y);
        let k2 = rhs(m, &shifted(&y, &k1, 0.5));
        let k3 = rhs(m, &shifted(&y, &k2, 0.5));
        let k4 = rhs(m, &shifted(&y, &k3, 1.0));
        for i in 0..4 {
            y[i] = y[i] + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * h * (1.0 / 6.0);
        }
    }
    y
}

fn energy_of(m: f64, pt: &ProfilePoint) -> f64 {
    scalar_of(m, pt) + pt.q * pt.q
}

/// Radial and tangential sectional curvatures.
fn sectional_of(pt: &ProfilePoint, series: Option<&Series>) -> (f64, f64) {
    if pt.r == 0.0 {
        let k0 = -6.0 * series.map_or(0.0, |s| s.c);
        return (k0, k0);
    }
    let k_rad = -pt.dp / pt.w;
    let k_tan = -pt.p_minus_one * (pt.p() + 1.0) / (pt.w * pt.w);
    (k_rad, k_tan)
}

fn scalar_of(m: f64, pt: &ProfilePoint) -> f64 {
    let (k_rad, k_tan) = sectional_of(pt, None);
    2.0 * m * k_rad + m * (m - 1.0) * k_tan
}

fn control() -> StepControl {
    StepControl {
        rel_tol: 1e-12,
        abs_tol: 1e-14,
        h_min: 1e-12,
        ..Default::default()
    }
}

/// Integrates a regular solution out to `r_max` with the adaptive pair.
fn shoot(dim: usize, alpha: f64, r_max: f64) -> Result<[f64; 4]> {
    let series = Series::new(dim, alpha);
    let m = series.m;
    let mut y = series.state(SERIES_RADIUS);
    let mut f = |_t: f64, y: &[f64; 4]| rhs(m, y);
    let mut dp = DormandPrince::<4>::new(control());
    let mut h = 1e-4;
    let mut r = SERIES_RADIUS;
    let nodes = (r_max / GRID_STEP).ceil() as usize;
    for k in 1..=nodes {
        let target = k as f64 * GRID_STEP;
        dp.integrate_to(&mut f, r, &mut y, target, &mut h)
            .map_err(|e| Error::ShootingFailed(format!("integration stalled at r = {r} (h = {:e})", e.h)))?;
        r = target;
        if !(y[0] > 0.0) {
            return Err(Error::ShootingFailed(format!("warping function vanished at r = {r}")));
        }
    }
    Ok(y)
}

fn point_from_state(m: f64, r: f64, y: &[f64; 4]) -> ProfilePoint {
    let d = rhs(m, y);
    ProfilePoint {
        r,
        w: y[0],
        p_minus_one: y[1],
        q: y[2],
        f: y[3],
        dp: d[1],
        dq: d[2],
    }
}

/// Shoots the normalised profile on `[0, r_max]`.
pub fn bryant_profile(dim: usize, r_max: f64, shoot_tol: f64) -> Result<BryantProfile> {
    if !(dim == 3 || dim == 4) {
        return Err(Error::BadParams(format!("Bryant profile dimension must be 3 or 4, got {dim}")));
    }
    if !(r_max > 4.0 * GRID_STEP) || !(shoot_tol > 0.0) {
        return Err(Error::BadParams(format!("r_max = {r_max}, shoot_tol = {shoot_tol}")));
    }
    let n = dim as f64;
    let m = n - 1.0;
    let energy_at_end = |alpha: f64| -> Result<f64> {
        let y = shoot(dim, alpha, r_max)?;
        Ok(energy_of(m, &point_from_state(m, r_max, &y)) - 1.0)
    };
    // the energy scales linearly with -alpha; bracket the root generously
    let (mut lo, mut hi) = (-4.0 / n, -0.25 / n);
    let (mut g_lo, g_hi) = (energy_at_end(lo)?, energy_at_end(hi)?);
    if g_lo.signum() == g_hi.signum() {
        return Err(Error::ShootingFailed(format!("energy root not bracketed ({g_lo:e}, {g_hi:e})")));
    }
    let mut alpha = 0.5 * (lo + hi);
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_BISECTIONS {
        alpha = 0.5 * (lo + hi);
        let g = energy_at_end(alpha)?;
        residual = g.abs();
        if residual <= 0.01 * shoot_tol || (hi - lo).abs() < 1e-15 {
            break;
        }
        if g.signum() == g_lo.signum() {
            lo = alpha;
            g_lo = g;
        } else {
            hi = alpha;
        }
    }
    if residual > shoot_tol {
        return Err(Error::ShootingFailed(format!(
            "energy residual {residual:e} above tolerance {shoot_tol:e}"
        )));
    }
    // the stored grid comes from the same fixed-step scheme as the interpolant,
    // so interpolation is continuous across grid nodes
    let series = Series::new(dim, alpha);
    let mut profile = BryantProfile {
        dim,
        grid: vec![0.0],
        warping: vec![0.0],
        warping_rate: vec![1.0],
        potential_rate: vec![0.0],
        potential: vec![0.0],
        shoot_residual: residual,
        tip_hessian: alpha,
        restart: vec![[[0.0; 2]; 4]],
    };
    let nodes = (r_max / GRID_STEP).ceil() as usize;
    let start = series.state(DoubleDouble::new(SERIES_RADIUS));
    let mut y = rk4(m, start, SERIES_RADIUS, DoubleDouble::new(GRID_STEP - SERIES_RADIUS));
    for k in 1..=nodes {
        if k > 1 {
            y = rk4(m, y, y[0].to_f64(), DoubleDouble::new(GRID_STEP));
        }
        let v = y.map(DoubleDouble::to_f64);
        if !(v[0] > 0.0) || !v.iter().all(|x| x.is_finite()) {
            return Err(Error::ShootingFailed(format!("grid integration broke down at node {k}")));
        }
        profile.grid.push(k as f64 * GRID_STEP);
        profile.warping.push(v[0]);
        profile.warping_rate.push(1.0 + v[1]);
        profile.potential_rate.push(v[2]);
        profile.potential.push(v[3]);
        profile.restart.push(y.map(|x| [x.hi, x.lo]));
    }
    profile.shoot_residual = (profile.energy(profile.r_max()) - 1.0).abs();
    if profile.shoot_residual > shoot_tol {
        return Err(Error::ShootingFailed(format!(
            "grid energy residual {:e} above tolerance {shoot_tol:e}",
            profile.shoot_residual
        )));
    }
    Ok(profile)
}

impl BryantProfile {
    fn series(&self) -> Series {
        Series::new(self.dim, self.tip_hessian)
    }

    fn m(&self) -> f64 {
        (self.dim - 1) as f64
    }

    pub fn r_max(&self) -> f64 {
        *self.grid.last().unwrap_or(&0.0)
    }

    /// `(w, w' - 1, f', f)` at a radius given in any scalar type: the tip series
    /// below the series radius, otherwise fixed-step RK4 from the grid node
    /// below `r` (the same scheme that produced the grid).
    pub fn state<T: Scalar>(&self, r: T) -> [T; 4] {
        let series = self.series();
        let rv = r.value();
        if rv <= SERIES_RADIUS {
            return series.state(r);
        }
        let k = ((rv / GRID_STEP).floor() as usize).min(self.grid.len() - 1);
        if k == 0 {
            let y0 = series.state(T::cst(SERIES_RADIUS));
            return rk4(self.m(), y0, SERIES_RADIUS, r + (-SERIES_RADIUS));
        }
        let y0 = self.restart[k].map(|[hi, lo]| T::cst2(hi, lo));
        rk4(self.m(), y0, self.warping[k], r + (-self.grid[k]))
    }

    /// Profile at an arbitrary radius, with second derivatives.
    pub fn at(&self, r: f64) -> ProfilePoint {
        let r = r.abs();
        if r <= SERIES_RADIUS {
            return self.series().point(r);
        }
        point_from_state(self.m(), r, &self.state(r))
    }

    /// `(K_radial, K_tangential)` at radius `r`.
    pub fn sectional(&self, r: f64) -> (f64, f64) {
        let series = self.series();
        sectional_of(&self.at(r), Some(&series))
    }

    pub fn scalar(&self, r: f64) -> f64 {
        let (k_rad, k_tan) = self.sectional(r);
        let m = self.m();
        2.0 * m * k_rad + m * (m - 1.0) * k_tan
    }

    /// `R + |grad f|^2` at radius `r`.
    pub fn energy(&self, r: f64) -> f64 {
        let q = self.at(r).q;
        self.scalar(r) + q * q
    }

    /// Largest deviation of the energy from its tip value over the grid.
    pub fn energy_spread(&self) -> f64 {
        let e0 = self.energy(0.0);
        self.grid.iter().map(|&r| (self.energy(r) - e0).abs()).fold(0.0, f64::max)
    }

    /// Smallest sectional curvature over the grid interior.
    pub fn min_sectional(&self) -> f64 {
        self.grid[1..self.grid.len() - 1]
            .iter()
            .map(|&r| {
                let (a, b) = self.sectional(r);
                a.min(b)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Relative spread of `R(r) r` between `r_lo` and `r_hi`.
    pub fn linear_decay_drift(&self, r_lo: f64, r_hi: f64) -> f64 {
        let lo = self.scalar(r_lo) * r_lo;
        let hi = self.scalar(r_hi) * r_hi;
        (lo - hi).abs() / hi.abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tip_closure_and_normalisation() {
        let p = bryant_profile(4, 10.0, 1e-8).unwrap();
        assert_eq!(p.warping[0], 0.0);
        assert_eq!(p.warping_rate[0], 1.0);
        assert!((p.tip_hessian + 0.25).abs() < 1e-6, "alpha = {}", p.tip_hessian);
        assert!((p.scalar(0.0) - 1.0).abs() < 1e-6);
        assert!(p.energy_spread() < 1e-7);
        assert!(p.warping.iter().skip(1).all(|&w| w > 0.0));
    }

    #[test]
    fn interpolation_is_continuous_across_nodes() {
        let p = bryant_profile(3, 5.0, 1e-8).unwrap();
        for k in [1, 2, 100, 250] {
            let at = p.at(p.grid[k]);
            assert_eq!(at.w, p.warping[k]);
            let below = p.at(p.grid[k] - 1e-13);
            // a jump would show up as a difference quotient off by far more than rounding
            let ulps = |v: f64| 1e-15 + 4.0 * f64::EPSILON * v.abs();
            assert!((at.w - below.w - 1e-13 * at.p()).abs() < ulps(at.w), "node {k}");
            assert!((at.q - below.q - 1e-13 * at.dq).abs() < ulps(at.q), "node {k}");
        }
        // series and integration agree at the series radius up to the dropped series terms
        let a = p.at(SERIES_RADIUS);
        let d = SERIES_RADIUS * 1e-12;
        let b = p.at(SERIES_RADIUS + d);
        assert!((b.w - a.w - d * a.p()).abs() < 1e-17);
        assert!((b.q - a.q - d * a.dq).abs() < 1e-17);
        assert!((a.dp - b.dp).abs() < 1e-11 && (a.dq - b.dq).abs() < 1e-9);
    }

    #[test]
    fn scalar_curvature_decreases_from_the_tip() {
        let p = bryant_profile(4, 20.0, 1e-8).unwrap();
        let values: Vec<f64> = p.grid.iter().map(|&r| p.scalar(r)).collect();
        assert!(values.windows(2).all(|w| w[1] < w[0]));
        assert!(p.min_sectional() > 0.0);
    }

    #[test]
    fn rejects_bad_dimension() {
        assert!(matches!(bryant_profile(5, 10.0, 1e-6), Err(Error::BadParams(_))));
    }
}
