//! Residuals of the gradient-soliton equation and its standard consequences,
//! and the steady normalisation `R + |grad f|^2 = 1`.

use serde::{Deserialize, Serialize};

use super::chart::MetricChart;
use super::curvature::{frame_geometry, scalar_differential, FrameGeometry, Scheme};
use crate::algebra::{build_from_riemann, spectral_summary, ConeMargins, Orientation};
use crate::error::{Error, Result};
use crate::exec::Execution;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolitonResiduals {
    /// `|Rc + Hess f - rho g|` (Frobenius, orthonormal frame).
    pub eq_residual: f64,
    /// `|R + Lap f - n rho|`.
    pub ham1: f64,
    /// `|grad R - 2 Rc(grad f)|`.
    pub ham2: f64,
    /// Largest deviation of `R + |grad f|^2 - 2 rho f` over the probes from its mean.
    pub ham3_constancy: f64,
    /// Mean of `R + |grad f|^2 - 2 rho f` over the probes.
    pub energy: f64,
    pub scalar: f64,
    pub error_bar: f64,
}

fn energy_of(chart: &MetricChart, geom: &FrameGeometry) -> f64 {
    geom.curvature.scalar + geom.grad_potential.norm_squared() - 2.0 * chart.rho * geom.potential
}

/// `R + |grad f|^2 - 2 rho f` at a point.
pub fn energy_at(chart: &MetricChart, x: &[f64], scheme: Scheme) -> Result<f64> {
    if !chart.has_potential {
        return Err(Error::MissingPotential);
    }
    Ok(energy_of(chart, &frame_geometry(chart, x, scheme)?))
}

/// Soliton residuals at `point`; the energy constancy is measured over
/// `probes` together with `point`.
pub fn soliton_residuals(
    chart: &MetricChart,
    point: &[f64],
    probes: &[Vec<f64>],
    scheme: Scheme,
) -> Result<SolitonResiduals> {
    if !chart.has_potential {
        return Err(Error::MissingPotential);
    }
    let geom = frame_geometry(chart, point, scheme)?;
    let n = chart.dim as f64;
    let pc = &geom.curvature;
    let identity = nalgebra::DMatrix::<f64>::identity(chart.dim, chart.dim);
    let eq_residual = (&pc.ricci + &geom.hess_potential - identity * chart.rho).norm();
    let ham1 = (pc.scalar + geom.hess_potential.trace() - n * chart.rho).abs();
    let grad_scalar = pc.frame.transpose() * scalar_differential(chart, point, scheme)?;
    let ham2 = (grad_scalar - &pc.ricci * &geom.grad_potential * 2.0).norm();
    let mut energies = vec![energy_of(chart, &geom)];
    for p in probes {
        energies.push(energy_at(chart, p, scheme)?);
    }
    let mean = energies.iter().sum::<f64>() / energies.len() as f64;
    let ham3_constancy = energies.iter().map(|e| (e - mean).abs()).fold(0.0, f64::max);
    Ok(SolitonResiduals {
        eq_residual,
        ham1,
        ham2,
        ham3_constancy,
        energy: mean,
        scalar: pc.scalar,
        error_bar: pc.error_bar,
    })
}

/// Per-point record of a chart survey.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub point: Vec<f64>,
    #[serde(rename = "R")]
    pub scalar: f64,
    pub energy: f64,
    pub eq_residual: f64,
    pub ham1: f64,
    pub ham2: f64,
    pub error_bar: f64,
    /// Four-dimensional charts only: first Bianchi flag of the block decomposition.
    pub bianchi: Option<bool>,
    /// Four-dimensional charts only: cone margins of the curvature operator.
    pub margins: Option<ConeMargins>,
}

/// Soliton identities over a set of points, with the energy constancy taken
/// across all of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolitonSurvey {
    pub metric: String,
    pub params: std::collections::BTreeMap<String, f64>,
    pub dim: usize,
    pub rho: f64,
    pub scheme: Scheme,
    pub max_eq_residual: f64,
    pub max_ham1: f64,
    pub max_ham2: f64,
    pub ham3_constancy: f64,
    pub mean_energy: f64,
    pub max_error_bar: f64,
    pub probes: Vec<ProbeRecord>,
}

impl SolitonSurvey {
    /// Largest of the pointwise residuals and the energy spread.
    pub fn worst_residual(&self) -> f64 {
        self.max_eq_residual.max(self.max_ham1).max(self.max_ham2).max(self.ham3_constancy)
    }
}

fn probe_record(chart: &MetricChart, point: &[f64], scheme: Scheme) -> Result<ProbeRecord> {
    let r = soliton_residuals(chart, point, &[], scheme)?;
    let (bianchi, margins) = if chart.dim == 4 {
        let pc = frame_geometry(chart, point, scheme)?.curvature;
        let op = build_from_riemann(&pc.riemann, Orientation::Positive)?;
        (Some(op.bianchi_flag()), Some(ConeMargins::from_summary(&spectral_summary(&op))))
    } else {
        (None, None)
    };
    Ok(ProbeRecord {
        point: point.to_vec(),
        scalar: r.scalar,
        energy: r.energy,
        eq_residual: r.eq_residual,
        ham1: r.ham1,
        ham2: r.ham2,
        error_bar: r.error_bar,
        bianchi,
        margins,
    })
}

/// Evaluates the soliton identities at every point. Results keep the order of
/// `points` under either execution policy.
pub fn soliton_survey(chart: &MetricChart, points: &[Vec<f64>], scheme: Scheme, exec: Execution) -> Result<SolitonSurvey> {
    if points.is_empty() {
        return Err(Error::BadParams("a survey needs at least one point".into()));
    }
    let probes = exec
        .map_slice(points, |p| probe_record(chart, p, scheme))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let max = |f: fn(&ProbeRecord) -> f64| probes.iter().map(f).fold(0.0, f64::max);
    let mean_energy = probes.iter().map(|p| p.energy).sum::<f64>() / probes.len() as f64;
    Ok(SolitonSurvey {
        metric: chart.name.clone(),
        params: chart.params.clone(),
        dim: chart.dim,
        rho: chart.rho,
        scheme,
        max_eq_residual: max(|p| p.eq_residual),
        max_ham1: max(|p| p.ham1),
        max_ham2: max(|p| p.ham2),
        ham3_constancy: probes.iter().map(|p| (p.energy - mean_energy).abs()).fold(0.0, f64::max),
        mean_energy,
        max_error_bar: max(|p| p.error_bar),
        probes,
    })
}

const NORMALIZE_PROBES: usize = 16;
const NORMALIZE_TOL: f64 = 1e-6;

/// Rescales a steady chart so that `R + |grad f|^2 = 1`. Charts whose energy
/// vanishes (flat with constant potential) are returned unchanged.
pub fn normalize_steady(chart: &MetricChart) -> Result<MetricChart> {
    if chart.rho != 0.0 {
        return Err(Error::NotSteady(chart.rho));
    }
    let mut points = vec![vec![0.0; chart.dim]];
    points.extend(chart.probe_points(NORMALIZE_PROBES, 0));
    let energies = points
        .iter()
        .map(|p| energy_at(chart, p, Scheme::ClosedForm))
        .collect::<Result<Vec<_>>>()?;
    let mean = energies.iter().sum::<f64>() / energies.len() as f64;
    let spread = energies.iter().map(|e| (e - mean).abs()).fold(0.0, f64::max);
    if spread > NORMALIZE_TOL * (1.0 + mean.abs()) {
        return Err(Error::NonConstantEnergy { spread });
    }
    if mean.abs() <= 1e-12 {
        return Ok(chart.clone());
    }
    let mut out = chart.clone();
    out.scale *= mean;
    out.params.insert("scale".to_string(), out.scale);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use approx::assert_abs_diff_eq;

    use super::*;
    use crate::metric::{catalog_metric, riemann_at};

    fn chart(name: &str) -> MetricChart {
        catalog_metric(name, &BTreeMap::new()).unwrap()
    }

    #[test]
    fn gaussian_shrinker_residuals_vanish() {
        let c = chart("gaussian_shrinker");
        let probes = c.probe_points(8, 1);
        let r = soliton_residuals(&c, &[1.0, 0.0, 0.0, 0.0], &probes, Scheme::ClosedForm).unwrap();
        assert!(r.eq_residual < 1e-14 && r.ham1 < 1e-14 && r.ham2 < 1e-14 && r.ham3_constancy < 1e-14);
        assert_abs_diff_eq!(r.energy, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn expander_energy_identity() {
        let c = chart("gaussian_expander");
        for p in c.probe_points(8, 3) {
            let e = energy_at(&c, &p, Scheme::ClosedForm).unwrap();
            // R + |grad f|^2 + f = 0, i.e. the energy with rho = -1/2 vanishes
            assert_abs_diff_eq!(e, 0.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn einstein_sphere_is_trivial_soliton() {
        let c = chart("s4_round");
        let r = soliton_residuals(&c, &[0.3, 0.1, -0.2, 0.5], &[], Scheme::ClosedForm).unwrap();
        assert!(r.eq_residual < 1e-12);
    }

    #[test]
    fn survey_matches_pointwise_residuals() {
        let c = chart("cigar_x_r2");
        let pts = c.probe_points(6, 2);
        let s = soliton_survey(&c, &pts, Scheme::ClosedForm, Execution::Sequential).unwrap();
        let seq = soliton_residuals(&c, &pts[0], &pts[1..], Scheme::ClosedForm).unwrap();
        assert_abs_diff_eq!(s.ham3_constancy, seq.ham3_constancy, epsilon = 1e-14);
        assert_eq!(s.probes[0].eq_residual, seq.eq_residual);
        assert!(s.probes.iter().all(|p| p.bianchi == Some(true)));
        assert_eq!(s, soliton_survey(&c, &pts, Scheme::ClosedForm, Execution::Parallel).unwrap());
        assert!(soliton_survey(&c, &[], Scheme::ClosedForm, Execution::Sequential).is_err());
    }

    #[test]
    fn cigar_energy_and_normalisation() {
        let c = chart("cigar");
        let probes = c.radial_probes(32, 3.0);
        let r = soliton_residuals(&c, &[0.0, 0.0], &probes, Scheme::ClosedForm).unwrap();
        assert!(r.ham3_constancy < 1e-12);
        assert_abs_diff_eq!(r.energy, 4.0, epsilon = 1e-12);
        let n = normalize_steady(&c).unwrap();
        let pc = riemann_at(&n, &[0.0, 0.0], Scheme::ClosedForm).unwrap();
        assert_abs_diff_eq!(pc.scalar, 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(energy_at(&n, &[1.0, 2.0], Scheme::ClosedForm).unwrap(), 1.0, epsilon = 1e-13);
    }

    #[test]
    fn normalisation_errors_and_identity() {
        assert!(matches!(normalize_steady(&chart("s4_round")), Err(Error::NotSteady(_))));
        let flat = chart("flat4");
        assert_eq!(normalize_steady(&flat).unwrap(), flat);
        let c = chart("cigar").without_potential();
        assert!(matches!(soliton_residuals(&c, &[0.0, 0.0], &[], Scheme::ClosedForm), Err(Error::MissingPotential)));
    }
}
