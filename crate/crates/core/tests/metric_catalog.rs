use std::collections::BTreeMap;

use isocurv::exec::Execution;
use isocurv::metric::{
    bryant_profile, catalog_metric, energy_at, normalize_steady, riemann_at, scalar_at, soliton_residuals, soliton_survey,
    MetricChart, Scheme, CATALOG, DEFAULT_FD_STEP,
};
use isocurv::Error;

fn chart(name: &str) -> MetricChart {
    catalog_metric(name, &BTreeMap::new()).unwrap()
}

fn with(name: &str, key: &str, v: f64) -> MetricChart {
    catalog_metric(name, &BTreeMap::from([(key.to_string(), v)])).unwrap()
}

const FD: Scheme = Scheme::FiniteDifference { h: DEFAULT_FD_STEP };

fn is_bryant(name: &str) -> bool {
    name.starts_with("bryant")
}

#[test]
fn explicit_charts_satisfy_soliton_identities() {
    for name in CATALOG.iter().filter(|n| !is_bryant(n)) {
        let c = chart(name);
        let pts = c.probe_points(12, 9);
        let closed = soliton_survey(&c, &pts, Scheme::ClosedForm, Execution::default()).unwrap();
        assert!(closed.worst_residual() <= 1e-10, "{name}: {}", closed.worst_residual());
        let fd = soliton_survey(&c, &pts[..4], FD, Execution::default()).unwrap();
        assert!(fd.worst_residual() <= 1e-6, "{name} fd: {}", fd.worst_residual());
    }
}

#[test]
fn four_dimensional_charts_report_bianchi() {
    for name in CATALOG {
        let c = chart(name);
        let s = soliton_survey(&c, &c.probe_points(2, 1), Scheme::ClosedForm, Execution::Sequential).unwrap();
        for p in &s.probes {
            if c.dim == 4 {
                assert_eq!(p.bianchi, Some(true), "{name}");
                assert!(p.margins.is_some());
            } else {
                assert_eq!(p.bianchi, None, "{name}");
            }
        }
    }
}

#[test]
fn cigar_curvature_and_energy() {
    // Gaussian curvature of (dx^2 + dy^2)/(1 + r^2) is 2/(1 + r^2), so R = 4/(1 + r^2)
    let c = chart("cigar");
    for scheme in [Scheme::ClosedForm, FD] {
        let tol = if scheme == Scheme::ClosedForm { 1e-12 } else { 1e-7 };
        assert!((scalar_at(&c, &[0.0, 0.0], scheme).unwrap() - 4.0).abs() <= tol);
        assert!((scalar_at(&c, &[1.0, 0.0], scheme).unwrap() - 2.0).abs() <= tol);
        assert!((scalar_at(&c, &[0.6, -0.8], scheme).unwrap() - 2.0).abs() <= tol);
        for p in c.probe_points(32, 4) {
            let r2 = p[0] * p[0] + p[1] * p[1];
            assert!((scalar_at(&c, &p, scheme).unwrap() - 4.0 / (1.0 + r2)).abs() <= tol);
            assert!((energy_at(&c, &p, scheme).unwrap() - 4.0).abs() <= tol);
        }
    }
}

#[test]
fn normalising_steady_charts() {
    let c = normalize_steady(&chart("cigar")).unwrap();
    for p in c.probe_points(32, 5) {
        assert!((energy_at(&c, &p, Scheme::ClosedForm).unwrap() - 1.0).abs() <= 1e-12);
    }
    assert!((scalar_at(&c, &[0.0, 0.0], Scheme::ClosedForm).unwrap() - 1.0).abs() <= 1e-12);
    // a normalised chart is a fixed point
    let again = normalize_steady(&c).unwrap();
    assert!((again.scale - c.scale).abs() <= 1e-12);
    // products: energies add
    let cc = chart("cigar_x_cigar");
    assert!((energy_at(&cc, &[0.1, 0.2, 0.3, 0.4], Scheme::ClosedForm).unwrap() - 8.0).abs() <= 1e-12);
    let n = normalize_steady(&cc).unwrap();
    assert!((energy_at(&n, &[0.1, 0.2, 0.3, 0.4], Scheme::ClosedForm).unwrap() - 1.0).abs() <= 1e-12);
    assert!(matches!(normalize_steady(&chart("s4_round")), Err(Error::NotSteady(_))));
    // flat space has zero energy and is left alone
    assert_eq!(normalize_steady(&chart("flat4")).unwrap().scale, chart("flat4").scale);
}

#[test]
fn einstein_charts_have_expected_scalar_curvature() {
    // R = n(n-1)/a^2 on spheres, R = 24 on CP^2 with holomorphic curvature 4,
    // R = 4 on S^2 x S^2, R = 6 on S^3 x R
    let x = [0.2, -0.1, 0.3, 0.05];
    let cases = [
        (chart("s4_round"), 12.0),
        (with("s4_round", "radius", 2.0), 3.0),
        (chart("cp2_fubini_study"), 24.0),
        (chart("s2xs2"), 4.0),
        (chart("s3xr"), 6.0),
        (chart("flat4"), 0.0),
    ];
    for (c, r) in cases {
        for scheme in [Scheme::ClosedForm, FD] {
            let got = scalar_at(&c, &x, scheme).unwrap();
            assert!((got - r).abs() <= 1e-7 * (1.0 + r), "{}: {got}", c.name);
        }
    }
}

#[test]
fn gaussian_solitons() {
    for (name, rho) in [("gaussian_shrinker", 0.5), ("gaussian_expander", -0.5)] {
        let c = chart(name);
        assert_eq!(c.rho, rho);
        let pts = c.probe_points(8, 2);
        let r = soliton_residuals(&c, &pts[0], &pts[1..], Scheme::ClosedForm).unwrap();
        assert!(r.eq_residual <= 1e-12 && r.ham1 <= 1e-12 && r.ham2 <= 1e-12 && r.ham3_constancy <= 1e-12);
    }
}

#[test]
fn finite_differences_match_exact_jets() {
    for name in ["cigar_x_cigar", "cp2_fubini_study", "s2xs2", "cigar_x_r2"] {
        let c = chart(name);
        for p in c.probe_points(3, 8) {
            let exact = riemann_at(&c, &p, Scheme::ClosedForm).unwrap();
            let fd = riemann_at(&c, &p, FD).unwrap();
            let diff = exact
                .riemann
                .as_slice()
                .iter()
                .zip(fd.riemann.as_slice())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(diff <= 1e-7, "{name}: {diff}");
            assert!(fd.error_bar <= 1e-7);
            assert!(fd.riemann.pair_symmetry_defect() <= 1e-12);
            assert!(fd.riemann.bianchi_defect() <= 1e-7);
        }
    }
}

#[test]
fn bryant_profiles() {
    for dim in [3, 4] {
        let p = bryant_profile(dim, 50.0, 1e-8).unwrap();
        // steady normalisation at the tip: f'(0) = 0, so R(0) = 1
        assert!((p.scalar(0.0) - 1.0).abs() <= 1e-6, "dim {dim}");
        assert!(p.energy_spread() <= 1e-6, "dim {dim}: {}", p.energy_spread());
        assert!(p.min_sectional() > 0.0, "dim {dim}");
        assert!(p.linear_decay_drift(25.0, 50.0) <= 0.05, "dim {dim}: {}", p.linear_decay_drift(25.0, 50.0));
        // R decreases monotonically along the profile
        let rs: Vec<f64> = (0..50).map(|k| p.scalar(k as f64)).collect();
        assert!(rs.windows(2).all(|w| w[1] < w[0]));
    }
}

#[test]
fn bryant_charts_pass_identities_within_shooting_tolerance() {
    for name in ["bryant3_x_r", "bryant4"] {
        let c = chart(name);
        let pts = c.probe_points(6, 3);
        let s = soliton_survey(&c, &pts, Scheme::ClosedForm, Execution::default()).unwrap();
        assert!(s.worst_residual() <= 1e-6, "{name}: {}", s.worst_residual());
        assert!((s.mean_energy - 1.0).abs() <= 1e-6);
        let fd = soliton_survey(&c, &pts[..2], FD, Execution::default()).unwrap();
        assert!(fd.worst_residual() <= 1e-6, "{name} fd: {}", fd.worst_residual());
    }
}

#[test]
fn catalog_errors() {
    assert!(matches!(catalog_metric("torus", &BTreeMap::new()), Err(Error::UnknownName(_))));
    let bad = BTreeMap::from([("radius".to_string(), -1.0)]);
    assert!(matches!(catalog_metric("s4_round", &bad), Err(Error::BadParams(_))));
    let unknown = BTreeMap::from([("colour".to_string(), 1.0)]);
    assert!(matches!(catalog_metric("cigar", &unknown), Err(Error::BadParams(_))));
    // points must match the chart dimension
    let s4 = chart("s4_round");
    assert!(scalar_at(&s4, &[0.0, 0.0], Scheme::ClosedForm).is_err());
    assert!(scalar_at(&s4, &[0.0; 5], Scheme::ClosedForm).is_err());
}

#[test]
fn probe_points_are_seeded() {
    let c = chart("cigar_x_cigar");
    assert_eq!(c.probe_points(5, 1), c.probe_points(5, 1));
    assert_ne!(c.probe_points(5, 1), c.probe_points(5, 2));
    let r = c.radial_probes(4, 2.0);
    assert!((r[3].iter().map(|v| v * v).sum::<f64>().sqrt() - 2.0).abs() < 1e-15);
}
