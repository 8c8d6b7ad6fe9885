//! Block-algebra invariants checked against direct tensor contractions.

use isocurv::algebra::{
    build_from_riemann, classify_cones, isotropic_curvature, ricci_from_blocks, spectral_summary, CurvOp4,
    CurvatureTensor, Orientation, ISOTROPIC_BLOCK_FACTOR,
};
use isocurv::audit::sample_frame;
use nalgebra::{Matrix3, Matrix4};
use proptest::prelude::*;

fn entries() -> impl Strategy<Value = (Vec<f64>, f64)> {
    (prop::collection::vec(-1.0f64..1.0, 27), 0.1f64..10.0)
}

fn operator(v: &[f64], scale: f64) -> CurvOp4 {
    let m = |k: usize| Matrix3::from_fn(|i, j| v[9 * k + 3 * i + j] * scale);
    let a = m(0);
    let c = m(2);
    CurvOp4::with_bianchi((a + a.transpose()) * 0.5, m(1), (c + c.transpose()) * 0.5)
}

/// Ascending eigenvalues of the Ricci contraction of the tensor.
fn direct_ricci(t: &CurvatureTensor) -> [f64; 4] {
    let mut e: Vec<f64> = t.ricci().symmetric_eigen().eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    [e[0], e[1], e[2], e[3]]
}

fn sorted(m: &Matrix3<f64>) -> [f64; 3] {
    let mut e: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    e.sort_by(f64::total_cmp);
    [e[0], e[1], e[2]]
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn tensor_round_trip((v, s) in entries()) {
        let op = operator(&v, s);
        let t = op.to_riemann();
        prop_assert!(t.bianchi_defect() <= 1e-12 * s);
        let back = build_from_riemann(&t, Orientation::Positive).unwrap();
        prop_assert!(back.bianchi_flag());
        for (x, y) in [(op.a(), back.a()), (op.b(), back.b()), (op.c(), back.c())] {
            prop_assert!((x - y).amax() <= 1e-12 * s);
        }
    }

    #[test]
    fn trace_and_norm_identities((v, s) in entries()) {
        let op = operator(&v, s);
        let t = op.to_riemann();
        let r = t.scalar();
        let tol = 1e-9 * (1.0 + r.abs() + op.norm());
        prop_assert!((op.a().trace() - r / 4.0).abs() <= tol);
        prop_assert!((op.c().trace() - r / 4.0).abs() <= tol);
        let rc2 = t.ricci().norm_squared();
        let want = 4.0 * op.b().norm_squared() + r * r / 4.0;
        prop_assert!((rc2 - want).abs() <= 1e-9 * (1.0 + want));
    }

    #[test]
    fn ricci_spectrum_from_signed_b((v, s) in entries()) {
        let op = operator(&v, s);
        let sm = spectral_summary(&op);
        let direct = direct_ricci(&op.to_riemann());
        let tol = 1e-9 * (1.0 + sm.rm_norm);
        let from_blocks = ricci_from_blocks(&sm).unwrap();
        prop_assert!(close(&from_blocks.eigs, &direct, tol), "{:?} vs {:?}", from_blocks.eigs, direct);
        prop_assert!((sm.u_monitor() - 4.0 * direct[0]).abs() <= 4.0 * tol);
        prop_assert!((sm.v_monitor() - 2.0 * (direct[0] + direct[1])).abs() <= 4.0 * tol);
    }

    #[test]
    fn spectra_are_frame_invariant((v, s) in entries(), seed in any::<u64>()) {
        let op = operator(&v, s);
        let f: Matrix4<f64> = sample_frame(seed, 0);
        let rotated = build_from_riemann(&op.to_riemann().in_frame4(&f), Orientation::Positive).unwrap();
        let (a, b) = (spectral_summary(&op), spectral_summary(&rotated));
        let tol = 1e-10 * (1.0 + a.rm_norm);
        prop_assert!(close(&a.a_eigs, &b.a_eigs, tol));
        prop_assert!(close(&a.c_eigs, &b.c_eigs, tol));
        prop_assert!(close(&a.b_singular, &b.b_singular, tol));
        prop_assert!(close(&a.b_signed, &b.b_signed, tol) || a.b_singular[0] <= tol);
    }

    #[test]
    fn reversing_orientation_swaps_a_and_c((v, s) in entries()) {
        let op = operator(&v, s);
        let neg = build_from_riemann(&op.to_riemann(), Orientation::Negative).unwrap();
        let tol = 1e-12 * s * 10.0;
        prop_assert!(close(&sorted(op.a()), &sorted(neg.c()), tol));
        prop_assert!(close(&sorted(op.c()), &sorted(neg.a()), tol));
        let (x, y) = (op.b().determinant(), neg.b().determinant());
        // B is replaced by a matrix with the same singular values
        prop_assert!((x.abs() - y.abs()).abs() <= 1e-9 * (1.0 + x.abs()));
    }

    #[test]
    fn cone_implications((v, s) in entries(), shift in 0.0f64..3.0) {
        let op = operator(&v, s).shifted(shift * s);
        let c = classify_cones(&spectral_summary(&op), 1e-9);
        if c.a_nonneg && c.c_nonneg { prop_assert!(c.wpic); }
        if c.pic { prop_assert!(c.wpic && c.half_pic); }
        if c.wpic { prop_assert!(c.half_wpic); }
        if c.ricci_nonneg { prop_assert!(c.ricci_2nonneg); }
    }

    #[test]
    fn isotropic_curvature_is_bounded_below_by_blocks((v, s) in entries(), seed in any::<u64>()) {
        let op = operator(&v, s);
        let sm = spectral_summary(&op);
        let floor = ISOTROPIC_BLOCK_FACTOR * (sm.a_eigs[0] + sm.a_eigs[1]).min(sm.c_eigs[0] + sm.c_eigs[1]);
        let f = sample_frame(seed, 1);
        let iso = isotropic_curvature(&op.to_riemann(), &f).unwrap();
        prop_assert!(iso >= floor - 1e-10 * (1.0 + sm.rm_norm), "{iso} < {floor}");
    }
}

#[test]
fn model_spaces() {
    // S^4: A = C = I, B = 0
    let s4 = build_from_riemann(&CurvatureTensor::constant_curvature(4, 1.0), Orientation::Positive).unwrap();
    assert!((s4.a() - Matrix3::identity()).amax() < 1e-14);
    assert!(s4.b().amax() < 1e-14);
    // S^3 x R: Ricci (2, 2, 2, 0) and u = 4 Lambda_1 = 0
    let t = CurvatureTensor::constant_curvature(3, 1.0).direct_sum(&CurvatureTensor::zeros(1));
    let sm = spectral_summary(&build_from_riemann(&t, Orientation::Positive).unwrap());
    assert!(close(&sm.ricci_eigs, &[0.0, 2.0, 2.0, 2.0], 1e-12));
    assert!(sm.u_monitor().abs() < 1e-12);
    assert!((sm.v_monitor() - 4.0).abs() < 1e-12);
}
