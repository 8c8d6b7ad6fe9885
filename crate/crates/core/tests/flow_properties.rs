use isocurv::algebra::{spectral_summary, CurvOp4};
use isocurv::audit::{Constraint, SampleSpec, Sampler};
use isocurv::flow::{
    integrate3, integrate4, monitor_functionals, reaction_rhs3, reaction_rhs4, Controls, FlowState, FlowStatus,
};
use nalgebra::Matrix3;
use proptest::prelude::*;

fn entries() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 27)
}

fn operator(v: &[f64]) -> CurvOp4 {
    let m = |k: usize| Matrix3::from_fn(|i, j| v[9 * k + 3 * i + j]);
    let (a, c) = (m(0), m(2));
    CurvOp4::with_bianchi((a + a.transpose()) * 0.5, m(1), (c + c.transpose()) * 0.5)
}

fn last_op(states: &[FlowState]) -> CurvOp4 {
    match states.last().unwrap() {
        FlowState::Blocks(op) => op.clone(),
        FlowState::Eigen(_) => panic!("expected blocks"),
    }
}

fn max_diff(x: &CurvOp4, y: &CurvOp4) -> f64 {
    (x.a() - y.a()).amax().max((x.b() - y.b()).amax()).max((x.c() - y.c()).amax())
}

fn swap_orientation(op: &CurvOp4) -> CurvOp4 {
    CurvOp4::new(*op.c(), op.b().transpose(), *op.a())
}

fn wpic_sampler(seed: u64, count: usize) -> Sampler {
    Sampler::new(&SampleSpec::new(seed, count, &[Constraint::Bianchi, Constraint::Wpic])).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn right_hand_side_is_quadratic(v in entries(), lambda in -3.0f64..3.0) {
        let op = operator(&v);
        let d = reaction_rhs4(&op);
        let dl = reaction_rhs4(&op.scaled(lambda));
        prop_assert!(max_diff(&dl, &d.scaled(lambda * lambda)) <= 1e-12 * (1.0 + lambda * lambda));
    }

    #[test]
    fn orientation_reversal_commutes_with_the_flow(v in entries()) {
        let op = operator(&v);
        let lhs = reaction_rhs4(&swap_orientation(&op));
        let rhs = swap_orientation(&reaction_rhs4(&op));
        prop_assert!(max_diff(&lhs, &rhs) <= 1e-13);
    }

    #[test]
    fn trajectories_scale_with_time(v in entries(), lambda in 0.5f64..4.0) {
        // Rm(t) solves the flow iff lambda Rm(lambda t) does
        let op = operator(&v);
        let t = 0.05 / (1.0 + op.norm());
        let c = |t_max| Controls { t_max, rel_tol: 1e-11, abs_tol: 1e-14, ..Controls::default() };
        let base = integrate4(&op, &c(t)).unwrap();
        let scaled = integrate4(&op.scaled(lambda), &c(t / lambda)).unwrap();
        prop_assert_eq!(&base.status, &FlowStatus::Completed);
        let want = last_op(&base.states).scaled(lambda);
        let got = last_op(&scaled.states);
        prop_assert!(max_diff(&want, &got) <= 1e-8 * lambda * (1.0 + want.norm()), "{}", max_diff(&want, &got));
    }

    #[test]
    fn bianchi_is_preserved_along_trajectories(v in entries()) {
        let op = operator(&v);
        let tr = integrate4(&op, &Controls { t_max: 0.5, rm_ceiling: 1e6, ..Controls::default() }).unwrap();
        let defect = tr.channel("trace_defect").unwrap();
        let norm = tr.channel("rm_norm").unwrap();
        for (d, n) in defect.iter().zip(&norm) {
            prop_assert!(d.abs() <= 1e-9 * (1.0 + n), "{d} at |Rm| = {n}");
        }
    }

    #[test]
    fn three_dimensional_ricci_cone_is_preserved(m in prop::array::uniform3(-1.0f64..1.0)) {
        let mut m = m;
        m.sort_by(f64::total_cmp);
        prop_assume!(2.0 * m[0] + m[1] + m[2] >= 0.0);
        let tr = integrate3(m, &Controls { rm_ceiling: 1e6, ..Controls::default() }).unwrap();
        prop_assert!(tr.scaled_minimum("ricci2").unwrap() >= -1e-8);
    }
}

#[test]
fn three_dimensional_boundary_derivative() {
    let d = reaction_rhs3([-1.0, 1.0, 1.0]);
    assert_eq!(2.0 * d[0] + d[1] + d[2], 4.0);
}

#[test]
fn symmetric_data_blow_up_times() {
    for a0 in [0.25, 1.0, 3.0] {
        let op = CurvOp4::new(Matrix3::identity() * a0, Matrix3::zeros(), Matrix3::identity() * a0);
        let t = integrate4(&op, &Controls::default()).unwrap().blow_up_time().unwrap();
        let want = 1.0 / (6.0 * a0);
        assert!((t - want).abs() <= 0.01 * want, "a0 {a0}: {t}");
    }
}

#[test]
fn runs_are_deterministic() {
    let op = wpic_sampler(3, 1).sample(0).unwrap().op;
    let a = integrate4(&op, &Controls::default()).unwrap();
    let b = integrate4(&op, &Controls::default()).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn wpic_and_two_nonnegative_ricci_survive_the_flow() {
    let s = wpic_sampler(11, 200);
    for i in 0..200 {
        let op = s.sample(i).unwrap().op;
        let tr = integrate4(&op, &Controls { rm_ceiling: 1e6, ..Controls::default() }).unwrap();
        assert!(!matches!(tr.status, FlowStatus::StepFailure { .. }), "{i}");
        let wpic = tr.scaled_minimum("a12").unwrap().min(tr.scaled_minimum("c12").unwrap());
        assert!(wpic >= -1e-6, "{i}: {wpic}");
        if monitor_functionals(&op).v >= 0.0 {
            assert!(tr.scaled_minimum("v").unwrap() >= -1e-6, "{i}");
        }
    }
}

#[test]
fn nonnegative_blocks_keep_ricci_nonnegative() {
    let spec = SampleSpec::new(13, 200, &[Constraint::Bianchi, Constraint::ANonneg, Constraint::CNonneg]);
    let s = Sampler::new(&spec).unwrap();
    for i in 0..200 {
        let op = s.sample(i).unwrap().op;
        if spectral_summary(&op).u_monitor() < 0.0 {
            continue;
        }
        let tr = integrate4(&op, &Controls { rm_ceiling: 1e6, ..Controls::default() }).unwrap();
        assert!(tr.scaled_minimum("u").unwrap() >= -1e-6, "{i}");
    }
}

#[test]
fn wpic_alone_does_not_keep_ricci_nonnegative() {
    // WPIC start with Rc >= 0 but A1, C1 < 0: the smallest Ricci eigenvalue
    // turns negative while A1 + A2 and C1 + C2 stay positive
    let op = wpic_sampler(7, 1000).sample(955).unwrap().op;
    let m0 = monitor_functionals(&op);
    assert!(m0.u > 0.0 && m0.wpic_margin() > 0.0);
    let tr = integrate4(&op, &Controls::default()).unwrap();
    assert!(tr.scaled_minimum("u").unwrap() < -0.1);
    assert!(tr.scaled_minimum("a12").unwrap() > 0.0 && tr.scaled_minimum("c12").unwrap() > 0.0);
}
