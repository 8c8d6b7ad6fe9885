use isocurv::algebra::{classify_cones, spectral_summary};
use isocurv::audit::{
    run_campaign, run_identity_campaign, sample_frame, symbolic_certificates, AuditReport, Campaign, CampaignKind,
    Constraint, SampleSpec, Sampler,
};
use isocurv::exec::Execution;
use isocurv::Error;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use Constraint::*;

fn spec_for(c: Campaign, seed: u64, count: usize) -> SampleSpec {
    SampleSpec::new(seed, count, c.required())
}

#[test]
fn theorem_campaigns_pass() {
    for c in Campaign::ALL.into_iter().filter(|c| c.kind() != CampaignKind::Falsification) {
        let r = run_identity_campaign(c.id(), &spec_for(c, 21, 2000), 1e-9).unwrap();
        assert_eq!(r.passes, r.total, "{}: {:?}", c.id(), r.counterexamples.first());
        assert!(!r.is_violation());
        assert!(r.worst_residual <= 1e-9);
        assert_eq!(r.schema_version, 1);
    }
}

#[test]
fn execution_policy_does_not_change_reports() {
    for c in Campaign::ALL {
        let spec = spec_for(c, 5, 500);
        let seq = run_campaign(c.id(), &spec, 1e-9, Execution::Sequential).unwrap();
        let par = run_campaign(c.id(), &spec, 1e-9, Execution::Parallel).unwrap();
        assert_eq!(serde_json::to_string(&seq).unwrap(), serde_json::to_string(&par).unwrap(), "{}", c.id());
    }
}

#[test]
fn max_form_counterexamples_are_reproducible() {
    let spec = spec_for(Campaign::PinchingMaxForm, 42, 20_000);
    let r = run_identity_campaign("prop64_max_equivalence", &spec, 1e-9).unwrap();
    assert!(!r.counterexamples.is_empty());
    assert!(!r.is_violation(), "falsification findings are not violations");
    assert!(r.counterexamples.windows(2).all(|w| w[0].index < w[1].index));
    let sampler = Sampler::new(&spec).unwrap();
    for cx in r.counterexamples.iter().take(5) {
        assert_eq!(sampler.sample(cx.index).unwrap().op, cx.op);
        // the max-form bound holds while one of the pairs is nearly degenerate
        let m = &cx.margins;
        assert!(m["R"] <= 4.0 * (m["L"] + 1.0) * m["a12"].max(m["c12"]));
        assert!(m["L_min"] > 1e3);
    }
}

#[test]
fn report_round_trips_through_json() {
    let r = run_identity_campaign("prop64_max_equivalence", &spec_for(Campaign::PinchingMaxForm, 1, 3000), 1e-9).unwrap();
    let text = serde_json::to_string(&r).unwrap();
    let back: AuditReport = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string(&back).unwrap(), text);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    for key in ["campaign", "seed", "total", "worst_residual", "counterexamples", "schema_version"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert!(v.get("wall_time").is_none());
}

#[test]
fn certificates_hold_exactly() {
    let [u, v] = symbolic_certificates();
    assert!(u.holds && v.holds);
    assert_eq!(u.remainder_terms, 0);
    let r = run_identity_campaign("prop61_rearrangement", &spec_for(Campaign::VRearrangement, 1, 10), 1e-9).unwrap();
    assert_eq!(r.certificates, vec![v]);
}

#[test]
fn campaign_input_errors() {
    assert!(matches!(
        run_identity_campaign("rm_leq_r", &SampleSpec::new(1, 10, &[Bianchi]), 1e-9),
        Err(Error::ConstraintMismatch { .. })
    ));
    assert!(matches!(
        run_identity_campaign("lemma99", &SampleSpec::new(1, 10, &[Bianchi]), 1e-9),
        Err(Error::UnknownCampaign(_))
    ));
    assert!(run_identity_campaign("thm31_rearrangement", &SampleSpec::new(1, 10, &[Bianchi]), -1.0).is_err());
}

#[test]
fn sampled_operators_meet_their_constraints() {
    let sets: [&[Constraint]; 4] = [
        &[Bianchi, Wpic],
        &[Bianchi, Pic, Ricci2Nonneg],
        &[Bianchi, ANonneg, CNonneg, RicciNonneg],
        &[Bianchi, Einstein, Pic],
    ];
    for set in sets {
        let spec = SampleSpec::new(8, 300, set).with_scale(2.0);
        let s = Sampler::new(&spec).unwrap();
        for i in 0..300 {
            let smp = s.sample(i).unwrap();
            let op = &smp.op;
            assert!((op.a().trace() - op.c().trace()).abs() <= 1e-12 * (1.0 + op.norm()));
            if set.contains(&Einstein) {
                assert_eq!(op.b().amax(), 0.0);
            }
            let c = classify_cones(&spectral_summary(op), 1e-12);
            for k in set {
                let ok = match k {
                    Wpic => c.wpic,
                    Pic => c.pic,
                    ANonneg => c.a_nonneg,
                    CNonneg => c.c_nonneg,
                    RicciNonneg => c.ricci_nonneg,
                    Ricci2Nonneg => c.ricci_2nonneg,
                    Bianchi | Einstein => true,
                };
                assert!(ok, "{set:?} index {i}: {k} fails");
            }
            assert_eq!(smp.shift.is_some(), s.shifts_all() || smp.draws > 1 && smp.shift.is_some());
        }
    }
}

/// Cell of the first frame vector: its sign pattern (16 cells) and whether
/// `x1^2 + x2^2 > 1/2`. For a uniform point on the 3-sphere `x1^2 + x2^2` is
/// uniform on `[0, 1]` and independent of the signs, so all 32 cells are
/// equally likely.
fn cell(x: [f64; 4]) -> usize {
    let signs = x.iter().enumerate().fold(0, |acc, (i, v)| acc | (usize::from(*v < 0.0) << i));
    let upper = usize::from(x[0] * x[0] + x[1] * x[1] > 0.5);
    signs * 2 + upper
}

#[test]
fn frames_are_haar_distributed() {
    let n = 32_000;
    for column in 0..2 {
        let mut counts = [0usize; 32];
        for i in 0..n {
            let f = sample_frame(99, i);
            counts[cell([f[(0, column)], f[(1, column)], f[(2, column)], f[(3, column)]])] += 1;
        }
        let expected = n as f64 / 32.0;
        let stat: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        let p = 1.0 - ChiSquared::new(31.0).unwrap().cdf(stat);
        assert!(p > 1e-3, "column {column}: chi2 {stat}, p {p}");
    }
}

#[test]
fn frames_are_rotations_and_seeded() {
    for i in 0..100 {
        let f = sample_frame(4, i);
        assert!((f.transpose() * f - nalgebra::Matrix4::identity()).amax() < 1e-12);
        assert!((f.determinant() - 1.0).abs() < 1e-12);
        assert_eq!(f, sample_frame(4, i));
    }
    assert_ne!(sample_frame(4, 0), sample_frame(5, 0));
}
