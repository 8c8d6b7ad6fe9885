use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use isocurv::audit::{frame_consistency, run_campaign, Campaign, SampleSpec};
use isocurv::exec::Execution;

const POLICIES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn campaigns(c: &mut Criterion) {
    let mut g = c.benchmark_group("campaign_10k");
    g.sample_size(10);
    for campaign in [Campaign::URearrangement, Campaign::WpicFrameInequalities] {
        let spec = SampleSpec::new(42, 10_000, campaign.required());
        for (label, exec) in POLICIES {
            g.bench_with_input(BenchmarkId::new(campaign.id(), label), &exec, |b, &exec| {
                b.iter(|| run_campaign(campaign.id(), &spec, 1e-9, exec).unwrap())
            });
        }
    }
    g.finish();
}

fn frames(c: &mut Criterion) {
    let mut g = c.benchmark_group("frame_consistency_32");
    g.sample_size(10);
    let spec = SampleSpec::new(42, 32, &[isocurv::audit::Constraint::Bianchi]);
    for (label, exec) in POLICIES {
        g.bench_with_input(BenchmarkId::from_parameter(label), &exec, |b, &exec| {
            b.iter(|| frame_consistency(&spec, 4, 1e-6, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, campaigns, frames);
criterion_main!(benches);
