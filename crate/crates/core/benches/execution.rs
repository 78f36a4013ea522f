use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trussopt::benchmarks::load_problem;
use trussopt::harness::{run_campaign, Algorithm, ExperimentConfig};
use trussopt::objective::Mode;
use trussopt::optimizer::{evaluate_batch, Objective};
use trussopt::Execution;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn batch(c: &mut Criterion) {
    let p = load_problem("72bar").unwrap();
    let obj = p.objective(Mode::Continuous).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let points: Vec<Vec<f64>> = (0..64)
        .map(|_| {
            obj.lower()
                .iter()
                .zip(obj.upper())
                .map(|(&l, &u)| rng.gen_range(l..=u))
                .collect()
        })
        .collect();
    let mut group = c.benchmark_group("batch_72bar_64");
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| evaluate_batch(&obj, &points, exec))
        });
    }
    group.finish();
}

fn campaign(c: &mut Criterion) {
    let mut group = c.benchmark_group("campaign_10bar_sfoa_8x500");
    group.sample_size(10);
    for (name, exec) in MODES {
        let cfg = ExperimentConfig::new("10bar", Algorithm::Sfoa, Mode::Discrete)
            .runs(8)
            .budget(500)
            .execution(exec);
        group.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| run_campaign(cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, batch, campaign);
criterion_main!(benches);
