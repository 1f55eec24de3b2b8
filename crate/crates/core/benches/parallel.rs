//! Sequential versus parallel execution of the two data-parallel hot paths:
//! the row-wise truncated series and independent simulation runs.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use trustweb::graph::{generate_random_graph, RandomGraphSpec};
use trustweb::metric::{indirect_trust_truncated, normalize_direct, MetricConfig, NormalizationMode};
use trustweb::simulate::{run, SimulationConfig};
use trustweb::Execution;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn truncated_series(c: &mut Criterion) {
    let g = generate_random_graph(&RandomGraphSpec::new(2000, 10.0, 1))
        .unwrap()
        .map_weights(|i, j, _| ((i * 31 + j * 17) % 97 + 1) as f64 / 97.0);
    let s = normalize_direct(&g, NormalizationMode::Strict);
    let mut group = c.benchmark_group("truncated_series");
    group.sample_size(10);
    for (name, exec) in MODES {
        let cfg = MetricConfig {
            exec,
            ..MetricConfig::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| indirect_trust_truncated(&s, 0.8, 20, None, cfg).unwrap())
        });
    }
    group.finish();
}

fn simulation_runs(c: &mut Criterion) {
    let mut group = c.benchmark_group("simulation_runs");
    group.sample_size(10);
    for (name, exec) in MODES {
        let cfg = SimulationConfig {
            n_agents: 200,
            steps: 10,
            runs: 8,
            eta: 0.2,
            exec,
            ..SimulationConfig::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| run(cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, truncated_series, simulation_runs);
criterion_main!(benches);
