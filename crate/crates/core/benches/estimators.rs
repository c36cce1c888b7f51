use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use std::hint::black_box;

use hyperorc::curvature::{CurvatureConfig, CurvatureEngine, EstimatorKind};
use hyperorc::generators::{generate_hcm, generate_hsbm, syn_hcm, syn_hsbm};
use hyperorc::harness::scaling_instance;
use hyperorc::measure::MeasureKind;
use hyperorc::par;

fn bench_pair_estimators(c: &mut Criterion) {
    let h = generate_hcm(&syn_hcm(7)).unwrap().hypergraph;
    let config = CurvatureConfig { measure: MeasureKind::We, ..CurvatureConfig::default() };
    let engine = CurvatureEngine::new(&h, config).unwrap();
    let pairs: Vec<_> = engine.adjacency().adjacent_pairs().into_iter().take(200).collect();

    let mut group = c.benchmark_group("pair_w1_syn_hcm");
    group.throughput(Throughput::Elements(pairs.len() as u64));
    for estimator in [EstimatorKind::Bound, EstimatorKind::Exact, EstimatorKind::Sinkhorn] {
        group.bench_function(estimator.as_str(), |b| {
            b.iter(|| {
                for &(u, v) in &pairs {
                    black_box(engine.pair_w1_with(u, v, estimator).unwrap());
                }
            })
        });
    }
    group.finish();
}

fn bench_bound_support(c: &mut Criterion) {
    let mut group = c.benchmark_group("bound_vs_support");
    for k in [64, 256, 1024, 4096] {
        let h = scaling_instance(k);
        let engine = CurvatureEngine::new(&h, CurvatureConfig::default()).unwrap();
        group.throughput(Throughput::Elements((4 * k + 2) as u64));
        group.bench_with_input(BenchmarkId::from_parameter(k), &engine, |b, engine| {
            b.iter(|| black_box(engine.pair_w1_with(0, 1, EstimatorKind::Bound).unwrap()))
        });
    }
    group.finish();
}

/// Full curvature pass on one worker and on the whole pool. Without the
/// `parallel` feature both run the same sequential loop.
fn bench_curvature_pass(c: &mut Criterion) {
    let datasets = [
        ("syn_hcm", generate_hcm(&syn_hcm(7)).unwrap().hypergraph),
        ("syn_hsbm", generate_hsbm(&syn_hsbm(7)).unwrap().hypergraph),
    ];
    let pool = par::current_threads();
    let mut group = c.benchmark_group("curvature_pass");
    group.sample_size(20);
    for (name, h) in &datasets {
        for estimator in [EstimatorKind::Bound, EstimatorKind::Exact] {
            for (label, threads) in [("1_thread".to_string(), Some(1)), (format!("{pool}_threads"), None)] {
                let config = CurvatureConfig { estimator, threads, ..CurvatureConfig::default() };
                let engine = CurvatureEngine::new(h, config).unwrap();
                let id = BenchmarkId::new(format!("{name}/{estimator}"), label);
                group.bench_function(id, |b| b.iter(|| black_box(engine.report())));
            }
        }
    }
    group.finish();
}

criterion_group!(benches, bench_pair_estimators, bench_bound_support, bench_curvature_pass);
criterion_main!(benches);
