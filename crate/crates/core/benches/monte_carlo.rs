use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use jacobi_mimo::simulate::{mc_ergodic_capacity, mc_outage, Rate};
use jacobi_mimo::{ChannelDims, McConfig};

fn worker_counts() -> Vec<usize> {
    let n = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    if n > 1 { vec![1, n] } else { vec![1] }
}

fn ergodic(c: &mut Criterion) {
    let mut g = c.benchmark_group("ergodic_capacity_4x4x8");
    g.sample_size(10);
    let dims = ChannelDims::new(4, 4, 8).unwrap();
    for w in worker_counts() {
        let cfg = McConfig::new(20_000, 1).with_workers(w);
        g.bench_with_input(BenchmarkId::new("workers", w), &cfg, |b, cfg| {
            b.iter(|| mc_ergodic_capacity(dims, 100.0, cfg).unwrap())
        });
    }
    g.finish();
}

fn outage(c: &mut Criterion) {
    let mut g = c.benchmark_group("outage_2x2x32");
    g.sample_size(10);
    let dims = ChannelDims::new(2, 2, 32).unwrap();
    for w in worker_counts() {
        let cfg = McConfig::new(20_000, 1).with_workers(w);
        g.bench_with_input(BenchmarkId::new("workers", w), &cfg, |b, cfg| {
            b.iter(|| mc_outage(dims, 100.0, Rate::Ratio(0.5), cfg).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, ergodic, outage);
criterion_main!(benches);
