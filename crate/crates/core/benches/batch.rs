use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nlfm::pipeline::{design_all, RunConfig};
use nlfm::spectral::{naive_forward, DesignGrid, Spectral};
use nlfm::{Complex64, Execution};

fn small_batch() -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.optimizer.max_iterations = 10;
    cfg
}

fn batch(c: &mut Criterion) {
    let cfg = small_batch();
    let mut group = c.benchmark_group("design_all");
    group.sample_size(10);
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_function(BenchmarkId::from_parameter(format!("{exec:?}")), |b| {
            b.iter(|| design_all(&cfg, exec).unwrap())
        });
    }
    group.finish();
}

fn transforms(c: &mut Criterion) {
    let grid = DesignGrid::new(0.25, 128.0, 1.0, None).unwrap();
    let spectral = Spectral::new(grid);
    let x: Vec<Complex64> = (0..128)
        .map(|n| Complex64::from_polar(1.0, 0.01 * (n * n) as f64))
        .collect();
    let mut group = c.benchmark_group("forward_128x256");
    group.bench_function("fft", |b| b.iter(|| spectral.forward(&x).unwrap()));
    group.bench_function("naive", |b| b.iter(|| naive_forward(&x, 256)));
    group.finish();
}

criterion_group!(benches, batch, transforms);
criterion_main!(benches);
