use std::hint::black_box;
use std::sync::Arc;

use criterion::{Criterion, criterion_group, criterion_main};
use euler_geom::checks::{frame_trials, metric_trials};
use euler_geom::evolve::{SmoothAmplitudes, smooth_fixture};
use euler_geom::reform::{StackSettings, run_resolution};
use euler_geom::run::SamplingConfig;
use euler_geom::shock1d::sine_fan;
use euler_geom::{EosModel, Grid, StencilOrder, compute_derived};

fn pointwise(c: &mut Criterion) {
    let eos = EosModel::polytropic(1.4, 1.0).unwrap();
    c.bench_function("eos_evaluate", |b| b.iter(|| eos.evaluate(black_box(0.3), black_box(-0.2)).unwrap()));
    let cfg = SamplingConfig {
        trials: 100,
        ..Default::default()
    };
    c.bench_function("metric_trials_100", |b| b.iter(|| metric_trials(black_box(42), &cfg)));
    c.bench_function("frame_trials_100", |b| b.iter(|| frame_trials(black_box(42), &cfg).unwrap()));
}

fn fields(c: &mut Criterion) {
    let eos = Arc::new(EosModel::polytropic(1.4, 1.0).unwrap());
    let grid = Grid::new(32, StencilOrder::Fourth).unwrap();
    let state = smooth_fixture(grid, SmoothAmplitudes::default(), eos.clone());
    c.bench_function("derived_n32", |b| b.iter(|| compute_derived(black_box(&state))));

    let coarse = smooth_fixture(Grid::new(16, StencilOrder::Fourth).unwrap(), SmoothAmplitudes::default(), eos);
    let mut group = c.benchmark_group("residuals");
    group.sample_size(10);
    group.bench_function("n16", |b| b.iter(|| run_resolution(&coarse, &StackSettings::default()).unwrap()));
    group.finish();
}

fn shock(c: &mut Criterion) {
    let eos = Arc::new(EosModel::polytropic(1.4, 1.0).unwrap());
    let mut group = c.benchmark_group("shock1d");
    group.sample_size(10);
    group.bench_function("fan_build", |b| b.iter(|| sine_fan(eos.clone(), black_box(0.3), 0.0).unwrap()));
    let fan = sine_fan(eos.clone(), 0.3, 0.0).unwrap();
    let t = 0.9 * fan.blowup().t_star;
    group.bench_function("product_sample", |b| b.iter(|| fan.product_sample(black_box(t)).unwrap()));
    group.finish();
}

criterion_group!(benches, pointwise, fields, shock);
criterion_main!(benches);
