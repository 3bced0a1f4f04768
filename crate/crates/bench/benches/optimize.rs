use core::time::Duration;
use std::hint::black_box;

use bmv_lab_core::search::run_start;
use bmv_lab_core::{Mode, OptimConfig};
use criterion::{criterion_group, criterion_main, Criterion};

fn single_start(c: &mut Criterion) {
    let min = OptimConfig::new(Mode::MinPsd, 3, 6, 3, 1);
    c.bench_function("min-psd (6,3,3) start 0", |b| {
        b.iter(|| run_start(black_box(&min), 0, false).unwrap())
    });
    let max = OptimConfig::new(Mode::MaxHerm, 3, 6, 3, 1);
    c.bench_function("max-herm (6,3,3) start 0", |b| {
        b.iter(|| run_start(black_box(&max), 0, false).unwrap())
    });
}

criterion_group! {
    name = optimize;
    config = Criterion::default().sample_size(10).measurement_time(Duration::from_secs(10));
    targets = single_start
}
criterion_main!(optimize);
