use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use wpspine::sampler::{sample_d, SampleConfig};
use wpspine::trees::CuspMask;
use wpspine::wp_poly::{wp_volume, Route};
use wpspine::Exec;

const POLICIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn volumes(c: &mut Criterion) {
    let mut group = c.benchmark_group("wp_volume_n5");
    group.sample_size(10);
    let mask = CuspMask::from_bits(5, 0).unwrap();
    for (name, exec) in POLICIES {
        group.bench_function(BenchmarkId::new("anti", name), |b| {
            b.iter(|| wp_volume(black_box(5), &mask, Route::Anti, exec).unwrap())
        });
    }
    group.finish();
}

fn sampling(c: &mut Criterion) {
    let mut group = c.benchmark_group("sample_d");
    group.sample_size(10);
    let config = SampleConfig::new(vec![0.0, 0.0, 1.0, 0.5, 2.0], 20_000, 7);
    for (name, exec) in POLICIES {
        group.bench_function(BenchmarkId::new("five_boundaries", name), |b| {
            b.iter(|| sample_d(black_box(&config), exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, volumes, sampling);
criterion_main!(benches);
