use bubblestamp_bench::{batch_path, bubble_series};
use bubblestamp_core::dating::{datestamp, PersistenceFilter};
use bubblestamp_core::svadf::recursive_path;
use bubblestamp_core::{RecursiveConfig, ThresholdRule};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn statistic_path(c: &mut Criterion) {
    let cfg = RecursiveConfig::default();
    let mut group = c.benchmark_group("statistic_path");
    for n in [250, 1000, 4000] {
        let series = bubble_series(n, 7);
        group.bench_with_input(BenchmarkId::new("recursive", n), &series, |b, s| {
            b.iter(|| recursive_path(black_box(s), &cfg).unwrap())
        });
        if n <= 1000 {
            group.bench_with_input(BenchmarkId::new("batch", n), &series, |b, s| {
                b.iter(|| batch_path(black_box(s), &cfg).unwrap())
            });
        }
    }
    group.finish();
}

fn date_stamping(c: &mut Criterion) {
    let series = bubble_series(1000, 3);
    let path = recursive_path(&series, &RecursiveConfig::default()).unwrap();
    let orig = ThresholdRule::origination_default();
    let coll = ThresholdRule::collapse_default();
    let filter = PersistenceFilter::simulation(1000);
    c.bench_function("datestamp_1000", |b| {
        b.iter(|| datestamp(black_box(&path), &orig, &coll, &filter).unwrap())
    });
}

criterion_group!(benches, statistic_path, date_stamping);
criterion_main!(benches);
