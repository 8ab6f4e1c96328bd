use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mediff_bench::four_weeks;
use mediff_core::decompose::{extract_seasonal, extract_trend, detrend};
use mediff_core::median::moving_median;
use mediff_core::{esd_test, ZScoreMode};

fn medians(c: &mut Criterion) {
    let y = four_weeks(2);
    let mut group = c.benchmark_group("moving_median");
    for window in [30, 60, 10_080] {
        group.bench_with_input(BenchmarkId::from_parameter(window), &window, |b, &w| {
            b.iter(|| moving_median(black_box(y.values()), w, false))
        });
    }
    group.finish();

    let trend = extract_trend(&y, 10_080).unwrap();
    let detrended = detrend(&y, &trend).unwrap();
    c.bench_function("seasonal_median", |b| {
        b.iter(|| extract_seasonal(black_box(&detrended), 10_080, 3).unwrap())
    });
}

fn esd(c: &mut Criterion) {
    let y = four_weeks(3);
    let sample = &y.values()[10_079..];
    let mut group = c.benchmark_group("esd_30241");
    for mode in [ZScoreMode::RobustMad, ZScoreMode::Classic] {
        group.bench_function(mode.to_string(), |b| {
            b.iter(|| esd_test(black_box(sample), 605, 0.05, mode).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, medians, esd);
criterion_main!(benches);
