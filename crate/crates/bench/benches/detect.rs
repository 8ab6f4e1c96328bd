use criterion::{criterion_group, criterion_main, Criterion};
use mediff_bench::four_weeks;
use mediff_core::{detect_batch, CalendarConfig, DetectorConfig, ZScoreMode};

fn batch(c: &mut Criterion) {
    let y = four_weeks(1);
    let calendar = CalendarConfig::default();
    let mut group = c.benchmark_group("detect_batch_40320");
    group.sample_size(20);
    for mode in [ZScoreMode::RobustMad, ZScoreMode::Classic] {
        let cfg = DetectorConfig { zscore_mode: mode, ..DetectorConfig::default() };
        group.bench_function(mode.to_string(), |b| {
            b.iter(|| detect_batch(&y, &cfg, &calendar).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, batch);
criterion_main!(benches);
