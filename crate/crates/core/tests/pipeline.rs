use mediff_core::calendar::Holiday;
use mediff_core::eval::DEFAULT_DELAY_BUDGET;
use mediff_core::synth::{random_plan, DstShift, HolidayDip, PlanSpec, SeasonProfile};
use mediff_core::*;

fn spikes(count: usize) -> PlanSpec {
    PlanSpec {
        spikes: count,
        level_shifts: 0,
        shift_duration: (1, 1),
        magnitude: 80.0,
        region: (10_300, 40_200),
        min_gap: 300,
    }
}

#[test]
fn weekly_sinusoid_spikes_are_all_found() {
    for seed in [11, 12, 13] {
        let spec = SynthSpec {
            seed,
            profile: SeasonProfile { daily_amplitude: 0.0, ..SeasonProfile::default() },
            anomalies: random_plan(&spikes(10), seed).unwrap(),
            ..SynthSpec::default()
        };
        let s = generate_synthetic(&spec).unwrap();
        let cfg = DetectorConfig { beta: 1.0, gamma: false, ..DetectorConfig::default() };
        let report = detect_batch(&s.series, &cfg, &CalendarConfig::default()).unwrap();
        let found = condense(&report.indices());
        for &l in s.labels.labels() {
            assert!(found.iter().any(|&d| d.abs_diff(l) <= 1), "seed {seed}: missed {l}");
        }
        let extra = found
            .iter()
            .filter(|&&d| !s.labels.labels().iter().any(|&l| d.abs_diff(l) <= 1))
            .count();
        assert!(extra <= 2, "seed {seed}: {extra} extraneous detections");
    }
}

#[test]
fn calendar_switches_on_compensation() {
    let spec = SynthSpec {
        seed: 3,
        anomalies: random_plan(&spikes(6), 3).unwrap(),
        dst_shift: Some(DstShift { at: 20_161, offset: 60 }),
        holiday: Some(HolidayDip { start: 30_000, duration: 600, magnitude: 150.0 }),
        ..SynthSpec::default()
    };
    let s = generate_synthetic(&spec).unwrap();
    let report = detect_batch(&s.series, &DetectorConfig::default(), &s.calendar).unwrap();
    assert_eq!(report.effect.beta, 0.4);
    assert!(report.effect.gamma);
    assert_eq!(report.effect.reasons.len(), 2);
    let found = condense(&report.indices());
    let score = match_and_score(&found, s.labels.labels(), s.series.period(), DEFAULT_DELAY_BUDGET);
    assert_eq!(score.recall, 1.0, "{score:?}");
    // Trailing windows lag a step change, so the only extra detections sit
    // just after the DST jump and the holiday edges.
    let edges = [20_161, 30_000, 30_600];
    for d in found.iter().filter(|d| !s.labels.labels().contains(d)) {
        assert!(edges.iter().any(|&e| *d >= e && *d < e + 60), "unexpected detection at {d}");
    }
}

#[test]
fn holiday_outside_batch_keeps_events_off() {
    let spec = SynthSpec { seed: 4, ..SynthSpec::default() };
    let s = generate_synthetic(&spec).unwrap();
    let far = s.series.span().1 + chrono::TimeDelta::days(30);
    let calendar = CalendarConfig::new(
        Vec::new(),
        mediff_core::calendar::DEFAULT_DST_EFFECT,
        vec![Holiday { start: far, end: far, label: "later".into() }],
    )
    .unwrap();
    let report = detect_batch(&s.series, &DetectorConfig::default(), &calendar).unwrap();
    assert_eq!(report.effect, EffectResolution::neutral());
}

#[test]
fn stream_over_six_weeks() {
    let spec = SynthSpec {
        seed: 9,
        seasons: 6,
        anomalies: random_plan(&PlanSpec { region: (20_500, 60_000), ..spikes(8) }, 9).unwrap(),
        ..SynthSpec::default()
    };
    let s = generate_synthetic(&spec).unwrap();
    let windows = sliding_windows(&s.series, 40_320, 10_080).unwrap();
    assert_eq!(windows.len(), 3);
    let reports = detect_stream(&windows, &DetectorConfig::default(), &s.calendar).unwrap();
    let mut all: Vec<usize> = reports.iter().flat_map(|r| r.indices()).collect();
    all.sort_unstable();
    let before = all.len();
    all.dedup();
    assert_eq!(before, all.len(), "an anomaly was reported twice");
    let found = condense(&all);
    let score = match_and_score(&found, s.labels.labels(), s.series.period(), DEFAULT_DELAY_BUDGET);
    assert_eq!(score.recall, 1.0, "{score:?}");
}
