//! Inputs shared by the benchmarks.

use mediff_core::synth::{random_plan, PlanSpec};
use mediff_core::{generate_synthetic, SynthSpec, TimeSeries};

/// Four weeks of one-minute samples with ten spikes and two level shifts.
pub fn four_weeks(seed: u64) -> TimeSeries {
    let plan = PlanSpec {
        spikes: 10,
        level_shifts: 2,
        shift_duration: (30, 120),
        magnitude: 80.0,
        region: (10_300, 40_200),
        min_gap: 300,
    };
    let spec = SynthSpec {
        seed,
        anomalies: random_plan(&plan, seed).expect("plan fits"),
        ..SynthSpec::default()
    };
    generate_synthetic(&spec).expect("valid spec").series
}
