use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use chrono::TimeDelta;
use rayon::prelude::*;
use serde::Serialize;

use mediff_core::detector::{detect_stream, sliding_windows};
use mediff_core::eval::{evaluate_corpus, metrics_table, EvalOptions};
use mediff_core::io::{read_series_csv, write_series_csv, write_trace};
use mediff_core::synth::{random_plan, DstShift, HolidayDip, PlanSpec};
use mediff_core::{
    decompose as run_decompose, generate_synthetic, resolve_effects, CalendarConfig, LabelSet,
    SynthSpec, TimeSeries,
};

use crate::output::{emit, write_atomic};
use crate::tuning::UsageError;
use crate::{DecomposeArgs, DetectArgs, EvalArgs, SynthArgs};

fn read_series(path: &Path) -> Result<TimeSeries> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_series_csv(std::io::BufReader::new(file)).with_context(|| format!("in {}", path.display()))
}

fn read_calendar(path: Option<&Path>) -> Result<CalendarConfig> {
    let Some(path) = path else {
        return Ok(CalendarConfig::default());
    };
    let text = fs::read_to_string(path).with_context(|| format!("reading calendar {}", path.display()))?;
    CalendarConfig::from_toml(&text).with_context(|| format!("in calendar {}", path.display()))
}

fn series_id(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

pub fn detect(args: DetectArgs) -> Result<()> {
    let cfg = args.tuning.resolve()?;
    let calendar = read_calendar(args.calendar.as_deref())?;
    if args.batching.batch_len == 0 || args.stride == 0 {
        bail!(UsageError("--batch-len and --stride must be positive".into()));
    }
    let per_input = args
        .input
        .par_iter()
        .map(|path| {
            let y = read_series(path)?;
            let windows = sliding_windows(&y, args.batching.batch_len, args.stride)?;
            let mut reports = detect_stream(&windows, &cfg, &calendar)
                .with_context(|| format!("detecting in {}", path.display()))?;
            let id = series_id(path);
            for r in &mut reports {
                r.series_id.clone_from(&id);
            }
            Ok(reports)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut out = String::new();
    for (path, reports) in args.input.iter().zip(&per_input) {
        let found: usize = reports.iter().map(|r| r.anomalies.len()).sum();
        eprintln!("{}: {found} anomalies in {} batches", path.display(), reports.len());
        for r in reports {
            out.push_str(&r.to_json());
            out.push('\n');
        }
    }
    emit(args.output.as_deref(), out.as_bytes())
}

pub fn decompose(args: DecomposeArgs) -> Result<()> {
    let cfg = args.tuning.resolve()?;
    let calendar = read_calendar(args.calendar.as_deref())?;
    let y = read_series(&args.input)?;
    let effect = resolve_effects(y.span(), &calendar, cfg.beta, cfg.gamma);
    let d = run_decompose(&y, &cfg, effect.beta, effect.gamma)
        .with_context(|| format!("decomposing {}", args.input.display()))?;
    let mut buf = Vec::new();
    write_trace(&y, &d, &mut buf)?;
    emit(args.output.as_deref(), &buf)
}

pub fn eval(args: EvalArgs) -> Result<()> {
    let cfg = args.tuning.resolve()?;
    if args.input.len() != args.labels.len() {
        bail!(UsageError(format!(
            "{} --input files but {} --labels files; pass one label file per series",
            args.input.len(),
            args.labels.len()
        )));
    }
    if args.delay_budget_minutes < 0 {
        bail!(UsageError("--delay-budget-minutes must not be negative".into()));
    }
    let calendar = read_calendar(args.calendar.as_deref())?;
    let corpus = args
        .input
        .iter()
        .zip(&args.labels)
        .map(|(series, labels)| {
            let y = read_series(series)?;
            let text = fs::read_to_string(labels)
                .with_context(|| format!("reading labels {}", labels.display()))?;
            let l = LabelSet::from_json(&text).with_context(|| format!("in {}", labels.display()))?;
            Ok((y, l))
        })
        .collect::<Result<Vec<_>>>()?;
    let options = EvalOptions {
        batch_len: args.batching.batch_len,
        delay_budget: TimeDelta::minutes(args.delay_budget_minutes),
    };
    let scores = evaluate_corpus(&corpus, &cfg, &calendar, &options)?;
    emit(args.output.as_deref(), metrics_table(&scores).as_bytes())
}

#[derive(Serialize)]
struct Manifest<'a> {
    series: &'a str,
    labels: &'a str,
    calendar: &'a str,
    spec: &'a SynthSpec,
}

fn synth_spec(args: &SynthArgs) -> Result<SynthSpec> {
    if let Some(path) = &args.spec {
        let text = fs::read_to_string(path).with_context(|| format!("reading spec {}", path.display()))?;
        return toml::from_str(&text).with_context(|| format!("in spec {}", path.display()));
    }
    let len = args.seasons * args.season_len;
    let margin = 120.min(args.season_len);
    if args.seasons < 2 || len < args.season_len + 2 * margin + 1 {
        bail!(UsageError("need at least two seasons".into()));
    }
    let plan = PlanSpec {
        spikes: args.spikes,
        level_shifts: args.level_shifts,
        shift_duration: (30.min(margin), 120.min(margin)),
        magnitude: args.magnitude_sigma * args.noise_std,
        region: (args.season_len + margin, len - margin),
        min_gap: 300.min(args.season_len / 10),
    };
    let holiday = args.holiday_len.map(|duration| HolidayDip {
        start: 2 * args.season_len + args.season_len / 3 + 1,
        duration,
        magnitude: 15.0 * args.noise_std,
    });
    Ok(SynthSpec {
        series_id: args.series_id.clone(),
        season_len: args.season_len,
        seasons: args.seasons,
        noise_std: args.noise_std,
        anomalies: random_plan(&plan, args.seed)?,
        dst_shift: args.dst_offset.map(|offset| DstShift { at: len / 2 + 1, offset }),
        holiday,
        missing_rate: args.missing_rate,
        seed: args.seed,
        ..SynthSpec::default()
    })
}

pub fn synth(args: SynthArgs) -> Result<()> {
    let spec = synth_spec(&args)?;
    let out = generate_synthetic(&spec)?;
    fs::create_dir_all(&args.output).with_context(|| format!("creating {}", args.output.display()))?;

    let mut csv = Vec::new();
    write_series_csv(&out.series, &mut csv)?;
    write_atomic(&args.output.join("series.csv"), &csv)?;
    write_atomic(&args.output.join("labels.json"), out.labels.to_json().as_bytes())?;
    write_atomic(&args.output.join("calendar.toml"), out.calendar.to_toml().as_bytes())?;
    let manifest = Manifest {
        series: "series.csv",
        labels: "labels.json",
        calendar: "calendar.toml",
        spec: &spec,
    };
    let mut json = serde_json::to_string_pretty(&manifest)?;
    json.push('\n');
    write_atomic(&args.output.join("manifest.json"), json.as_bytes())?;
    eprintln!(
        "{}: {} samples, {} labelled events",
        args.output.display(),
        out.series.len(),
        out.labels.labels().len()
    );
    Ok(())
}
