//! File-level pipeline: write a samples file, build a tuning report from
//! it, round-trip the report through JSON, and evaluate predictions from
//! the reloaded report — the same flow the `surrotune` binary drives.
//!
//! ```bash
//! cargo run --example report_pipeline
//! ```

use surrotune::cli::{build_fit_report, optimize_report};
use surrotune::costmodel::{default_grid, generate_dataset, CostModelParams};
use surrotune::io::{fnv1a_digest, parse_samples, RunConfig, TuningReport};
use surrotune::{aggregate_repeats, derive_metrics};

fn main() {
    // synthesize a profiling campaign and serialize it like a real run
    let params = CostModelParams::default();
    let raw = generate_dataset(&default_grid(), &params, 5).expect("valid grid");
    let mut csv = Vec::new();
    surrotune::io::emit_samples(&mut csv, &raw).expect("serialize");

    // ingest as the CLI would: parse, aggregate repeats, fit, optimize
    let parsed = parse_samples(std::io::Cursor::new(&csv)).expect("parse");
    let data = aggregate_repeats(&parsed).expect("non-empty");
    let mut report =
        build_fit_report(&data, fnv1a_digest(&csv), Some(params.rng_seed)).expect("fit");
    optimize_report(&mut report, &RunConfig::default()).expect("optimize");

    let json = report.to_json().expect("serialize report");
    println!("report is {} bytes of JSON", json.len());

    // reload and use it
    let reloaded = TuningReport::from_json(&json).expect("parse report");
    assert_eq!(reloaded, report, "JSON round trip is exact");

    let result = reloaded.optimization.as_ref().unwrap();
    println!(
        "selected config ({}, {}) with digest {}",
        result.snapped.b, result.snapped.h, reloaded.provenance.input_digest
    );

    let models = reloaded.models();
    let at = result.snapped.as_point();
    let latency = models.predict_latency(at);
    let power = models.predict_power(at);
    let derived = derive_metrics(latency, power).unwrap();
    println!(
        "predictions there: {:.2} ms, {:.2} W, {:.1} mJ/image, {:.2} fps",
        latency, power, derived.energy_mj, derived.fps
    );
}
