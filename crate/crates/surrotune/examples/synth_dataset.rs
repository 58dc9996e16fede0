//! Generate a synthetic profiling dataset from the calibrated cost model:
//! repeated noisy draws per configuration, then averaged into one sample
//! per config, mimicking a real profiling campaign.
//!
//! ```bash
//! cargo run --example synth_dataset
//! ```

use surrotune::aggregate_repeats;
use surrotune::costmodel::{default_grid, generate_dataset, CostModelParams};
use surrotune::io::emit_samples;

fn main() {
    let params = CostModelParams {
        rng_seed: 7,
        ..CostModelParams::default()
    };

    // profile every grid config 100 times, as a measurement campaign would
    let raw = generate_dataset(&default_grid(), &params, 100).expect("valid grid");
    println!(
        "drew {} raw samples over {} configs",
        raw.len(),
        default_grid().len()
    );

    let averaged = aggregate_repeats(&raw).expect("non-empty");
    println!("averaged down to {} samples:\n", averaged.len());

    let mut csv = Vec::new();
    emit_samples(&mut csv, averaged.samples()).expect("in-memory write");
    print!("{}", String::from_utf8(csv).unwrap());

    // repeat-to-repeat scatter at one config
    let at_32_8: Vec<f64> = raw
        .iter()
        .filter(|s| s.config.b == 32 && s.config.h == 8)
        .map(|s| s.latency_ms)
        .collect();
    let mean = at_32_8.iter().sum::<f64>() / at_32_8.len() as f64;
    let spread = at_32_8
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    println!(
        "\nlatency at (32,8): mean {:.2} ms over {} repeats, range [{:.2}, {:.2}]",
        mean,
        at_32_8.len(),
        spread.0,
        spread.1
    );
}
