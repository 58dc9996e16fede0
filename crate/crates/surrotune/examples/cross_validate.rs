//! Leave-one-out cross validation: hold out each profiled config in turn,
//! refit, and compare held-out prediction quality (Q²) against the
//! in-sample R². A Q² far below R² flags overfitting.
//!
//! ```bash
//! cargo run --example cross_validate
//! ```

use surrotune::costmodel::{default_grid, generate_dataset, CostModelParams};
use surrotune::{aggregate_repeats, loo_cross_validate, LooFitter, TargetMetric};

fn main() {
    let params = CostModelParams::default();
    let raw = generate_dataset(&default_grid(), &params, 1).expect("valid grid");
    let data = aggregate_repeats(&raw).expect("non-empty");

    println!(
        "{:<12}{:>10}{:>10}{:>14}",
        "surrogate", "R^2", "Q^2", "PRESS"
    );
    for (name, fitter) in [
        ("latency_ms", LooFitter::Quadratic(TargetMetric::LatencyMs)),
        ("power_w", LooFitter::Quadratic(TargetMetric::PowerW)),
        ("miou", LooFitter::rational_default()),
    ] {
        let diag = loo_cross_validate(&data, &fitter).expect("cross-validate");
        println!(
            "{:<12}{:>10.4}{:>10.4}{:>14.4}",
            name,
            diag.r_squared,
            diag.loo_q_squared.unwrap(),
            diag.loo_press.unwrap()
        );
    }

    println!("\nheld-out errors, mIoU surrogate (points):");
    let diag = loo_cross_validate(&data, &LooFitter::rational_default()).unwrap();
    let press = diag.loo_press.unwrap();
    for (s, _) in data.samples().iter().zip(diag.residuals.iter()) {
        print!("({},{}) ", s.config.b, s.config.h);
    }
    println!("\nPRESS = {press:.4} over {} held-out fits", data.len());
}
