//! Fit the three surrogate models to a profiled dataset and inspect the
//! recovered coefficients and fit quality.
//!
//! ```bash
//! cargo run --example fit_surrogates
//! ```

use surrotune::costmodel::{default_grid, generate_dataset, CostModelParams};
use surrotune::{aggregate_repeats, fit_quadratic, fit_rational, TargetMetric};

fn main() {
    let params = CostModelParams::default();
    let raw = generate_dataset(&default_grid(), &params, 1).expect("valid grid");
    let data = aggregate_repeats(&raw).expect("non-empty");

    println!(
        "fitting on {} configs with default measurement noise\n",
        data.len()
    );

    let (latency, latency_diag) = fit_quadratic(&data, TargetMetric::LatencyMs).expect("fit");
    let (power, power_diag) = fit_quadratic(&data, TargetMetric::PowerW).expect("fit");
    let (miou, miou_diag) = fit_rational(&data).expect("fit");

    println!("latency_ms ~ quadratic, basis [1, b, h, b^2, b*h, h^2]");
    println!("  coefficients: {:?}", latency.coeffs);
    println!(
        "  R^2 {:.4}   RMSE {:.4} ms\n",
        latency_diag.r_squared, latency_diag.rmse
    );

    println!("power_w ~ quadratic");
    println!("  coefficients: {:?}", power.coeffs);
    println!(
        "  R^2 {:.4}   RMSE {:.4} W\n",
        power_diag.r_squared, power_diag.rmse
    );

    println!("miou ~ rational, numerator [1, b, h, b*h] over denominator [1, b, h] + b*h");
    println!("  numerator:   {:?}", miou.numerator);
    println!(
        "  denominator: {:?} (b*h coefficient fixed to 1)",
        miou.denominator
    );
    println!(
        "  R^2 {:.4}   RMSE {:.4} points\n",
        miou_diag.r_squared, miou_diag.rmse
    );

    // how close did the fit come to the generating model?
    println!(
        "{:<10}{:>14}{:>14}{:>12}{:>12}",
        "config", "latency fit", "latency true", "miou fit", "miou true"
    );
    for s in data.samples().iter().step_by(5) {
        let p = s.config.as_point();
        let (miou_true, latency_true, _) = params.noiseless(s.config).unwrap();
        println!(
            "{:<10}{:>14.2}{:>14.2}{:>12.2}{:>12.2}",
            format!("({},{})", s.config.b, s.config.h),
            latency.predict(p),
            latency_true,
            miou.predict(p).unwrap(),
            miou_true,
        );
    }
}
