//! The full tuning pipeline: synthesize profiling data, fit surrogates,
//! minimize the normalized latency/power/mIoU objective over the
//! continuous (b, h) box, and snap to the nearest deployable config.
//!
//! ```bash
//! cargo run --example optimize_config
//! ```

use surrotune::costmodel::{default_grid, generate_dataset, CostModelParams, NoiseSigma};
use surrotune::optimizer::{
    compute_bounds, minimize, MinimizeSettings, ObjectiveSpec, SurrogateModels, Weights,
};
use surrotune::{aggregate_repeats, fit_quadratic, fit_rational, Config, DomainBox, TargetMetric};

fn main() {
    // noiseless profiling so the story is about the optimizer, not noise
    let params = CostModelParams {
        noise_sigma: NoiseSigma {
            latency_ms: 0.0,
            power_w: 0.0,
            miou: 0.0,
        },
        ..CostModelParams::default()
    };
    let raw = generate_dataset(&default_grid(), &params, 1).expect("valid grid");
    let data = aggregate_repeats(&raw).expect("non-empty");

    let (latency, _) = fit_quadratic(&data, TargetMetric::LatencyMs).expect("fit");
    let (power, _) = fit_quadratic(&data, TargetMetric::PowerW).expect("fit");
    let (miou, _) = fit_rational(&data).expect("fit");
    let models = SurrogateModels {
        latency,
        power,
        miou,
    };

    let bounds = compute_bounds(&models, &data.configs()).expect("bounds");
    println!(
        "normalization bounds: latency [{:.1}, {:.1}] ms, power [{:.2}, {:.2}] W, miou [{:.1}, {:.1}]",
        bounds.latency.min, bounds.latency.max, bounds.power.min, bounds.power.max,
        bounds.miou.min, bounds.miou.max
    );

    let spec = ObjectiveSpec::new(Weights::default(), bounds, DomainBox::default()).expect("spec");
    let result = minimize(&models, &spec, &MinimizeSettings::default()).expect("minimize");

    println!(
        "\ncontinuous optimum: b = {:.2}, h = {:.2}  (objective {:.4})",
        result.continuous_opt.b, result.continuous_opt.h, result.objective_value
    );
    println!(
        "snapped to lattice: ({}, {})       (objective {:.4})",
        result.snapped.b, result.snapped.h, result.snapped_objective
    );
    println!(
        "descent starts: {} ({} converged)",
        result.trace.len(),
        result.trace.iter().filter(|t| t.converged).count()
    );

    let baseline = Config { b: 64, h: 32 };
    let base = &models;
    let bp = baseline.as_point();
    let chosen = &result.predicted_snapped;
    println!(
        "\n{:<18}{:>12}{:>12}{:>10}",
        "", "baseline", "selected", "change"
    );
    println!(
        "{:<18}{:>12.2}{:>12.2}{:>9.1}%",
        "latency (ms)",
        base.predict_latency(bp),
        chosen.latency_ms,
        100.0 * (chosen.latency_ms / base.predict_latency(bp) - 1.0)
    );
    println!(
        "{:<18}{:>12.2}{:>12.2}{:>9.1}%",
        "power (W)",
        base.predict_power(bp),
        chosen.power_w,
        100.0 * (chosen.power_w / base.predict_power(bp) - 1.0)
    );
    println!(
        "{:<18}{:>12.2}{:>12.2}{:>10.2}",
        "mIoU (points)",
        base.predict_miou(bp).unwrap(),
        chosen.miou,
        chosen.miou - base.predict_miou(bp).unwrap()
    );
    if let Some(d) = &chosen.derived {
        let base_energy = base.predict_latency(bp) * base.predict_power(bp);
        println!(
            "{:<18}{:>12.2}{:>12.2}{:>9.1}%",
            "energy (mJ)",
            base_energy,
            d.energy_mj,
            100.0 * (d.energy_mj / base_energy - 1.0)
        );
    }
}
