//! Derived deployment metrics from measured latency/power pairs.
//!
//! ```bash
//! cargo run --example derive_metrics
//! ```

use surrotune::derive_metrics;

fn main() {
    // (label, latency ms, power W) measured on an embedded board
    let rows = [
        ("wide baseline (64,32)", 178.63, 7.21),
        ("tuned (32,8)", 109.72, 5.75),
        ("tuned (40,4)", 119.69, 6.07),
    ];

    println!(
        "{:<24}{:>12}{:>10}{:>14}{:>8}{:>10}",
        "configuration", "latency", "power", "energy", "fps", "fps/W"
    );
    println!(
        "{:<24}{:>12}{:>10}{:>14}{:>8}{:>10}",
        "", "(ms)", "(W)", "(mJ/image)", "", ""
    );
    for (label, latency_ms, power_w) in rows {
        let m = derive_metrics(latency_ms, power_w).expect("positive inputs");
        println!(
            "{:<24}{:>12.2}{:>10.2}{:>14.2}{:>8.2}{:>10.2}",
            label, latency_ms, power_w, m.energy_mj, m.fps, m.fps_per_watt
        );
    }

    let base = derive_metrics(178.63, 7.21).unwrap();
    let tuned = derive_metrics(109.72, 5.75).unwrap();
    println!();
    println!(
        "energy saving vs baseline: {:.1}%  |  throughput gain: {:.2}x",
        100.0 * (1.0 - tuned.energy_mj / base.energy_mj),
        tuned.fps / base.fps
    );
}
