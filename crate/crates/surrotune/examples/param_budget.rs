//! Per-module parameter budgets across the design space: how the encoder,
//! bridge, decoder, and head counts move with the two width knobs, and the
//! resulting checkpoint-size ratios.
//!
//! ```bash
//! cargo run --example param_budget
//! ```

use surrotune::costmodel::param_count;
use surrotune::Config;

fn main() {
    let configs = [
        Config { b: 64, h: 32 },
        Config { b: 48, h: 16 },
        Config { b: 40, h: 4 },
        Config { b: 32, h: 8 },
        Config { b: 16, h: 4 },
    ];

    println!(
        "{:<10}{:>12}{:>10}{:>10}{:>8}{:>12}{:>10}",
        "config", "encoder", "bridge", "decoder", "head", "total", "MB fp32"
    );
    for c in configs {
        let bd = param_count(c);
        println!(
            "{:<10}{:>12}{:>10}{:>10}{:>8}{:>12}{:>10.2}",
            format!("({},{})", c.b, c.h),
            bd.encoder_params,
            bd.bridge_params,
            bd.decoder_params,
            bd.head_params,
            bd.total(),
            bd.size_mb_fp32()
        );
    }

    let full = param_count(Config { b: 64, h: 32 }).total() as f64;
    println!("\nsize relative to the (64,32) baseline:");
    for c in &configs[1..] {
        let t = param_count(*c).total() as f64;
        println!("  ({:>2},{:>2})  {:>5.1}%", c.b, c.h, 100.0 * t / full);
    }

    // the encoder dominates: decoder cost is the only h-dependent part,
    // which is why shrinking h cuts latency without touching capacity much
    let wide = param_count(Config { b: 64, h: 32 });
    println!(
        "\nbaseline split: encoder {:.0}%, bridge {:.0}%, decoder {:.0}%, head {:.0}%",
        100.0 * wide.encoder_params as f64 / wide.total() as f64,
        100.0 * wide.bridge_params as f64 / wide.total() as f64,
        100.0 * wide.decoder_params as f64 / wide.total() as f64,
        100.0 * wide.head_params as f64 / wide.total() as f64,
    );
}
