//! Emit the fitted surrogate surfaces as plottable b,h,value grids.
//!
//! ```bash
//! cargo run --example contour_grids
//! ```
//!
//! The written files feed any external plotter, for instance gnuplot:
//! `set datafile separator ","; splot 'surrotune_contour_miou.csv' every ::1`.

use surrotune::costmodel::{default_grid, generate_dataset, CostModelParams};
use surrotune::io::emit_contours;
use surrotune::optimizer::SurrogateModels;
use surrotune::{aggregate_repeats, fit_quadratic, fit_rational, DomainBox, TargetMetric};

fn main() {
    let params = CostModelParams::default();
    let raw = generate_dataset(&default_grid(), &params, 1).expect("valid grid");
    let data = aggregate_repeats(&raw).expect("non-empty");

    let models = SurrogateModels {
        latency: fit_quadratic(&data, TargetMetric::LatencyMs)
            .expect("fit")
            .0,
        power: fit_quadratic(&data, TargetMetric::PowerW).expect("fit").0,
        miou: fit_rational(&data).expect("fit").0,
    };

    let prefix = std::env::temp_dir().join("surrotune_contour_");
    let prefix = prefix.to_string_lossy();
    let written = emit_contours(&models, &DomainBox::default(), (49, 29), &prefix).expect("write");

    for path in &written {
        println!("wrote {}", path.display());
    }

    // show a slice along h at b = 32: latency climbs with the bottleneck
    // width while accuracy barely moves
    let text = std::fs::read_to_string(&written[1]).unwrap();
    println!("\nlatency along h at b = 32:");
    for line in text.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        if cells[0] == "32" {
            let h: f64 = cells[1].parse().unwrap();
            if (h - h.round()).abs() < 1e-9 {
                println!(
                    "  h = {:>4}  ->  {:>7.2} ms",
                    h,
                    cells[2].parse::<f64>().unwrap()
                );
            }
        }
    }
}
