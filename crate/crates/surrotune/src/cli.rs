//! Command-line front end: one subcommand per pipeline stage, so
//! intermediate artifacts (fit reports) are cacheable and inspectable.
//!
//! Every subcommand reads its primary input from standard input when the
//! path is `-`, and `synth --out -` writes to standard output, so stages
//! compose under a shell pipe. Failures exit nonzero with a single
//! machine-parseable line: `error[<category>]: <detail>`.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::costmodel::{default_grid, generate_dataset, param_count, CostModelParams, NoiseSigma};
use crate::designspace::{
    aggregate_repeats, derive_metrics, ContinuousPoint, DomainBox, Lattice, Sample, SampleSet,
};
use crate::error::{Error, Result};
use crate::io::{
    emit_contours, emit_report, emit_samples, fnv1a_digest, parse_samples, BoundsPolicy,
    Provenance, QuadraticFitReport, RationalFitReport, RunConfig, TuningReport,
};
use crate::optimizer::{
    compute_bounds, minimize, MinimizeSettings, NormalizationBounds, ObjectiveSpec, Weights,
};
use crate::surrogate::{fit_quadratic, fit_rational, loo_cross_validate, LooFitter, TargetMetric};

#[derive(Debug, Parser)]
#[command(
    name = "surrotune",
    version,
    about = "Fit latency/power/mIoU surrogates over a (b, h) design space and pick a deployable configuration"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit all three surrogates from profiled samples and print fit quality.
    Fit(FitArgs),
    /// Full pipeline: fit (or load a report), normalize, minimize, snap.
    Optimize(OptimizeArgs),
    /// Evaluate the fitted surrogates and derived metrics at one point.
    Predict(PredictArgs),
    /// Emit the surrogate surfaces as b,h,value grid files.
    Contour(ContourArgs),
    /// Leave-one-out cross validation of all three surrogates.
    Validate(ValidateArgs),
    /// Generate a synthetic profiling dataset from the cost model.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Samples file (`-` for standard input).
    pub samples: String,
    /// Write a partial tuning report (fits and diagnostics) here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    /// Samples file, or a report file with --from-report (`-` for stdin).
    pub input: String,
    /// Treat the input as a previously written report instead of samples.
    #[arg(long)]
    pub from_report: bool,
    /// Objective weights w_latency,w_power,w_miou.
    #[arg(long, value_parser = parse_weights, default_value = "1,1,1")]
    pub weights: Weights,
    /// Deployable lattice: bstep,blo,bhi,hstep,hlo,hhi.
    #[arg(long, value_parser = parse_lattice, default_value = "8,16,64,4,4,32")]
    pub lattice: Lattice,
    /// Continuous search box: blo,bhi,hlo,hhi.
    #[arg(long = "box", value_parser = parse_box, default_value = "16,64,4,32")]
    pub domain: DomainBox,
    /// Explicit normalization bounds lmin,lmax,pmin,pmax,mmin,mmax
    /// (default: surrogate predictions over the sampled configs).
    #[arg(long, value_parser = parse_bounds)]
    pub bounds: Option<NormalizationBounds>,
    /// Write the full tuning report here (`-` for standard output).
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Report file (`-` for standard input).
    pub report: String,
    /// Encoder base width.
    pub b: f64,
    /// Decoder bottleneck width.
    pub h: f64,
}

#[derive(Debug, Args)]
pub struct ContourArgs {
    /// Report file (`-` for standard input).
    pub report: String,
    /// Grid resolution NB,NH.
    #[arg(long, value_parser = parse_resolution, default_value = "49,29")]
    pub resolution: (usize, usize),
    /// Box to span: blo,bhi,hlo,hhi.
    #[arg(long = "box", value_parser = parse_box, default_value = "16,64,4,32")]
    pub domain: DomainBox,
    /// Output path prefix; files are <prefix>miou.csv, <prefix>latency.csv,
    /// <prefix>power.csv.
    #[arg(long)]
    pub out: String,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Samples file (`-` for standard input).
    pub samples: String,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Cost-model RNG seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Noise sigma: one value for all metrics or latency,power,miou.
    #[arg(long, value_parser = parse_sigma)]
    pub sigma: Option<NoiseSigma>,
    /// Repeated draws per configuration.
    #[arg(long, default_value_t = 1)]
    pub repeats: u64,
    /// Cost-model parameter file overriding the built-in defaults.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Output samples file (`-` for standard output).
    #[arg(long, default_value = "-")]
    pub out: String,
    /// Also print the per-module parameter budget of each grid config.
    #[arg(long)]
    pub print_params: bool,
}

pub fn parse_weights(text: &str) -> std::result::Result<Weights, String> {
    let v = parse_f64_list(text, 3)?;
    Ok(Weights {
        latency: v[0],
        power: v[1],
        miou: v[2],
    })
}

pub fn parse_lattice(text: &str) -> std::result::Result<Lattice, String> {
    let v = parse_f64_list(text, 6)?;
    let as_u32 = |x: f64| -> std::result::Result<u32, String> {
        if x.fract() != 0.0 || x < 0.0 || x > u32::MAX as f64 {
            return Err(format!(
                "lattice values must be nonnegative integers, got {x}"
            ));
        }
        Ok(x as u32)
    };
    Lattice::new(
        as_u32(v[0])?,
        as_u32(v[1])?,
        as_u32(v[2])?,
        as_u32(v[3])?,
        as_u32(v[4])?,
        as_u32(v[5])?,
    )
    .map_err(|e| e.to_string())
}

pub fn parse_box(text: &str) -> std::result::Result<DomainBox, String> {
    let v = parse_f64_list(text, 4)?;
    DomainBox::new(v[0], v[1], v[2], v[3]).map_err(|e| e.to_string())
}

pub fn parse_resolution(text: &str) -> std::result::Result<(usize, usize), String> {
    let v = parse_f64_list(text, 2)?;
    if v.iter().any(|x| x.fract() != 0.0 || *x < 2.0) {
        return Err("resolution must be two integers of at least 2".into());
    }
    Ok((v[0] as usize, v[1] as usize))
}

pub fn parse_sigma(text: &str) -> std::result::Result<NoiseSigma, String> {
    let parts: Vec<&str> = text.split(',').collect();
    let values: std::result::Result<Vec<f64>, String> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|e| e.to_string()))
        .collect();
    let values = values?;
    match values.as_slice() {
        [one] => Ok(NoiseSigma {
            latency_ms: *one,
            power_w: *one,
            miou: *one,
        }),
        [lat, pow, miou] => Ok(NoiseSigma {
            latency_ms: *lat,
            power_w: *pow,
            miou: *miou,
        }),
        _ => Err("sigma takes one value or three (latency,power,miou)".into()),
    }
}

pub fn parse_bounds(text: &str) -> std::result::Result<NormalizationBounds, String> {
    let v = parse_f64_list(text, 6)?;
    Ok(NormalizationBounds {
        latency: crate::optimizer::MetricBounds {
            min: v[0],
            max: v[1],
        },
        power: crate::optimizer::MetricBounds {
            min: v[2],
            max: v[3],
        },
        miou: crate::optimizer::MetricBounds {
            min: v[4],
            max: v[5],
        },
    })
}

fn parse_f64_list(text: &str, expect: usize) -> std::result::Result<Vec<f64>, String> {
    let values: std::result::Result<Vec<f64>, String> = text
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| format!("`{p}` is not a number"))
        })
        .collect();
    let values = values?;
    if values.len() != expect {
        return Err(format!(
            "expected {expect} comma-separated values, got {}",
            values.len()
        ));
    }
    Ok(values)
}

/// Input bytes plus their digest, from a path or standard input (`-`).
struct Input {
    text: String,
    digest: String,
}

fn read_input(path: &str) -> Result<Input> {
    let text = if path == "-" {
        let mut buf = String::new();
        std::io::stdin().read_to_string(&mut buf)?;
        buf
    } else {
        std::fs::read_to_string(Path::new(path))
            .map_err(|e| Error::Format(format!("cannot open {path}: {e}")))?
    };
    let digest = fnv1a_digest(text.as_bytes());
    Ok(Input { text, digest })
}

fn load_samples(path: &str) -> Result<(SampleSet, String)> {
    let input = read_input(path)?;
    let raw = parse_samples(std::io::Cursor::new(input.text.as_bytes()))?;
    let set = aggregate_repeats(&raw)?;
    Ok((set, input.digest))
}

fn tool_version() -> String {
    env!("CARGO_PKG_VERSION").to_string()
}

/// Fit all three surrogates and assemble a partial report.
pub fn build_fit_report(
    data: &SampleSet,
    digest: String,
    seed: Option<u64>,
) -> Result<TuningReport> {
    let (latency, latency_diag) = fit_quadratic(data, TargetMetric::LatencyMs)?;
    let (power, power_diag) = fit_quadratic(data, TargetMetric::PowerW)?;
    let (miou, miou_diag) = fit_rational(data)?;
    Ok(TuningReport {
        provenance: Provenance {
            input_digest: digest,
            seed,
            tool_version: tool_version(),
        },
        sample_configs: data.configs(),
        latency: QuadraticFitReport {
            surrogate: latency,
            diagnostics: latency_diag,
        },
        power: QuadraticFitReport {
            surrogate: power,
            diagnostics: power_diag,
        },
        miou: RationalFitReport {
            surrogate: miou,
            diagnostics: miou_diag,
        },
        bounds: None,
        optimization: None,
    })
}

/// Run normalization and minimization on an already-fitted report.
pub fn optimize_report(report: &mut TuningReport, cfg: &RunConfig) -> Result<()> {
    cfg.validate()?;
    let models = report.models();
    let bounds = match &cfg.bounds_policy {
        BoundsPolicy::SampledConfigs => compute_bounds(&models, &report.sample_configs)?,
        BoundsPolicy::Explicit(b) => *b,
    };
    let spec = ObjectiveSpec::new(cfg.weights, bounds, cfg.domain)?;
    let settings = MinimizeSettings {
        lattice: cfg.lattice,
        ..MinimizeSettings::default()
    };
    let result = minimize(&models, &spec, &settings)?;
    report.bounds = Some(bounds);
    report.optimization = Some(result);
    Ok(())
}

fn print_fit_table<W: Write>(mut w: W, report: &TuningReport) -> Result<()> {
    writeln!(w, "{:<12}{:>10}{:>14}", "surrogate", "R^2", "RMSE")?;
    for (name, diag) in [
        ("latency_ms", &report.latency.diagnostics),
        ("power_w", &report.power.diagnostics),
        ("miou", &report.miou.diagnostics),
    ] {
        writeln!(w, "{:<12}{:>10.3}{:>14.6}", name, diag.r_squared, diag.rmse)?;
    }
    Ok(())
}

fn cmd_fit(args: &FitArgs) -> Result<()> {
    let (data, digest) = load_samples(&args.samples)?;
    let report = build_fit_report(&data, digest, None)?;
    let stdout = std::io::stdout();
    print_fit_table(stdout.lock(), &report)?;
    if let Some(out) = &args.out {
        emit_report(&report, out)?;
    }
    Ok(())
}

fn cmd_optimize(args: &OptimizeArgs) -> Result<()> {
    let mut report = if args.from_report {
        let input = read_input(&args.input)?;
        TuningReport::from_json(&input.text)?
    } else {
        let (data, digest) = load_samples(&args.input)?;
        build_fit_report(&data, digest, None)?
    };

    let cfg = RunConfig {
        lattice: args.lattice,
        domain: args.domain,
        weights: args.weights,
        bounds_policy: match args.bounds {
            Some(b) => BoundsPolicy::Explicit(b),
            None => BoundsPolicy::SampledConfigs,
        },
        ..RunConfig::default()
    };
    optimize_report(&mut report, &cfg)?;

    match args.out.as_deref() {
        Some("-") => {
            print!("{}", report.to_json()?);
        }
        other => {
            let result = report
                .optimization
                .as_ref()
                .expect("optimize_report sets it");
            let mut out = std::io::stdout().lock();
            writeln!(
                out,
                "continuous optimum: b={:.4} h={:.4} objective={:.6}",
                result.continuous_opt.b, result.continuous_opt.h, result.objective_value
            )?;
            writeln!(
                out,
                "snapped config: ({}, {}) objective={:.6}",
                result.snapped.b, result.snapped.h, result.snapped_objective
            )?;
            let p = &result.predicted_snapped;
            writeln!(
                out,
                "predicted at snapped: miou={:.2} latency_ms={:.2} power_w={:.3}",
                p.miou, p.latency_ms, p.power_w
            )?;
            if let Some(d) = &p.derived {
                writeln!(
                    out,
                    "derived at snapped: energy_mj={:.2} fps={:.2} fps_per_watt={:.3}",
                    d.energy_mj, d.fps, d.fps_per_watt
                )?;
            }
            if let Some(path) = other {
                emit_report(&report, Path::new(path))?;
            }
        }
    }
    Ok(())
}

fn cmd_predict(args: &PredictArgs) -> Result<()> {
    let input = read_input(&args.report)?;
    let report = TuningReport::from_json(&input.text)?;
    let models = report.models();
    let p = ContinuousPoint::new(args.b, args.h)?;
    let latency = models.predict_latency(p);
    let power = models.predict_power(p);
    let miou = models.predict_miou(p)?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "b={} h={}", args.b, args.h)?;
    writeln!(out, "miou={miou}")?;
    writeln!(out, "latency_ms={latency}")?;
    writeln!(out, "power_w={power}")?;
    let derived = derive_metrics(latency, power)?;
    writeln!(out, "energy_mj={}", derived.energy_mj)?;
    writeln!(out, "fps={}", derived.fps)?;
    writeln!(out, "fps_per_watt={}", derived.fps_per_watt)?;
    Ok(())
}

fn cmd_contour(args: &ContourArgs) -> Result<()> {
    let input = read_input(&args.report)?;
    let report = TuningReport::from_json(&input.text)?;
    let models = report.models();
    let written = emit_contours(&models, &args.domain, args.resolution, &args.out)?;
    let mut out = std::io::stdout().lock();
    for path in written {
        writeln!(out, "wrote {}", path.display())?;
    }
    Ok(())
}

fn cmd_validate(args: &ValidateArgs) -> Result<()> {
    let (data, _) = load_samples(&args.samples)?;
    let mut out = std::io::stdout().lock();
    writeln!(
        out,
        "{:<12}{:>10}{:>10}{:>14}",
        "surrogate", "R^2", "Q^2", "PRESS"
    )?;
    for (name, fitter) in [
        ("latency_ms", LooFitter::Quadratic(TargetMetric::LatencyMs)),
        ("power_w", LooFitter::Quadratic(TargetMetric::PowerW)),
        ("miou", LooFitter::rational_default()),
    ] {
        let diag = loo_cross_validate(&data, &fitter)?;
        writeln!(
            out,
            "{:<12}{:>10.3}{:>10.3}{:>14.6}",
            name,
            diag.r_squared,
            diag.loo_q_squared.unwrap_or(f64::NAN),
            diag.loo_press.unwrap_or(f64::NAN)
        )?;
    }
    Ok(())
}

fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let mut params = match &args.params {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Format(format!("cannot open {}: {e}", path.display())))?;
            CostModelParams::from_json(&text)?
        }
        None => CostModelParams::default(),
    };
    if let Some(seed) = args.seed {
        params.rng_seed = seed;
    }
    if let Some(sigma) = args.sigma {
        params.noise_sigma = sigma;
    }
    params.validate()?;

    let grid = default_grid();
    let samples = generate_dataset(&grid, &params, args.repeats)?;
    write_samples_out(&args.out, &samples)?;

    if args.print_params {
        let mut err = std::io::stderr().lock();
        writeln!(
            err,
            "{:<10}{:>12}{:>12}{:>12}{:>10}{:>12}",
            "config", "encoder", "bridge", "decoder", "head", "total"
        )?;
        for c in &grid {
            let bd = param_count(*c);
            writeln!(
                err,
                "{:<10}{:>12}{:>12}{:>12}{:>10}{:>12}",
                format!("({},{})", c.b, c.h),
                bd.encoder_params,
                bd.bridge_params,
                bd.decoder_params,
                bd.head_params,
                bd.total()
            )?;
        }
    }
    Ok(())
}

fn write_samples_out(out: &str, samples: &[Sample]) -> Result<()> {
    if out == "-" {
        emit_samples(std::io::stdout().lock(), samples)
    } else {
        let file = std::fs::File::create(out)
            .map_err(|e| Error::Format(format!("cannot write {out}: {e}")))?;
        emit_samples(std::io::BufWriter::new(file), samples)
    }
}

/// Dispatch a parsed invocation.
pub fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Fit(args) => cmd_fit(args),
        Command::Optimize(args) => cmd_optimize(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Contour(args) => cmd_contour(args),
        Command::Validate(args) => cmd_validate(args),
        Command::Synth(args) => cmd_synth(args),
    }
}
