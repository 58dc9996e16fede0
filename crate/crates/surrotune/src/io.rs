//! Sample-file parsing, tuning reports, and contour-grid emission.
//!
//! Numbers are serialized with the shortest round-trip decimal
//! representation everywhere, so emit-then-parse returns bit-identical
//! values; rounded figures belong in human-oriented summaries only.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::costmodel::NoiseSigma;
use crate::designspace::{Config, ContinuousPoint, DomainBox, Lattice, Sample};
use crate::error::{Error, Result};
use crate::optimizer::{NormalizationBounds, OptimizationResult, SurrogateModels, Weights};
use crate::surrogate::{FitDiagnostics, QuadraticSurrogate, RationalSurrogate};

/// Column order of the sample-file header.
pub const SAMPLE_HEADER: &str = "b,h,miou,latency_ms,power_w";

const COLUMNS: [&str; 5] = ["b", "h", "miou", "latency_ms", "power_w"];

/// Parse delimiter-separated samples.
///
/// The first non-comment line must be a header naming exactly the columns
/// `b,h,miou,latency_ms,power_w` (any order). Blank lines and lines
/// starting with `#` are ignored. Repeated `(b, h)` rows are retained as
/// repeats for later aggregation.
pub fn parse_samples<R: BufRead>(reader: R) -> Result<Vec<Sample>> {
    let mut header: Option<[usize; 5]> = None;
    let mut samples = Vec::new();

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let cells: Vec<&str> = trimmed.split(',').map(str::trim).collect();

        let positions = match header {
            Some(p) => p,
            None => {
                let mut positions = [usize::MAX; 5];
                for (pos, name) in cells.iter().enumerate() {
                    match COLUMNS.iter().position(|c| c == name) {
                        Some(k) if positions[k] == usize::MAX => positions[k] = pos,
                        Some(_) => {
                            return Err(Error::Format(format!(
                                "line {line_no}: duplicate column `{name}`"
                            )))
                        }
                        None => {
                            return Err(Error::Format(format!(
                                "line {line_no}: unknown column `{name}`"
                            )))
                        }
                    }
                }
                if let Some(k) = positions.iter().position(|&p| p == usize::MAX) {
                    return Err(Error::Format(format!(
                        "line {line_no}: missing column `{}`",
                        COLUMNS[k]
                    )));
                }
                header = Some(positions);
                continue;
            }
        };

        if cells.len() != 5 {
            return Err(Error::Format(format!(
                "line {line_no}: expected 5 cells, found {}",
                cells.len()
            )));
        }
        let mut values = [0.0f64; 5];
        for (k, &pos) in positions.iter().enumerate() {
            values[k] = cells[pos].parse::<f64>().map_err(|_| {
                Error::Format(format!(
                    "line {line_no}: non-numeric value `{}` in column `{}`",
                    cells[pos], COLUMNS[k]
                ))
            })?;
        }
        let config = parse_config(values[0], values[1], line_no)?;
        let sample = Sample::new(config, values[2], values[3], values[4]).map_err(|e| match e {
            Error::Domain(m) => Error::Domain(format!("line {line_no}: {m}")),
            other => other,
        })?;
        samples.push(sample);
    }

    if header.is_none() {
        return Err(Error::EmptyInput("sample file has no header".into()));
    }
    if samples.is_empty() {
        return Err(Error::EmptyInput(
            "sample file has a header but no data rows".into(),
        ));
    }
    Ok(samples)
}

fn parse_config(b: f64, h: f64, line_no: usize) -> Result<Config> {
    for (v, name) in [(b, "b"), (h, "h")] {
        if v.fract() != 0.0 || v < 1.0 || v > u32::MAX as f64 {
            return Err(Error::Domain(format!(
                "line {line_no}: column `{name}` must be a positive integer, got {v}"
            )));
        }
    }
    Config::new(b as u32, h as u32)
}

pub fn parse_samples_path(path: &Path) -> Result<Vec<Sample>> {
    let file = std::fs::File::open(path)
        .map_err(|e| Error::Format(format!("cannot open {}: {e}", path.display())))?;
    parse_samples(std::io::BufReader::new(file))
}

/// Write samples in the same format `parse_samples` reads, at full
/// precision.
pub fn emit_samples<W: Write>(mut writer: W, samples: &[Sample]) -> Result<()> {
    writeln!(writer, "{SAMPLE_HEADER}")?;
    for s in samples {
        writeln!(
            writer,
            "{},{},{},{},{}",
            s.config.b, s.config.h, s.miou, s.latency_ms, s.power_w
        )?;
    }
    Ok(())
}

/// Where normalization bounds come from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub enum BoundsPolicy {
    /// Surrogate predictions over the sampled configs (the default).
    #[default]
    SampledConfigs,
    /// Explicit user-supplied values.
    Explicit(NormalizationBounds),
}

/// Assembled run configuration shared by the command-line front end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub lattice: Lattice,
    pub domain: DomainBox,
    pub weights: Weights,
    pub bounds_policy: BoundsPolicy,
    /// Contour grid resolution (points along b, points along h).
    pub contour_resolution: (usize, usize),
    pub seed: Option<u64>,
    /// Cost-model noise override for synthesis.
    pub sigma: Option<NoiseSigma>,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            lattice: Lattice::default(),
            domain: DomainBox::default(),
            weights: Weights::default(),
            bounds_policy: BoundsPolicy::default(),
            contour_resolution: (49, 29),
            seed: None,
            sigma: None,
            output: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.lattice.validate()?;
        self.domain.validate()?;
        if self.contour_resolution.0 < 2 || self.contour_resolution.1 < 2 {
            return Err(Error::Domain(
                "contour resolution must be at least 2 points per axis".into(),
            ));
        }
        Ok(())
    }
}

/// Fitting/run provenance embedded in every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// FNV-1a 64-bit digest of the input bytes (not cryptographic; it
    /// detects accidental input drift, nothing more).
    pub input_digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub tool_version: String,
}

pub fn fnv1a_digest(bytes: &[u8]) -> String {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    format!("fnv1a:{hash:016x}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticFitReport {
    pub surrogate: QuadraticSurrogate,
    pub diagnostics: FitDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalFitReport {
    pub surrogate: RationalSurrogate,
    pub diagnostics: FitDiagnostics,
}

/// Everything a tuning run produces: fitted coefficients and diagnostics
/// for the three surrogates, then (after optimization) the normalization
/// bounds and the optimization result. Serializes to JSON with a fixed key
/// order and round-trips all numeric fields exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningReport {
    pub provenance: Provenance,
    /// Distinct configs the surrogates were fitted on; normalization
    /// bounds are recomputed over these when optimizing from a report.
    pub sample_configs: Vec<Config>,
    pub latency: QuadraticFitReport,
    pub power: QuadraticFitReport,
    pub miou: RationalFitReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds: Option<NormalizationBounds>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimization: Option<OptimizationResult>,
}

impl TuningReport {
    pub fn models(&self) -> SurrogateModels {
        SurrogateModels {
            latency: self.latency.surrogate.clone(),
            power: self.power.surrogate.clone(),
            miou: self.miou.surrogate.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Serialize a report to a file (or any writer via [`TuningReport::to_json`]).
pub fn emit_report(report: &TuningReport, path: &Path) -> Result<()> {
    let text = report.to_json()?;
    std::fs::write(path, text)
        .map_err(|e| Error::Format(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

pub fn parse_report_path(path: &Path) -> Result<TuningReport> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Format(format!("cannot open {}: {e}", path.display())))?;
    TuningReport::from_json(&text)
}

/// Render one contour grid: `b,h,value` rows, b-major, evenly spaced over
/// the box including both edges. Pole cells are recorded as `NA`, never a
/// fabricated number.
pub fn contour_table(
    eval: &dyn Fn(ContinuousPoint) -> Option<f64>,
    bx: &DomainBox,
    resolution: (usize, usize),
) -> Result<String> {
    let (nb, nh) = resolution;
    if nb < 2 || nh < 2 {
        return Err(Error::Domain(
            "contour resolution must be at least 2 points per axis".into(),
        ));
    }
    let mut out = String::from("b,h,value\n");
    for p in bx.grid(nb, nh) {
        match eval(p) {
            Some(v) => {
                let _ = writeln!(out, "{},{},{}", p.b, p.h, v);
            }
            None => {
                let _ = writeln!(out, "{},{},NA", p.b, p.h);
            }
        }
    }
    Ok(out)
}

/// Emit the three surrogate surfaces as grid files named
/// `{prefix}miou.csv`, `{prefix}latency.csv`, `{prefix}power.csv`.
/// Returns the written paths.
pub fn emit_contours(
    models: &SurrogateModels,
    bx: &DomainBox,
    resolution: (usize, usize),
    path_prefix: &str,
) -> Result<Vec<PathBuf>> {
    if path_prefix.is_empty() {
        return Err(Error::Domain(
            "contour path prefix must be non-empty".into(),
        ));
    }
    type Surface<'a> = Box<dyn Fn(ContinuousPoint) -> Option<f64> + 'a>;
    let surfaces: [(&str, Surface); 3] = [
        ("miou", Box::new(|p| models.predict_miou(p).ok())),
        ("latency", Box::new(|p| Some(models.predict_latency(p)))),
        ("power", Box::new(|p| Some(models.predict_power(p)))),
    ];
    let mut written = Vec::with_capacity(3);
    for (name, eval) in surfaces {
        let table = contour_table(eval.as_ref(), bx, resolution)?;
        let path = PathBuf::from(format!("{path_prefix}{name}.csv"));
        std::fs::write(&path, table)
            .map_err(|e| Error::Format(format!("cannot write {}: {e}", path.display())))?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costmodel::CostModelParams;
    use crate::designspace::aggregate_repeats;
    use crate::optimizer::MetricBounds;
    use std::io::Cursor;

    fn parse_str(text: &str) -> Result<Vec<Sample>> {
        parse_samples(Cursor::new(text.as_bytes()))
    }

    #[test]
    fn parses_published_baseline_row() {
        let samples = parse_str("b,h,miou,latency_ms,power_w\n64,32,50.21,178.63,7.21\n").unwrap();
        assert_eq!(samples.len(), 1);
        let s = samples[0];
        assert_eq!(s.config, Config { b: 64, h: 32 });
        assert_eq!(s.miou, 50.21);
        assert_eq!(s.latency_ms, 178.63);
        assert_eq!(s.power_w, 7.21);
    }

    #[test]
    fn retains_repeats_and_skips_comments() {
        let text = "\
# profiling run, two repeats at (32,8)
b,h,miou,latency_ms,power_w

32,8,47.3,108.1,5.65
32,8,47.7,109.4,5.72
";
        let samples = parse_str(text).unwrap();
        assert_eq!(samples.len(), 2);
        assert_eq!(samples[0].config, samples[1].config);
    }

    #[test]
    fn header_only_is_empty_data_error() {
        assert!(matches!(
            parse_str("b,h,miou,latency_ms,power_w\n"),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn unknown_and_missing_columns_are_named() {
        match parse_str("b,h,miou,latency_ms,wattage\n1,1,1,1,1\n") {
            Err(Error::Format(m)) => assert!(m.contains("wattage"), "{m}"),
            other => panic!("{other:?}"),
        }
        match parse_str("b,h,miou,latency_ms\n1,1,1,1\n") {
            Err(Error::Format(m)) => assert!(m.contains("power_w"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_numeric_cell_reports_row_and_column() {
        match parse_str("b,h,miou,latency_ms,power_w\n64,32,fast,178.63,7.21\n") {
            Err(Error::Format(m)) => {
                assert!(m.contains("line 2"), "{m}");
                assert!(m.contains("miou"), "{m}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn reordered_header_maps_by_name() {
        let samples = parse_str("power_w,latency_ms,miou,h,b\n7.21,178.63,50.21,32,64\n").unwrap();
        assert_eq!(samples[0].config, Config { b: 64, h: 32 });
        assert_eq!(samples[0].power_w, 7.21);
    }

    #[test]
    fn fractional_width_rejected() {
        match parse_str("b,h,miou,latency_ms,power_w\n32.5,8,47.0,108.0,5.6\n") {
            Err(Error::Domain(m)) => assert!(m.contains("positive integer"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn emit_parse_round_trip_is_field_exact() {
        let params = CostModelParams::default();
        let raw = crate::costmodel::generate_dataset(&crate::costmodel::default_grid(), &params, 3)
            .unwrap();
        let mut buf = Vec::new();
        emit_samples(&mut buf, &raw).unwrap();
        let parsed = parse_samples(Cursor::new(&buf)).unwrap();
        assert_eq!(parsed, raw);
        // aggregation survives the round trip too
        let agg = aggregate_repeats(&raw).unwrap();
        let mut buf2 = Vec::new();
        emit_samples(&mut buf2, agg.samples()).unwrap();
        let parsed2 = parse_samples(Cursor::new(&buf2)).unwrap();
        assert_eq!(parsed2, agg.samples());
    }

    fn sample_report() -> TuningReport {
        use crate::costmodel::default_grid;
        use crate::optimizer::{compute_bounds, minimize, MinimizeSettings, ObjectiveSpec};

        let params = CostModelParams::default();
        let models = SurrogateModels {
            latency: params.latency_model(),
            power: params.power_model(),
            miou: params.miou_model(),
        };
        let bounds = compute_bounds(&models, &default_grid()).unwrap();
        let spec = ObjectiveSpec::new(Weights::default(), bounds, DomainBox::default()).unwrap();
        let result = minimize(&models, &spec, &MinimizeSettings::default()).unwrap();
        let diag = FitDiagnostics {
            r_squared: 0.998,
            rmse: 0.42,
            residuals: vec![0.1, -0.2, 0.05],
            loo_press: Some(1.25),
            loo_q_squared: Some(0.97),
        };
        TuningReport {
            provenance: Provenance {
                input_digest: fnv1a_digest(b"demo"),
                seed: Some(42),
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
            },
            sample_configs: default_grid(),
            latency: QuadraticFitReport {
                surrogate: models.latency.clone(),
                diagnostics: diag.clone(),
            },
            power: QuadraticFitReport {
                surrogate: models.power.clone(),
                diagnostics: diag.clone(),
            },
            miou: RationalFitReport {
                surrogate: models.miou.clone(),
                diagnostics: diag,
            },
            bounds: Some(bounds),
            optimization: Some(result),
        }
    }

    #[test]
    fn report_round_trip_identity() {
        let report = sample_report();
        let json = report.to_json().unwrap();
        let back = TuningReport::from_json(&json).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn report_serialization_is_deterministic() {
        let report = sample_report();
        assert_eq!(report.to_json().unwrap(), report.to_json().unwrap());
    }

    #[test]
    fn report_carries_all_coefficients() {
        let report = sample_report();
        let json = report.to_json().unwrap();
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(
            value["latency"]["surrogate"]["coeffs"]
                .as_array()
                .unwrap()
                .len(),
            6
        );
        assert_eq!(
            value["power"]["surrogate"]["coeffs"]
                .as_array()
                .unwrap()
                .len(),
            6
        );
        let miou = &value["miou"]["surrogate"];
        assert_eq!(
            miou["numerator"].as_array().unwrap().len()
                + miou["denominator"].as_array().unwrap().len(),
            7
        );
    }

    #[test]
    fn contour_grid_spacing_and_cardinality() {
        let bx = DomainBox::default();
        let table = contour_table(&|p| Some(p.b + p.h), &bx, (4, 4)).unwrap();
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines[0], "b,h,value");
        assert_eq!(lines.len(), 1 + 16);
        // even spacing: b in {16, 32, 48, 64}, h in {4, 13.33.., 22.66.., 32}
        let first_block: Vec<&str> = lines[1..5].to_vec();
        assert!(first_block[0].starts_with("16,4,"));
        assert!(first_block[1].starts_with("16,13.333333333333334,"));
        assert!(first_block[2].starts_with("16,22.666666666666668,"));
        assert!(first_block[3].starts_with("16,32,"));
        // sorted by b then h
        assert!(lines[5].starts_with("32,4,"));
        assert!(lines.last().unwrap().starts_with("64,32,"));
    }

    #[test]
    fn contour_constant_model_constant_cells() {
        let bx = DomainBox::default();
        let table = contour_table(&|_| Some(7.5), &bx, (3, 3)).unwrap();
        for line in table.lines().skip(1) {
            assert!(line.ends_with(",7.5"), "{line}");
        }
    }

    #[test]
    fn contour_pole_cells_are_na() {
        let bx = DomainBox::default();
        let table =
            contour_table(&|p| if p.b < 40.0 { None } else { Some(1.0) }, &bx, (3, 3)).unwrap();
        let na_count = table.lines().filter(|l| l.ends_with(",NA")).count();
        assert_eq!(na_count, 3);
    }

    #[test]
    fn contour_cells_match_generating_formula() {
        let params = CostModelParams::default();
        let latency = params.latency_model();
        let bx = DomainBox::default();
        let table = contour_table(&|p| Some(latency.predict(p)), &bx, (5, 5)).unwrap();
        for (line, p) in table.lines().skip(1).zip(bx.grid(5, 5)) {
            let value: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
            assert_eq!(value, latency.predict(p));
        }
    }

    #[test]
    fn run_config_validates_resolution() {
        let rc = RunConfig {
            contour_resolution: (1, 29),
            ..RunConfig::default()
        };
        assert!(rc.validate().is_err());
    }

    #[test]
    fn digest_is_stable() {
        assert_eq!(fnv1a_digest(b""), "fnv1a:cbf29ce484222325");
        assert_eq!(fnv1a_digest(b"a"), fnv1a_digest(b"a"));
        assert_ne!(fnv1a_digest(b"a"), fnv1a_digest(b"b"));
    }

    #[test]
    fn bounds_policy_explicit_round_trips() {
        let policy = BoundsPolicy::Explicit(NormalizationBounds {
            latency: MetricBounds { min: 1.0, max: 2.0 },
            power: MetricBounds { min: 0.5, max: 0.9 },
            miou: MetricBounds {
                min: 40.0,
                max: 50.0,
            },
        });
        let json = serde_json::to_string(&policy).unwrap();
        let back: BoundsPolicy = serde_json::from_str(&json).unwrap();
        assert_eq!(back, policy);
    }
}
