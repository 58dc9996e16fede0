//! Core domain types for the two-variable design space: discrete
//! configurations, continuous points, measured samples, derived deployment
//! metrics, and snapping onto the valid configuration lattice.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A discrete architecture configuration: encoder base width `b` and
/// decoder bottleneck width `h`, both in channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Config {
    pub b: u32,
    pub h: u32,
}

impl Config {
    pub fn new(b: u32, h: u32) -> Result<Self> {
        if b == 0 || h == 0 {
            return Err(Error::Domain(format!(
                "config widths must be positive, got (b={b}, h={h})"
            )));
        }
        Ok(Config { b, h })
    }

    pub fn as_point(&self) -> ContinuousPoint {
        ContinuousPoint {
            b: self.b as f64,
            h: self.h as f64,
        }
    }
}

impl std::fmt::Display for Config {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.b, self.h)
    }
}

/// A point in the continuous `(b, h)` space explored by the optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuousPoint {
    pub b: f64,
    pub h: f64,
}

impl ContinuousPoint {
    pub fn new(b: f64, h: f64) -> Result<Self> {
        if !b.is_finite() || !h.is_finite() {
            return Err(Error::Domain(format!(
                "continuous point must be finite, got (b={b}, h={h})"
            )));
        }
        Ok(ContinuousPoint { b, h })
    }
}

/// The valid discrete configuration lattice: axis-aligned integer grids
/// `b ∈ {b_lo, b_lo+b_step, ..., b_hi}` and likewise for `h`.
///
/// The default lattice is `b` in multiples of 8 on [16, 64] and `h` in
/// multiples of 4 on [4, 32]; channel widths in multiples of 8/4 are the
/// usual hardware-friendly choices, and both deployment configs of
/// interest, (32, 8) and (40, 4), lie on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lattice {
    pub b_step: u32,
    pub b_lo: u32,
    pub b_hi: u32,
    pub h_step: u32,
    pub h_lo: u32,
    pub h_hi: u32,
}

impl Default for Lattice {
    fn default() -> Self {
        Lattice {
            b_step: 8,
            b_lo: 16,
            b_hi: 64,
            h_step: 4,
            h_lo: 4,
            h_hi: 32,
        }
    }
}

impl Lattice {
    pub fn new(
        b_step: u32,
        b_lo: u32,
        b_hi: u32,
        h_step: u32,
        h_lo: u32,
        h_hi: u32,
    ) -> Result<Self> {
        let lat = Lattice {
            b_step,
            b_lo,
            b_hi,
            h_step,
            h_lo,
            h_hi,
        };
        lat.validate()?;
        Ok(lat)
    }

    pub fn validate(&self) -> Result<()> {
        for (step, lo, hi, axis) in [
            (self.b_step, self.b_lo, self.b_hi, "b"),
            (self.h_step, self.h_lo, self.h_hi, "h"),
        ] {
            if step == 0 || lo == 0 {
                return Err(Error::Domain(format!(
                    "lattice {axis}: step and lower bound must be positive"
                )));
            }
            if lo > hi {
                return Err(Error::Domain(format!(
                    "lattice {axis}: lo ({lo}) must not exceed hi ({hi})"
                )));
            }
            if (hi - lo) % step != 0 {
                return Err(Error::Domain(format!(
                    "lattice {axis}: step {step} does not divide hi - lo = {}",
                    hi - lo
                )));
            }
        }
        Ok(())
    }

    pub fn b_values(&self) -> impl Iterator<Item = u32> + '_ {
        (self.b_lo..=self.b_hi).step_by(self.b_step as usize)
    }

    pub fn h_values(&self) -> impl Iterator<Item = u32> + '_ {
        (self.h_lo..=self.h_hi).step_by(self.h_step as usize)
    }

    /// All lattice points, b-major.
    pub fn points(&self) -> Vec<Config> {
        let mut out = Vec::new();
        for b in self.b_values() {
            for h in self.h_values() {
                out.push(Config { b, h });
            }
        }
        out
    }

    pub fn contains(&self, c: Config) -> bool {
        c.b >= self.b_lo
            && c.b <= self.b_hi
            && (c.b - self.b_lo).is_multiple_of(self.b_step)
            && c.h >= self.h_lo
            && c.h <= self.h_hi
            && (c.h - self.h_lo).is_multiple_of(self.h_step)
    }
}

/// Closed rectangle in the continuous design space. Defaults to the convex
/// hull of the 4x4 sampling grid, [16, 64] x [4, 32]; low-order surrogates
/// should not be trusted outside sampled support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    pub b_lo: f64,
    pub b_hi: f64,
    pub h_lo: f64,
    pub h_hi: f64,
}

impl Default for DomainBox {
    fn default() -> Self {
        DomainBox {
            b_lo: 16.0,
            b_hi: 64.0,
            h_lo: 4.0,
            h_hi: 32.0,
        }
    }
}

impl DomainBox {
    pub fn new(b_lo: f64, b_hi: f64, h_lo: f64, h_hi: f64) -> Result<Self> {
        let bx = DomainBox {
            b_lo,
            b_hi,
            h_lo,
            h_hi,
        };
        bx.validate()?;
        Ok(bx)
    }

    pub fn validate(&self) -> Result<()> {
        let vals = [self.b_lo, self.b_hi, self.h_lo, self.h_hi];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("domain box bounds must be finite".into()));
        }
        if self.b_lo >= self.b_hi || self.h_lo >= self.h_hi {
            return Err(Error::Domain(format!(
                "domain box must be non-degenerate, got [{}, {}] x [{}, {}]",
                self.b_lo, self.b_hi, self.h_lo, self.h_hi
            )));
        }
        Ok(())
    }

    pub fn contains(&self, p: ContinuousPoint) -> bool {
        p.b >= self.b_lo && p.b <= self.b_hi && p.h >= self.h_lo && p.h <= self.h_hi
    }

    pub fn corners(&self) -> [ContinuousPoint; 4] {
        [
            ContinuousPoint {
                b: self.b_lo,
                h: self.h_lo,
            },
            ContinuousPoint {
                b: self.b_hi,
                h: self.h_lo,
            },
            ContinuousPoint {
                b: self.b_lo,
                h: self.h_hi,
            },
            ContinuousPoint {
                b: self.b_hi,
                h: self.h_hi,
            },
        ]
    }

    /// Evenly spaced grid with `nb` x `nh` points including both endpoints,
    /// b-major.
    pub fn grid(&self, nb: usize, nh: usize) -> Vec<ContinuousPoint> {
        assert!(nb >= 2 && nh >= 2, "grid resolutions must be at least 2");
        let mut pts = Vec::with_capacity(nb * nh);
        for i in 0..nb {
            let b = self.b_lo + (self.b_hi - self.b_lo) * i as f64 / (nb - 1) as f64;
            for j in 0..nh {
                let h = self.h_lo + (self.h_hi - self.h_lo) * j as f64 / (nh - 1) as f64;
                pts.push(ContinuousPoint { b, h });
            }
        }
        pts
    }

    pub fn clamp(&self, p: ContinuousPoint) -> ContinuousPoint {
        ContinuousPoint {
            b: p.b.clamp(self.b_lo, self.b_hi),
            h: p.h.clamp(self.h_lo, self.h_hi),
        }
    }
}

/// One profiled observation of a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub config: Config,
    /// Segmentation accuracy in percent, 0..=100.
    pub miou: f64,
    /// Per-image inference latency in milliseconds.
    pub latency_ms: f64,
    /// Average power draw in watts.
    pub power_w: f64,
}

impl Sample {
    pub fn new(config: Config, miou: f64, latency_ms: f64, power_w: f64) -> Result<Self> {
        if !miou.is_finite() || !(0.0..=100.0).contains(&miou) {
            return Err(Error::Domain(format!(
                "mIoU must lie in [0, 100], got {miou} at {config}"
            )));
        }
        if !latency_ms.is_finite() || latency_ms <= 0.0 {
            return Err(Error::Domain(format!(
                "latency_ms must be positive, got {latency_ms} at {config}"
            )));
        }
        if !power_w.is_finite() || power_w <= 0.0 {
            return Err(Error::Domain(format!(
                "power_w must be positive, got {power_w} at {config}"
            )));
        }
        Ok(Sample {
            config,
            miou,
            latency_ms,
            power_w,
        })
    }
}

/// An ordered collection of samples. `distinct` records whether configs are
/// known to be unique (always true after [`aggregate_repeats`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    samples: Vec<Sample>,
    distinct: bool,
}

impl SampleSet {
    /// Wrap raw samples that may contain repeated configs.
    pub fn from_raw(samples: Vec<Sample>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyInput("sample set".into()));
        }
        let mut seen = samples.iter().map(|s| s.config).collect::<Vec<_>>();
        seen.sort_unstable();
        seen.dedup();
        let distinct = seen.len() == samples.len();
        Ok(SampleSet { samples, distinct })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_distinct(&self) -> bool {
        self.distinct
    }

    pub fn configs(&self) -> Vec<Config> {
        self.samples.iter().map(|s| s.config).collect()
    }

    /// Number of distinct configs present.
    pub fn distinct_config_count(&self) -> usize {
        let mut cfgs = self.configs();
        cfgs.sort_unstable();
        cfgs.dedup();
        cfgs.len()
    }
}

/// Deployment metrics derived from a latency/power pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedMetrics {
    /// Energy per image in millijoules: latency_ms × power_w.
    pub energy_mj: f64,
    /// Throughput in frames per second: 1000 / latency_ms.
    pub fps: f64,
    /// Energy-efficiency figure of merit: fps / power_w.
    pub fps_per_watt: f64,
}

/// Compute energy per image, throughput, and throughput per watt from a
/// measured (or predicted) latency/power pair.
pub fn derive_metrics(latency_ms: f64, power_w: f64) -> Result<DerivedMetrics> {
    if !latency_ms.is_finite() || latency_ms <= 0.0 {
        return Err(Error::Domain(format!(
            "latency_ms must be positive and finite, got {latency_ms}"
        )));
    }
    if !power_w.is_finite() || power_w <= 0.0 {
        return Err(Error::Domain(format!(
            "power_w must be positive and finite, got {power_w}"
        )));
    }
    let fps = 1000.0 / latency_ms;
    Ok(DerivedMetrics {
        energy_mj: latency_ms * power_w,
        fps,
        fps_per_watt: fps / power_w,
    })
}

/// Collapse repeated measurements of the same config into one sample per
/// config by arithmetic mean, preserving first-seen order. Mirrors the
/// profiling protocol where latency/power are averaged over repeated
/// inference runs and mIoU over training seeds.
pub fn aggregate_repeats(raw: &[Sample]) -> Result<SampleSet> {
    if raw.is_empty() {
        return Err(Error::EmptyInput("aggregate_repeats".into()));
    }
    struct Acc {
        config: Config,
        n: f64,
        miou: f64,
        latency_ms: f64,
        power_w: f64,
    }
    let mut groups: Vec<Acc> = Vec::new();
    for s in raw {
        match groups.iter_mut().find(|g| g.config == s.config) {
            Some(g) => {
                g.n += 1.0;
                g.miou += s.miou;
                g.latency_ms += s.latency_ms;
                g.power_w += s.power_w;
            }
            None => groups.push(Acc {
                config: s.config,
                n: 1.0,
                miou: s.miou,
                latency_ms: s.latency_ms,
                power_w: s.power_w,
            }),
        }
    }
    let samples = groups
        .into_iter()
        .map(|g| Sample {
            config: g.config,
            miou: g.miou / g.n,
            latency_ms: g.latency_ms / g.n,
            power_w: g.power_w / g.n,
        })
        .collect();
    Ok(SampleSet {
        samples,
        distinct: true,
    })
}

/// Map a continuous optimizer solution to the nearest valid lattice
/// configuration.
///
/// Distance is Euclidean after scaling each axis by its lattice step, so a
/// coarse axis is not penalized relative to a fine one. Exact ties go to
/// the candidate with the lower scorer value when a scorer is supplied,
/// otherwise to lower `b`, then lower `h`.
pub fn snap_to_lattice(
    p: ContinuousPoint,
    lat: &Lattice,
    tiebreak_scorer: Option<&dyn Fn(Config) -> f64>,
) -> Result<Config> {
    lat.validate()?;
    if !p.b.is_finite() || !p.h.is_finite() {
        return Err(Error::Domain(format!(
            "snap point must be finite, got (b={}, h={})",
            p.b, p.h
        )));
    }
    if p.b < lat.b_lo as f64
        || p.b > lat.b_hi as f64
        || p.h < lat.h_lo as f64
        || p.h > lat.h_hi as f64
    {
        return Err(Error::Domain(format!(
            "point (b={}, h={}) lies outside the lattice box [{}, {}]x[{}, {}]",
            p.b, p.h, lat.b_lo, lat.b_hi, lat.h_lo, lat.h_hi
        )));
    }

    let mut best: Option<(f64, Config)> = None;
    for cand in lat.points() {
        let db = (p.b - cand.b as f64) / lat.b_step as f64;
        let dh = (p.h - cand.h as f64) / lat.h_step as f64;
        let d2 = db * db + dh * dh;
        match best {
            None => best = Some((d2, cand)),
            Some((best_d2, best_cfg)) => {
                if d2 < best_d2 {
                    best = Some((d2, cand));
                } else if d2 == best_d2 {
                    let prefer = match tiebreak_scorer {
                        Some(score) => {
                            let (sc, sb) = (score(cand), score(best_cfg));
                            if sc == sb {
                                (cand.b, cand.h) < (best_cfg.b, best_cfg.h)
                            } else {
                                sc < sb
                            }
                        }
                        None => (cand.b, cand.h) < (best_cfg.b, best_cfg.h),
                    };
                    if prefer {
                        best = Some((d2, cand));
                    }
                }
            }
        }
    }
    Ok(best.expect("lattice has at least one point").1)
}
