//! surrotune: surrogate-model tuning for a two-variable neural-architecture
//! design space.
//!
//! A width-scaled encoder-decoder segmentation model is indexed by a pair
//! `(b, h)`: the encoder base width and the decoder bottleneck width, in
//! channels. Profiling a handful of `(b, h)` configurations for accuracy
//! (mIoU), per-image latency, and power yields enough data to fit cheap
//! surrogate models:
//!
//! * latency and power: quadratic polynomials over `[1, b, h, b², b·h, h²]`
//! * mIoU: a rational form `(a3 + a4 b + a5 h + a6 b h) / (a0 + a1 b + a2 h + b h)`
//!
//! A normalized scalarized objective (weighted latency + power - mIoU, each
//! min-max normalized) is then minimized over the continuous `(b, h)` box by
//! multi-start projected gradient descent, and the continuous optimum is
//! snapped to the nearest valid discrete configuration for deployment.
//!
//! The crate also ships a calibrated synthetic cost model
//! ([`costmodel`]) that stands in for on-device profiling, so the whole
//! pipeline can run end-to-end without hardware.
//!
//! See the `examples/` directory for one runnable example per capability,
//! and the `surrotune` binary for the file-based pipeline
//! (`synth | fit | optimize | predict | contour | validate`).

pub mod cli;
pub mod costmodel;
pub mod designspace;
pub mod error;
pub mod io;
pub mod optimizer;
pub mod rng;
pub mod surrogate;

pub use designspace::{
    aggregate_repeats, derive_metrics, snap_to_lattice, Config, ContinuousPoint, DerivedMetrics,
    DomainBox, Lattice, Sample, SampleSet,
};
pub use error::{Error, Result};
pub use surrogate::{
    fit_quadratic, fit_rational, loo_cross_validate, quad_features, FitDiagnostics, LooFitter,
    QuadraticSurrogate, RationalFitOptions, RationalSurrogate, TargetMetric,
};
