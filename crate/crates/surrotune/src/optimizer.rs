//! Scalarized multi-objective optimization over the continuous design box.
//!
//! The objective is a weighted sum of min-max-normalized surrogate
//! predictions, rewarding low latency, low power, and high mIoU:
//!
//! ```text
//! f(b, h) = w_L (L(b,h) - L_min)/(L_max - L_min)
//!         + w_P (P(b,h) - P_min)/(P_max - P_min)
//!         - w_m (m(b,h) - m_min)/(m_max - m_min)
//! ```
//!
//! Minimization runs projected gradient descent with backtracking line
//! search from multiple seeds (the best points of a coarse lattice sweep
//! plus the box corners), in box-normalized coordinates so step sizes are
//! scale-free. The winning continuous point is snapped to the nearest
//! valid lattice configuration with the objective itself breaking ties.

use serde::{Deserialize, Serialize};

use crate::designspace::{
    derive_metrics, snap_to_lattice, Config, ContinuousPoint, DerivedMetrics, DomainBox, Lattice,
};
use crate::error::{Error, Result};
use crate::surrogate::{QuadraticSurrogate, RationalSurrogate};

/// The three fitted surrogates driving the objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateModels {
    pub latency: QuadraticSurrogate,
    pub power: QuadraticSurrogate,
    pub miou: RationalSurrogate,
}

impl SurrogateModels {
    pub fn predict_latency(&self, p: ContinuousPoint) -> f64 {
        self.latency.predict(p)
    }

    pub fn predict_power(&self, p: ContinuousPoint) -> f64 {
        self.power.predict(p)
    }

    pub fn predict_miou(&self, p: ContinuousPoint) -> Result<f64> {
        self.miou.predict(p)
    }
}

/// Min/max pair for one metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricBounds {
    pub min: f64,
    pub max: f64,
}

impl MetricBounds {
    pub fn span(&self) -> f64 {
        self.max - self.min
    }

    pub fn is_degenerate(&self) -> bool {
        self.span() <= 1e-12 * self.max.abs().max(self.min.abs()).max(1.0)
    }
}

/// Normalization bounds for the three metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationBounds {
    pub latency: MetricBounds,
    pub power: MetricBounds,
    pub miou: MetricBounds,
}

/// Objective weights (w_L, w_P, w_m), all nonnegative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub latency: f64,
    pub power: f64,
    pub miou: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights {
            latency: 1.0,
            power: 1.0,
            miou: 1.0,
        }
    }
}

/// Weights, normalization bounds, and the continuous domain box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub weights: Weights,
    pub bounds: NormalizationBounds,
    pub domain: DomainBox,
}

impl ObjectiveSpec {
    pub fn new(weights: Weights, bounds: NormalizationBounds, domain: DomainBox) -> Result<Self> {
        let spec = ObjectiveSpec {
            weights,
            bounds,
            domain,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// At least one positive weight, none negative, a sane box, and no
    /// degenerate bounds on a weighted metric. A degenerate weighted bound
    /// is an error rather than a silent term drop: dropping it would change
    /// the objective semantics invisibly.
    pub fn validate(&self) -> Result<()> {
        let w = [
            (self.weights.latency, "latency_ms"),
            (self.weights.power, "power_w"),
            (self.weights.miou, "miou"),
        ];
        if w.iter().any(|(v, _)| !v.is_finite() || *v < 0.0) {
            return Err(Error::Domain(
                "weights must be finite and nonnegative".into(),
            ));
        }
        if w.iter().all(|(v, _)| *v == 0.0) {
            return Err(Error::Domain("at least one weight must be positive".into()));
        }
        self.domain.validate()?;
        for ((weight, name), bounds) in
            w.iter()
                .zip([self.bounds.latency, self.bounds.power, self.bounds.miou])
        {
            if *weight > 0.0 && bounds.is_degenerate() {
                return Err(Error::DegenerateBounds {
                    metric: match *name {
                        "latency_ms" => "latency_ms",
                        "power_w" => "power_w",
                        _ => "miou",
                    },
                });
            }
        }
        Ok(())
    }
}

/// Per-metric min/max of the surrogate predictions over the given configs.
/// This keeps the objective a pure function of the surrogates; bounds from
/// raw measurements or a continuous sweep can be supplied explicitly
/// instead.
pub fn compute_bounds(models: &SurrogateModels, configs: &[Config]) -> Result<NormalizationBounds> {
    let mut distinct = configs.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::Underdetermined {
            what: "normalization bounds",
            needed: 2,
            got: distinct.len(),
        });
    }
    let mut latency = MetricBounds {
        min: f64::INFINITY,
        max: f64::NEG_INFINITY,
    };
    let mut power = latency;
    let mut miou = latency;
    for c in configs {
        let p = c.as_point();
        let l = models.predict_latency(p);
        let w = models.predict_power(p);
        let m = models.predict_miou(p)?;
        latency.min = latency.min.min(l);
        latency.max = latency.max.max(l);
        power.min = power.min.min(w);
        power.max = power.max.max(w);
        miou.min = miou.min.min(m);
        miou.max = miou.max.max(m);
    }
    Ok(NormalizationBounds {
        latency,
        power,
        miou,
    })
}

/// Evaluate the scalarized objective at a point inside the box.
/// Zero-weight terms are skipped entirely, so an unweighted metric can
/// never fail the evaluation.
pub fn objective(
    p: ContinuousPoint,
    models: &SurrogateModels,
    spec: &ObjectiveSpec,
) -> Result<f64> {
    if !spec.domain.contains(p) {
        return Err(Error::Domain(format!(
            "point (b={}, h={}) is outside the objective box",
            p.b, p.h
        )));
    }
    let mut value = 0.0;
    if spec.weights.latency > 0.0 {
        let norm =
            (models.predict_latency(p) - spec.bounds.latency.min) / spec.bounds.latency.span();
        value += spec.weights.latency * norm;
    }
    if spec.weights.power > 0.0 {
        let norm = (models.predict_power(p) - spec.bounds.power.min) / spec.bounds.power.span();
        value += spec.weights.power * norm;
    }
    if spec.weights.miou > 0.0 {
        let norm = (models.predict_miou(p)? - spec.bounds.miou.min) / spec.bounds.miou.span();
        value -= spec.weights.miou * norm;
    }
    Ok(value)
}

/// Analytic gradient of the objective: the chain rule scales each
/// surrogate gradient by weight / (max - min).
pub fn objective_gradient(
    p: ContinuousPoint,
    models: &SurrogateModels,
    spec: &ObjectiveSpec,
) -> Result<[f64; 2]> {
    if !spec.domain.contains(p) {
        return Err(Error::Domain(format!(
            "point (b={}, h={}) is outside the objective box",
            p.b, p.h
        )));
    }
    let mut g = [0.0f64; 2];
    if spec.weights.latency > 0.0 {
        let scale = spec.weights.latency / spec.bounds.latency.span();
        let gl = models.latency.gradient(p);
        g[0] += scale * gl[0];
        g[1] += scale * gl[1];
    }
    if spec.weights.power > 0.0 {
        let scale = spec.weights.power / spec.bounds.power.span();
        let gp = models.power.gradient(p);
        g[0] += scale * gp[0];
        g[1] += scale * gp[1];
    }
    if spec.weights.miou > 0.0 {
        let scale = spec.weights.miou / spec.bounds.miou.span();
        let gm = models.miou.gradient(p)?;
        g[0] -= scale * gm[0];
        g[1] -= scale * gm[1];
    }
    Ok(g)
}

/// Descent settings. Defaults: Armijo c = 1e-4 with step halving from 1.0
/// in normalized coordinates, stop at projected-gradient norm 1e-8 or 500
/// iterations, 5 coarse-sweep seeds plus the 4 box corners.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizeSettings {
    /// Lattice of valid deployable configurations for snapping.
    pub lattice: Lattice,
    pub armijo_c: f64,
    pub backtrack: f64,
    pub initial_step: f64,
    pub grad_tol: f64,
    pub max_iters: usize,
    pub coarse_seeds: usize,
}

impl Default for MinimizeSettings {
    fn default() -> Self {
        MinimizeSettings {
            lattice: Lattice::default(),
            armijo_c: 1e-4,
            backtrack: 0.5,
            initial_step: 1.0,
            grad_tol: 1e-8,
            max_iters: 500,
            coarse_seeds: 5,
        }
    }
}

/// One multi-start descent record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartTrace {
    pub start: ContinuousPoint,
    pub iterations: usize,
    pub converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub end: Option<ContinuousPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

/// Surrogate predictions (and derived deployment metrics, when latency and
/// power are positive) at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictedMetrics {
    pub miou: f64,
    pub latency_ms: f64,
    pub power_w: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub derived: Option<DerivedMetrics>,
}

impl PredictedMetrics {
    fn at(models: &SurrogateModels, p: ContinuousPoint) -> Result<Self> {
        let latency_ms = models.predict_latency(p);
        let power_w = models.predict_power(p);
        let miou = models.predict_miou(p)?;
        let derived = derive_metrics(latency_ms, power_w).ok();
        Ok(PredictedMetrics {
            miou,
            latency_ms,
            power_w,
            derived,
        })
    }
}

/// Outcome of [`minimize`]: the continuous optimum, the snapped discrete
/// configuration (snapping may worsen the objective; both values are
/// reported), predictions at both points, and the per-start trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub continuous_opt: ContinuousPoint,
    pub objective_value: f64,
    pub snapped: Config,
    pub snapped_objective: f64,
    pub predicted_continuous: PredictedMetrics,
    pub predicted_snapped: PredictedMetrics,
    pub trace: Vec<StartTrace>,
}

/// Minimize the objective over the box by multi-start projected gradient
/// descent and snap the winner to the lattice.
pub fn minimize(
    models: &SurrogateModels,
    spec: &ObjectiveSpec,
    settings: &MinimizeSettings,
) -> Result<OptimizationResult> {
    spec.validate()?;
    settings.lattice.validate()?;
    let bx = &spec.domain;

    // Coarse sweep at one channel unit spacing to pick descent seeds.
    let mut coarse: Vec<(f64, ContinuousPoint)> = Vec::new();
    for p in unit_sweep(bx) {
        if let Ok(v) = objective(p, models, spec) {
            coarse.push((v, p));
        }
    }
    coarse.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));

    let mut seeds: Vec<ContinuousPoint> = coarse
        .iter()
        .take(settings.coarse_seeds)
        .map(|&(_, p)| p)
        .collect();
    for corner in bx.corners() {
        if !seeds.iter().any(|s| s.b == corner.b && s.h == corner.h) {
            seeds.push(corner);
        }
    }
    if seeds.is_empty() {
        return Err(Error::Optimization {
            detail: "no evaluable starting point in the box (every candidate hit a pole)".into(),
        });
    }

    let mut trace = Vec::with_capacity(seeds.len());
    let mut best: Option<(f64, ContinuousPoint)> = None;
    for seed in seeds {
        let record = descend(seed, models, spec, settings);
        if let (Some(end), Some(value)) = (record.end, record.objective) {
            let better = match best {
                None => true,
                Some((bv, _)) => value < bv,
            };
            if better {
                best = Some((value, end));
            }
        }
        trace.push(record);
    }

    let (objective_value, continuous_opt) = best.ok_or_else(|| Error::Optimization {
        detail: format!("every descent start failed: {trace:?}"),
    })?;
    if !objective_value.is_finite() {
        return Err(Error::Optimization {
            detail: format!("objective diverged to {objective_value}"),
        });
    }

    // Snap within the part of the lattice that lies inside the box, using
    // the objective itself to break exact distance ties. Points outside
    // the (possibly narrower) lattice range are clamped onto it first.
    let clipped = clip_lattice(&settings.lattice, bx)?;
    let snap_from = ContinuousPoint {
        b: continuous_opt
            .b
            .clamp(clipped.b_lo as f64, clipped.b_hi as f64),
        h: continuous_opt
            .h
            .clamp(clipped.h_lo as f64, clipped.h_hi as f64),
    };
    let scorer = |c: Config| objective(c.as_point(), models, spec).unwrap_or(f64::INFINITY);
    let snapped = snap_to_lattice(snap_from, &clipped, Some(&scorer))?;
    let snapped_objective = objective(snapped.as_point(), models, spec)?;

    Ok(OptimizationResult {
        continuous_opt,
        objective_value,
        snapped,
        snapped_objective,
        predicted_continuous: PredictedMetrics::at(models, continuous_opt)?,
        predicted_snapped: PredictedMetrics::at(models, snapped.as_point())?,
        trace,
    })
}

/// Evaluation lattice at one channel unit spacing, always including the
/// upper box edges.
fn unit_sweep(bx: &DomainBox) -> Vec<ContinuousPoint> {
    let mut bs = Vec::new();
    let mut b = bx.b_lo;
    while b < bx.b_hi {
        bs.push(b);
        b += 1.0;
    }
    bs.push(bx.b_hi);
    let mut hs = Vec::new();
    let mut h = bx.h_lo;
    while h < bx.h_hi {
        hs.push(h);
        h += 1.0;
    }
    hs.push(bx.h_hi);
    let mut out = Vec::with_capacity(bs.len() * hs.len());
    for &b in &bs {
        for &h in &hs {
            out.push(ContinuousPoint { b, h });
        }
    }
    out
}

/// Restrict a lattice to the configurations inside the box.
fn clip_lattice(lat: &Lattice, bx: &DomainBox) -> Result<Lattice> {
    let in_box: Vec<Config> = lat
        .points()
        .into_iter()
        .filter(|c| bx.contains(c.as_point()))
        .collect();
    match (in_box.first(), in_box.last()) {
        (Some(_), Some(_)) => {
            let b_lo = in_box.iter().map(|c| c.b).min().unwrap();
            let b_hi = in_box.iter().map(|c| c.b).max().unwrap();
            let h_lo = in_box.iter().map(|c| c.h).min().unwrap();
            let h_hi = in_box.iter().map(|c| c.h).max().unwrap();
            Lattice::new(lat.b_step, b_lo, b_hi, lat.h_step, h_lo, h_hi)
        }
        _ => Err(Error::Optimization {
            detail: "no lattice configuration lies inside the box".into(),
        }),
    }
}

/// Projected gradient descent with Armijo backtracking in box-normalized
/// coordinates. Convergence is declared on the projected-gradient
/// fixed-point residual, which also vanishes at boundary optima where the
/// raw gradient does not.
fn descend(
    seed: ContinuousPoint,
    models: &SurrogateModels,
    spec: &ObjectiveSpec,
    settings: &MinimizeSettings,
) -> StartTrace {
    let bx = &spec.domain;
    let b_span = bx.b_hi - bx.b_lo;
    let h_span = bx.h_hi - bx.h_lo;
    let to_point = |x: [f64; 2]| ContinuousPoint {
        b: bx.b_lo + x[0] * b_span,
        h: bx.h_lo + x[1] * h_span,
    };
    let clamp01 = |x: [f64; 2]| [x[0].clamp(0.0, 1.0), x[1].clamp(0.0, 1.0)];

    let mut x = clamp01([(seed.b - bx.b_lo) / b_span, (seed.h - bx.h_lo) / h_span]);
    let mut f = match objective(to_point(x), models, spec) {
        Ok(v) => v,
        Err(e) => {
            return StartTrace {
                start: seed,
                iterations: 0,
                converged: false,
                end: None,
                objective: None,
                failure: Some(e.to_string()),
            }
        }
    };

    let mut converged = false;
    let mut iterations = 0;
    for it in 0..settings.max_iters {
        iterations = it + 1;
        let g_raw = match objective_gradient(to_point(x), models, spec) {
            Ok(g) => g,
            Err(e) => {
                return StartTrace {
                    start: seed,
                    iterations,
                    converged: false,
                    end: Some(to_point(x)),
                    objective: Some(f),
                    failure: Some(e.to_string()),
                }
            }
        };
        let g = [g_raw[0] * b_span, g_raw[1] * h_span];

        let fixed_point = clamp01([x[0] - g[0], x[1] - g[1]]);
        let residual = ((fixed_point[0] - x[0]).powi(2) + (fixed_point[1] - x[1]).powi(2)).sqrt();
        if residual < settings.grad_tol {
            converged = true;
            break;
        }

        let mut t = settings.initial_step;
        let mut stepped = false;
        while t >= 1e-18 {
            let cand = clamp01([x[0] - t * g[0], x[1] - t * g[1]]);
            let d = [cand[0] - x[0], cand[1] - x[1]];
            if d[0] == 0.0 && d[1] == 0.0 {
                t *= settings.backtrack;
                continue;
            }
            match objective(to_point(cand), models, spec) {
                Ok(fc) if fc <= f + settings.armijo_c * (g[0] * d[0] + g[1] * d[1]) => {
                    x = cand;
                    f = fc;
                    stepped = true;
                    break;
                }
                _ => t *= settings.backtrack,
            }
        }
        if !stepped {
            // no acceptable step at any scale: numerically stationary
            converged = true;
            break;
        }
    }

    StartTrace {
        start: seed,
        iterations,
        converged,
        end: Some(to_point(x)),
        objective: Some(f),
        failure: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costmodel::{default_grid, CostModelParams};
    use crate::rng::SplitMix64;
    use crate::surrogate::TargetMetric;

    fn quad(coeffs: [f64; 6], target: TargetMetric) -> QuadraticSurrogate {
        QuadraticSurrogate { coeffs, target }
    }

    fn default_models() -> SurrogateModels {
        let params = CostModelParams::default();
        SurrogateModels {
            latency: params.latency_model(),
            power: params.power_model(),
            miou: params.miou_model(),
        }
    }

    fn grid_configs() -> Vec<Config> {
        default_grid()
    }

    #[test]
    fn bounds_flag_constant_model_as_degenerate() {
        let mut models = default_models();
        models.latency = quad([100.0, 0.0, 0.0, 0.0, 0.0, 0.0], TargetMetric::LatencyMs);
        let bounds = compute_bounds(&models, &grid_configs()).unwrap();
        assert!(bounds.latency.is_degenerate());
        assert!(!bounds.miou.is_degenerate());
        // building a spec that weights the degenerate metric fails
        let err = ObjectiveSpec::new(Weights::default(), bounds, DomainBox::default());
        assert!(matches!(
            err,
            Err(Error::DegenerateBounds {
                metric: "latency_ms"
            })
        ));
        // dropping its weight makes the spec valid
        let w = Weights {
            latency: 0.0,
            ..Weights::default()
        };
        assert!(ObjectiveSpec::new(w, bounds, DomainBox::default()).is_ok());
    }

    #[test]
    fn bounds_linear_model_over_two_configs() {
        let mut models = default_models();
        models.latency = quad([0.0, 1.0, 0.0, 0.0, 0.0, 0.0], TargetMetric::LatencyMs);
        let configs = vec![Config { b: 16, h: 4 }, Config { b: 64, h: 4 }];
        let bounds = compute_bounds(&models, &configs).unwrap();
        assert_eq!(bounds.latency.min, 16.0);
        assert_eq!(bounds.latency.max, 64.0);
    }

    #[test]
    fn bounds_match_brute_force_extrema() {
        let models = default_models();
        let configs = grid_configs();
        let bounds = compute_bounds(&models, &configs).unwrap();
        let mut lat: Vec<f64> = configs
            .iter()
            .map(|c| models.predict_latency(c.as_point()))
            .collect();
        lat.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(bounds.latency.min, lat[0]);
        assert_eq!(bounds.latency.max, *lat.last().unwrap());
        let mut miou: Vec<f64> = configs
            .iter()
            .map(|c| models.predict_miou(c.as_point()).unwrap())
            .collect();
        miou.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(bounds.miou.min, miou[0]);
        assert_eq!(bounds.miou.max, *miou.last().unwrap());
    }

    #[test]
    fn bounds_require_two_distinct_configs() {
        let models = default_models();
        let configs = vec![Config { b: 32, h: 8 }, Config { b: 32, h: 8 }];
        assert!(matches!(
            compute_bounds(&models, &configs),
            Err(Error::Underdetermined {
                needed: 2,
                got: 1,
                ..
            })
        ));
    }

    fn spec_for(models: &SurrogateModels, weights: Weights) -> ObjectiveSpec {
        let bounds = compute_bounds(models, &grid_configs()).unwrap();
        ObjectiveSpec::new(weights, bounds, DomainBox::default()).unwrap()
    }

    #[test]
    fn objective_zero_at_all_min_point_and_one_at_extremes() {
        // monotone default models: every metric attains its min at (16,4)
        // and its max at (64,32) over the grid
        let models = default_models();
        let spec = spec_for(&models, Weights::default());
        let at_min = objective(ContinuousPoint { b: 16.0, h: 4.0 }, &models, &spec).unwrap();
        // latency and power norms are 0 there, mIoU norm is 0 too: 0 + 0 - 0
        assert!(at_min.abs() < 1e-12, "objective at all-min point: {at_min}");
        let at_max = objective(ContinuousPoint { b: 64.0, h: 32.0 }, &models, &spec).unwrap();
        // 1 + 1 - 1
        assert!(
            (at_max - 1.0).abs() < 1e-12,
            "objective at all-max point: {at_max}"
        );
    }

    #[test]
    fn miou_only_argmin_is_miou_argmax() {
        let models = default_models();
        let spec = spec_for(
            &models,
            Weights {
                latency: 0.0,
                power: 0.0,
                miou: 1.0,
            },
        );
        let configs = grid_configs();
        let obj_argmin = configs
            .iter()
            .min_by(|a, b| {
                objective(a.as_point(), &models, &spec)
                    .unwrap()
                    .partial_cmp(&objective(b.as_point(), &models, &spec).unwrap())
                    .unwrap()
            })
            .unwrap();
        let miou_argmax = configs
            .iter()
            .max_by(|a, b| {
                models
                    .predict_miou(a.as_point())
                    .unwrap()
                    .partial_cmp(&models.predict_miou(b.as_point()).unwrap())
                    .unwrap()
            })
            .unwrap();
        assert_eq!(obj_argmin, miou_argmax);
    }

    #[test]
    fn objective_at_sampled_configs_stays_in_unit_band() {
        // with bounds over the sampled configs and weights (1,1,1), each
        // normalized term is within [0,1] at those configs
        let models = default_models();
        let spec = spec_for(&models, Weights::default());
        for c in grid_configs() {
            let v = objective(c.as_point(), &models, &spec).unwrap();
            assert!((-1.0..=2.0).contains(&v), "objective {v} at {c}");
        }
    }

    #[test]
    fn gradient_zero_weight_terms_do_not_contribute() {
        let models = default_models();
        // zero out everything: invalid spec, so weight one metric and give
        // the others zero; their models must not be touched
        let spec = spec_for(
            &models,
            Weights {
                latency: 1.0,
                power: 0.0,
                miou: 0.0,
            },
        );
        let p = ContinuousPoint { b: 40.0, h: 18.0 };
        let g = objective_gradient(p, &models, &spec).unwrap();
        let gl = models.latency.gradient(p);
        let scale = 1.0 / spec.bounds.latency.span();
        assert!((g[0] - scale * gl[0]).abs() < 1e-15);
        assert!((g[1] - scale * gl[1]).abs() < 1e-15);
    }

    #[test]
    fn gradient_linear_latency_spec_value() {
        let mut models = default_models();
        models.latency = quad([0.0, 1.0, 0.0, 0.0, 0.0, 0.0], TargetMetric::LatencyMs);
        let spec = spec_for(
            &models,
            Weights {
                latency: 2.0,
                power: 0.0,
                miou: 0.0,
            },
        );
        let g = objective_gradient(ContinuousPoint { b: 40.0, h: 18.0 }, &models, &spec).unwrap();
        let expect = 2.0 / spec.bounds.latency.span();
        assert!((g[0] - expect).abs() < 1e-15);
        assert_eq!(g[1], 0.0);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let models = default_models();
        let spec = spec_for(&models, Weights::default());
        let mut rng = SplitMix64::new(77);
        let step = 1e-4;
        for _ in 0..100 {
            let b = (16.0 + 48.0 * rng.next_f64()).clamp(16.0 + step, 64.0 - step);
            let h = (4.0 + 28.0 * rng.next_f64()).clamp(4.0 + step, 32.0 - step);
            let p = ContinuousPoint { b, h };
            let g = objective_gradient(p, &models, &spec).unwrap();
            let fd_b = (objective(ContinuousPoint { b: b + step, h }, &models, &spec).unwrap()
                - objective(ContinuousPoint { b: b - step, h }, &models, &spec).unwrap())
                / (2.0 * step);
            let fd_h = (objective(ContinuousPoint { b, h: h + step }, &models, &spec).unwrap()
                - objective(ContinuousPoint { b, h: h - step }, &models, &spec).unwrap())
                / (2.0 * step);
            assert!(
                (g[0] - fd_b).abs() <= 1e-6 * fd_b.abs().max(1e-9),
                "{} vs {}",
                g[0],
                fd_b
            );
            assert!(
                (g[1] - fd_h).abs() <= 1e-6 * fd_h.abs().max(1e-9),
                "{} vs {}",
                g[1],
                fd_h
            );
        }
    }

    #[test]
    fn monotone_latency_only_objective_finds_lower_left_corner() {
        let mut models = default_models();
        models.latency = quad([0.0, 1.0, 1.0, 0.0, 0.0, 0.0], TargetMetric::LatencyMs);
        let spec = spec_for(
            &models,
            Weights {
                latency: 1.0,
                power: 0.0,
                miou: 0.0,
            },
        );
        let result = minimize(&models, &spec, &MinimizeSettings::default()).unwrap();
        assert!((result.continuous_opt.b - 16.0).abs() < 1e-6);
        assert!((result.continuous_opt.h - 4.0).abs() < 1e-6);
        assert!(result.objective_value.abs() < 1e-9);
    }

    #[test]
    fn miou_only_objective_runs_to_wide_encoder_edge() {
        // default mIoU model increases in b everywhere, so maximizing it
        // pushes b to the upper edge
        let models = default_models();
        let spec = spec_for(
            &models,
            Weights {
                latency: 0.0,
                power: 0.0,
                miou: 1.0,
            },
        );
        let result = minimize(&models, &spec, &MinimizeSettings::default()).unwrap();
        assert!(
            (result.continuous_opt.b - 64.0).abs() < 1e-6,
            "b = {}",
            result.continuous_opt.b
        );
    }

    #[test]
    fn minimize_beats_dense_grid_oracle_on_default_model() {
        let models = default_models();
        let spec = spec_for(&models, Weights::default());
        let result = minimize(&models, &spec, &MinimizeSettings::default()).unwrap();
        let mut grid_min = f64::INFINITY;
        for p in spec.domain.grid(481, 281) {
            let v = objective(p, &models, &spec).unwrap();
            if v < grid_min {
                grid_min = v;
            }
        }
        assert!(
            result.objective_value <= grid_min + 1e-6,
            "optimizer {} vs grid {}",
            result.objective_value,
            grid_min
        );
    }

    #[test]
    fn weight_scaling_leaves_argmin_unchanged() {
        let models = default_models();
        let spec = spec_for(&models, Weights::default());
        let scaled = ObjectiveSpec::new(
            Weights {
                latency: 3.5,
                power: 3.5,
                miou: 3.5,
            },
            spec.bounds,
            spec.domain,
        )
        .unwrap();
        let a = minimize(&models, &spec, &MinimizeSettings::default()).unwrap();
        let b = minimize(&models, &scaled, &MinimizeSettings::default()).unwrap();
        assert!((a.continuous_opt.b - b.continuous_opt.b).abs() < 1e-6);
        assert!((a.continuous_opt.h - b.continuous_opt.h).abs() < 1e-6);
    }

    #[test]
    fn snapped_config_is_lattice_valid_and_in_box() {
        let models = default_models();
        let spec = spec_for(&models, Weights::default());
        let settings = MinimizeSettings::default();
        let result = minimize(&models, &spec, &settings).unwrap();
        assert!(settings.lattice.contains(result.snapped));
        assert!(spec.domain.contains(result.snapped.as_point()));
        // predictions at both points are populated with derived metrics
        assert!(result.predicted_snapped.derived.is_some());
        assert!(result.predicted_continuous.derived.is_some());
    }

    #[test]
    fn default_pipeline_selects_low_bottleneck_config() {
        // end-to-end on the calibrated model: the chosen config cuts
        // latency hard while keeping most of the accuracy
        let models = default_models();
        let spec = spec_for(&models, Weights::default());
        let result = minimize(&models, &spec, &MinimizeSettings::default()).unwrap();
        let baseline = Config { b: 64, h: 32 }.as_point();
        let base_latency = models.predict_latency(baseline);
        let base_miou = models.predict_miou(baseline).unwrap();
        assert!(result.predicted_snapped.latency_ms <= 0.7 * base_latency);
        assert!(result.predicted_snapped.miou >= base_miou - 6.0);
    }

    #[test]
    fn trace_records_every_start() {
        let models = default_models();
        let spec = spec_for(&models, Weights::default());
        let result = minimize(&models, &spec, &MinimizeSettings::default()).unwrap();
        // 5 coarse seeds plus up to 4 corners (deduplicated)
        assert!(result.trace.len() >= 5 && result.trace.len() <= 9);
        assert!(result.trace.iter().all(|t| t.objective.is_some()));
    }

    #[test]
    fn degenerate_weighted_bounds_error_on_minimize() {
        let mut models = default_models();
        models.latency = quad([100.0, 0.0, 0.0, 0.0, 0.0, 0.0], TargetMetric::LatencyMs);
        let bounds = compute_bounds(&models, &grid_configs()).unwrap();
        let spec = ObjectiveSpec {
            weights: Weights::default(),
            bounds,
            domain: DomainBox::default(),
        };
        assert!(matches!(
            minimize(&models, &spec, &MinimizeSettings::default()),
            Err(Error::DegenerateBounds { .. })
        ));
    }
}
