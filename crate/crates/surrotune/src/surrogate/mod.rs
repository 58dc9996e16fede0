//! Surrogate regression models over the `(b, h)` design space: quadratic
//! polynomials for latency and power, and a rational form for mIoU, with
//! ordinary-least-squares / Gauss-Newton fitting and fit diagnostics.

mod linalg;
mod loo;
mod rational;

pub use loo::{loo_cross_validate, LooFitter};
pub use rational::{fit_rational, fit_rational_with, RationalFitOptions, RationalSurrogate};

use serde::{Deserialize, Serialize};

use crate::designspace::{ContinuousPoint, SampleSet};
use crate::error::{Error, Result};
use linalg::solve_least_squares;

/// Which measured metric a quadratic surrogate predicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TargetMetric {
    LatencyMs,
    PowerW,
}

impl TargetMetric {
    pub fn label(&self) -> &'static str {
        match self {
            TargetMetric::LatencyMs => "latency_ms",
            TargetMetric::PowerW => "power_w",
        }
    }

    pub fn extract(&self, s: &crate::designspace::Sample) -> f64 {
        match self {
            TargetMetric::LatencyMs => s.latency_ms,
            TargetMetric::PowerW => s.power_w,
        }
    }
}

pub(crate) const QUAD_TERMS: [&str; 6] = ["1", "b", "h", "b^2", "b*h", "h^2"];

/// Quadratic feature vector `[1, b, h, b^2, b*h, h^2]`, in that order.
pub fn quad_features(b: f64, h: f64) -> [f64; 6] {
    [1.0, b, h, b * b, b * h, h * h]
}

/// A fitted second-order polynomial surrogate over the design space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticSurrogate {
    /// Coefficients for the basis `[1, b, h, b^2, b*h, h^2]`.
    pub coeffs: [f64; 6],
    pub target: TargetMetric,
}

impl QuadraticSurrogate {
    pub fn new(coeffs: [f64; 6], target: TargetMetric) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain(
                "quadratic coefficients must be finite".into(),
            ));
        }
        Ok(QuadraticSurrogate { coeffs, target })
    }

    /// Evaluate the polynomial at a continuous point.
    pub fn predict(&self, p: ContinuousPoint) -> f64 {
        let phi = quad_features(p.b, p.h);
        self.coeffs.iter().zip(phi.iter()).map(|(c, f)| c * f).sum()
    }

    /// Analytic gradient `(d/db, d/dh)`.
    pub fn gradient(&self, p: ContinuousPoint) -> [f64; 2] {
        let [_, c1, c2, c3, c4, c5] = self.coeffs;
        [
            c1 + 2.0 * c3 * p.b + c4 * p.h,
            c2 + c4 * p.b + 2.0 * c5 * p.h,
        ]
    }
}

/// Goodness-of-fit summary. `residuals` are in sample order; the optional
/// leave-one-out fields are filled by [`loo_cross_validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    /// 1 - SS_res / SS_tot with SS_tot about the sample mean.
    pub r_squared: f64,
    /// sqrt(SS_res / n), in target units.
    pub rmse: f64,
    pub residuals: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub loo_press: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub loo_q_squared: Option<f64>,
}

/// Build diagnostics from targets and their fitted predictions. Uses the
/// zero-variance convention: R² is 1 for a perfectly reproduced constant
/// target, 0 for a constant target that is not reproduced.
pub(crate) fn diagnostics_from_residuals(targets: &[f64], predictions: &[f64]) -> FitDiagnostics {
    let n = targets.len() as f64;
    let mean = targets.iter().sum::<f64>() / n;
    let ss_tot: f64 = targets.iter().map(|y| (y - mean) * (y - mean)).sum();
    let residuals: Vec<f64> = targets
        .iter()
        .zip(predictions.iter())
        .map(|(y, f)| y - f)
        .collect();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res <= 1e-18 * n * (1.0 + mean * mean) {
        1.0
    } else {
        0.0
    };
    FitDiagnostics {
        r_squared,
        rmse: (ss_res / targets.len() as f64).sqrt(),
        residuals,
        loo_press: None,
        loo_q_squared: None,
    }
}

pub(crate) fn sum_squares_about_mean(values: &[f64]) -> f64 {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.iter().map(|y| (y - mean) * (y - mean)).sum()
}

/// Fit a quadratic surrogate to the chosen target by ordinary least
/// squares, solved through an orthogonal decomposition. Requires at least
/// 6 distinct configs and a full-rank design.
pub fn fit_quadratic(
    data: &SampleSet,
    target: TargetMetric,
) -> Result<(QuadraticSurrogate, FitDiagnostics)> {
    let distinct = data.distinct_config_count();
    if distinct < 6 {
        return Err(Error::Underdetermined {
            what: "quadratic surrogate",
            needed: 6,
            got: distinct,
        });
    }
    let rows: Vec<Vec<f64>> = data
        .samples()
        .iter()
        .map(|s| quad_features(s.config.b as f64, s.config.h as f64).to_vec())
        .collect();
    let targets: Vec<f64> = data.samples().iter().map(|s| target.extract(s)).collect();

    let sol = solve_least_squares(&rows, &targets, &QUAD_TERMS, false)?;
    let mut coeffs = [0.0f64; 6];
    coeffs.copy_from_slice(&sol.coeffs);
    let model = QuadraticSurrogate::new(coeffs, target)?;

    let predictions: Vec<f64> = data
        .samples()
        .iter()
        .map(|s| model.predict(s.config.as_point()))
        .collect();
    let diag = diagnostics_from_residuals(&targets, &predictions);
    Ok((model, diag))
}
