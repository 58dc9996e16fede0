//! Leave-one-out cross validation for the surrogate fitters.
//!
//! Low-order surrogates on 16-point grids can still overfit; the PRESS
//! statistic (sum of squared held-out prediction errors) and its Q²
//! analogue expose that without requiring extra profiling runs.

use crate::designspace::SampleSet;
use crate::error::{Error, Result};
use crate::surrogate::{
    fit_quadratic, fit_rational_with, sum_squares_about_mean, FitDiagnostics, RationalFitOptions,
    TargetMetric,
};

/// Which fitter to cross-validate.
#[derive(Debug, Clone)]
pub enum LooFitter {
    Quadratic(TargetMetric),
    Rational(RationalFitOptions),
}

impl LooFitter {
    pub fn rational_default() -> Self {
        LooFitter::Rational(RationalFitOptions::default())
    }

    fn min_samples(&self) -> usize {
        match self {
            LooFitter::Quadratic(_) => 6,
            LooFitter::Rational(_) => 7,
        }
    }

    fn target_of(&self, s: &crate::designspace::Sample) -> f64 {
        match self {
            LooFitter::Quadratic(t) => t.extract(s),
            LooFitter::Rational(_) => s.miou,
        }
    }

    fn fit_predict(
        &self,
        train: &SampleSet,
        at: crate::designspace::ContinuousPoint,
    ) -> Result<f64> {
        match self {
            LooFitter::Quadratic(t) => {
                let (model, _) = fit_quadratic(train, *t)?;
                Ok(model.predict(at))
            }
            LooFitter::Rational(opts) => {
                let (model, _) = fit_rational_with(train, opts)?;
                model.predict(at)
            }
        }
    }

    fn fit_full(&self, data: &SampleSet) -> Result<FitDiagnostics> {
        match self {
            LooFitter::Quadratic(t) => Ok(fit_quadratic(data, *t)?.1),
            LooFitter::Rational(opts) => Ok(fit_rational_with(data, opts)?.1),
        }
    }
}

/// Fit the full model once for in-sample diagnostics, then refit with each
/// sample held out in turn, recording the held-out prediction errors.
/// `loo_press` is their sum of squares and `loo_q_squared = 1 - PRESS /
/// SS_tot` (SS_tot about the full-sample mean).
///
/// Requires duplicate-free data (aggregate repeats first) with at least
/// one sample more than the fitter's minimum, so every held-out fit is
/// determined.
pub fn loo_cross_validate(data: &SampleSet, fitter: &LooFitter) -> Result<FitDiagnostics> {
    let n = data.len();
    if data.distinct_config_count() != n {
        return Err(Error::Domain(
            "leave-one-out requires duplicate-free configs; aggregate repeats first".into(),
        ));
    }
    let needed = fitter.min_samples() + 1;
    if n < needed {
        return Err(Error::Underdetermined {
            what: "leave-one-out cross validation",
            needed,
            got: n,
        });
    }

    let mut diag = fitter.fit_full(data)?;

    let mut held_out_errors = Vec::with_capacity(n);
    for i in 0..n {
        let train: Vec<_> = data
            .samples()
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != i)
            .map(|(_, s)| *s)
            .collect();
        let train = SampleSet::from_raw(train).expect("n - 1 >= 1");
        let held = &data.samples()[i];
        let predicted = fitter
            .fit_predict(&train, held.config.as_point())
            .map_err(|e| Error::Loo {
                index: i,
                source: Box::new(e),
            })?;
        held_out_errors.push(fitter.target_of(held) - predicted);
    }

    let press: f64 = held_out_errors.iter().map(|e| e * e).sum();
    let targets: Vec<f64> = data.samples().iter().map(|s| fitter.target_of(s)).collect();
    let ss_tot = sum_squares_about_mean(&targets);
    let q_squared = if ss_tot > 0.0 {
        1.0 - press / ss_tot
    } else {
        1.0 - press
    };

    diag.loo_press = Some(press);
    diag.loo_q_squared = Some(q_squared);
    Ok(diag)
}
