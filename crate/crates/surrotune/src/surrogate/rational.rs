//! Rational surrogate for mIoU:
//!
//! ```text
//! m(b, h) = (a3 + a4 b + a5 h + a6 b h) / (a0 + a1 b + a2 h + b h)
//! ```
//!
//! The `b*h` denominator coefficient is fixed to 1, which removes the
//! usual scale ambiguity of rational fits. Fitting is two-stage: a
//! denominator-multiplied linear least-squares initialization (biased by
//! denominator weighting) followed by damped Gauss-Newton refinement of
//! the true residuals, which corrects that bias.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::designspace::{ContinuousPoint, DomainBox, SampleSet};
use crate::error::{Error, Result};
use crate::surrogate::linalg::solve_least_squares;
use crate::surrogate::{diagnostics_from_residuals, FitDiagnostics};

/// Denominator magnitude below which evaluation counts as a pole.
pub const POLE_TOL: f64 = 1e-9;

const LINEARIZED_TERMS: [&str; 7] = ["m", "m*b", "m*h", "1", "b", "h", "b*h"];

/// Fitted rational surrogate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalSurrogate {
    /// Coefficients (a3, a4, a5, a6) for the numerator basis [1, b, h, b*h].
    pub numerator: [f64; 4],
    /// Coefficients (a0, a1, a2) for the denominator basis [1, b, h];
    /// the b*h coefficient is implicitly 1.
    pub denominator: [f64; 3],
}

impl RationalSurrogate {
    pub fn new(numerator: [f64; 4], denominator: [f64; 3]) -> Result<Self> {
        if numerator
            .iter()
            .chain(denominator.iter())
            .any(|c| !c.is_finite())
        {
            return Err(Error::Domain("rational coefficients must be finite".into()));
        }
        Ok(RationalSurrogate {
            numerator,
            denominator,
        })
    }

    pub fn numerator_at(&self, p: ContinuousPoint) -> f64 {
        let [a3, a4, a5, a6] = self.numerator;
        a3 + a4 * p.b + a5 * p.h + a6 * p.b * p.h
    }

    pub fn denominator_at(&self, p: ContinuousPoint) -> f64 {
        let [a0, a1, a2] = self.denominator;
        a0 + a1 * p.b + a2 * p.h + p.b * p.h
    }

    pub fn predict(&self, p: ContinuousPoint) -> Result<f64> {
        let den = self.denominator_at(p);
        if den.abs() < POLE_TOL {
            return Err(Error::Pole {
                b: p.b,
                h: p.h,
                magnitude: den.abs(),
            });
        }
        Ok(self.numerator_at(p) / den)
    }

    /// Quotient-rule gradient `(d/db, d/dh)`.
    pub fn gradient(&self, p: ContinuousPoint) -> Result<[f64; 2]> {
        let den = self.denominator_at(p);
        if den.abs() < POLE_TOL {
            return Err(Error::Pole {
                b: p.b,
                h: p.h,
                magnitude: den.abs(),
            });
        }
        let num = self.numerator_at(p);
        let [_, a4, a5, a6] = self.numerator;
        let [_, a1, a2] = self.denominator;
        let dnum_db = a4 + a6 * p.h;
        let dnum_dh = a5 + a6 * p.b;
        let dden_db = a1 + p.h;
        let dden_dh = a2 + p.b;
        Ok([
            (dnum_db * den - num * dden_db) / (den * den),
            (dnum_dh * den - num * dden_dh) / (den * den),
        ])
    }

    /// Verify the denominator is strictly positive (and away from zero) on
    /// an evenly spaced grid over the box. The denominator is bilinear, so
    /// the grid's corner points make the check conclusive for the box.
    pub fn check_denominator(&self, bx: &DomainBox, nb: usize, nh: usize) -> Result<()> {
        for p in bx.grid(nb, nh) {
            let den = self.denominator_at(p);
            if den < POLE_TOL || den.is_nan() {
                return Err(Error::Pole {
                    b: p.b,
                    h: p.h,
                    magnitude: den.abs(),
                });
            }
        }
        Ok(())
    }
}

/// Knobs for [`fit_rational_with`]. Defaults match the shipped pipeline.
#[derive(Debug, Clone)]
pub struct RationalFitOptions {
    /// Box over which denominator positivity is enforced.
    pub domain: DomainBox,
    /// Positivity check grid resolution (points per axis).
    pub check_grid: (usize, usize),
    /// Gauss-Newton iteration cap.
    pub max_iters: usize,
    /// Stop once the relative residual-norm improvement drops below this.
    pub rel_tol: f64,
    /// Initial Levenberg-Marquardt damping.
    pub lambda_init: f64,
}

impl Default for RationalFitOptions {
    fn default() -> Self {
        RationalFitOptions {
            domain: DomainBox::default(),
            check_grid: (65, 57),
            max_iters: 200,
            rel_tol: 1e-10,
            lambda_init: 1e-3,
        }
    }
}

/// Fit the rational mIoU surrogate with default options.
pub fn fit_rational(data: &SampleSet) -> Result<(RationalSurrogate, FitDiagnostics)> {
    fit_rational_with(data, &RationalFitOptions::default())
}

/// Fit the rational mIoU surrogate.
///
/// Stage 1 multiplies the model through by its denominator, giving the
/// linear relation
///
/// ```text
/// m a0 + m b a1 + m h a2 - a3 - a4 b - a5 h - a6 b h = -m b h
/// ```
///
/// solved by ordinary least squares. Stage 2 runs damped Gauss-Newton on
/// the true residuals `m_i - m(b_i, h_i)` from that start; it only ever
/// accepts steps that reduce the residual sum of squares, and falls back
/// to the stage-1 coefficients if refinement cannot improve on them.
pub fn fit_rational_with(
    data: &SampleSet,
    opts: &RationalFitOptions,
) -> Result<(RationalSurrogate, FitDiagnostics)> {
    opts.domain.validate()?;
    let distinct = data.distinct_config_count();
    if distinct < 7 {
        return Err(Error::Underdetermined {
            what: "rational surrogate",
            needed: 7,
            got: distinct,
        });
    }

    let pts: Vec<(f64, f64, f64)> = data
        .samples()
        .iter()
        .map(|s| (s.config.b as f64, s.config.h as f64, s.miou))
        .collect();

    // Stage 1: linearized initialization. A rank-deficient system is
    // tolerated when the minimum-norm solution still explains the data
    // exactly AND yields a usable model (e.g. constant targets, where the
    // coefficients are not unique but the fitted function is); a deficient
    // system whose solution degenerates (denominator vanishing at the
    // samples) is reported as the rank problem it is.
    let rows: Vec<Vec<f64>> = pts
        .iter()
        .map(|&(b, h, m)| vec![m, m * b, m * h, -1.0, -b, -h, -b * h])
        .collect();
    let rhs: Vec<f64> = pts.iter().map(|&(b, h, m)| -m * b * h).collect();
    let sol = solve_least_squares(&rows, &rhs, &LINEARIZED_TERMS, true)?;
    let stage1 = RationalSurrogate::new(
        [sol.coeffs[3], sol.coeffs[4], sol.coeffs[5], sol.coeffs[6]],
        [sol.coeffs[0], sol.coeffs[1], sol.coeffs[2]],
    )?;

    let stage1_ok = on_positive_branch(&stage1, &pts, &opts.domain);
    if sol.rank < LINEARIZED_TERMS.len() && !stage1_ok {
        return Err(Error::RankDeficient {
            detail: format!(
                "linearized system is rank deficient (rank {} of {}) and its solution \
                 degenerates; profile more distinct configs",
                sol.rank,
                LINEARIZED_TERMS.len()
            ),
        });
    }

    // The denominator-weighted linearization can run off to a negative-
    // denominator branch when the m column is nearly constant. Such a
    // start is not an admissible model (the b*h coefficient is pinned to
    // +1), so refinement restarts from a fixed positive denominator with
    // the numerator fit by least squares.
    let (start, stage1_ss) = if stage1_ok {
        let ss = sum_sq(&true_residuals(&stage1, &pts)?);
        (stage1.clone(), ss)
    } else {
        let fallback = positive_branch_start(&pts)?;
        let ss = sum_sq(&true_residuals(&fallback, &pts)?);
        (fallback, ss)
    };

    // Stage 2: Levenberg-Marquardt on the true residuals. Accepted steps
    // only ever lower the residual sum of squares, so the refined model can
    // never be worse than its start; the explicit comparison guards the
    // degenerate first evaluation.
    let refined = refine(&start, &pts, stage1_ss, opts);
    let model = match refined {
        Some(m) => {
            let res = true_residuals(&m, &pts)?;
            if sum_sq(&res) <= stage1_ss {
                m
            } else {
                start
            }
        }
        None => start,
    };

    model.check_denominator(&opts.domain, opts.check_grid.0, opts.check_grid.1)?;

    let targets: Vec<f64> = pts.iter().map(|&(_, _, m)| m).collect();
    let predictions = data
        .samples()
        .iter()
        .map(|s| model.predict(s.config.as_point()))
        .collect::<Result<Vec<f64>>>()?;
    let diag = diagnostics_from_residuals(&targets, &predictions);
    Ok((model, diag))
}

fn sum_sq(v: &[f64]) -> f64 {
    v.iter().map(|r| r * r).sum()
}

/// The denominator is bilinear, so positivity at the box corners is
/// conclusive for the whole box; sample points are checked as well in case
/// any lie outside the box.
fn on_positive_branch(model: &RationalSurrogate, pts: &[(f64, f64, f64)], bx: &DomainBox) -> bool {
    pts.iter()
        .all(|&(b, h, _)| model.denominator_at(ContinuousPoint { b, h }) >= POLE_TOL)
        && bx
            .corners()
            .iter()
            .all(|&p| model.denominator_at(p) >= POLE_TOL)
}

/// Positive-branch initialization used when the linearized solve is not
/// usable: freeze the denominator at `d0 + b*h` with `d0` the mean sample
/// `b*h` (comfortably positive), and fit the numerator by least squares on
/// the true model, which is linear once the denominator is fixed.
fn positive_branch_start(pts: &[(f64, f64, f64)]) -> Result<RationalSurrogate> {
    let d0 = pts.iter().map(|&(b, h, _)| b * h).sum::<f64>() / pts.len() as f64;
    let rows: Vec<Vec<f64>> = pts
        .iter()
        .map(|&(b, h, _)| {
            let den = d0 + b * h;
            vec![1.0 / den, b / den, h / den, b * h / den]
        })
        .collect();
    let rhs: Vec<f64> = pts.iter().map(|&(_, _, m)| m).collect();
    let sol = solve_least_squares(&rows, &rhs, &["1", "b", "h", "b*h"], true)?;
    RationalSurrogate::new(
        [sol.coeffs[0], sol.coeffs[1], sol.coeffs[2], sol.coeffs[3]],
        [d0, 0.0, 0.0],
    )
}

fn true_residuals(model: &RationalSurrogate, pts: &[(f64, f64, f64)]) -> Result<Vec<f64>> {
    pts.iter()
        .map(|&(b, h, m)| Ok(m - model.predict(ContinuousPoint { b, h })?))
        .collect()
}

/// Residuals for candidate evaluation inside the damped iteration; returns
/// None when a candidate leaves the positive-denominator branch or produces
/// non-finite residuals, so such steps are rejected.
fn residuals_checked(
    model: &RationalSurrogate,
    pts: &[(f64, f64, f64)],
    bx: &DomainBox,
) -> Option<Vec<f64>> {
    if !on_positive_branch(model, pts, bx) {
        return None;
    }
    let mut out = Vec::with_capacity(pts.len());
    for &(b, h, m) in pts {
        let p = ContinuousPoint { b, h };
        let r = m - model.numerator_at(p) / model.denominator_at(p);
        if !r.is_finite() {
            return None;
        }
        out.push(r);
    }
    Some(out)
}

/// Jacobian of the residual vector with respect to
/// (a0, a1, a2, a3, a4, a5, a6). For r = m - N/D:
/// dr/d(a0..a2) = (N/D²)·[1, b, h], dr/d(a3..a6) = -(1/D)·[1, b, h, b*h].
fn jacobian(model: &RationalSurrogate, pts: &[(f64, f64, f64)]) -> DMatrix<f64> {
    let mut j = DMatrix::<f64>::zeros(pts.len(), 7);
    for (i, &(b, h, _)) in pts.iter().enumerate() {
        let p = ContinuousPoint { b, h };
        let den = model.denominator_at(p);
        let num = model.numerator_at(p);
        let g = num / (den * den);
        j[(i, 0)] = g;
        j[(i, 1)] = g * b;
        j[(i, 2)] = g * h;
        j[(i, 3)] = -1.0 / den;
        j[(i, 4)] = -b / den;
        j[(i, 5)] = -h / den;
        j[(i, 6)] = -b * h / den;
    }
    j
}

fn params_of(model: &RationalSurrogate) -> [f64; 7] {
    [
        model.denominator[0],
        model.denominator[1],
        model.denominator[2],
        model.numerator[0],
        model.numerator[1],
        model.numerator[2],
        model.numerator[3],
    ]
}

fn model_of(theta: &[f64; 7]) -> RationalSurrogate {
    RationalSurrogate {
        denominator: [theta[0], theta[1], theta[2]],
        numerator: [theta[3], theta[4], theta[5], theta[6]],
    }
}

fn refine(
    start: &RationalSurrogate,
    pts: &[(f64, f64, f64)],
    start_ss: f64,
    opts: &RationalFitOptions,
) -> Option<RationalSurrogate> {
    let mut theta = params_of(start);
    let mut residuals = residuals_checked(start, pts, &opts.domain)?;
    let mut ss = start_ss;
    let mut lambda = opts.lambda_init;

    for _ in 0..opts.max_iters {
        let model = model_of(&theta);
        let j = jacobian(&model, pts);
        let r = DVector::<f64>::from_column_slice(&residuals);
        let jtj = j.transpose() * &j;
        let jtr = j.transpose() * &r;

        let mut improved = false;
        // retry the same step with stronger damping until accepted or the
        // damping range is exhausted
        while lambda <= 1e12 {
            let mut damped = jtj.clone();
            for k in 0..7 {
                let d = jtj[(k, k)].max(1e-30);
                damped[(k, k)] += lambda * d;
            }
            let step = match damped.clone().cholesky() {
                Some(chol) => chol.solve(&(-&jtr)),
                None => match damped.lu().solve(&(-&jtr)) {
                    Some(s) => s,
                    None => {
                        lambda *= 10.0;
                        continue;
                    }
                },
            };
            let mut cand = theta;
            for k in 0..7 {
                cand[k] += step[k];
            }
            let cand_model = model_of(&cand);
            if let Some(cand_res) = residuals_checked(&cand_model, pts, &opts.domain) {
                let cand_ss = sum_sq(&cand_res);
                if cand_ss < ss {
                    let prev_norm = ss.sqrt();
                    let improvement = if prev_norm > 0.0 {
                        (prev_norm - cand_ss.sqrt()) / prev_norm
                    } else {
                        0.0
                    };
                    theta = cand;
                    residuals = cand_res;
                    ss = cand_ss;
                    lambda = (lambda / 10.0).max(1e-12);
                    improved = true;
                    if improvement < opts.rel_tol {
                        return Some(model_of(&theta));
                    }
                    break;
                }
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    Some(model_of(&theta))
}
