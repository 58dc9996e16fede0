//! Small dense least-squares solver shared by the surrogate fitters.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative singular-value cutoff below which a direction counts as
/// numerically null. Polynomial design matrices on channel-width grids are
/// ill-conditioned but nowhere near this once columns are scaled.
const RANK_TOL: f64 = 1e-10;

pub(crate) struct LeastSquares {
    pub coeffs: Vec<f64>,
    pub rank: usize,
}

/// Solve `min ||A x - y||` for a tall dense system via column scaling and
/// SVD. `term_names` label the columns of `A` for rank-deficiency messages.
///
/// When the system is rank deficient and `allow_consistent_deficiency` is
/// set, the minimum-norm solution is returned as long as it still
/// reproduces `y` (the deficiency only means the coefficients are not
/// unique, not that the data are unexplainable). Otherwise a rank error
/// naming the dependent directions is raised.
pub(crate) fn solve_least_squares(
    rows: &[Vec<f64>],
    rhs: &[f64],
    term_names: &[&str],
    allow_consistent_deficiency: bool,
) -> Result<LeastSquares> {
    let n = rows.len();
    let p = term_names.len();
    assert!(n >= p, "caller must enforce the minimum sample count");
    assert_eq!(rhs.len(), n);

    let mut a = DMatrix::<f64>::zeros(n, p);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row.len(), p);
        for (j, &v) in row.iter().enumerate() {
            a[(i, j)] = v;
        }
    }
    let y = DVector::<f64>::from_column_slice(rhs);

    // Scale columns to unit norm so the rank test and the SVD cutoff are
    // meaningful across basis terms of very different magnitude (1 vs b^2).
    let mut scale = vec![1.0f64; p];
    for j in 0..p {
        let norm = a.column(j).norm();
        if norm > 0.0 {
            scale[j] = 1.0 / norm;
            for i in 0..n {
                a[(i, j)] *= scale[j];
            }
        }
    }

    let svd = a.clone().svd(true, true);
    let max_sv = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    if max_sv == 0.0 {
        return Err(Error::RankDeficient {
            detail: "design matrix is identically zero".into(),
        });
    }
    let cutoff = RANK_TOL * max_sv;
    let rank = svd.singular_values.iter().filter(|&&s| s > cutoff).count();

    let solution = svd.solve(&y, cutoff).map_err(|e| Error::RankDeficient {
        detail: e.to_string(),
    })?;

    let residual_norm = (&a * &solution - &y).norm();
    let relative_residual = residual_norm / (1.0 + y.norm());

    if rank < p {
        let consistent = relative_residual < 1e-8;
        if !(allow_consistent_deficiency && consistent) {
            return Err(Error::RankDeficient {
                detail: describe_null_space(&svd, cutoff, term_names, rank, p),
            });
        }
    }

    let coeffs = (0..p).map(|j| solution[j] * scale[j]).collect();
    Ok(LeastSquares { coeffs, rank })
}

fn describe_null_space(
    svd: &nalgebra::SVD<f64, nalgebra::Dyn, nalgebra::Dyn>,
    cutoff: f64,
    term_names: &[&str],
    rank: usize,
    p: usize,
) -> String {
    let mut directions = Vec::new();
    if let Some(v_t) = &svd.v_t {
        for (k, &s) in svd.singular_values.iter().enumerate() {
            if s > cutoff {
                continue;
            }
            let row = v_t.row(k);
            let max_c = row.iter().cloned().map(f64::abs).fold(0.0f64, f64::max);
            let involved: Vec<&str> = term_names
                .iter()
                .enumerate()
                .filter(|(j, _)| row[*j].abs() > 0.3 * max_c)
                .map(|(_, name)| *name)
                .collect();
            directions.push(format!("[{}]", involved.join(", ")));
        }
    }
    format!(
        "rank {rank} of {p}; dependent directions involve {}",
        if directions.is_empty() {
            "(unavailable)".to_string()
        } else {
            directions.join("; ")
        }
    )
}
