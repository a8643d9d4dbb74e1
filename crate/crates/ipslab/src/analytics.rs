//! Closed-form stationary first moments, residual checks of the moment
//! linear system against measured frequencies, and the independent-case
//! product-measure oracle.
//!
//! The interaction terms `r_y` and `r_r` depend on the unknown adjacent
//! pair correlations; this module never pretends to produce them in closed
//! form. They enter either as user inputs or as plug-in estimates from
//! measured dinucleotide frequencies.

use serde::{Deserialize, Serialize};

use crate::alphabet::Nucleotide;
use crate::error::Error;
use crate::rates::{QMatrix, RnYprParams};
use crate::sim::{FreqSample, TrajectoryStats};
use crate::Result;

/// Stationary single-site marginals of an RN+YpR model given the signed
/// interaction terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSolution {
    pub mu_a: f64,
    pub mu_t: f64,
    pub mu_c: f64,
    pub mu_g: f64,
    pub mu_y: f64,
    pub mu_r: f64,
    pub r_y: f64,
    pub r_r: f64,
}

impl MomentSolution {
    pub fn marginal(&self, letter: Nucleotide) -> f64 {
        match letter {
            Nucleotide::A => self.mu_a,
            Nucleotide::T => self.mu_t,
            Nucleotide::C => self.mu_c,
            Nucleotide::G => self.mu_g,
        }
    }
}

/// Class-summed rates: `v_y = v_t + v_c`, `v_r = v_a + v_g` and likewise
/// for the `w` rates.
fn class_sums(params: &RnYprParams) -> (f64, f64, f64, f64) {
    let v_y = params.v_t + params.v_c;
    let v_r = params.v_a + params.v_g;
    let w_y = params.w_t + params.w_c;
    let w_r = params.w_a + params.w_g;
    (v_y, v_r, w_y, w_r)
}

/// Solve the first-moment system: the class masses are
/// `mu_r = v_r / (v_y + v_r)` and `mu_y = v_y / (v_y + v_r)`, and each
/// marginal follows from its balance equation with the given interaction
/// terms.
pub fn solve_first_moments(params: &RnYprParams, r_y: f64, r_r: f64) -> Result<MomentSolution> {
    let (v_y, v_r, w_y, w_r) = class_sums(params);
    if v_y + v_r <= 0.0 {
        return Err(Error::InvalidParameter(
            "v_y + v_r must be positive to pin the class masses".into(),
        ));
    }
    if w_r + v_y <= 0.0 || w_y + v_r <= 0.0 {
        return Err(Error::InvalidParameter(
            "zero denominator in the marginal equations".into(),
        ));
    }
    let mu_r = v_r / (v_y + v_r);
    let mu_y = v_y / (v_y + v_r);
    Ok(MomentSolution {
        mu_a: (params.v_a * mu_y + params.w_a * mu_r - r_r) / (w_r + v_y),
        mu_g: (params.v_g * mu_y + params.w_g * mu_r + r_r) / (w_r + v_y),
        mu_c: (params.v_c * mu_r + params.w_c * mu_y - r_y) / (w_y + v_r),
        mu_t: (params.v_t * mu_r + params.w_t * mu_y + r_y) / (w_y + v_r),
        mu_y,
        mu_r,
        r_y,
        r_r,
    })
}

/// Plug-in interaction terms from adjacent-pair frequencies
/// (`pairs[x][y]` is the frequency of letter `x` followed by `y`):
///
/// * `r_y = sum_{b in R} r_t^b pair(c, b) - sum_{b in R} r_c^b pair(t, b)`
/// * `r_r = sum_{d in Y} r_g^d pair(d, a) - sum_{d in Y} r_a^d pair(d, g)`
pub fn interaction_terms(params: &RnYprParams, pairs: &[[f64; 4]; 4]) -> (f64, f64) {
    let pair = |x: Nucleotide, y: Nucleotide| pairs[x.index()][y.index()];
    let mut r_y = 0.0;
    for b in Nucleotide::PURINES {
        r_y += params.ypr_rate(Nucleotide::T, b).expect("valid slot") * pair(Nucleotide::C, b);
        r_y -= params.ypr_rate(Nucleotide::C, b).expect("valid slot") * pair(Nucleotide::T, b);
    }
    let mut r_r = 0.0;
    for d in Nucleotide::PYRIMIDINES {
        r_r += params.ypr_rate(Nucleotide::G, d).expect("valid slot") * pair(d, Nucleotide::A);
        r_r -= params.ypr_rate(Nucleotide::A, d).expect("valid slot") * pair(d, Nucleotide::G);
    }
    (r_y, r_r)
}

/// One equation of the stationary moment system evaluated on measured
/// frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquationResidual {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

/// The seven equations evaluated on a set of marginal and adjacent-pair
/// frequencies; residuals are `lhs - rhs`.
pub fn moment_residuals_from_freqs(
    params: &RnYprParams,
    marginals: &[f64; 4],
    pairs: &[[f64; 4]; 4],
) -> [EquationResidual; 7] {
    let (v_y, v_r, w_y, w_r) = class_sums(params);
    let _ = (v_y, v_r, w_y, w_r);
    let (r_y, r_r) = interaction_terms(params, pairs);
    let mu = |x: Nucleotide| marginals[x.index()];
    let mu_a = mu(Nucleotide::A);
    let mu_t = mu(Nucleotide::T);
    let mu_c = mu(Nucleotide::C);
    let mu_g = mu(Nucleotide::G);
    let mu_y = mu_c + mu_t;
    let mu_r = mu_a + mu_g;
    let (v_y, v_r, _, _) = class_sums(params);

    let eq = |name: &str, lhs: f64, rhs: f64| EquationResidual {
        name: name.to_string(),
        lhs,
        rhs,
        residual: lhs - rhs,
    };
    [
        eq(
            "balance_a",
            -(v_y + params.w_g) * mu_a + params.w_a * mu_g + params.v_a * mu_y,
            r_r,
        ),
        eq(
            "balance_g",
            params.w_g * mu_a - (v_y + params.w_a) * mu_g + params.v_g * mu_y,
            -r_r,
        ),
        eq(
            "balance_c",
            -(v_r + params.w_t) * mu_c + params.w_c * mu_t + params.v_c * mu_r,
            r_y,
        ),
        eq(
            "balance_t",
            params.w_t * mu_c - (v_r + params.w_c) * mu_t + params.v_t * mu_r,
            -r_y,
        ),
        eq("class_r", mu_a + mu_g, mu_r),
        eq("class_y", mu_c + mu_t, mu_y),
        eq("normalization", mu_a + mu_g + mu_c + mu_t, 1.0),
    ]
}

/// Residuals of the moment system on a measured trajectory.
pub fn moment_residuals(
    params: &RnYprParams,
    measured: &TrajectoryStats,
) -> Result<[EquationResidual; 7]> {
    if measured.samples == 0 {
        return Err(Error::InvalidParameter(
            "measured statistics contain no samples".into(),
        ));
    }
    let marginals = std::array::from_fn(|i| measured.marginals[i].mean);
    let pairs = std::array::from_fn(|x| std::array::from_fn(|y| measured.pairs[x][y].mean));
    Ok(moment_residuals_from_freqs(params, &marginals, &pairs))
}

/// Residuals with batch-means standard errors: each equation is a linear
/// functional of the per-sample frequencies, so the residual series is
/// batched like any other derived statistic.
pub fn moment_residuals_with_se(
    params: &RnYprParams,
    measured: &TrajectoryStats,
) -> Result<Vec<(String, f64, f64)>> {
    let residuals = moment_residuals(params, measured)?;
    let per_sample = |sample: &FreqSample, idx: usize| {
        moment_residuals_from_freqs(params, &sample.marginals, &sample.pairs)[idx].residual
    };
    Ok(residuals
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let summary = measured.summarize(|s| per_sample(s, i));
            (r.name.clone(), summary.mean, summary.se)
        })
        .collect())
}

/// Invariant law of an irreducible 4x4 generator: solves `pi Q = 0`,
/// `sum pi = 1` by a dense solve with partial pivoting.
pub fn independent_invariant(q: &QMatrix) -> Result<[f64; 4]> {
    // transpose Q, replace the last equation by normalization
    let mut a = [[0.0f64; 4]; 4];
    let mut b = [0.0f64; 4];
    let entries = q.entries();
    for i in 0..3 {
        for j in 0..4 {
            a[i][j] = entries[j][i];
        }
    }
    a[3] = [1.0; 4];
    b[3] = 1.0;
    let pi = solve4(a, b)?;
    if pi.iter().any(|&p| !(p.is_finite() && p >= -1e-9)) {
        return Err(Error::ReducibleGenerator);
    }
    Ok(pi)
}

/// Gaussian elimination with partial pivoting on a 4x4 system.
#[allow(clippy::needless_range_loop)]
fn solve4(mut a: [[f64; 4]; 4], mut b: [f64; 4]) -> Result<[f64; 4]> {
    for col in 0..4 {
        let pivot = (col..4)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[pivot][col].abs() < 1e-12 {
            return Err(Error::ReducibleGenerator);
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..4 {
            let factor = a[row][col] / a[col][col];
            for k in col..4 {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = [0.0f64; 4];
    for row in (0..4).rev() {
        let mut sum = b[row];
        for k in row + 1..4 {
            sum -= a[row][k] * x[k];
        }
        x[row] = sum / a[row][row];
    }
    Ok(x)
}
