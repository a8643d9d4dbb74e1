//! Shared test oracles, independent of the library's implementation path.
#![allow(dead_code)] // each test target uses its own subset

use ipslab::alphabet::Nucleotide;
use ipslab::rates::RnYprParams;
use ipslab::sim::FreqSample;

/// Independent case-by-case statement of the substitution rates: a
/// background rate off the within-class pair, the within-class rate, and
/// the within-class rate plus the interaction term when the context
/// neighbor completes a pyrimidine-purine pair. Kept separate from the
/// library's implementation on purpose.
pub fn oracle_rate(
    p: &RnYprParams,
    target: Nucleotide,
    left: Nucleotide,
    center: Nucleotide,
    right: Nucleotide,
) -> f64 {
    use Nucleotide::{A, C, G, T};
    match target {
        A => match center {
            C | T => p.v_a,
            G => match left {
                C => p.w_a + p.r_a_c,
                T => p.w_a + p.r_a_t,
                A | G => p.w_a,
            },
            A => 0.0,
        },
        T => match center {
            A | G => p.v_t,
            C => match right {
                A => p.w_t + p.r_t_a,
                G => p.w_t + p.r_t_g,
                C | T => p.w_t,
            },
            T => 0.0,
        },
        C => match center {
            A | G => p.v_c,
            T => match right {
                A => p.w_c + p.r_c_a,
                G => p.w_c + p.r_c_g,
                C | T => p.w_c,
            },
            C => 0.0,
        },
        G => match center {
            C | T => p.v_g,
            A => match left {
                C => p.w_g + p.r_g_c,
                T => p.w_g + p.r_g_t,
                A | G => p.w_g,
            },
            G => 0.0,
        },
    }
}

/// Per-batch means of a derived statistic of the samples.
pub fn batch_series<F>(rows: &[FreqSample], batches: usize, f: F) -> Vec<f64>
where
    F: Fn(&FreqSample) -> f64,
{
    let width = (rows.len() / batches).max(1);
    let b = (rows.len() / width).max(1);
    (0..b)
        .map(|k| {
            let block = &rows[k * width..(k + 1) * width];
            block.iter().map(&f).sum::<f64>() / block.len() as f64
        })
        .collect()
}

/// Mean and standard error of a list of (batch) values.
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// `|value - target|` within `k` standard errors, with a tiny absolute
/// floor so exactly-constant series compare exactly.
pub fn within_se(value: f64, target: f64, se: f64, k: f64) -> bool {
    (value - target).abs() <= k * se + 1e-12
}
