//! Frequency samples and batch-means standard errors.

use serde::{Deserialize, Serialize};

/// Default number of batches for batch-means standard errors.
pub const DEFAULT_BATCHES: usize = 30;

/// Instantaneous site-averaged frequencies at one sample time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreqSample {
    pub t: f64,
    /// Letter frequencies in display order `a, t, c, g`.
    pub marginals: [f64; 4],
    /// Adjacent-pair frequencies, `pairs[x][y]` for the pair `(x, y)` read
    /// at sites `(i, i+1)`.
    pub pairs: [[f64; 4]; 4],
}

/// A point estimate with a batch-means standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreqSummary {
    pub mean: f64,
    pub se: f64,
}

/// Batch-means estimate: split the series into `batches` equal blocks,
/// average within blocks, and take the standard error of the block means.
/// Falls back to fewer blocks when the series is short.
pub fn batch_mean_se(series: &[f64], batches: usize) -> FreqSummary {
    let n = series.len();
    if n == 0 {
        return FreqSummary {
            mean: f64::NAN,
            se: f64::NAN,
        };
    }
    let b = batches.clamp(2, n.max(2)).min(n);
    let width = n / b;
    if width == 0 {
        let mean = series.iter().sum::<f64>() / n as f64;
        let var = series.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n.max(2) - 1) as f64;
        return FreqSummary {
            mean,
            se: (var / n as f64).sqrt(),
        };
    }
    let used = b * width;
    let mut block_means = Vec::with_capacity(b);
    for k in 0..b {
        let block = &series[k * width..(k + 1) * width];
        block_means.push(block.iter().sum::<f64>() / width as f64);
    }
    let mean = series[..used].iter().sum::<f64>() / used as f64;
    let block_mean = block_means.iter().sum::<f64>() / b as f64;
    let var = block_means
        .iter()
        .map(|m| (m - block_mean).powi(2))
        .sum::<f64>()
        / (b - 1) as f64;
    FreqSummary {
        mean,
        se: (var / b as f64).sqrt(),
    }
}

/// Batch-means summary of a derived statistic: applies `f` to each sample
/// and batches the transformed series, so correlations propagate into the
/// standard error of the derived quantity.
pub fn batch_mean_se_of<F>(samples: &[FreqSample], batches: usize, f: F) -> FreqSummary
where
    F: Fn(&FreqSample) -> f64,
{
    let series: Vec<f64> = samples.iter().map(f).collect();
    batch_mean_se(&series, batches)
}
