//! Displacement kernels for the cut-and-paste mechanism.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// A finite-support distribution of signed displacements together with the
/// overall intensity `rho`. An event drawn from the kernel relocates the
/// letter at a uniformly chosen site by `k` sites and shifts the traversed
/// arc back by one.
///
/// The kernel is translation invariant by construction and need not be
/// symmetric; finite support makes the first-moment summability condition
/// automatic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutPasteKernel {
    rho: f64,
    weights: Vec<(i64, f64)>,
    #[serde(skip)]
    cumulative: Vec<f64>,
    #[serde(skip)]
    total: f64,
}

impl CutPasteKernel {
    pub fn new(rho: f64, weights: Vec<(i64, f64)>) -> Result<CutPasteKernel> {
        if !rho.is_finite() || rho < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "cut-and-paste intensity rho = {rho} must be finite and non-negative"
            )));
        }
        let mut seen = std::collections::BTreeMap::new();
        for &(k, p) in &weights {
            if k == 0 {
                return Err(Error::InvalidParameter(
                    "kernel displacement 0 is not a permutation".into(),
                ));
            }
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "kernel weight p(0,{k}) = {p} must be finite and non-negative"
                )));
            }
            *seen.entry(k).or_insert(0.0) += p;
        }
        let weights: Vec<(i64, f64)> = seen.into_iter().filter(|&(_, p)| p > 0.0).collect();
        let mut cumulative = Vec::with_capacity(weights.len());
        let mut total = 0.0;
        for &(_, p) in &weights {
            total += p;
            cumulative.push(total);
        }
        Ok(CutPasteKernel {
            rho,
            weights,
            cumulative,
            total,
        })
    }

    /// Symmetric nearest-neighbor kernel: adjacent transpositions with
    /// total mass one.
    pub fn stirring(rho: f64) -> CutPasteKernel {
        CutPasteKernel::new(rho, vec![(-1, 0.5), (1, 0.5)]).expect("static weights are valid")
    }

    /// Rebuild the sampling tables after deserialization.
    pub fn rebuild(self) -> Result<CutPasteKernel> {
        CutPasteKernel::new(self.rho, self.weights)
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn weights(&self) -> &[(i64, f64)] {
        &self.weights
    }

    /// Total kernel mass, `sum_k p(0, k)`.
    pub fn total_weight(&self) -> f64 {
        self.total
    }

    /// Largest `|k|` in the support; 0 for an empty kernel.
    pub fn max_abs_displacement(&self) -> usize {
        self.weights
            .iter()
            .map(|&(k, _)| k.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    /// Event rate per ring of `n` sites, `rho * n * sum_k p(0, k)`.
    pub fn ring_rate(&self, n: usize) -> f64 {
        self.rho * n as f64 * self.total
    }

    /// Draw a displacement proportionally to its weight. The kernel must
    /// have positive total mass.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> i64 {
        debug_assert!(self.total > 0.0);
        let u = rng.random::<f64>() * self.total;
        let idx = self.cumulative.partition_point(|&c| c <= u);
        self.weights[idx.min(self.weights.len() - 1)].0
    }

    /// Reject kernels whose arcs cannot fit on a ring of `n` sites.
    pub fn validate_for_ring(&self, n: usize) -> Result<()> {
        let max = self.max_abs_displacement();
        if max >= n {
            return Err(Error::SegmentTooLong { len: max + 1, n });
        }
        Ok(())
    }
}
