//! Periodic configurations on a ring of sites and the circular permutation
//! `sigma_{x,y}` that relocates one letter and shifts the segment in between.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::alphabet::{AlphabetOrder, Nucleotide};
use crate::error::Error;
use crate::Result;

/// A length-`n` configuration over the alphabet with periodic boundary;
/// all site arithmetic is modulo `n`, and `n >= 3`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingConfig {
    cells: Vec<Nucleotide>,
}

impl RingConfig {
    pub const MIN_SITES: usize = 3;

    pub fn new(cells: Vec<Nucleotide>) -> Result<RingConfig> {
        if cells.len() < Self::MIN_SITES {
            return Err(Error::RingTooSmall(cells.len()));
        }
        Ok(RingConfig { cells })
    }

    /// Constant configuration, every site holding `letter`.
    pub fn uniform(n: usize, letter: Nucleotide) -> Result<RingConfig> {
        RingConfig::new(vec![letter; n])
    }

    /// Independent uniformly random letters.
    pub fn random<R: Rng>(n: usize, rng: &mut R) -> Result<RingConfig> {
        let cells = (0..n)
            .map(|_| Nucleotide::from_index(rng.random_range(0..4)))
            .collect();
        RingConfig::new(cells)
    }

    /// Parse from a plain string over `{a,t,c,g}`, site 0 first.
    pub fn parse(s: &str) -> Result<RingConfig> {
        let cells = s
            .chars()
            .map(Nucleotide::from_char)
            .collect::<Result<Vec<_>>>()?;
        RingConfig::new(cells)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false // n >= 3 by construction
    }

    #[inline]
    pub fn get(&self, site: usize) -> Nucleotide {
        self.cells[site]
    }

    #[inline]
    pub fn cells(&self) -> &[Nucleotide] {
        &self.cells
    }

    pub(crate) fn cells_mut(&mut self) -> &mut [Nucleotide] {
        &mut self.cells
    }

    /// Reduce a signed site index modulo `n`.
    #[inline]
    pub fn wrap(&self, site: i64) -> usize {
        let n = self.cells.len() as i64;
        site.rem_euclid(n) as usize
    }

    /// The `(left, center, right)` letters around `site`.
    #[inline]
    pub fn window(&self, site: usize) -> (Nucleotide, Nucleotide, Nucleotide) {
        let n = self.cells.len();
        let left = self.cells[(site + n - 1) % n];
        let right = self.cells[(site + 1) % n];
        (left, self.cells[site], right)
    }

    /// Letter multiset as counts in display order `a, t, c, g`.
    pub fn letter_counts(&self) -> [usize; 4] {
        let mut counts = [0usize; 4];
        for &c in &self.cells {
            counts[c.index()] += 1;
        }
        counts
    }
}

impl std::fmt::Display for RingConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.cells {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Site-wise comparison of two configurations under a total order on the
/// alphabet: true iff `rank(eta(x)) <= rank(xi(x))` for every site.
pub fn config_leq(eta: &RingConfig, xi: &RingConfig, order: &AlphabetOrder) -> Result<bool> {
    if eta.len() != xi.len() {
        return Err(Error::SizeMismatch(eta.len(), xi.len()));
    }
    Ok(eta
        .cells
        .iter()
        .zip(&xi.cells)
        .all(|(&a, &b)| order.leq(a, b)))
}

/// Apply the circular permutation moving the letter at `x` to `y`, with the
/// letters strictly between shifted one site toward `x`. Both sites must be
/// in `0..n` and distinct; the permuted segment is the `|y - x| + 1` sites
/// between them (no wrap-around for this site-labeled form).
pub fn apply_sigma(config: &RingConfig, x: usize, y: usize) -> Result<RingConfig> {
    let n = config.len();
    if x >= n {
        return Err(Error::SiteOutOfRange { site: x, n });
    }
    if y >= n {
        return Err(Error::SiteOutOfRange { site: y, n });
    }
    if x == y {
        return Err(Error::InvalidParameter(
            "sigma requires two distinct sites".into(),
        ));
    }
    apply_sigma_displacement(config, x, y as i64 - x as i64)
}

/// Apply the circular permutation parameterized by source site `x` and
/// signed displacement `k`: the letter at `x` moves to `x + k (mod n)` and
/// the `|k|` letters along the displacement direction shift one site back.
/// The permuted arc covers `|k| + 1` sites and must fit on the ring
/// (`|k| <= n - 1`).
pub fn apply_sigma_displacement(config: &RingConfig, x: usize, k: i64) -> Result<RingConfig> {
    let n = config.len();
    if x >= n {
        return Err(Error::SiteOutOfRange { site: x, n });
    }
    if k == 0 {
        return Err(Error::InvalidParameter(
            "sigma requires a nonzero displacement".into(),
        ));
    }
    if k.unsigned_abs() as usize >= n {
        return Err(Error::SegmentTooLong {
            len: k.unsigned_abs() as usize + 1,
            n,
        });
    }
    let mut out = config.clone();
    shift_segment_in_place(out.cells_mut(), x, k);
    Ok(out)
}

/// In-place form of the circular permutation; the caller guarantees
/// `x < n` and `0 < |k| < n`.
pub(crate) fn shift_segment_in_place(cells: &mut [Nucleotide], x: usize, k: i64) {
    let n = cells.len() as i64;
    let x = x as i64;
    let moved = cells[x as usize];
    let step = k.signum();
    let mut z = x;
    for _ in 0..k.abs() {
        let next = (z + step).rem_euclid(n);
        cells[z.rem_euclid(n) as usize] = cells[next as usize];
        z += step;
    }
    cells[(x + k).rem_euclid(n) as usize] = moved;
}

/// An ordered pair of configurations sharing a ring size, tracked under a
/// total order on the alphabet.
#[derive(Debug, Clone)]
pub struct CoupledConfig {
    pub lower: RingConfig,
    pub upper: RingConfig,
    pub order: AlphabetOrder,
}

impl CoupledConfig {
    /// Build a coupled pair; fails if sizes differ.
    pub fn new(
        lower: RingConfig,
        upper: RingConfig,
        order: AlphabetOrder,
    ) -> Result<CoupledConfig> {
        if lower.len() != upper.len() {
            return Err(Error::SizeMismatch(lower.len(), upper.len()));
        }
        Ok(CoupledConfig {
            lower,
            upper,
            order,
        })
    }

    /// True iff `rank(lower(x)) <= rank(upper(x))` at every site.
    pub fn is_ordered(&self) -> bool {
        config_leq(&self.lower, &self.upper, &self.order).expect("sizes match by construction")
    }

    /// Apply the same circular permutation to both halves.
    pub fn apply_sigma_displacement(&self, x: usize, k: i64) -> Result<CoupledConfig> {
        Ok(CoupledConfig {
            lower: apply_sigma_displacement(&self.lower, x, k)?,
            upper: apply_sigma_displacement(&self.upper, x, k)?,
            order: self.order,
        })
    }
}
