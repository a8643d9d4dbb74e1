//! The dominating branching process and the backward dual-set process.
//!
//! In the branching process each branch dies at the total mark rate and is
//! replaced by `s` new branches with the split probability or by none
//! otherwise; subcriticality of its mean offspring is the engine behind
//! the exponential-ergodicity conditions.
//!
//! The dual-set process evolves the set-valued projection of the
//! generalized dual forward in dual time as a Markov jump process: per
//! site, removal at the aggregated noise rate; per site, target and level,
//! a union with the shifted upward support; and relocation of sites by the
//! inverse permutation under cut-and-paste marks, which never changes the
//! cardinality. Fresh randomness forward in dual time is equal in law to
//! reading the reversed marks for every statistic reported here.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::alphabet::Nucleotide;
use crate::error::Error;
use crate::kernel::CutPasteKernel;
use crate::parallel::run_replicates;
use crate::rates::GenericRateModel;
use crate::Result;

fn bad_horizon(h: f64) -> bool {
    !h.is_finite() || h <= 0.0
}

/// Parameters of the single-type dominating branching process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchingSpec {
    /// Offspring count on a split.
    pub s: u32,
    /// Split rate per branch.
    pub lambda_bar: f64,
    /// Death rate per branch.
    pub lambda_bar_0: f64,
    pub initial: u64,
    pub runs: u64,
    pub horizon: f64,
    /// Population cap; runs hitting it are reported separately and are
    /// never folded into extinct or survived.
    pub cap: u64,
    pub seed: u64,
    /// Number of evenly spaced survival checkpoints.
    pub survival_points: usize,
}

impl BranchingSpec {
    pub fn validate(&self) -> Result<()> {
        if self.s < 1 {
            return Err(Error::InvalidParameter(
                "offspring count must be >= 1".into(),
            ));
        }
        for (name, v) in [
            ("lambda_bar", self.lambda_bar),
            ("lambda_bar_0", self.lambda_bar_0),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} = {v} must be finite and non-negative"
                )));
            }
        }
        if self.lambda_bar + self.lambda_bar_0 <= 0.0 {
            return Err(Error::InvalidParameter(
                "lambda_bar + lambda_bar_0 must be positive".into(),
            ));
        }
        if self.initial == 0 || self.runs == 0 || self.cap == 0 || bad_horizon(self.horizon) {
            return Err(Error::InvalidParameter(
                "initial branches, runs, horizon and cap must be positive".into(),
            ));
        }
        Ok(())
    }

    fn parts(&self) -> Vec<(u32, f64)> {
        vec![(self.s, self.lambda_bar)]
    }
}

/// Parameters of the multi-type variant: a branch dies at the total rate
/// `Theta = lambda_bar_0d + sum_i lambda_bar_i` and is replaced by `s_i`
/// branches with probability `lambda_bar_i / Theta`, or by none.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecomposedBranchingSpec {
    pub parts: Vec<(u32, f64)>,
    pub lambda_bar_0d: f64,
    pub initial: u64,
    pub runs: u64,
    pub horizon: f64,
    pub cap: u64,
    pub seed: u64,
    pub survival_points: usize,
}

impl DecomposedBranchingSpec {
    pub fn validate(&self) -> Result<()> {
        if self.parts.is_empty() {
            return Err(Error::InvalidParameter(
                "at least one part is required".into(),
            ));
        }
        for &(s, lb) in &self.parts {
            if s < 1 || !lb.is_finite() || lb < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "part (s = {s}, lambda_bar = {lb}) is invalid"
                )));
            }
        }
        let theta = self.lambda_bar_0d + self.parts.iter().map(|p| p.1).sum::<f64>();
        if theta.is_nan() || theta <= 0.0 {
            return Err(Error::InvalidParameter(
                "total branch rate must be positive".into(),
            ));
        }
        if self.initial == 0 || self.runs == 0 || self.cap == 0 || bad_horizon(self.horizon) {
            return Err(Error::InvalidParameter(
                "initial branches, runs, horizon and cap must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Mean offspring per branching event, `s * lambda_bar / (lambda_bar +
/// lambda_bar_0)`; the process is subcritical iff this is below one.
pub fn mean_offspring(spec: &BranchingSpec) -> Result<f64> {
    spec.validate()?;
    Ok(spec.s as f64 * spec.lambda_bar / (spec.lambda_bar + spec.lambda_bar_0))
}

/// Decomposed mean offspring, `sum_i s_i lambda_bar_i / Theta`.
pub fn mean_offspring_decomposed(spec: &DecomposedBranchingSpec) -> Result<f64> {
    spec.validate()?;
    let theta = spec.lambda_bar_0d + spec.parts.iter().map(|p| p.1).sum::<f64>();
    Ok(spec.parts.iter().map(|&(s, lb)| s as f64 * lb).sum::<f64>() / theta)
}

fn extinction_fixed_point_parts(parts: &[(u32, f64)], death: f64) -> f64 {
    let theta = death + parts.iter().map(|p| p.1).sum::<f64>();
    let mean: f64 = parts.iter().map(|&(s, lb)| s as f64 * lb).sum::<f64>() / theta;
    if mean <= 1.0 {
        return 1.0;
    }
    // monotone iteration q <- G(q) from 0 converges to the smallest root
    let g = |q: f64| {
        (death
            + parts
                .iter()
                .map(|&(s, lb)| lb * q.powi(s as i32))
                .sum::<f64>())
            / theta
    };
    let mut q = 0.0;
    for _ in 0..10_000 {
        let next = g(q);
        if (next - q).abs() <= 1e-12 {
            return next;
        }
        q = next;
    }
    q
}

/// Extinction probability: the smallest fixed point in `[0, 1]` of the
/// offspring generating function, found by monotone iteration from zero to
/// tolerance `1e-12`; exactly one when the mean offspring is at most one.
pub fn extinction_fixed_point(spec: &BranchingSpec) -> Result<f64> {
    spec.validate()?;
    Ok(extinction_fixed_point_parts(
        &spec.parts(),
        spec.lambda_bar_0,
    ))
}

/// Decomposed variant of [`extinction_fixed_point`].
pub fn extinction_fixed_point_decomposed(spec: &DecomposedBranchingSpec) -> Result<f64> {
    spec.validate()?;
    Ok(extinction_fixed_point_parts(
        &spec.parts,
        spec.lambda_bar_0d,
    ))
}

/// One point of a survival curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurvivalPoint {
    pub t: f64,
    pub fraction_alive: f64,
    pub se: f64,
}

/// Monte Carlo outcome of a branching run ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchingOutcome {
    /// Fraction of runs whose population hit zero before the horizon.
    pub extinct_fraction: f64,
    /// Fraction of runs that reached the population cap.
    pub capped_fraction: f64,
    /// Fraction still alive and uncapped at the horizon.
    pub unresolved_fraction: f64,
    /// Mean extinction time over the extinct runs (NaN if none).
    pub mean_time_to_extinction: f64,
    pub survival: Vec<SurvivalPoint>,
    /// Mean population at the checkpoint times, with standard errors
    /// (capped runs keep their capped population).
    pub mean_population: Vec<SurvivalPoint>,
    pub runs: u64,
}

#[allow(clippy::too_many_arguments)]
fn simulate_branching_parts(
    parts: &[(u32, f64)],
    death: f64,
    initial: u64,
    runs: u64,
    horizon: f64,
    cap: u64,
    seed: u64,
    survival_points: usize,
) -> BranchingOutcome {
    let theta = death + parts.iter().map(|p| p.1).sum::<f64>();
    let points = survival_points.max(1);
    let checkpoints: Vec<f64> = (1..=points)
        .map(|i| horizon * i as f64 / points as f64)
        .collect();
    // cumulative split weights for the event draw
    let mut cum = Vec::with_capacity(parts.len());
    let mut acc = 0.0;
    for &(_, lb) in parts {
        acc += lb;
        cum.push(acc);
    }

    struct RunResult {
        extinct_at: Option<f64>,
        capped: bool,
        population_at: Vec<u64>,
    }

    let results: Vec<RunResult> = run_replicates(runs, |replicate| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(replicate);
        let mut z = initial;
        let mut t = 0.0f64;
        let mut extinct_at = None;
        let mut capped = false;
        let mut population_at = Vec::with_capacity(checkpoints.len());
        let mut next_cp = 0usize;
        loop {
            let stalled = z == 0 || z >= cap;
            let t_next = if stalled {
                f64::INFINITY
            } else {
                let u: f64 = rng.random();
                t - (1.0f64 - u).ln() / (z as f64 * theta)
            };
            while next_cp < checkpoints.len() && checkpoints[next_cp] <= t_next {
                population_at.push(z);
                next_cp += 1;
            }
            if next_cp >= checkpoints.len() && stalled {
                break;
            }
            if t_next > horizon {
                break;
            }
            t = t_next;
            let u: f64 = rng.random::<f64>() * theta;
            if u < acc {
                let idx = cum.partition_point(|&c| c <= u).min(parts.len() - 1);
                z += (parts[idx].0 - 1) as u64;
                if z >= cap {
                    capped = true;
                }
            } else {
                z -= 1;
                if z == 0 {
                    extinct_at = Some(t);
                }
            }
        }
        while population_at.len() < checkpoints.len() {
            population_at.push(z);
        }
        RunResult {
            extinct_at,
            capped,
            population_at,
        }
    });

    let runs_f = runs as f64;
    let extinct: Vec<f64> = results.iter().filter_map(|r| r.extinct_at).collect();
    let extinct_fraction = extinct.len() as f64 / runs_f;
    let capped_fraction = results.iter().filter(|r| r.capped).count() as f64 / runs_f;
    let unresolved_fraction = 1.0 - extinct_fraction - capped_fraction;
    let mean_time_to_extinction = if extinct.is_empty() {
        f64::NAN
    } else {
        extinct.iter().sum::<f64>() / extinct.len() as f64
    };
    let survival = checkpoints
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let alive = results.iter().filter(|r| r.population_at[i] > 0).count() as f64 / runs_f;
            SurvivalPoint {
                t,
                fraction_alive: alive,
                se: (alive * (1.0 - alive) / runs_f).sqrt(),
            }
        })
        .collect();
    let mean_population = checkpoints
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let mean = results
                .iter()
                .map(|r| r.population_at[i] as f64)
                .sum::<f64>()
                / runs_f;
            let var = results
                .iter()
                .map(|r| (r.population_at[i] as f64 - mean).powi(2))
                .sum::<f64>()
                / (runs_f - 1.0).max(1.0);
            SurvivalPoint {
                t,
                fraction_alive: mean,
                se: (var / runs_f).sqrt(),
            }
        })
        .collect();
    BranchingOutcome {
        extinct_fraction,
        capped_fraction,
        unresolved_fraction,
        mean_time_to_extinction,
        survival,
        mean_population,
        runs,
    }
}

/// Monte Carlo branching ensemble with per-branch exponential clocks
/// (simulated through the equivalent population-level rates).
pub fn simulate_branching(spec: &BranchingSpec) -> Result<BranchingOutcome> {
    spec.validate()?;
    Ok(simulate_branching_parts(
        &spec.parts(),
        spec.lambda_bar_0,
        spec.initial,
        spec.runs,
        spec.horizon,
        spec.cap,
        spec.seed,
        spec.survival_points,
    ))
}

/// Decomposed variant of [`simulate_branching`].
pub fn simulate_branching_decomposed(spec: &DecomposedBranchingSpec) -> Result<BranchingOutcome> {
    spec.validate()?;
    Ok(simulate_branching_parts(
        &spec.parts,
        spec.lambda_bar_0d,
        spec.initial,
        spec.runs,
        spec.horizon,
        spec.cap,
        spec.seed,
        spec.survival_points,
    ))
}

// ---------------------------------------------------------------------------
// Dual-set process
// ---------------------------------------------------------------------------

/// Specification of a dual-set ensemble on the ring.
#[derive(Debug, Clone)]
pub struct DualSetSpec {
    pub model: GenericRateModel,
    pub kernel: CutPasteKernel,
    pub ring_n: usize,
    pub initial_set: Vec<usize>,
    pub horizon: f64,
    pub runs: u64,
    pub seed: u64,
    /// Checkpoint times; must be increasing and within the horizon.
    pub checkpoints: Vec<f64>,
}

impl DualSetSpec {
    pub fn validate(&self) -> Result<()> {
        if self.ring_n < crate::ring::RingConfig::MIN_SITES {
            return Err(Error::RingTooSmall(self.ring_n));
        }
        self.kernel.validate_for_ring(self.ring_n)?;
        if self.initial_set.is_empty() {
            return Err(Error::InvalidParameter(
                "initial set must be nonempty".into(),
            ));
        }
        for &x in &self.initial_set {
            if x >= self.ring_n {
                return Err(Error::SiteOutOfRange {
                    site: x,
                    n: self.ring_n,
                });
            }
        }
        if self.runs == 0 || bad_horizon(self.horizon) {
            return Err(Error::InvalidParameter(
                "runs and horizon must be positive".into(),
            ));
        }
        if self.checkpoints.is_empty()
            || self.checkpoints.windows(2).any(|w| w[0] >= w[1])
            || *self.checkpoints.last().unwrap() > self.horizon
        {
            return Err(Error::InvalidParameter(
                "checkpoints must be increasing and within the horizon".into(),
            ));
        }
        Ok(())
    }
}

/// Dual-set ensemble outcome at the checkpoint times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualSetOutcome {
    /// `(t, fraction of runs with an empty set by t, se)`.
    pub empty_fraction_by_time: Vec<SurvivalPoint>,
    /// `(t, fraction alive, se)`, the complement of the above.
    pub survival_curve: Vec<SurvivalPoint>,
    /// `(t, mean cardinality, se)`.
    pub mean_cardinality: Vec<SurvivalPoint>,
    pub runs: u64,
}

/// Site relocation under the inverse of the displacement-parameterized
/// permutation: the head site `x + k` returns to `x` and the traversed arc
/// moves one site along the displacement direction.
fn sigma_inverse_site(n: usize, x: usize, k: i64, site: usize) -> usize {
    let n_i = n as i64;
    let x_i = x as i64;
    let s = site as i64;
    if k > 0 {
        let offset = (s - x_i).rem_euclid(n_i);
        if offset == k {
            x
        } else if offset < k {
            ((s + 1).rem_euclid(n_i)) as usize
        } else {
            site
        }
    } else {
        let offset = (x_i - s).rem_euclid(n_i);
        if offset == -k {
            x
        } else if offset < -k {
            ((s - 1).rem_euclid(n_i)) as usize
        } else {
            site
        }
    }
}

/// Simulate the set-valued dual forward in dual time and report emptiness
/// and cardinality statistics over the replicate ensemble.
pub fn simulate_dual_set(spec: &DualSetSpec) -> Result<DualSetOutcome> {
    spec.validate()?;
    let n = spec.ring_n;
    let death_rate = spec.model.total_base_rate();
    // flattened growth moves: (rate, offsets of the upward support union)
    let mut growth: Vec<(f64, Vec<i64>)> = Vec::new();
    for target in Nucleotide::ALL {
        growth.extend(spec.model.growth_levels(target));
    }
    growth.retain(|(rate, _)| *rate > 0.0);
    let growth_total: f64 = growth.iter().map(|g| g.0).sum();
    let mut growth_cum = Vec::with_capacity(growth.len());
    let mut acc = 0.0;
    for g in &growth {
        acc += g.0;
        growth_cum.push(acc);
    }
    let site_rate = death_rate + growth_total;
    let cp_rate = spec.kernel.ring_rate(n);

    struct RunResult {
        empty_at: Vec<bool>,
        card_at: Vec<u64>,
    }

    let results: Vec<RunResult> = run_replicates(spec.runs, |replicate| {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(replicate);
        // sorted vector: deterministic sampling and cheap membership
        let mut set: Vec<usize> = {
            let mut s = spec.initial_set.clone();
            s.sort_unstable();
            s.dedup();
            s
        };
        let mut t = 0.0f64;
        let mut empty_at = Vec::with_capacity(spec.checkpoints.len());
        let mut card_at = Vec::with_capacity(spec.checkpoints.len());
        let mut next_cp = 0usize;
        loop {
            let total = set.len() as f64 * site_rate + cp_rate;
            let t_next = if set.is_empty() || total <= 0.0 {
                f64::INFINITY
            } else {
                let u: f64 = rng.random();
                t - (1.0f64 - u).ln() / total
            };
            while next_cp < spec.checkpoints.len() && spec.checkpoints[next_cp] <= t_next {
                empty_at.push(set.is_empty());
                card_at.push(set.len() as u64);
                next_cp += 1;
            }
            if next_cp >= spec.checkpoints.len() || t_next > spec.horizon {
                break;
            }
            t = t_next;
            let u: f64 = rng.random::<f64>() * total;
            if u < cp_rate {
                // relocate the sites in the permuted arc
                let x = rng.random_range(0..n);
                let k = spec.kernel.sample(&mut rng);
                for site in set.iter_mut() {
                    *site = sigma_inverse_site(n, x, k, *site);
                }
                set.sort_unstable();
            } else {
                let idx = rng.random_range(0..set.len());
                let x = set[idx];
                let v: f64 = rng.random::<f64>() * site_rate;
                if v < death_rate {
                    set.remove(idx);
                } else {
                    let g = growth_cum.partition_point(|&c| c <= v - death_rate);
                    let offsets = &growth[g.min(growth.len() - 1)].1;
                    for &o in offsets {
                        let site = (x as i64 + o).rem_euclid(n as i64) as usize;
                        if let Err(pos) = set.binary_search(&site) {
                            set.insert(pos, site);
                        }
                    }
                }
            }
        }
        RunResult { empty_at, card_at }
    });

    let runs_f = spec.runs as f64;
    let empty_fraction_by_time = spec
        .checkpoints
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let p = results.iter().filter(|r| r.empty_at[i]).count() as f64 / runs_f;
            SurvivalPoint {
                t,
                fraction_alive: p,
                se: (p * (1.0 - p) / runs_f).sqrt(),
            }
        })
        .collect::<Vec<_>>();
    let survival_curve = empty_fraction_by_time
        .iter()
        .map(|p| SurvivalPoint {
            t: p.t,
            fraction_alive: 1.0 - p.fraction_alive,
            se: p.se,
        })
        .collect();
    let mean_cardinality = spec
        .checkpoints
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let mean = results.iter().map(|r| r.card_at[i] as f64).sum::<f64>() / runs_f;
            let var = results
                .iter()
                .map(|r| (r.card_at[i] as f64 - mean).powi(2))
                .sum::<f64>()
                / (runs_f - 1.0).max(1.0);
            SurvivalPoint {
                t,
                fraction_alive: mean,
                se: (var / runs_f).sqrt(),
            }
        })
        .collect();
    Ok(DualSetOutcome {
        empty_fraction_by_time,
        survival_curve,
        mean_cardinality,
        runs: spec.runs,
    })
}
