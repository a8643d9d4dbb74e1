//! The two-copy basic coupling.
//!
//! At each site, for every target letter the two copies jump together at
//! the smaller of their marginal rates and one-sidedly at the residuals;
//! the residual moves out of an equal pair are exactly the order-breaking
//! transitions, and their rates vanish identically under the
//! attractiveness conditions. Cut-and-paste events apply the same
//! permutation to both copies, which never changes how the values are
//! coupled site by site.
//!
//! The coupled rate rows are only defined on ordered site pairs. Once a
//! site is in violation the copies there evolve by independent marginal
//! rates, still sharing the permutation events, and the run is flagged;
//! violations are counted and reported, never silently corrected.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::alphabet::{AlphabetOrder, Nucleotide, OrderId};
use crate::checker::check_attractiveness;
use crate::error::Error;
use crate::rates::{substitution_rate, RnYprParams};
use crate::ring::{config_leq, shift_segment_in_place, RingConfig};
use crate::Result;

use super::stats::{batch_mean_se, DEFAULT_BATCHES};
use super::sumtree::SumTree;
use super::{FreqSummary, InitialConfig, RateModelSpec, SimSpec};

/// One coupled move at a site: targets for each copy (`None` leaves the
/// copy unchanged) and its rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledTransition {
    pub lower_target: Option<Nucleotide>,
    pub upper_target: Option<Nucleotide>,
    pub rate: f64,
}

type Window = (Nucleotide, Nucleotide, Nucleotide);

#[inline]
fn marginal_rate(params: &RnYprParams, target: Nucleotide, w: Window) -> f64 {
    // a self-substitution is a null move for that copy
    if w.1 == target {
        0.0
    } else {
        substitution_rate(params, target, w.0, w.1, w.2)
    }
}

/// Enumerate the coupled moves at a site in a fixed deterministic order.
/// On an ordered pair this realizes the basic-coupling rate rows: joint
/// moves at the minimum marginal rate and one-sided residuals, including
/// the order-breaking residuals with their (possibly zero) rates. On a
/// violated pair the copies move independently.
fn for_each_transition<F>(
    params: &RnYprParams,
    lower: Window,
    upper: Window,
    ordered: bool,
    mut f: F,
) where
    F: FnMut(CoupledTransition),
{
    for target in Nucleotide::ALL {
        let low_rate = marginal_rate(params, target, lower);
        let up_rate = marginal_rate(params, target, upper);
        if ordered {
            let joint = low_rate.min(up_rate);
            f(CoupledTransition {
                lower_target: Some(target),
                upper_target: Some(target),
                rate: joint,
            });
            f(CoupledTransition {
                lower_target: Some(target),
                upper_target: None,
                rate: low_rate - joint,
            });
            f(CoupledTransition {
                lower_target: None,
                upper_target: Some(target),
                rate: up_rate - joint,
            });
        } else {
            f(CoupledTransition {
                lower_target: Some(target),
                upper_target: None,
                rate: low_rate,
            });
            f(CoupledTransition {
                lower_target: None,
                upper_target: Some(target),
                rate: up_rate,
            });
        }
    }
}

/// The coupled moves at a site as a list, in the engine's deterministic
/// enumeration order; null moves with rate zero are included.
pub fn coupled_transitions(
    params: &RnYprParams,
    lower: Window,
    upper: Window,
    ordered: bool,
) -> Vec<CoupledTransition> {
    let mut out = Vec::with_capacity(12);
    for_each_transition(params, lower, upper, ordered, |t| out.push(t));
    out
}

/// The ten site pairs compatible with an order, by increasing ranks:
/// `(letter(i), letter(j))` for `1 <= i <= j <= 4`.
pub fn ordered_pairs(order: &AlphabetOrder) -> [(Nucleotide, Nucleotide); 10] {
    let mut out = [(Nucleotide::A, Nucleotide::A); 10];
    let mut idx = 0;
    for i in 1..=4u8 {
        for j in i..=4u8 {
            out[idx] = (order.letter(i), order.letter(j));
            idx += 1;
        }
    }
    out
}

/// Instantaneous state of the coupled pair at a sample time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledSample {
    pub t: f64,
    /// Cumulative count of order-breaking substitution events.
    pub viol_count: u64,
    /// Fraction of sites where the copies differ.
    pub discrepancy: f64,
    /// Site-averaged frequency of each `(lower, upper)` letter pair.
    pub pair_freqs: [[f64; 4]; 4],
}

/// Outcome of a coupled run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledStats {
    pub order: OrderId,
    /// First time the two copies became identical, if they did.
    pub coalescence_time: Option<f64>,
    /// Number of substitution events that broke the site order.
    pub order_violations: u64,
    /// Set as soon as any violation occurs.
    pub flagged: bool,
    /// Time-averaged fraction of sites with differing copies.
    pub discrepancy_freq: f64,
    /// Time-averaged `(lower, upper)` pair frequencies.
    pub pair_freqs: [[f64; 4]; 4],
    pub time: f64,
    pub events: u64,
    pub samples: usize,
    pub rows: Vec<CoupledSample>,
    pub batches: usize,
}

impl CoupledStats {
    pub fn pair_freq(&self, lower: Nucleotide, upper: Nucleotide) -> f64 {
        self.pair_freqs[lower.index()][upper.index()]
    }

    /// Time-averaged frequency of the four cross-class pairs (lower copy
    /// in the order's low class, upper copy in its high class).
    pub fn cross_class_freq(&self, order: &AlphabetOrder) -> f64 {
        let mut total = 0.0;
        for i in [1u8, 2] {
            for j in [3u8, 4] {
                total += self.pair_freq(order.letter(i), order.letter(j));
            }
        }
        total
    }

    /// Time-averaged frequency of the two strictly-ordered within-class
    /// pairs (ranks 1-2 and 3-4).
    pub fn within_class_freq(&self, order: &AlphabetOrder) -> f64 {
        self.pair_freq(order.letter(1), order.letter(2))
            + self.pair_freq(order.letter(3), order.letter(4))
    }

    /// Time-averaged marginal letter frequencies of the lower copy.
    pub fn lower_marginals(&self) -> [f64; 4] {
        std::array::from_fn(|i| self.pair_freqs[i].iter().sum())
    }

    /// Time-averaged marginal letter frequencies of the upper copy.
    pub fn upper_marginals(&self) -> [f64; 4] {
        std::array::from_fn(|j| self.pair_freqs.iter().map(|row| row[j]).sum())
    }

    /// Batch-means summary of a derived statistic of the sample rows.
    pub fn summarize<F>(&self, f: F) -> FreqSummary
    where
        F: Fn(&CoupledSample) -> f64,
    {
        let series: Vec<f64> = self.rows.iter().map(f).collect();
        batch_mean_se(&series, self.batches)
    }
}

struct CoupledEngine {
    params: RnYprParams,
    order: AlphabetOrder,
    lower: Vec<Nucleotide>,
    upper: Vec<Nucleotide>,
    tree: SumTree,
    cp_rate: f64,
    kernel: crate::kernel::CutPasteKernel,
    rng: ChaCha8Rng,
    time: f64,
    events: u64,
    violations: u64,
    discrepancy_count: usize,
    pair_counts: [[u64; 4]; 4],
    coalescence_time: Option<f64>,
    // time integrals accumulated after `integrate_start`
    integrate_start: f64,
    pair_integral: [[f64; 4]; 4],
    discrepancy_integral: f64,
    debug_check_interval: Option<u64>,
    max_events: u64,
}

impl CoupledEngine {
    fn new(
        spec: &SimSpec,
        order: AlphabetOrder,
        lower_init: &RingConfig,
        upper_init: &RingConfig,
        integrate_start: f64,
    ) -> Result<CoupledEngine> {
        let params = match &spec.model {
            RateModelSpec::RnYpr(p) => *p,
            RateModelSpec::Generic(_) => {
                return Err(Error::InvalidParameter(
                    "the coupled simulator requires an RN+YpR rate model".into(),
                ))
            }
        };
        params.validate()?;
        if lower_init.len() != spec.ring_n {
            return Err(Error::SizeMismatch(lower_init.len(), spec.ring_n));
        }
        if !config_leq(lower_init, upper_init, &order)? {
            return Err(Error::UnorderedInitial(order.id()));
        }
        let lower = lower_init.cells().to_vec();
        let upper = upper_init.cells().to_vec();
        let n = lower.len();
        let mut pair_counts = [[0u64; 4]; 4];
        let mut discrepancy_count = 0usize;
        for x in 0..n {
            pair_counts[lower[x].index()][upper[x].index()] += 1;
            if lower[x] != upper[x] {
                discrepancy_count += 1;
            }
        }
        let mut eng = CoupledEngine {
            params,
            order,
            tree: SumTree::new(&vec![0.0; n]),
            cp_rate: spec.kernel.ring_rate(n),
            kernel: spec.kernel.clone(),
            rng: spec.rng(),
            time: 0.0,
            events: 0,
            violations: 0,
            discrepancy_count,
            pair_counts,
            coalescence_time: if discrepancy_count == 0 {
                Some(0.0)
            } else {
                None
            },
            integrate_start,
            pair_integral: [[0.0; 4]; 4],
            discrepancy_integral: 0.0,
            debug_check_interval: spec.debug_check_interval,
            max_events: spec.max_events.unwrap_or(u64::MAX),
            lower,
            upper,
        };
        for x in 0..n {
            let rate = eng.site_rate(x);
            eng.tree.set(x, rate);
        }
        Ok(eng)
    }

    fn n(&self) -> usize {
        self.lower.len()
    }

    fn windows(&self, x: usize) -> (Window, Window) {
        let n = self.n();
        let prev = (x + n - 1) % n;
        let next = (x + 1) % n;
        (
            (self.lower[prev], self.lower[x], self.lower[next]),
            (self.upper[prev], self.upper[x], self.upper[next]),
        )
    }

    fn site_rate(&self, x: usize) -> f64 {
        let (lw, uw) = self.windows(x);
        let ordered = self.order.leq(lw.1, uw.1);
        let mut total = 0.0;
        for_each_transition(&self.params, lw, uw, ordered, |t| total += t.rate);
        total
    }

    /// Accumulate the state-constant integrands over `[self.time, to]`.
    fn integrate_to(&mut self, to: f64) {
        let from = self.time.max(self.integrate_start);
        if to > from {
            let dt = to - from;
            let scale = dt / self.n() as f64;
            for (row_i, row) in self.pair_counts.iter().enumerate() {
                for (col_j, &count) in row.iter().enumerate() {
                    self.pair_integral[row_i][col_j] += count as f64 * scale;
                }
            }
            self.discrepancy_integral += self.discrepancy_count as f64 * scale;
        }
    }

    fn sample(&self) -> CoupledSample {
        let n = self.n() as f64;
        let mut pair_freqs = [[0.0; 4]; 4];
        for (i, row) in self.pair_counts.iter().enumerate() {
            for (j, &count) in row.iter().enumerate() {
                pair_freqs[i][j] = count as f64 / n;
            }
        }
        CoupledSample {
            t: self.time,
            viol_count: self.violations,
            discrepancy: self.discrepancy_count as f64 / n,
            pair_freqs,
        }
    }

    fn set_site(&mut self, x: usize, new_lower: Option<Nucleotide>, new_upper: Option<Nucleotide>) {
        let old_l = self.lower[x];
        let old_u = self.upper[x];
        let new_l = new_lower.unwrap_or(old_l);
        let new_u = new_upper.unwrap_or(old_u);
        let was_ordered = self.order.leq(old_l, old_u);
        self.pair_counts[old_l.index()][old_u.index()] -= 1;
        self.pair_counts[new_l.index()][new_u.index()] += 1;
        if (old_l != old_u) != (new_l != new_u) {
            if new_l != new_u {
                self.discrepancy_count += 1;
            } else {
                self.discrepancy_count -= 1;
            }
        }
        self.lower[x] = new_l;
        self.upper[x] = new_u;
        if was_ordered && !self.order.leq(new_l, new_u) {
            self.violations += 1;
        }
        if self.discrepancy_count == 0 && self.coalescence_time.is_none() {
            self.coalescence_time = Some(self.time);
        }
        let n = self.n();
        for site in [(x + n - 1) % n, x, (x + 1) % n] {
            let rate = self.site_rate(site);
            self.tree.set(site, rate);
        }
    }

    fn apply_event(&mut self, total: f64) {
        let u: f64 = self.rng.random::<f64>() * total;
        self.events += 1;
        if u < self.cp_rate {
            let x = self.rng.random_range(0..self.n());
            let k = self.kernel.sample(&mut self.rng);
            shift_segment_in_place(&mut self.lower, x, k);
            shift_segment_in_place(&mut self.upper, x, k);
            // pairs travel together: counts and discrepancies are unchanged
            let n = self.n();
            let step = k.signum();
            let mut sites = Vec::with_capacity(k.unsigned_abs() as usize + 3);
            for j in -1..=(k.abs() + 1) {
                let site = (x as i64 + step * j).rem_euclid(n as i64) as usize;
                if !sites.contains(&site) {
                    sites.push(site);
                }
            }
            for site in sites {
                let rate = self.site_rate(site);
                self.tree.set(site, rate);
            }
        } else {
            let (site, rem) = self.tree.descend(u - self.cp_rate);
            let (lw, uw) = self.windows(site);
            let ordered = self.order.leq(lw.1, uw.1);
            let mut cum = 0.0;
            let mut chosen: Option<CoupledTransition> = None;
            let mut last_positive: Option<CoupledTransition> = None;
            for_each_transition(&self.params, lw, uw, ordered, |t| {
                if chosen.is_some() {
                    return;
                }
                if t.rate > 0.0 {
                    last_positive = Some(t);
                }
                cum += t.rate;
                if rem < cum {
                    chosen = Some(t);
                }
            });
            let t = chosen
                .or(last_positive)
                .expect("site with positive total rate has a positive move");
            self.set_site(site, t.lower_target, t.upper_target);
        }
    }

    fn verify_caches(&self) -> Result<()> {
        let rates: Vec<f64> = (0..self.n()).map(|x| self.site_rate(x)).collect();
        for (x, &rate) in rates.iter().enumerate() {
            if self.tree.get(x).to_bits() != rate.to_bits() {
                return Err(Error::Internal(format!(
                    "coupled site {x} cached rate {} differs from recomputed {rate}",
                    self.tree.get(x)
                )));
            }
        }
        if !self.tree.matches_rebuild(&rates) {
            return Err(Error::Internal(
                "coupled sum tree differs from a from-scratch rebuild".into(),
            ));
        }
        let mut pair_counts = [[0u64; 4]; 4];
        let mut discrepancy = 0usize;
        for x in 0..self.n() {
            pair_counts[self.lower[x].index()][self.upper[x].index()] += 1;
            if self.lower[x] != self.upper[x] {
                discrepancy += 1;
            }
        }
        if pair_counts != self.pair_counts || discrepancy != self.discrepancy_count {
            return Err(Error::Internal("coupled pair counters drifted".into()));
        }
        Ok(())
    }

    fn run(
        &mut self,
        sample_start: f64,
        interval: f64,
        max_samples: Option<usize>,
        time_limit: Option<f64>,
        event_limit: Option<u64>,
    ) -> Result<CoupledStats> {
        let mut rows: Vec<CoupledSample> = Vec::new();
        let mut sample_idx: u64 = 0;
        let next_sample = |idx: u64| sample_start + interval * (idx as f64 + 1.0);
        loop {
            if let Some(limit) = event_limit {
                if self.events >= limit {
                    break;
                }
            }
            if self.events >= self.max_events {
                return Err(Error::EventBudgetExceeded(self.max_events));
            }
            let total = self.tree.total() + self.cp_rate;
            let next_event = if total > 0.0 {
                let u: f64 = self.rng.random();
                self.time + -(1.0 - u).ln() / total
            } else {
                f64::INFINITY
            };

            let flush_until = match time_limit {
                Some(limit) => next_event.min(limit),
                None if next_event.is_finite() => next_event,
                None => self.time,
            };
            while max_samples.is_none_or(|k| rows.len() < k)
                && next_sample(sample_idx) <= flush_until
            {
                let at = next_sample(sample_idx);
                self.integrate_to(at);
                self.time = at;
                rows.push(self.sample());
                sample_idx += 1;
            }

            match time_limit {
                Some(limit) if next_event > limit => {
                    self.integrate_to(limit);
                    self.time = limit;
                    break;
                }
                None if !next_event.is_finite() => break,
                _ => {}
            }
            if let Some(k) = max_samples {
                if rows.len() >= k {
                    let stop = next_event.min(time_limit.unwrap_or(next_event));
                    self.integrate_to(stop);
                    self.time = stop;
                    break;
                }
            }

            self.integrate_to(next_event);
            self.time = next_event;
            self.apply_event(total);

            if let Some(k) = self.debug_check_interval {
                if k > 0 && self.events.is_multiple_of(k) {
                    self.verify_caches()?;
                }
            }
        }

        let span = (self.time - self.integrate_start).max(0.0);
        let scale = if span > 0.0 { 1.0 / span } else { 0.0 };
        let mut pair_freqs = [[0.0; 4]; 4];
        for (i, row) in self.pair_integral.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                pair_freqs[i][j] = v * scale;
            }
        }
        Ok(CoupledStats {
            order: self.order.id(),
            coalescence_time: self.coalescence_time,
            order_violations: self.violations,
            flagged: self.violations > 0,
            discrepancy_freq: self.discrepancy_integral * scale,
            pair_freqs,
            time: self.time,
            events: self.events,
            samples: rows.len(),
            rows,
            batches: DEFAULT_BATCHES,
        })
    }
}

/// Simulate the basic coupling from an ordered pair of initial
/// configurations over the spec's horizon, sampling at the spec's
/// interval. Time averages cover the whole run.
pub fn simulate_coupled(
    spec: &SimSpec,
    order: &AlphabetOrder,
    lower_init: &RingConfig,
    upper_init: &RingConfig,
) -> Result<CoupledStats> {
    spec.validate()?;
    let mut eng = CoupledEngine::new(spec, *order, lower_init, upper_init, 0.0)?;
    match spec.horizon {
        super::Horizon::Time(t) => eng.run(0.0, spec.sample_interval, None, Some(t), None),
        super::Horizon::Events(k) => eng.run(0.0, spec.sample_interval, None, None, Some(k)),
    }
}

/// Long-run coupled statistics from the extreme pair (all-minimal,
/// all-maximal) under the order. Requires the attractiveness conditions to
/// hold for the order; time averages start after the burn-in.
pub fn stationary_coupled_pairs(
    spec: &SimSpec,
    order: &AlphabetOrder,
    burn_in: f64,
    samples: usize,
) -> Result<CoupledStats> {
    let params = match &spec.model {
        RateModelSpec::RnYpr(p) => *p,
        RateModelSpec::Generic(_) => {
            return Err(Error::InvalidParameter(
                "the coupled simulator requires an RN+YpR rate model".into(),
            ))
        }
    };
    if !check_attractiveness(&params, order)? {
        return Err(Error::NotAttractive(order.id()));
    }
    if samples == 0 {
        return Err(Error::InvalidParameter(
            "sample count must be positive".into(),
        ));
    }
    let mut shaped = spec.clone();
    let horizon = burn_in + spec.sample_interval * samples as f64;
    shaped.horizon = super::Horizon::Time(horizon);
    shaped.init = InitialConfig::all(order.minimal());
    shaped.validate()?;
    let lower = RingConfig::uniform(spec.ring_n, order.minimal())?;
    let upper = RingConfig::uniform(spec.ring_n, order.maximal())?;
    let mut eng = CoupledEngine::new(&shaped, *order, &lower, &upper, burn_in)?;
    eng.run(
        burn_in,
        shaped.sample_interval,
        Some(samples),
        Some(horizon),
        None,
    )
}
