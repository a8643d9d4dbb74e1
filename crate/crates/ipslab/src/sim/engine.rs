//! The single-copy event loop.
//!
//! Per-site total substitution rates live in a sum tree; the aggregate
//! cut-and-paste rate is constant. Each event draws an exponential waiting
//! time from the total rate, picks cut-and-paste versus substitution
//! proportionally, locates the substitution site through the tree, and
//! recomputes the cached rates of the affected neighborhood (the flipped
//! site or permuted arc, plus one site on each side).

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::alphabet::Nucleotide;
use crate::error::Error;
use crate::ring::{shift_segment_in_place, RingConfig};
use crate::Result;

use super::stats::FreqSample;
use super::sumtree::SumTree;
use super::{RateModelSpec, SimSpec, TrajectoryStats};

pub(super) struct Engine {
    model: RateModelSpec,
    cells: Vec<Nucleotide>,
    tree: SumTree,
    /// Aggregate cut-and-paste rate, `rho * n * total weight`.
    cp_rate: f64,
    kernel: crate::kernel::CutPasteKernel,
    rng: ChaCha8Rng,
    time: f64,
    substitution_events: [u64; 4],
    cut_paste_events: u64,
    max_events: u64,
    debug_check_interval: Option<u64>,
    scratch_sites: Vec<usize>,
}

impl Engine {
    pub(super) fn new(spec: &SimSpec) -> Result<Engine> {
        let mut rng = spec.rng();
        let init = spec.init.build(spec.ring_n, &mut rng)?;
        let cells = init.cells().to_vec();
        let model = spec.model.clone();
        let rates: Vec<f64> = (0..cells.len())
            .map(|x| site_rate(&model, &cells, x))
            .collect();
        Ok(Engine {
            tree: SumTree::new(&rates),
            cp_rate: spec.kernel.ring_rate(spec.ring_n),
            kernel: spec.kernel.clone(),
            model,
            cells,
            rng,
            time: 0.0,
            substitution_events: [0; 4],
            cut_paste_events: 0,
            max_events: spec.max_events.unwrap_or(u64::MAX),
            debug_check_interval: spec.debug_check_interval,
            scratch_sites: Vec::new(),
        })
    }

    fn n(&self) -> usize {
        self.cells.len()
    }

    fn events_total(&self) -> u64 {
        self.substitution_events.iter().sum::<u64>() + self.cut_paste_events
    }

    fn sample(&self) -> FreqSample {
        let n = self.n();
        let mut marginals = [0.0f64; 4];
        let mut pairs = [[0.0f64; 4]; 4];
        for (x, &c) in self.cells.iter().enumerate() {
            marginals[c.index()] += 1.0;
            let right = self.cells[(x + 1) % n];
            pairs[c.index()][right.index()] += 1.0;
        }
        let scale = 1.0 / n as f64;
        for m in &mut marginals {
            *m *= scale;
        }
        for row in &mut pairs {
            for p in row.iter_mut() {
                *p *= scale;
            }
        }
        FreqSample {
            t: self.time,
            marginals,
            pairs,
        }
    }

    /// Advance the process, collecting samples at `start + i * interval`
    /// for `i = 1, 2, ...`, until the time limit, the event limit, or the
    /// requested sample count is reached.
    pub(super) fn run(
        &mut self,
        sample_start: f64,
        interval: f64,
        max_samples: Option<usize>,
        time_limit: Option<f64>,
        event_limit: Option<u64>,
    ) -> Result<TrajectoryStats> {
        let mut rows: Vec<FreqSample> = Vec::new();
        // sample times are computed multiplicatively so the k-th sample
        // lands bitwise on `start + interval * k`
        let mut sample_idx: u64 = 0;
        let next_sample = |idx: u64| sample_start + interval * (idx as f64 + 1.0);
        let want_more = |rows: &Vec<FreqSample>| match max_samples {
            Some(k) => rows.len() < k,
            None => true,
        };

        loop {
            if let Some(limit) = event_limit {
                if self.events_total() >= limit {
                    break;
                }
            }
            if self.events_total() >= self.max_events {
                return Err(Error::EventBudgetExceeded(self.max_events));
            }
            let total = self.tree.total() + self.cp_rate;
            let next_event = if total > 0.0 {
                let u: f64 = self.rng.random();
                self.time + -(1.0 - u).ln() / total
            } else {
                f64::INFINITY
            };

            // flush samples that fall before the next event; without a
            // time limit samples only make sense between events
            let flush_until = match time_limit {
                Some(limit) => next_event.min(limit),
                None if next_event.is_finite() => next_event,
                None => self.time,
            };
            while want_more(&rows) && next_sample(sample_idx) <= flush_until {
                self.time = next_sample(sample_idx);
                rows.push(self.sample());
                sample_idx += 1;
            }

            match time_limit {
                Some(limit) if next_event > limit => {
                    self.time = limit;
                    break;
                }
                None if !next_event.is_finite() => break,
                _ => {}
            }
            if let Some(k) = max_samples {
                if rows.len() >= k {
                    self.time = next_event.min(time_limit.unwrap_or(next_event));
                    break;
                }
            }

            self.time = next_event;
            self.apply_event(total)?;

            if let Some(k) = self.debug_check_interval {
                if k > 0 && self.events_total().is_multiple_of(k) {
                    self.verify_caches()?;
                }
            }
        }

        let final_config = RingConfig::new(self.cells.clone())?;
        Ok(TrajectoryStats::from_rows(
            final_config,
            self.time,
            self.substitution_events,
            self.cut_paste_events,
            rows,
            super::stats::DEFAULT_BATCHES,
        ))
    }

    fn apply_event(&mut self, total: f64) -> Result<()> {
        let u: f64 = self.rng.random::<f64>() * total;
        if u < self.cp_rate {
            let x = self.rng.random_range(0..self.n());
            let k = self.kernel.sample(&mut self.rng);
            self.apply_cut_paste(x, k);
        } else {
            let (site, rem) = self.tree.descend(u - self.cp_rate);
            self.apply_substitution(site, rem);
        }
        Ok(())
    }

    fn apply_substitution(&mut self, site: usize, rem: f64) {
        let n = self.n();
        let (l, c, r) = window(&self.cells, site);
        let mut cum = 0.0;
        let mut chosen = None;
        for target in Nucleotide::ALL {
            if target == c {
                continue;
            }
            let rate = self.model.rate(target, l, c, r);
            cum += rate;
            if rem < cum {
                chosen = Some(target);
                break;
            }
        }
        // fall back to the last positive-rate target on boundary rounding
        let target = chosen.unwrap_or_else(|| {
            Nucleotide::ALL
                .into_iter()
                .rev()
                .find(|&t| t != c && self.model.rate(t, l, c, r) > 0.0)
                .expect("site with positive total rate has a positive target rate")
        });
        self.cells[site] = target;
        self.substitution_events[target.index()] += 1;
        for x in [(site + n - 1) % n, site, (site + 1) % n] {
            let rate = site_rate(&self.model, &self.cells, x);
            self.tree.set(x, rate);
        }
    }

    fn apply_cut_paste(&mut self, x: usize, k: i64) {
        let n = self.n();
        shift_segment_in_place(&mut self.cells, x, k);
        self.cut_paste_events += 1;
        // refresh the permuted arc plus one site on each side
        self.scratch_sites.clear();
        let step = k.signum();
        for j in -1..=(k.abs() + 1) {
            let site = (x as i64 + step * j).rem_euclid(n as i64) as usize;
            if !self.scratch_sites.contains(&site) {
                self.scratch_sites.push(site);
            }
        }
        let sites = std::mem::take(&mut self.scratch_sites);
        for &site in &sites {
            let rate = site_rate(&self.model, &self.cells, site);
            self.tree.set(site, rate);
        }
        self.scratch_sites = sites;
    }

    /// Exact comparison of the incremental caches against a from-scratch
    /// recomputation.
    fn verify_caches(&self) -> Result<()> {
        let rates: Vec<f64> = (0..self.n())
            .map(|x| site_rate(&self.model, &self.cells, x))
            .collect();
        for (x, &rate) in rates.iter().enumerate() {
            let cached = self.tree.get(x);
            if cached.to_bits() != rate.to_bits() {
                return Err(Error::Internal(format!(
                    "site {x} cached rate {cached} differs from recomputed {rate}"
                )));
            }
        }
        if !self.tree.matches_rebuild(&rates) {
            return Err(Error::Internal(
                "sum tree differs from a from-scratch rebuild".into(),
            ));
        }
        Ok(())
    }
}

#[inline]
fn window(cells: &[Nucleotide], site: usize) -> (Nucleotide, Nucleotide, Nucleotide) {
    let n = cells.len();
    (
        cells[(site + n - 1) % n],
        cells[site],
        cells[(site + 1) % n],
    )
}

/// Total substitution rate out of one site.
pub(super) fn site_rate(model: &RateModelSpec, cells: &[Nucleotide], site: usize) -> f64 {
    let (l, c, r) = window(cells, site);
    let mut total = 0.0;
    for target in Nucleotide::ALL {
        if target != c {
            total += model.rate(target, l, c, r);
        }
    }
    total
}
