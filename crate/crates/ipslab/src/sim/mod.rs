//! Exact event-driven simulation of the superimposed substitution and
//! cut-and-paste process on the ring, plus the two-copy basic coupling.
//!
//! One trajectory is strictly sequential; replicas with distinct seeds or
//! streams share no mutable state and may run concurrently.

mod coupled;
mod engine;
pub mod stats;
mod sumtree;

pub use coupled::{
    coupled_transitions, ordered_pairs, simulate_coupled, stationary_coupled_pairs, CoupledSample,
    CoupledStats, CoupledTransition,
};
pub use stats::{batch_mean_se, batch_mean_se_of, FreqSample, FreqSummary, DEFAULT_BATCHES};
pub use sumtree::SumTree;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::alphabet::Nucleotide;
use crate::error::Error;
use crate::kernel::CutPasteKernel;
use crate::rates::{substitution_rate, GenericRateModel, RnYprParams};
use crate::ring::RingConfig;
use crate::Result;

/// The rate model driving a simulation: the RN+YpR closed form or the
/// generic partition representation.
#[derive(Debug, Clone)]
pub enum RateModelSpec {
    RnYpr(RnYprParams),
    Generic(GenericRateModel),
}

impl RateModelSpec {
    #[inline]
    pub fn rate(&self, target: Nucleotide, l: Nucleotide, c: Nucleotide, r: Nucleotide) -> f64 {
        match self {
            RateModelSpec::RnYpr(p) => substitution_rate(p, target, l, c, r),
            RateModelSpec::Generic(m) => m.rate(target, l, c, r),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            RateModelSpec::RnYpr(p) => p.validate(),
            RateModelSpec::Generic(_) => Ok(()),
        }
    }
}

/// Initial configuration: a named preset or an explicit configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialConfig {
    AllA,
    AllT,
    AllC,
    AllG,
    UniformRandom,
    Explicit(RingConfig),
}

impl InitialConfig {
    pub fn all(letter: Nucleotide) -> InitialConfig {
        match letter {
            Nucleotide::A => InitialConfig::AllA,
            Nucleotide::T => InitialConfig::AllT,
            Nucleotide::C => InitialConfig::AllC,
            Nucleotide::G => InitialConfig::AllG,
        }
    }

    pub fn build(&self, n: usize, rng: &mut ChaCha8Rng) -> Result<RingConfig> {
        match self {
            InitialConfig::AllA => RingConfig::uniform(n, Nucleotide::A),
            InitialConfig::AllT => RingConfig::uniform(n, Nucleotide::T),
            InitialConfig::AllC => RingConfig::uniform(n, Nucleotide::C),
            InitialConfig::AllG => RingConfig::uniform(n, Nucleotide::G),
            InitialConfig::UniformRandom => RingConfig::random(n, rng),
            InitialConfig::Explicit(c) => {
                if c.len() != n {
                    return Err(Error::SizeMismatch(c.len(), n));
                }
                Ok(c.clone())
            }
        }
    }
}

/// Run length: a process-time horizon or an event-count budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Horizon {
    Time(f64),
    Events(u64),
}

/// Full specification of a simulation run.
#[derive(Debug, Clone)]
pub struct SimSpec {
    pub model: RateModelSpec,
    pub kernel: CutPasteKernel,
    pub ring_n: usize,
    pub init: InitialConfig,
    pub horizon: Horizon,
    pub seed: u64,
    /// Replicate stream; replica `r` of a study uses stream `r`.
    pub stream: u64,
    /// Spacing of the frequency samples in process time.
    pub sample_interval: f64,
    /// Hard cap on the number of events; exceeding it is an error.
    pub max_events: Option<u64>,
    /// When set, every this many events the per-site rate cache and its
    /// sum tree are recomputed from scratch and compared exactly.
    pub debug_check_interval: Option<u64>,
}

impl SimSpec {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.ring_n < RingConfig::MIN_SITES {
            return Err(Error::RingTooSmall(self.ring_n));
        }
        self.kernel.validate_for_ring(self.ring_n)?;
        match self.horizon {
            Horizon::Time(t) if !(t.is_finite() && t > 0.0) => {
                return Err(Error::InvalidParameter(format!(
                    "time horizon {t} must be positive and finite"
                )))
            }
            Horizon::Events(0) => {
                return Err(Error::InvalidParameter(
                    "event horizon must be positive".into(),
                ))
            }
            _ => {}
        }
        if !(self.sample_interval.is_finite() && self.sample_interval > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sample interval {} must be positive and finite",
                self.sample_interval
            )));
        }
        Ok(())
    }

    pub fn rng(&self) -> ChaCha8Rng {
        self.rng_with_stream(self.stream)
    }

    /// An auxiliary stream of the same seed, for randomness that must not
    /// overlap the event stream (initial-state construction and the like).
    pub fn rng_with_stream(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

/// Outcome of a single-copy run: the final state, event counts, and
/// site-averaged frequency statistics with batch-means standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStats {
    pub final_config: RingConfig,
    /// Elapsed process time.
    pub time: f64,
    /// Substitution events by target letter, display order.
    pub substitution_events: [u64; 4],
    pub cut_paste_events: u64,
    pub samples: usize,
    pub marginals: [FreqSummary; 4],
    pub pairs: [[FreqSummary; 4]; 4],
    /// The raw samples, one row per sample time.
    pub rows: Vec<FreqSample>,
    pub batches: usize,
}

impl TrajectoryStats {
    pub fn marginal(&self, letter: Nucleotide) -> FreqSummary {
        self.marginals[letter.index()]
    }

    pub fn pair(&self, x: Nucleotide, y: Nucleotide) -> FreqSummary {
        self.pairs[x.index()][y.index()]
    }

    /// Batch-means summary of a derived statistic of the samples.
    pub fn summarize<F>(&self, f: F) -> FreqSummary
    where
        F: Fn(&FreqSample) -> f64,
    {
        batch_mean_se_of(&self.rows, self.batches, f)
    }

    pub fn from_rows(
        final_config: RingConfig,
        time: f64,
        substitution_events: [u64; 4],
        cut_paste_events: u64,
        rows: Vec<FreqSample>,
        batches: usize,
    ) -> TrajectoryStats {
        let marginals = std::array::from_fn(|i| {
            batch_mean_se_of(&rows, batches, |s: &FreqSample| s.marginals[i])
        });
        let pairs = std::array::from_fn(|x| {
            std::array::from_fn(|y| {
                batch_mean_se_of(&rows, batches, |s: &FreqSample| s.pairs[x][y])
            })
        });
        TrajectoryStats {
            final_config,
            time,
            substitution_events,
            cut_paste_events,
            samples: rows.len(),
            marginals,
            pairs,
            rows,
            batches,
        }
    }
}

/// Run the process over the spec's horizon, sampling frequencies at the
/// spec's interval from time zero. Deterministic given the seed.
pub fn simulate(spec: &SimSpec) -> Result<TrajectoryStats> {
    spec.validate()?;
    let mut eng = engine::Engine::new(spec)?;
    match spec.horizon {
        Horizon::Time(t) => eng.run(0.0, spec.sample_interval, None, Some(t), None),
        Horizon::Events(k) => eng.run(0.0, spec.sample_interval, None, None, Some(k)),
    }
}

/// Run with a burn-in period, then record exactly `samples` frequency
/// samples spaced `sample_interval` apart; the spec's own horizon and
/// interval are ignored.
pub fn estimate_stationary(
    spec: &SimSpec,
    burn_in: f64,
    sample_interval: f64,
    samples: usize,
) -> Result<TrajectoryStats> {
    if !(burn_in.is_finite() && burn_in >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "burn-in {burn_in} must be non-negative"
        )));
    }
    if samples == 0 {
        return Err(Error::InvalidParameter(
            "sample count must be positive".into(),
        ));
    }
    let mut shaped = spec.clone();
    shaped.sample_interval = sample_interval;
    let horizon = burn_in + sample_interval * samples as f64;
    shaped.horizon = Horizon::Time(horizon);
    shaped.validate()?;
    let mut eng = engine::Engine::new(&shaped)?;
    eng.run(burn_in, sample_interval, Some(samples), Some(horizon), None)
}
