//! The run configuration document: a single JSON file selecting the model,
//! kernel, ring, horizons and outputs. Rate keys use ASCII names
//! (`r_a_c` for the rate toward `a` with context `c`).

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use ipslab::alphabet::Nucleotide;
use ipslab::rates::{
    specialize_jc, specialize_rnc, specialize_t92, GenericRateModel, QMatrix, RnYprParams,
};
use ipslab::sim::{Horizon, InitialConfig, RateModelSpec, SimSpec};
use ipslab::{CutPasteKernel, RingConfig};

#[derive(Debug)]
pub enum ConfigError {
    Message(String),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Message(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Message(msg.into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    #[serde(default = "KernelConfig::disabled")]
    pub kernel: KernelConfig,
    #[serde(default = "default_ring_n")]
    pub ring_n: usize,
    #[serde(default)]
    pub seed: u64,
    /// Process-time horizon; mutually exclusive with `events`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    /// Event-count horizon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub events: Option<u64>,
    #[serde(default)]
    pub burn_in: f64,
    #[serde(default = "default_sample_interval")]
    pub sample_interval: f64,
    /// When set, exactly this many samples are collected after burn-in.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<String>,
    /// Initial configuration: `all-a` .. `all-g`, `uniform-random`, or an
    /// explicit letter string.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<String>,
    /// Upper-copy initial configuration for coupled runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init_upper: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual: Option<DualConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moments: Option<MomentsConfig>,
}

fn default_ring_n() -> usize {
    64
}

fn default_sample_interval() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelConfig {
    Rnypr {
        v_a: f64,
        v_t: f64,
        v_c: f64,
        v_g: f64,
        w_a: f64,
        w_t: f64,
        w_c: f64,
        w_g: f64,
        #[serde(default)]
        r_a_c: f64,
        #[serde(default)]
        r_a_t: f64,
        #[serde(default)]
        r_t_a: f64,
        #[serde(default)]
        r_t_g: f64,
        #[serde(default)]
        r_c_a: f64,
        #[serde(default)]
        r_c_g: f64,
        #[serde(default)]
        r_g_c: f64,
        #[serde(default)]
        r_g_t: f64,
    },
    Rnc {
        v_w: f64,
        v_s: f64,
        w_w: f64,
        w_s: f64,
        #[serde(default)]
        r_u: f64,
        #[serde(default)]
        r_w: f64,
        #[serde(default)]
        r_s: f64,
        #[serde(default)]
        r_v: f64,
    },
    T92 {
        theta: f64,
        v: f64,
        w: f64,
        #[serde(default)]
        r: f64,
    },
    Jc {
        v: f64,
        #[serde(default)]
        r: f64,
    },
    /// Independent sites driven by a generator matrix; keys `q_x_y` give
    /// the rate from letter `x` to letter `y`, missing keys default to 0.
    Independent { rates: BTreeMap<String, f64> },
    /// Arbitrary radius-1 window rates: per target, a default rate plus
    /// explicit three-letter windows (left, center, right).
    Generic {
        targets: BTreeMap<String, GenericTargetConfig>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenericTargetConfig {
    #[serde(default)]
    pub default: f64,
    #[serde(default)]
    pub windows: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum KernelConfig {
    Stirring {
        rho: f64,
    },
    /// Explicit displacement weights keyed by the signed displacement.
    Custom {
        rho: f64,
        weights: BTreeMap<String, f64>,
    },
}

impl KernelConfig {
    pub fn disabled() -> KernelConfig {
        KernelConfig::Stirring { rho: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum DualConfig {
    Branching {
        s: u32,
        lambda_bar: f64,
        lambda_bar_0: f64,
        #[serde(default = "default_one")]
        initial: u64,
        #[serde(default = "default_runs")]
        runs: u64,
        horizon: f64,
        #[serde(default = "default_cap")]
        cap: u64,
        #[serde(default = "default_survival_points")]
        survival_points: usize,
    },
    DecomposedBranching {
        parts: Vec<(u32, f64)>,
        lambda_bar_0d: f64,
        #[serde(default = "default_one")]
        initial: u64,
        #[serde(default = "default_runs")]
        runs: u64,
        horizon: f64,
        #[serde(default = "default_cap")]
        cap: u64,
        #[serde(default = "default_survival_points")]
        survival_points: usize,
    },
    /// Dual-set process of the main model and kernel.
    Set {
        initial_set: Vec<usize>,
        #[serde(default = "default_runs")]
        runs: u64,
        horizon: f64,
        checkpoints: Vec<f64>,
    },
}

fn default_one() -> u64 {
    1
}

fn default_runs() -> u64 {
    10_000
}

fn default_cap() -> u64 {
    1_000_000
}

fn default_survival_points() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentsConfig {
    /// A trajectory CSV produced by the simulate command.
    pub input_csv: PathBuf,
    /// Pass threshold in standard errors.
    #[serde(default = "default_se_multiplier")]
    pub se_multiplier: f64,
}

fn default_se_multiplier() -> f64 {
    3.0
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig, ConfigError> {
        match serde_json::from_str::<RunConfig>(text) {
            Ok(cfg) => Ok(cfg),
            Err(e) => err(format!("failed to parse configuration: {e}")),
        }
    }

    /// The RN+YpR parameter set of the configured model, if it is in that
    /// family.
    pub fn rnypr_params(&self) -> Result<RnYprParams, ConfigError> {
        let built = match &self.model {
            ModelConfig::Rnypr {
                v_a,
                v_t,
                v_c,
                v_g,
                w_a,
                w_t,
                w_c,
                w_g,
                r_a_c,
                r_a_t,
                r_t_a,
                r_t_g,
                r_c_a,
                r_c_g,
                r_g_c,
                r_g_t,
            } => RnYprParams::new(
                [*v_a, *v_t, *v_c, *v_g],
                [*w_a, *w_t, *w_c, *w_g],
                *r_a_c,
                *r_a_t,
                *r_t_a,
                *r_t_g,
                *r_c_a,
                *r_c_g,
                *r_g_c,
                *r_g_t,
            ),
            ModelConfig::Rnc {
                v_w,
                v_s,
                w_w,
                w_s,
                r_u,
                r_w,
                r_s,
                r_v,
            } => specialize_rnc(*v_w, *v_s, *w_w, *w_s, *r_u, *r_w, *r_s, *r_v),
            ModelConfig::T92 { theta, v, w, r } => specialize_t92(*theta, *v, *w, *r),
            ModelConfig::Jc { v, r } => specialize_jc(*v, *r),
            ModelConfig::Independent { .. } | ModelConfig::Generic { .. } => {
                return err(
                    "this command requires a model of the RN+YpR family (rnypr, rnc, t92, jc)",
                )
            }
        };
        built.map_err(|e| ConfigError::Message(e.to_string()))
    }

    pub fn q_matrix(&self) -> Result<QMatrix, ConfigError> {
        let ModelConfig::Independent { rates } = &self.model else {
            return err("expected an independent model");
        };
        let mut entries = [[0.0f64; 4]; 4];
        for (key, &value) in rates {
            let parts: Vec<&str> = key.split('_').collect();
            let (from, to) = match parts.as_slice() {
                ["q", from, to] if from.len() == 1 && to.len() == 1 => (
                    Nucleotide::from_char(from.chars().next().unwrap()),
                    Nucleotide::from_char(to.chars().next().unwrap()),
                ),
                _ => return err(format!("bad generator key {key:?}; expected q_<from>_<to>")),
            };
            match (from, to) {
                (Ok(f), Ok(t)) if f != t => entries[f.index()][t.index()] = value,
                (Ok(_), Ok(_)) => return err(format!("generator key {key:?} is a diagonal entry")),
                _ => return err(format!("bad letters in generator key {key:?}")),
            }
        }
        QMatrix::from_rates(entries).map_err(|e| ConfigError::Message(e.to_string()))
    }

    pub fn rate_model(&self) -> Result<RateModelSpec, ConfigError> {
        match &self.model {
            ModelConfig::Independent { .. } => Ok(RateModelSpec::Generic(
                GenericRateModel::independent(&self.q_matrix()?),
            )),
            ModelConfig::Generic { targets } => {
                let mut tables: [[f64; 64]; 4] = [[0.0; 64]; 4];
                for (letter, cfg) in targets {
                    let target = parse_letter(letter)?;
                    let table = &mut tables[target.index()];
                    table.fill(cfg.default);
                    for (window, &rate) in &cfg.windows {
                        let chars: Vec<char> = window.chars().collect();
                        if chars.len() != 3 {
                            return err(format!("window {window:?} must have three letters"));
                        }
                        let l = parse_letter(&chars[0].to_string())?;
                        let c = parse_letter(&chars[1].to_string())?;
                        let r = parse_letter(&chars[2].to_string())?;
                        table[ipslab::rates::WindowSet::window_index(l, c, r)] = rate;
                    }
                }
                let model = GenericRateModel::from_window_rates(|t, l, c, r| {
                    tables[t.index()][ipslab::rates::WindowSet::window_index(l, c, r)]
                })
                .map_err(|e| ConfigError::Message(e.to_string()))?;
                Ok(RateModelSpec::Generic(model))
            }
            _ => Ok(RateModelSpec::RnYpr(self.rnypr_params()?)),
        }
    }

    pub fn kernel(&self) -> Result<CutPasteKernel, ConfigError> {
        let built = match &self.kernel {
            KernelConfig::Stirring { rho } => Ok(CutPasteKernel::stirring(*rho)),
            KernelConfig::Custom { rho, weights } => {
                let mut list = Vec::with_capacity(weights.len());
                for (key, &weight) in weights {
                    match key.parse::<i64>() {
                        Ok(k) => list.push((k, weight)),
                        Err(_) => return err(format!("bad displacement key {key:?}")),
                    }
                }
                CutPasteKernel::new(*rho, list)
            }
        };
        built.map_err(|e| ConfigError::Message(e.to_string()))
    }

    pub fn initial(&self, which: Option<&str>) -> Result<InitialConfig, ConfigError> {
        let Some(text) = which else {
            return Ok(InitialConfig::UniformRandom);
        };
        Ok(match text {
            "all-a" => InitialConfig::AllA,
            "all-t" => InitialConfig::AllT,
            "all-c" => InitialConfig::AllC,
            "all-g" => InitialConfig::AllG,
            "uniform-random" => InitialConfig::UniformRandom,
            explicit => {
                let config =
                    RingConfig::parse(explicit).map_err(|e| ConfigError::Message(e.to_string()))?;
                InitialConfig::Explicit(config)
            }
        })
    }

    pub fn horizon(&self) -> Result<Horizon, ConfigError> {
        match (self.horizon, self.events, self.samples) {
            (Some(_), Some(_), _) => err("horizon and events are mutually exclusive"),
            (Some(t), None, _) => Ok(Horizon::Time(t)),
            (None, Some(k), _) => Ok(Horizon::Events(k)),
            // with explicit samples the horizon is implied
            (None, None, Some(k)) => Ok(Horizon::Time(
                self.burn_in + self.sample_interval * k as f64,
            )),
            (None, None, None) => err("one of horizon, events or samples is required"),
        }
    }

    pub fn sim_spec(&self) -> Result<SimSpec, ConfigError> {
        let spec = SimSpec {
            model: self.rate_model()?,
            kernel: self.kernel()?,
            ring_n: self.ring_n,
            init: self.initial(self.init.as_deref())?,
            horizon: self.horizon()?,
            seed: self.seed,
            stream: 0,
            sample_interval: self.sample_interval,
            max_events: None,
            debug_check_interval: None,
        };
        spec.validate()
            .map_err(|e| ConfigError::Message(e.to_string()))?;
        Ok(spec)
    }

    pub fn order(&self) -> Result<ipslab::AlphabetOrder, ConfigError> {
        let id = match &self.order {
            Some(text) => ipslab::alphabet::OrderId::parse(text)
                .map_err(|e| ConfigError::Message(e.to_string()))?,
            None => ipslab::alphabet::OrderId::O1,
        };
        Ok(ipslab::AlphabetOrder::from_id(id))
    }
}

fn parse_letter(s: &str) -> Result<Nucleotide, ConfigError> {
    let mut chars = s.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => {
            Nucleotide::from_char(c).map_err(|e| ConfigError::Message(e.to_string()))
        }
        _ => err(format!("bad letter {s:?}")),
    }
}
