//! Trajectory and ensemble driver.
//!
//! Each step consumes draws from the trajectory's stream in a fixed order:
//! one for the change type (plus one more if a merger is drawn at the
//! inventory floor), one for the source phoneme, one for the target when the
//! change has one, and one for alpha when the change has one.

use std::fmt;
use std::sync::Arc;

use rand_core::RngCore;
use rayon::prelude::*;
use thiserror::Error;

use crate::distribution::{ChangeError, ChangeEvent, ChangeType, PhonemeDistribution};
use crate::rng;
use crate::schemes::{
    sample_change_type, sample_target, AdaptiveCentralTendency, AlphaSampler, ConstantTypes,
    SchemeError, SourceSampler, SurprisalSource, TypeScheme, UniformOpenAlpha, UniformSource,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("`{key}` {reason}")]
    Invalid { key: &'static str, reason: String },
    #[error(transparent)]
    Scheme(#[from] SchemeError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Change(#[from] ChangeError),
    #[error("inventory fell to {got}, below the floor of {floor}")]
    FloorBreached { got: usize, floor: usize },
    #[error("no trajectories to summarize")]
    NoRecords,
    #[error("trajectory {index} has {got} recorded steps, expected {expected}")]
    Ragged {
        index: usize,
        got: usize,
        expected: usize,
    },
    #[error("worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialDistribution {
    #[default]
    Uniform,
}

impl InitialDistribution {
    pub fn name(self) -> &'static str {
        match self {
            InitialDistribution::Uniform => "uniform",
        }
    }
}

/// Full parameterization of one simulation regime.
#[derive(Clone)]
pub struct SimulationConfig {
    pub n_languages: usize,
    pub n_steps: usize,
    pub initial_inventory_size: usize,
    pub initial_distribution: InitialDistribution,
    pub type_policy: Arc<dyn TypeScheme>,
    pub source_policy: Arc<dyn SourceSampler>,
    pub alpha_policy: Arc<dyn AlphaSampler>,
    pub min_inventory: usize,
    pub master_seed: u64,
    /// Keep every applied event in the record.
    pub record_history: bool,
}

impl fmt::Debug for SimulationConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SimulationConfig")
            .field("n_languages", &self.n_languages)
            .field("n_steps", &self.n_steps)
            .field("initial_inventory_size", &self.initial_inventory_size)
            .field("initial_distribution", &self.initial_distribution)
            .field("type_policy", &self.type_policy)
            .field("source_policy", &self.source_policy)
            .field("alpha_policy", &self.alpha_policy)
            .field("min_inventory", &self.min_inventory)
            .field("master_seed", &self.master_seed)
            .field("record_history", &self.record_history)
            .finish()
    }
}

/// Names accepted by [`SimulationConfig::preset`].
pub const PRESETS: [&str; 3] = ["sim1", "sim2", "sim3"];

impl SimulationConfig {
    /// 400 languages, 1000 steps, uniform start over 34 phonemes, floor of 2,
    /// equal constant type probabilities, uniform source sampling.
    pub fn naive(master_seed: u64) -> Self {
        Self {
            n_languages: 400,
            n_steps: 1000,
            initial_inventory_size: 34,
            initial_distribution: InitialDistribution::Uniform,
            type_policy: Arc::new(ConstantTypes::equal()),
            source_policy: Arc::new(UniformSource),
            alpha_policy: Arc::new(UniformOpenAlpha),
            min_inventory: 2,
            master_seed,
            record_history: false,
        }
    }

    /// `sim1`: the naive model. `sim2`: surprisal-proportional sources.
    /// `sim3`: `sim2` plus the adaptive type scheme with mu = 34.
    pub fn preset(name: &str, master_seed: u64) -> Option<Self> {
        let base = Self::naive(master_seed);
        match name {
            "sim1" => Some(base),
            "sim2" => Some(Self {
                source_policy: Arc::new(SurprisalSource),
                ..base
            }),
            "sim3" => Some(Self {
                source_policy: Arc::new(SurprisalSource),
                type_policy: Arc::new(AdaptiveCentralTendency::new(34).expect("mu = 34 is valid")),
                ..base
            }),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |key, reason: &str| {
            Err(ConfigError::Invalid {
                key,
                reason: reason.to_string(),
            })
        };
        if self.n_languages == 0 {
            return invalid("n_languages", "must be positive");
        }
        if self.min_inventory < PhonemeDistribution::MIN_INVENTORY {
            return invalid("min_inventory", "must be at least 2");
        }
        if self.initial_inventory_size < self.min_inventory {
            return invalid("initial_inventory_size", "must be at least min_inventory");
        }
        if u32::try_from(self.initial_inventory_size).is_err() {
            return invalid("initial_inventory_size", "is too large");
        }
        // A merger drawn at the floor is redrawn among the splits, which needs
        // some split mass there.
        let at_floor = self.type_policy.probabilities(self.min_inventory)?;
        if at_floor.primary + at_floor.secondary <= 0.0 {
            return invalid(
                "type_policy",
                "gives zero split probability at min_inventory",
            );
        }
        Ok(())
    }

    pub fn initial_state(&self) -> Result<PhonemeDistribution, ChangeError> {
        match self.initial_distribution {
            InitialDistribution::Uniform => {
                PhonemeDistribution::uniform(self.initial_inventory_size)
            }
        }
    }
}

/// One simulated language.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub language_index: usize,
    /// Inventory size before the first step and after every step.
    pub pis_series: Vec<usize>,
    pub final_distribution: PhonemeDistribution,
    pub history: Option<Vec<ChangeEvent>>,
}

/// Applies one sampled change.
pub fn step(
    dist: &PhonemeDistribution,
    config: &SimulationConfig,
    rng: &mut dyn RngCore,
) -> Result<(PhonemeDistribution, ChangeEvent), EngineError> {
    let v = dist.len();
    let probs = config.type_policy.probabilities(v)?;
    let mut kind = sample_change_type(&probs, rng);
    if kind == ChangeType::Merger && v <= config.min_inventory {
        let splits = [probs.primary, probs.secondary];
        kind =
            [ChangeType::PrimarySplit, ChangeType::SecondarySplit][rng::categorical(rng, &splits)];
    }

    let source = config.source_policy.sample(dist, rng);
    let target = kind
        .needs_target()
        .then(|| sample_target(dist, source, rng));
    let alpha = kind.needs_alpha().then(|| config.alpha_policy.sample(rng));
    let event = ChangeEvent {
        kind,
        source,
        target,
        alpha,
    };
    let next = dist.apply(&event)?;
    if next.len() < config.min_inventory {
        return Err(EngineError::FloorBreached {
            got: next.len(),
            floor: config.min_inventory,
        });
    }
    Ok((next, event))
}

/// Runs one language from the initial state. Deterministic in
/// `(config, language_index)`.
pub fn run_trajectory(
    config: &SimulationConfig,
    language_index: usize,
) -> Result<TrajectoryRecord, EngineError> {
    config.validate()?;
    run_validated(config, language_index)
}

fn run_validated(
    config: &SimulationConfig,
    language_index: usize,
) -> Result<TrajectoryRecord, EngineError> {
    let mut rng = rng::trajectory_stream(config.master_seed, language_index as u64);
    let mut dist = config.initial_state()?;
    let mut pis_series = Vec::with_capacity(config.n_steps + 1);
    let mut history = config
        .record_history
        .then(|| Vec::with_capacity(config.n_steps));
    pis_series.push(dist.len());
    for _ in 0..config.n_steps {
        let (next, event) = step(&dist, config, &mut rng)?;
        dist = next;
        pis_series.push(dist.len());
        if let Some(h) = history.as_mut() {
            h.push(event);
        }
    }
    Ok(TrajectoryRecord {
        language_index,
        pis_series,
        final_distribution: dist,
        history,
    })
}

/// Runs every language on the global rayon pool.
pub fn run_ensemble(config: &SimulationConfig) -> Result<Vec<TrajectoryRecord>, EngineError> {
    config.validate()?;
    (0..config.n_languages)
        .into_par_iter()
        .map(|i| run_validated(config, i))
        .collect()
}

/// Like [`run_ensemble`] with an explicit worker count; `1` runs inline.
/// The output does not depend on `workers`.
pub fn run_ensemble_with_workers(
    config: &SimulationConfig,
    workers: usize,
) -> Result<Vec<TrajectoryRecord>, EngineError> {
    config.validate()?;
    if workers <= 1 {
        return (0..config.n_languages)
            .map(|i| run_validated(config, i))
            .collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| EngineError::Pool(e.to_string()))?;
    pool.install(|| run_ensemble(config))
}

/// Per-step cross-language summary of inventory sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct PisEnvelopes {
    pub min: Vec<f64>,
    pub p025: Vec<f64>,
    pub mean: Vec<f64>,
    pub p975: Vec<f64>,
    pub max: Vec<f64>,
    pub variance: Vec<f64>,
}

impl PisEnvelopes {
    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }
}

/// Linear interpolation between order statistics (`h = (n - 1) q`).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn pis_envelopes(records: &[TrajectoryRecord]) -> Result<PisEnvelopes, EngineError> {
    let series: Vec<(usize, &[usize])> = records
        .iter()
        .map(|r| (r.language_index, r.pis_series.as_slice()))
        .collect();
    pis_envelopes_from_series(&series)
}

/// Envelopes over `(language_index, series)` pairs of equal length.
pub fn pis_envelopes_from_series(
    series: &[(usize, &[usize])],
) -> Result<PisEnvelopes, EngineError> {
    let first = series.first().ok_or(EngineError::NoRecords)?;
    let len = first.1.len();
    if let Some((index, s)) = series.iter().find(|(_, s)| s.len() != len) {
        return Err(EngineError::Ragged {
            index: *index,
            got: s.len(),
            expected: len,
        });
    }
    let mut env = PisEnvelopes {
        min: Vec::with_capacity(len),
        p025: Vec::with_capacity(len),
        mean: Vec::with_capacity(len),
        p975: Vec::with_capacity(len),
        max: Vec::with_capacity(len),
        variance: Vec::with_capacity(len),
    };
    let n = series.len() as f64;
    let mut column = Vec::with_capacity(series.len());
    for t in 0..len {
        column.clear();
        column.extend(series.iter().map(|(_, s)| s[t] as f64));
        column.sort_by(f64::total_cmp);
        let mean = column.iter().sum::<f64>() / n;
        let var = column.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        env.min.push(column[0]);
        env.p025.push(quantile_sorted(&column, 0.025));
        env.mean.push(mean);
        env.p975.push(quantile_sorted(&column, 0.975));
        env.max.push(column[column.len() - 1]);
        env.variance.push(var);
    }
    Ok(env)
}
