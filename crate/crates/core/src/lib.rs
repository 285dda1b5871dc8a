//! Simulation of phoneme frequency distributions under stochastic sound change.
//!
//! A language is a probability vector over an inventory of anonymous phonemes.
//! Each time step applies exactly one change: a primary split (mass moves to an
//! existing phoneme), a secondary split (mass moves to a new phoneme) or an
//! unconditioned merger (two phonemes collapse). How the change type, the
//! phonemes and the transferred proportion are drawn is pluggable; see
//! [`schemes`]. [`engine`] runs seeded ensembles of trajectories, [`stats`]
//! measures them and [`ingest`] reads empirical frequency data into the same
//! representation.

pub mod distribution;
pub mod engine;
pub mod ingest;
pub mod rng;
pub mod schemes;
pub mod stats;

pub use distribution::{ChangeError, ChangeEvent, ChangeType, PhonemeDistribution, PhonemeId};
pub use engine::{
    pis_envelopes, pis_envelopes_from_series, run_ensemble, run_ensemble_with_workers,
    run_trajectory, step, ConfigError, EngineError, InitialDistribution, PisEnvelopes,
    SimulationConfig, TrajectoryRecord,
};
pub use schemes::{
    AlphaSampler, SchemeError, SchemeParams, SchemeRegistry, SourceSampler, TypeProbabilities,
    TypeScheme,
};
