//! Pluggable sampling policies.
//!
//! A simulation is parameterized by three interchangeable strategies: a
//! [`TypeScheme`] giving the change-type probabilities at the current
//! inventory size, a [`SourceSampler`] choosing the phoneme that loses mass,
//! and an [`AlphaSampler`] drawing the transferred proportion. Strategies are
//! registered by name in a [`SchemeRegistry`] and built from flat string
//! parameters, which is how configuration files select them.

mod alpha;
mod source;
mod types;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand_core::RngCore;
use thiserror::Error;

use crate::distribution::{ChangeType, PhonemeDistribution};
use crate::rng;

pub use alpha::UniformOpenAlpha;
pub use source::{SurprisalSource, UniformSource};
pub use types::{AdaptiveCentralTendency, ConstantTypes};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SchemeError {
    #[error("unknown {kind} scheme `{name}` (known: {known})")]
    Unknown {
        kind: &'static str,
        name: String,
        known: String,
    },
    #[error("invalid value `{value}` for `{key}`: {reason}")]
    InvalidParam {
        key: String,
        value: String,
        reason: String,
    },
    #[error("inventory size {0} is below 2")]
    InventoryTooSmall(usize),
}

/// Probabilities of primary split, secondary split and merger.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypeProbabilities {
    pub primary: f64,
    pub secondary: f64,
    pub merger: f64,
}

impl TypeProbabilities {
    pub fn new(primary: f64, secondary: f64, merger: f64) -> Result<Self, SchemeError> {
        for (key, value) in [
            ("p_primary", primary),
            ("p_secondary", secondary),
            ("p_merger", merger),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(SchemeError::InvalidParam {
                    key: key.into(),
                    value: value.to_string(),
                    reason: "must be a finite non-negative probability".into(),
                });
            }
        }
        let total = primary + secondary + merger;
        if (total - 1.0).abs() > 1e-12 {
            return Err(SchemeError::InvalidParam {
                key: "p_primary+p_secondary+p_merger".into(),
                value: total.to_string(),
                reason: "must sum to 1".into(),
            });
        }
        Ok(Self {
            primary,
            secondary,
            merger,
        })
    }

    pub fn equal() -> Self {
        let third = 1.0 / 3.0;
        Self {
            primary: third,
            secondary: third,
            merger: third,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.primary, self.secondary, self.merger]
    }

    pub fn get(&self, kind: ChangeType) -> f64 {
        match kind {
            ChangeType::PrimarySplit => self.primary,
            ChangeType::SecondarySplit => self.secondary,
            ChangeType::Merger => self.merger,
        }
    }
}

/// Change-type probabilities as a function of inventory size.
pub trait TypeScheme: fmt::Debug + Send + Sync {
    fn name(&self) -> &'static str;
    /// Parameters in the form accepted by the registered factory.
    fn params(&self) -> Vec<(&'static str, String)>;
    fn probabilities(&self, inventory: usize) -> Result<TypeProbabilities, SchemeError>;
}

/// Chooses the phoneme whose mass decreases.
pub trait SourceSampler: fmt::Debug + Send + Sync {
    fn name(&self) -> &'static str;
    fn params(&self) -> Vec<(&'static str, String)> {
        Vec::new()
    }
    /// Selection probability of every index. Used by tests and diagnostics.
    fn weights(&self, dist: &PhonemeDistribution) -> Vec<f64>;
    /// Consumes exactly one draw.
    fn sample(&self, dist: &PhonemeDistribution, rng: &mut dyn RngCore) -> usize;
}

/// Draws the split proportion.
pub trait AlphaSampler: fmt::Debug + Send + Sync {
    fn name(&self) -> &'static str;
    fn params(&self) -> Vec<(&'static str, String)> {
        Vec::new()
    }
    /// Consumes exactly one draw; the result lies in `(0, 1]`.
    fn sample(&self, rng: &mut dyn RngCore) -> f64;
}

pub fn type_probabilities(
    scheme: &dyn TypeScheme,
    inventory: usize,
) -> Result<TypeProbabilities, SchemeError> {
    scheme.probabilities(inventory)
}

/// Draws a change type by inverse CDF over `(primary, secondary, merger)`.
pub fn sample_change_type(probs: &TypeProbabilities, rng: &mut dyn RngCore) -> ChangeType {
    ChangeType::ALL[rng::categorical(rng, &probs.as_array())]
}

/// Uniform over every index except `source`. Consumes one draw.
pub fn sample_target(dist: &PhonemeDistribution, source: usize, rng: &mut dyn RngCore) -> usize {
    debug_assert!(dist.len() >= 2 && source < dist.len());
    let j = rng::index(rng, dist.len() - 1);
    if j >= source {
        j + 1
    } else {
        j
    }
}

/// Flat string parameters handed to scheme factories.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SchemeParams(BTreeMap<String, String>);

impl SchemeParams {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.insert(key, value);
        self
    }

    pub fn insert(&mut self, key: &str, value: impl ToString) {
        self.0.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn parse_or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, SchemeError>
    where
        T::Err: fmt::Display,
    {
        match self.get(key) {
            None => Ok(default),
            Some(raw) => raw
                .trim()
                .parse()
                .map_err(|e: T::Err| SchemeError::InvalidParam {
                    key: key.into(),
                    value: raw.into(),
                    reason: e.to_string(),
                }),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

type Factory<T> = fn(&SchemeParams) -> Result<Arc<T>, SchemeError>;

struct Entry<T: ?Sized> {
    params: &'static [&'static str],
    build: Factory<T>,
}

/// Name-indexed constructors for every strategy family.
pub struct SchemeRegistry {
    types: BTreeMap<&'static str, Entry<dyn TypeScheme>>,
    sources: BTreeMap<&'static str, Entry<dyn SourceSampler>>,
    alphas: BTreeMap<&'static str, Entry<dyn AlphaSampler>>,
}

impl fmt::Debug for SchemeRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SchemeRegistry")
            .field("types", &self.types.keys().collect::<Vec<_>>())
            .field("sources", &self.sources.keys().collect::<Vec<_>>())
            .field("alphas", &self.alphas.keys().collect::<Vec<_>>())
            .finish()
    }
}

fn lookup<'a, T: ?Sized>(
    map: &'a BTreeMap<&'static str, Entry<T>>,
    kind: &'static str,
    name: &str,
) -> Result<&'a Entry<T>, SchemeError> {
    map.get(name).ok_or_else(|| SchemeError::Unknown {
        kind,
        name: name.to_string(),
        known: map.keys().copied().collect::<Vec<_>>().join(", "),
    })
}

impl SchemeRegistry {
    pub fn empty() -> Self {
        Self {
            types: BTreeMap::new(),
            sources: BTreeMap::new(),
            alphas: BTreeMap::new(),
        }
    }

    /// Registry holding every scheme shipped with the crate.
    pub fn builtin() -> Self {
        let mut reg = Self::empty();
        reg.register_type(
            ConstantTypes::NAME,
            ConstantTypes::PARAMS,
            ConstantTypes::from_params,
        );
        reg.register_type(
            AdaptiveCentralTendency::NAME,
            AdaptiveCentralTendency::PARAMS,
            AdaptiveCentralTendency::from_params,
        );
        reg.register_source(UniformSource::NAME, &[], |_| Ok(Arc::new(UniformSource)));
        reg.register_source(SurprisalSource::NAME, &[], |_| {
            Ok(Arc::new(SurprisalSource))
        });
        reg.register_alpha(UniformOpenAlpha::NAME, &[], |_| {
            Ok(Arc::new(UniformOpenAlpha))
        });
        reg
    }

    pub fn register_type(
        &mut self,
        name: &'static str,
        params: &'static [&'static str],
        build: Factory<dyn TypeScheme>,
    ) {
        self.types.insert(name, Entry { params, build });
    }

    pub fn register_source(
        &mut self,
        name: &'static str,
        params: &'static [&'static str],
        build: Factory<dyn SourceSampler>,
    ) {
        self.sources.insert(name, Entry { params, build });
    }

    pub fn register_alpha(
        &mut self,
        name: &'static str,
        params: &'static [&'static str],
        build: Factory<dyn AlphaSampler>,
    ) {
        self.alphas.insert(name, Entry { params, build });
    }

    pub fn build_type(
        &self,
        name: &str,
        params: &SchemeParams,
    ) -> Result<Arc<dyn TypeScheme>, SchemeError> {
        (lookup(&self.types, "type", name)?.build)(params)
    }

    pub fn build_source(
        &self,
        name: &str,
        params: &SchemeParams,
    ) -> Result<Arc<dyn SourceSampler>, SchemeError> {
        (lookup(&self.sources, "source", name)?.build)(params)
    }

    pub fn build_alpha(
        &self,
        name: &str,
        params: &SchemeParams,
    ) -> Result<Arc<dyn AlphaSampler>, SchemeError> {
        (lookup(&self.alphas, "alpha", name)?.build)(params)
    }

    /// Parameter keys understood by a type scheme.
    pub fn type_params(&self, name: &str) -> Result<&'static [&'static str], SchemeError> {
        Ok(lookup(&self.types, "type", name)?.params)
    }

    pub fn source_params(&self, name: &str) -> Result<&'static [&'static str], SchemeError> {
        Ok(lookup(&self.sources, "source", name)?.params)
    }

    pub fn alpha_params(&self, name: &str) -> Result<&'static [&'static str], SchemeError> {
        Ok(lookup(&self.alphas, "alpha", name)?.params)
    }

    pub fn type_names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.types.keys().copied()
    }

    pub fn source_names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.sources.keys().copied()
    }

    pub fn alpha_names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.alphas.keys().copied()
    }
}

impl Default for SchemeRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}
