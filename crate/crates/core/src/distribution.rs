//! Phoneme distributions and the three change operators.
//!
//! Operators are pure: they borrow a distribution and return a new one. The
//! transferred mass is computed once and used for both the debit and the
//! credit, so no renormalization is ever applied.

use std::fmt;

use thiserror::Error;

/// Stable identity of a phoneme within one trajectory.
pub type PhonemeId = u64;

/// Tolerance on the total mass of a distribution.
pub const MASS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChangeError {
    #[error("phoneme index {index} out of range for inventory of {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("source and target must differ (both {0})")]
    SameSourceTarget(usize),
    #[error("alpha {0} outside (0, 1]")]
    AlphaOutOfRange(f64),
    #[error("change would leave {would_be} phonemes; at least {floor} are required")]
    FloorViolation { would_be: usize, floor: usize },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
}

/// The three kinds of phonological change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChangeType {
    PrimarySplit,
    SecondarySplit,
    Merger,
}

impl ChangeType {
    pub const ALL: [ChangeType; 3] = [
        ChangeType::PrimarySplit,
        ChangeType::SecondarySplit,
        ChangeType::Merger,
    ];

    /// Whether the change credits an already existing phoneme.
    pub fn needs_target(self) -> bool {
        matches!(self, ChangeType::PrimarySplit | ChangeType::Merger)
    }

    /// Whether the change moves a sampled proportion rather than all mass.
    pub fn needs_alpha(self) -> bool {
        matches!(self, ChangeType::PrimarySplit | ChangeType::SecondarySplit)
    }

    pub fn symbol(self) -> char {
        match self {
            ChangeType::PrimarySplit => 'p',
            ChangeType::SecondarySplit => 's',
            ChangeType::Merger => 'm',
        }
    }
}

impl fmt::Display for ChangeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ChangeType::PrimarySplit => "primary-split",
            ChangeType::SecondarySplit => "secondary-split",
            ChangeType::Merger => "merger",
        };
        f.write_str(name)
    }
}

/// One sampled change. Indices refer to positions in the distribution the
/// event is applied to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChangeEvent {
    pub kind: ChangeType,
    pub source: usize,
    pub target: Option<usize>,
    pub alpha: Option<f64>,
}

impl ChangeEvent {
    pub fn primary_split(source: usize, target: usize, alpha: f64) -> Self {
        Self {
            kind: ChangeType::PrimarySplit,
            source,
            target: Some(target),
            alpha: Some(alpha),
        }
    }

    pub fn secondary_split(source: usize, alpha: f64) -> Self {
        Self {
            kind: ChangeType::SecondarySplit,
            source,
            target: None,
            alpha: Some(alpha),
        }
    }

    pub fn merger(source: usize, target: usize) -> Self {
        Self {
            kind: ChangeType::Merger,
            source,
            target: Some(target),
            alpha: None,
        }
    }
}

/// A normalized probability vector over a live phoneme inventory.
///
/// Every entry is strictly positive, the entries sum to one within
/// [`MASS_TOLERANCE`], there are at least two phonemes and all ids are
/// distinct. `next_id` is the counter fresh ids are drawn from; it travels
/// with the value so a trajectory never reuses an id.
#[derive(Debug, Clone, PartialEq)]
pub struct PhonemeDistribution {
    probs: Vec<f64>,
    ids: Vec<PhonemeId>,
    next_id: PhonemeId,
}

impl PhonemeDistribution {
    pub const MIN_INVENTORY: usize = 2;

    pub fn new(probs: Vec<f64>, ids: Vec<PhonemeId>) -> Result<Self, ChangeError> {
        if probs.len() != ids.len() {
            return Err(ChangeError::InvalidDistribution(format!(
                "{} probabilities but {} ids",
                probs.len(),
                ids.len()
            )));
        }
        let next_id = ids.iter().max().map_or(0, |m| m + 1);
        let dist = Self {
            probs,
            ids,
            next_id,
        };
        dist.validate()?;
        Ok(dist)
    }

    /// Distribution with ids `0..probs.len()`.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self, ChangeError> {
        let ids = (0..probs.len() as PhonemeId).collect();
        Self::new(probs, ids)
    }

    /// Normalizes non-negative weights; zero weights are dropped.
    pub fn from_weights(weights: &[f64]) -> Result<Self, ChangeError> {
        let total: f64 = weights.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(ChangeError::InvalidDistribution(format!(
                "weights sum to {total}"
            )));
        }
        let mut probs = Vec::with_capacity(weights.len());
        let mut ids = Vec::with_capacity(weights.len());
        for (i, &w) in weights.iter().enumerate() {
            if w < 0.0 || !w.is_finite() {
                return Err(ChangeError::InvalidDistribution(format!(
                    "weight {w} at position {i}"
                )));
            }
            if w > 0.0 {
                probs.push(w / total);
                ids.push(i as PhonemeId);
            }
        }
        Self::new(probs, ids)
    }

    pub fn uniform(size: usize) -> Result<Self, ChangeError> {
        Self::from_probs(vec![1.0 / size as f64; size])
    }

    pub fn validate(&self) -> Result<(), ChangeError> {
        let v = self.probs.len();
        if v < Self::MIN_INVENTORY {
            return Err(ChangeError::InvalidDistribution(format!(
                "inventory of {v} is below {}",
                Self::MIN_INVENTORY
            )));
        }
        if let Some((i, p)) = self
            .probs
            .iter()
            .enumerate()
            .find(|(_, p)| !(p.is_finite() && **p > 0.0))
        {
            return Err(ChangeError::InvalidDistribution(format!(
                "entry {i} has probability {p}"
            )));
        }
        let total: f64 = self.probs.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(ChangeError::InvalidDistribution(format!(
                "probabilities sum to {total}"
            )));
        }
        let mut sorted = self.ids.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(ChangeError::InvalidDistribution("duplicate ids".into()));
        }
        Ok(())
    }

    /// Inventory size.
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn ids(&self) -> &[PhonemeId] {
        &self.ids
    }

    pub fn next_id(&self) -> PhonemeId {
        self.next_id
    }

    pub fn iter(&self) -> impl Iterator<Item = (PhonemeId, f64)> + '_ {
        self.ids.iter().copied().zip(self.probs.iter().copied())
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    fn check_index(&self, index: usize) -> Result<(), ChangeError> {
        if index < self.len() {
            Ok(())
        } else {
            Err(ChangeError::IndexOutOfRange {
                index,
                len: self.len(),
            })
        }
    }

    fn check_pair(&self, source: usize, target: usize) -> Result<(), ChangeError> {
        self.check_index(source)?;
        self.check_index(target)?;
        if source == target {
            return Err(ChangeError::SameSourceTarget(source));
        }
        Ok(())
    }

    fn check_alpha(alpha: f64) -> Result<(), ChangeError> {
        if alpha > 0.0 && alpha <= 1.0 {
            Ok(())
        } else {
            Err(ChangeError::AlphaOutOfRange(alpha))
        }
    }

    fn check_floor(&self, would_be: usize) -> Result<(), ChangeError> {
        if would_be < Self::MIN_INVENTORY {
            Err(ChangeError::FloorViolation {
                would_be,
                floor: Self::MIN_INVENTORY,
            })
        } else {
            Ok(())
        }
    }

    /// Moves `alpha * p[source]` onto the existing phoneme `target`. The
    /// source is removed when its remaining mass is exactly zero.
    pub fn primary_split(
        &self,
        source: usize,
        target: usize,
        alpha: f64,
    ) -> Result<Self, ChangeError> {
        self.check_pair(source, target)?;
        Self::check_alpha(alpha)?;
        let moved = if alpha == 1.0 {
            self.probs[source]
        } else {
            alpha * self.probs[source]
        };
        let remaining = self.probs[source] - moved;
        if remaining == 0.0 {
            self.check_floor(self.len() - 1)?;
        }
        let mut out = self.clone();
        out.probs[target] += moved;
        out.probs[source] = remaining;
        if remaining == 0.0 {
            out.remove(source);
        }
        out.debug_check();
        Ok(out)
    }

    /// Moves `alpha * p[source]` onto a newly created phoneme with a fresh
    /// id, appended at the end. With `alpha = 1` the source is replaced.
    pub fn secondary_split(&self, source: usize, alpha: f64) -> Result<Self, ChangeError> {
        self.check_index(source)?;
        Self::check_alpha(alpha)?;
        let moved = if alpha == 1.0 {
            self.probs[source]
        } else {
            alpha * self.probs[source]
        };
        let remaining = self.probs[source] - moved;
        let mut out = self.clone();
        out.probs[source] = remaining;
        // A subnormal source can round the moved mass to zero; nothing is created then.
        if moved > 0.0 {
            out.probs.push(moved);
            out.ids.push(out.next_id);
            out.next_id += 1;
        }
        if remaining == 0.0 {
            out.remove(source);
        }
        out.debug_check();
        Ok(out)
    }

    /// Collapses `source` into `target`; the source is removed.
    pub fn merger(&self, source: usize, target: usize) -> Result<Self, ChangeError> {
        self.check_pair(source, target)?;
        self.check_floor(self.len() - 1)?;
        let mut out = self.clone();
        out.probs[target] += self.probs[source];
        out.remove(source);
        out.debug_check();
        Ok(out)
    }

    pub fn apply(&self, event: &ChangeEvent) -> Result<Self, ChangeError> {
        let alpha = || {
            event.alpha.ok_or_else(|| {
                ChangeError::InvalidDistribution(format!("{} needs alpha", event.kind))
            })
        };
        let target = || {
            event.target.ok_or_else(|| {
                ChangeError::InvalidDistribution(format!("{} needs a target", event.kind))
            })
        };
        match event.kind {
            ChangeType::PrimarySplit => self.primary_split(event.source, target()?, alpha()?),
            ChangeType::SecondarySplit => self.secondary_split(event.source, alpha()?),
            ChangeType::Merger => self.merger(event.source, target()?),
        }
    }

    fn remove(&mut self, index: usize) {
        self.probs.remove(index);
        self.ids.remove(index);
    }

    #[inline]
    fn debug_check(&self) {
        debug_assert!(
            (self.total_mass() - 1.0).abs() <= MASS_TOLERANCE,
            "mass drifted to {}",
            self.total_mass()
        );
    }
}
