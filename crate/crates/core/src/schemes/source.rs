use rand_core::RngCore;

use super::SourceSampler;
use crate::distribution::PhonemeDistribution;
use crate::rng;

/// Every live phoneme equally likely.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct UniformSource;

impl UniformSource {
    pub const NAME: &'static str = "uniform";
}

impl SourceSampler for UniformSource {
    fn name(&self) -> &'static str {
        Self::NAME
    }

    fn weights(&self, dist: &PhonemeDistribution) -> Vec<f64> {
        vec![1.0 / dist.len() as f64; dist.len()]
    }

    fn sample(&self, dist: &PhonemeDistribution, rng: &mut dyn RngCore) -> usize {
        rng::index(rng, dist.len())
    }
}

/// Selection probability proportional to surprisal `-ln p`, so rare phonemes
/// lose mass more often.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SurprisalSource;

impl SurprisalSource {
    pub const NAME: &'static str = "surprisal";

    /// `-ln p`, clamped at zero. A dominant phoneme can accumulate a few ulps
    /// above 1 through rounding.
    #[inline]
    pub fn surprisal(p: f64) -> f64 {
        (-p.ln()).max(0.0)
    }
}

impl SourceSampler for SurprisalSource {
    fn name(&self) -> &'static str {
        Self::NAME
    }

    fn weights(&self, dist: &PhonemeDistribution) -> Vec<f64> {
        let s: Vec<f64> = dist.probs().iter().map(|&p| Self::surprisal(p)).collect();
        let total: f64 = s.iter().sum();
        s.into_iter().map(|x| x / total).collect()
    }

    fn sample(&self, dist: &PhonemeDistribution, rng: &mut dyn RngCore) -> usize {
        let probs = dist.probs();
        // total >= ln 2 whenever V >= 2: at least one phoneme has p <= 1/2
        let total: f64 = probs.iter().map(|&p| Self::surprisal(p)).sum();
        debug_assert!(total > 0.0);
        let u = rng::unit(rng) * total;
        let mut acc = 0.0;
        let mut last = 0;
        for (i, &p) in probs.iter().enumerate() {
            let w = Self::surprisal(p);
            if w <= 0.0 {
                continue;
            }
            acc += w;
            last = i;
            if u < acc {
                return i;
            }
        }
        last
    }
}
