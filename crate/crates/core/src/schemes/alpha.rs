use rand_core::RngCore;

use super::AlphaSampler;
use crate::rng;

/// Uniform on the open interval (0, 1).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct UniformOpenAlpha;

impl UniformOpenAlpha {
    pub const NAME: &'static str = "uniform-open";
}

impl AlphaSampler for UniformOpenAlpha {
    fn name(&self) -> &'static str {
        Self::NAME
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        rng::open_unit(rng)
    }
}
