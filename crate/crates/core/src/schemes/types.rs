use std::sync::Arc;

use super::{SchemeError, SchemeParams, TypeProbabilities, TypeScheme};

/// The same probabilities at every inventory size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantTypes(pub TypeProbabilities);

impl ConstantTypes {
    pub const NAME: &'static str = "constant";
    pub const PARAMS: &'static [&'static str] = &["p_primary", "p_secondary", "p_merger"];

    pub fn equal() -> Self {
        Self(TypeProbabilities::equal())
    }

    /// Missing keys default to 1/3.
    pub fn from_params(params: &SchemeParams) -> Result<Arc<dyn TypeScheme>, SchemeError> {
        let third = 1.0 / 3.0;
        let probs = TypeProbabilities::new(
            params.parse_or("p_primary", third)?,
            params.parse_or("p_secondary", third)?,
            params.parse_or("p_merger", third)?,
        )?;
        Ok(Arc::new(Self(probs)))
    }
}

impl TypeScheme for ConstantTypes {
    fn name(&self) -> &'static str {
        Self::NAME
    }

    fn params(&self) -> Vec<(&'static str, String)> {
        vec![
            ("p_primary", self.0.primary.to_string()),
            ("p_secondary", self.0.secondary.to_string()),
            ("p_merger", self.0.merger.to_string()),
        ]
    }

    fn probabilities(&self, inventory: usize) -> Result<TypeProbabilities, SchemeError> {
        if inventory < 2 {
            return Err(SchemeError::InventoryTooSmall(inventory));
        }
        Ok(self.0)
    }
}

/// Exponential bias toward a preferred inventory size `mu`:
///
/// ```text
/// P(p) = 1/k,  P(s) = exp((mu - V)/mu)/k,  P(m) = exp((V - mu)/mu)/k
/// k    = 1 + exp((mu - V)/mu) + exp((V - mu)/mu)
/// ```
///
/// Secondary splits become rarer above `mu` and mergers rarer below it; all
/// three probabilities stay positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdaptiveCentralTendency {
    mu: u32,
}

impl AdaptiveCentralTendency {
    pub const NAME: &'static str = "adaptive";
    pub const PARAMS: &'static [&'static str] = &["mu"];

    pub fn new(mu: u32) -> Result<Self, SchemeError> {
        if mu < 2 {
            return Err(SchemeError::InvalidParam {
                key: "mu".into(),
                value: mu.to_string(),
                reason: "must be at least 2".into(),
            });
        }
        Ok(Self { mu })
    }

    pub fn mu(&self) -> u32 {
        self.mu
    }

    pub fn from_params(params: &SchemeParams) -> Result<Arc<dyn TypeScheme>, SchemeError> {
        let raw = params.get("mu").ok_or_else(|| SchemeError::InvalidParam {
            key: "mu".into(),
            value: String::new(),
            reason: "required by the adaptive scheme".into(),
        })?;
        let mu =
            raw.trim()
                .parse()
                .map_err(|e: std::num::ParseIntError| SchemeError::InvalidParam {
                    key: "mu".into(),
                    value: raw.into(),
                    reason: e.to_string(),
                })?;
        Ok(Arc::new(Self::new(mu)?))
    }
}

impl TypeScheme for AdaptiveCentralTendency {
    fn name(&self) -> &'static str {
        Self::NAME
    }

    fn params(&self) -> Vec<(&'static str, String)> {
        vec![("mu", self.mu.to_string())]
    }

    fn probabilities(&self, inventory: usize) -> Result<TypeProbabilities, SchemeError> {
        if inventory < 2 {
            return Err(SchemeError::InventoryTooSmall(inventory));
        }
        let mu = f64::from(self.mu);
        let v = inventory as f64;
        let grow = ((mu - v) / mu).exp();
        let shrink = ((v - mu) / mu).exp();
        // (grow + shrink) commutes exactly, which keeps the s/m mirror symmetry bit-exact
        let k = 1.0 + (grow + shrink);
        Ok(TypeProbabilities {
            primary: 1.0 / k,
            secondary: grow / k,
            merger: shrink / k,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_at_mu() {
        let s = AdaptiveCentralTendency::new(34).unwrap();
        let p = s.probabilities(34).unwrap();
        assert_eq!(p.as_array(), [1.0 / 3.0; 3]);
    }

    #[test]
    fn twice_mu_matches_direct_arithmetic() {
        let s = AdaptiveCentralTendency::new(34).unwrap();
        let p = s.probabilities(68).unwrap();
        let e = std::f64::consts::E;
        let k = 1.0 + 1.0 / e + e;
        assert!((k - 4.086_161_269_630_488).abs() < 1e-12);
        assert!((p.primary - 1.0 / k).abs() < 1e-12);
        assert!((p.secondary - (1.0 / e) / k).abs() < 1e-12);
        assert!((p.merger - e / k).abs() < 1e-12);
        assert!((p.merger - 0.6652).abs() < 1e-4);
    }

    #[test]
    fn constant_ignores_inventory() {
        let s = ConstantTypes::equal();
        for v in [2, 34, 500] {
            assert_eq!(s.probabilities(v).unwrap(), TypeProbabilities::equal());
        }
        assert_eq!(s.probabilities(1), Err(SchemeError::InventoryTooSmall(1)));
    }

    #[test]
    fn mu_validation() {
        assert!(AdaptiveCentralTendency::new(1).is_err());
        assert!(AdaptiveCentralTendency::from_params(&SchemeParams::new()).is_err());
        assert!(
            AdaptiveCentralTendency::from_params(&SchemeParams::new().with("mu", "3.5")).is_err()
        );
    }

    #[test]
    fn monotone_and_symmetric() {
        let s = AdaptiveCentralTendency::new(34).unwrap();
        let all: Vec<_> = (2..=200).map(|v| s.probabilities(v).unwrap()).collect();
        for w in all.windows(2) {
            assert!(w[1].merger > w[0].merger);
            assert!(w[1].secondary < w[0].secondary);
        }
        for p in &all {
            assert!(p.as_array().iter().all(|x| *x > 0.0));
            assert!((p.as_array().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
        for d in 0..32 {
            let up = s.probabilities(34 + d).unwrap();
            let down = s.probabilities(34 - d).unwrap();
            assert_eq!(up.secondary, down.merger);
            assert_eq!(up.merger, down.secondary);
        }
    }
}
