//! Measurements on distributions and ensembles: entropy, rank-frequency
//! tables, Pearson correlation and log-linear regression of relative entropy
//! on inventory size.

pub mod special;

use thiserror::Error;

use crate::distribution::{PhonemeDistribution, PhonemeId};
use crate::engine::{pis_envelopes, EngineError, PisEnvelopes, TrajectoryRecord};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least 3 observations, got {0}")]
    TooFewObservations(usize),
    #[error("{0} has zero variance; correlation is undefined")]
    DegenerateVariance(&'static str),
    #[error("inventory size {0} is below 2")]
    InventoryTooSmall(usize),
}

/// Shannon entropy in bits.
pub fn entropy_bits(dist: &PhonemeDistribution) -> f64 {
    dist.probs()
        .iter()
        .map(|&p| -p * p.log2())
        .sum::<f64>()
        .max(0.0)
}

/// Entropy divided by its maximum `log2 V`. Exactly 1 when all
/// probabilities are equal.
pub fn relative_entropy(dist: &PhonemeDistribution) -> Result<f64, StatsError> {
    let v = dist.len();
    if v < 2 {
        return Err(StatsError::InventoryTooSmall(v));
    }
    let probs = dist.probs();
    if probs.iter().all(|&p| p == probs[0]) {
        return Ok(1.0);
    }
    Ok((entropy_bits(dist) / (v as f64).log2()).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropySummary {
    pub pis: usize,
    pub entropy_bits: f64,
    pub relative_entropy: f64,
}

impl EntropySummary {
    pub fn of(dist: &PhonemeDistribution) -> Result<Self, StatsError> {
        Ok(Self {
            pis: dist.len(),
            entropy_bits: entropy_bits(dist),
            relative_entropy: relative_entropy(dist)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankEntry {
    pub rank: usize,
    pub phoneme_id: PhonemeId,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankFrequencyTable {
    pub label: String,
    pub entries: Vec<RankEntry>,
}

/// Probabilities in descending order, ranks from 1. Ties keep ascending id
/// order.
pub fn rank_frequency(dist: &PhonemeDistribution, label: &str) -> RankFrequencyTable {
    let mut pairs: Vec<(PhonemeId, f64)> = dist.iter().collect();
    pairs.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    RankFrequencyTable {
        label: label.to_string(),
        entries: pairs
            .into_iter()
            .enumerate()
            .map(|(i, (phoneme_id, probability))| RankEntry {
                rank: i + 1,
                phoneme_id,
                probability,
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationResult {
    pub r: f64,
    /// Two-tailed, from `t = r sqrt((n-2)/(1-r^2))` on `n - 2` degrees of freedom.
    pub p_value: f64,
    pub n: usize,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sum_sq_dev(xs: &[f64], m: f64) -> f64 {
    xs.iter().map(|x| (x - m) * (x - m)).sum()
}

/// Spread indistinguishable from rounding noise counts as no spread.
fn is_degenerate(ss: f64, m: f64, n: usize) -> bool {
    let sd = (ss / n as f64).sqrt();
    sd.is_nan() || sd <= 1e-13 * m.abs().max(f64::MIN_POSITIVE)
}

/// Two-tailed p-value of a Pearson coefficient on `n` observations.
pub fn correlation_p_value(r: f64, n: usize) -> f64 {
    let df = (n - 2) as f64;
    if r.abs() >= 1.0 {
        return 0.0;
    }
    let t = r * (df / (1.0 - r * r)).sqrt();
    special::t_two_tailed(t, df)
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<CorrelationResult, StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch(xs.len(), ys.len()));
    }
    let n = xs.len();
    if n < 3 {
        return Err(StatsError::TooFewObservations(n));
    }
    let (mx, my) = (mean(xs), mean(ys));
    let sxx = sum_sq_dev(xs, mx);
    let syy = sum_sq_dev(ys, my);
    if is_degenerate(sxx, mx, n) {
        return Err(StatsError::DegenerateVariance("x"));
    }
    if is_degenerate(syy, my, n) {
        return Err(StatsError::DegenerateVariance("y"));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    Ok(CorrelationResult {
        r,
        p_value: correlation_p_value(r, n),
        n,
    })
}

/// Ordinary least squares `y = a + b ln(x)` with a 95% band for the
/// conditional mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionFit {
    pub intercept: f64,
    pub slope: f64,
    pub se_intercept: f64,
    pub se_slope: f64,
    pub residual_variance: f64,
    pub n: usize,
    /// Mean of `ln x`.
    pub mean_log_x: f64,
    /// Sum of squared deviations of `ln x`.
    pub sxx: f64,
    /// Two-tailed 5% critical value of t on `n - 2` degrees of freedom.
    pub t_critical: f64,
    pub x_min: f64,
    pub x_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandPoint {
    pub x: f64,
    pub fit: f64,
    pub lower: f64,
    pub upper: f64,
}

impl RegressionFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.intercept + self.slope * x.ln()
    }

    pub fn band(&self, x: f64) -> BandPoint {
        let lx = x.ln();
        let fit = self.intercept + self.slope * lx;
        let se = (self.residual_variance
            * (1.0 / self.n as f64 + (lx - self.mean_log_x).powi(2) / self.sxx))
            .sqrt();
        let half = self.t_critical * se;
        BandPoint {
            x,
            fit,
            lower: fit - half,
            upper: fit + half,
        }
    }

    /// `points` values log-spaced between the smallest and largest observed x.
    pub fn band_grid(&self, points: usize) -> Vec<BandPoint> {
        let (lo, hi) = (self.x_min.ln(), self.x_max.ln());
        match points {
            0 => Vec::new(),
            1 => vec![self.band(self.x_min)],
            _ => (0..points)
                .map(|i| {
                    let x = if i == points - 1 {
                        self.x_max
                    } else {
                        (lo + (hi - lo) * i as f64 / (points - 1) as f64).exp()
                    };
                    self.band(x)
                })
                .collect(),
        }
    }
}

/// Regresses `ys` on `ln(xs)`; every x must be positive.
pub fn log_linear_fit(xs: &[f64], ys: &[f64]) -> Result<RegressionFit, StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch(xs.len(), ys.len()));
    }
    let n = xs.len();
    if n < 3 {
        return Err(StatsError::TooFewObservations(n));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let mx = mean(&lx);
    // constant responses fit exactly, with no rounding left in the mean
    let my = if ys.iter().all(|&y| y == ys[0]) {
        ys[0]
    } else {
        mean(ys)
    };
    let sxx = sum_sq_dev(&lx, mx);
    if is_degenerate(sxx, mx, n) {
        return Err(StatsError::DegenerateVariance("ln x"));
    }
    let sxy: f64 = lx.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = lx
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let df = (n - 2) as f64;
    let residual_variance = rss / df;
    let (x_min, x_max) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    Ok(RegressionFit {
        intercept,
        slope,
        se_intercept: (residual_variance * (1.0 / n as f64 + mx * mx / sxx)).sqrt(),
        se_slope: (residual_variance / sxx).sqrt(),
        residual_variance,
        n,
        mean_log_x: mx,
        sxx,
        t_critical: special::t_critical_two_tailed(0.05, df),
        x_min,
        x_max,
    })
}

pub fn loglinear_fit(pis: &[usize], rel_ent: &[f64]) -> Result<RegressionFit, StatsError> {
    if let Some(&v) = pis.iter().find(|&&v| v < 2) {
        return Err(StatsError::InventoryTooSmall(v));
    }
    let xs: Vec<f64> = pis.iter().map(|&v| v as f64).collect();
    log_linear_fit(&xs, rel_ent)
}

/// Inventory size against relative entropy across languages.
#[derive(Debug, Clone, PartialEq)]
pub struct PisEntropyAnalysis {
    pub pairs: Vec<EntropySummary>,
    /// Between `ln V` and relative entropy.
    pub correlation: Result<CorrelationResult, StatsError>,
    pub regression: Result<RegressionFit, StatsError>,
}

impl PisEntropyAnalysis {
    pub fn of<'a>(
        dists: impl IntoIterator<Item = &'a PhonemeDistribution>,
    ) -> Result<Self, StatsError> {
        let pairs = dists
            .into_iter()
            .map(EntropySummary::of)
            .collect::<Result<Vec<_>, _>>()?;
        let pis: Vec<usize> = pairs.iter().map(|p| p.pis).collect();
        let log_pis: Vec<f64> = pis.iter().map(|&v| (v as f64).ln()).collect();
        let rel: Vec<f64> = pairs.iter().map(|p| p.relative_entropy).collect();
        Ok(Self {
            correlation: pearson(&log_pis, &rel),
            regression: loglinear_fit(&pis, &rel),
            pairs,
        })
    }
}

/// Final-state pairs, their correlation and the log-linear fit. Fails when
/// either the correlation or the fit is undefined.
pub fn pis_vs_relative_entropy(
    records: &[TrajectoryRecord],
) -> Result<(Vec<EntropySummary>, CorrelationResult, RegressionFit), StatsError> {
    let analysis = PisEntropyAnalysis::of(records.iter().map(|r| &r.final_distribution))?;
    let correlation = analysis.correlation?;
    let regression = analysis.regression?;
    Ok((analysis.pairs, correlation, regression))
}

/// Everything measured on a simulated ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSummary {
    pub envelopes: PisEnvelopes,
    pub rank_tables: Vec<RankFrequencyTable>,
    pub pis_entropy: PisEntropyAnalysis,
}

pub fn summarize_ensemble(records: &[TrajectoryRecord]) -> Result<EnsembleSummary, EngineError> {
    let envelopes = pis_envelopes(records)?;
    let rank_tables = records
        .iter()
        .map(|r| rank_frequency(&r.final_distribution, &r.language_index.to_string()))
        .collect();
    let pis_entropy = PisEntropyAnalysis::of(records.iter().map(|r| &r.final_distribution))
        .expect("final distributions always have at least two phonemes");
    Ok(EnsembleSummary {
        envelopes,
        rank_tables,
        pis_entropy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(p: &[f64]) -> PhonemeDistribution {
        PhonemeDistribution::from_probs(p.to_vec()).unwrap()
    }

    #[test]
    fn entropy_cases() {
        let u34 = PhonemeDistribution::uniform(34).unwrap();
        assert!((entropy_bits(&u34) - 34f64.log2()).abs() < 1e-12);
        assert!((34f64.log2() - 5.0875).abs() < 1e-4);
        assert_eq!(entropy_bits(&d(&[0.5, 0.5])), 1.0);
        assert!((entropy_bits(&d(&[0.5, 0.25, 0.25])) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn relative_entropy_cases() {
        for v in [2, 3, 34, 101] {
            let u = PhonemeDistribution::uniform(v).unwrap();
            assert_eq!(relative_entropy(&u).unwrap(), 1.0);
        }
        let skew = d(&[0.999_999_999, 1e-9]);
        assert!(relative_entropy(&skew).unwrap() < 0.001);
        let r = relative_entropy(&d(&[0.5, 0.25, 0.25])).unwrap();
        assert!((r - 1.5 / 3f64.log2()).abs() < 1e-12);
        assert!((r - 0.9464).abs() < 1e-4);
    }

    #[test]
    fn rank_tables() {
        let t = rank_frequency(&d(&[0.2, 0.5, 0.3]), "x");
        let got: Vec<_> = t.entries.iter().map(|e| (e.rank, e.probability)).collect();
        assert_eq!(got, vec![(1, 0.5), (2, 0.3), (3, 0.2)]);

        let u = rank_frequency(&PhonemeDistribution::uniform(4).unwrap(), "u");
        let ids: Vec<_> = u.entries.iter().map(|e| e.phoneme_id).collect();
        assert_eq!(ids, vec![0, 1, 2, 3]);
        assert!(u.entries.iter().all(|e| e.probability == 0.25));
    }

    #[test]
    fn pearson_perfect_and_linear() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64 * 1.3 + 0.2).collect();
        let c = pearson(&xs, &xs).unwrap();
        assert!((c.r - 1.0).abs() < 1e-15);
        assert!(c.p_value < 1e-12);
        let c = pearson(&[1.0, 2.0, 3.0, 4.0], &[2.0, 4.0, 6.0, 8.0]).unwrap();
        assert!((c.r - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pearson_threshold_at_reported_strength() {
        // r = .47 on 400 languages is far beyond p = .01
        assert!(correlation_p_value(0.47, 400) < 0.01);
        assert!(correlation_p_value(-0.12, 400) < 0.02);
        assert!(correlation_p_value(-0.12, 400) > 0.01);
    }

    #[test]
    fn pearson_errors() {
        assert_eq!(
            pearson(&[1.0, 2.0], &[1.0, 2.0]),
            Err(StatsError::TooFewObservations(2))
        );
        assert_eq!(
            pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0]),
            Err(StatsError::LengthMismatch(3, 2))
        );
        assert_eq!(
            pearson(&[1.0, 2.0, 3.0], &[1.0, 1.0, 1.0]),
            Err(StatsError::DegenerateVariance("y"))
        );
    }

    #[test]
    fn regression_exact_and_flat() {
        let pis: Vec<usize> = (5..60).step_by(3).collect();
        let ys: Vec<f64> = pis.iter().map(|&v| 0.9 - 0.05 * (v as f64).ln()).collect();
        let fit = loglinear_fit(&pis, &ys).unwrap();
        assert!((fit.slope + 0.05).abs() < 1e-10);
        assert!((fit.intercept - 0.9).abs() < 1e-10);

        let flat = vec![0.7; pis.len()];
        let fit = loglinear_fit(&pis, &flat).unwrap();
        assert_eq!(fit.slope, 0.0);
        for b in fit.band_grid(11) {
            assert_eq!(b.upper - b.lower, 0.0);
        }
    }

    #[test]
    fn regression_errors() {
        assert!(loglinear_fit(&[3, 3, 3], &[0.1, 0.2, 0.3]).is_err());
        assert!(loglinear_fit(&[1, 3, 4], &[0.1, 0.2, 0.3]).is_err());
        assert!(loglinear_fit(&[2, 3], &[0.1, 0.2]).is_err());
    }

    #[test]
    fn uniform_finals_have_undefined_correlation() {
        let dists: Vec<_> = (2..10)
            .map(|v| PhonemeDistribution::uniform(v).unwrap())
            .collect();
        let a = PisEntropyAnalysis::of(&dists).unwrap();
        assert_eq!(a.correlation, Err(StatsError::DegenerateVariance("y")));
        assert!(a.regression.is_ok());
    }

    proptest! {
        #[test]
        fn relative_entropy_bounded_and_permutation_invariant(
            w in prop::collection::vec(1e-9f64..1.0, 2..40),
            rot in 0usize..40,
        ) {
            let a = PhonemeDistribution::from_weights(&w).unwrap();
            let mut w2 = w.clone();
            let k = rot % w2.len();
            w2.rotate_left(k);
            let b = PhonemeDistribution::from_weights(&w2).unwrap();
            let ra = relative_entropy(&a).unwrap();
            prop_assert!((0.0..=1.0).contains(&ra));
            prop_assert!((entropy_bits(&a) - entropy_bits(&b)).abs() < 1e-12);
        }

        #[test]
        fn pearson_symmetric_and_affine_invariant(
            pts in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3..60),
            scale in 0.1f64..10.0,
            shift in -5.0f64..5.0,
        ) {
            let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
            if let Ok(c) = pearson(&xs, &ys) {
                prop_assert_eq!(c.r, pearson(&ys, &xs).unwrap().r);
                let xs2: Vec<f64> = xs.iter().map(|x| scale * x + shift).collect();
                prop_assert!((c.r - pearson(&xs2, &ys).unwrap().r).abs() < 1e-12);
                prop_assert!((-1.0..=1.0).contains(&c.r));
            }
        }

        #[test]
        fn band_contains_fit(
            pts in prop::collection::vec((2usize..200, 0.0f64..1.0), 4..80),
        ) {
            let pis: Vec<usize> = pts.iter().map(|p| p.0).collect();
            let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
            if let Ok(fit) = loglinear_fit(&pis, &ys) {
                for b in fit.band_grid(25) {
                    prop_assert!(b.lower <= b.fit && b.fit <= b.upper);
                }
            }
        }
    }
}
