//! Robustness of predicted success to independent per-sensor bit flips.
//!
//! Noise is injected at the predictor input: every bit of the
//! configuration flips with probability `p`. The expectation has a closed
//! form because the predictor is linear before clamping,
//! `E[x'] = x (1 - 2p) + p`. The Monte Carlo estimate clamps per sample.

use rand::Rng as _;
use rayon::prelude::*;

use crate::dataset::SensorConfiguration;
use crate::error::{Error, Result};
use crate::hybrid::TunedPredictor;
use crate::rng;

/// Flip probabilities of the reference interference study.
pub const DEFAULT_LEVELS: [f64; 8] = [0.0, 0.01, 0.03, 0.05, 0.10, 0.20, 0.30, 0.40];

/// Monte Carlo trials per independent random stream.
const TRIALS_PER_PARTITION: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct NoiseLevel(f64);

impl NoiseLevel {
    pub fn new(flip_probability: f64) -> Result<Self> {
        if (0.0..=0.5).contains(&flip_probability) {
            Ok(NoiseLevel(flip_probability))
        } else {
            Err(Error::Range(format!(
                "flip probability {flip_probability} outside [0, 0.5]"
            )))
        }
    }

    pub fn flip_probability(self) -> f64 {
        self.0
    }

    pub fn defaults() -> Vec<NoiseLevel> {
        DEFAULT_LEVELS.iter().map(|&p| NoiseLevel(p)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    /// `1.96 * sample_stddev / sqrt(trials)`.
    pub ci_half_width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSweepResult {
    pub levels: Vec<NoiseLevel>,
    pub analytic: Vec<f64>,
    pub monte_carlo: Vec<MonteCarloEstimate>,
    pub trials_per_level: usize,
    pub seed: u64,
}

impl NoiseSweepResult {
    /// `flip_probability,analytic,mc_mean,mc_ci`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("flip_probability,analytic,mc_mean,mc_ci\n");
        for ((level, a), mc) in self
            .levels
            .iter()
            .zip(&self.analytic)
            .zip(&self.monte_carlo)
        {
            out.push_str(&format!(
                "{},{},{},{}\n",
                level.0, a, mc.mean, mc.ci_half_width
            ));
        }
        out
    }
}

/// Expected prediction under flips, clamped after the expectation.
pub fn expected_under_flips(
    predictor: &TunedPredictor,
    config: &SensorConfiguration,
    level: NoiseLevel,
) -> Result<f64> {
    Error::check_dim(predictor.len(), config.len())?;
    let p = level.0;
    let sum: f64 = predictor
        .weights
        .iter()
        .zip(config.bits())
        .map(|(t, &x)| t * if x { 1.0 - p } else { p })
        .sum();
    Ok(predictor.predict_from_sum(sum))
}

/// Running mean / sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.n += 1;
        let d = v - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (v - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if other.n == 0 {
            return self;
        }
        if self.n == 0 {
            return other;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * other.n as f64 / n as f64,
            m2: self.m2 + other.m2 + d * d * (self.n as f64 * other.n as f64) / n as f64,
        }
    }
}

/// Average prediction over `trials` flipped copies of `config`. Trials are
/// split into fixed partitions, each with its own stream of the seed, and
/// merged in partition order.
pub fn monte_carlo_flips(
    predictor: &TunedPredictor,
    config: &SensorConfiguration,
    level: NoiseLevel,
    trials: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    Error::check_dim(predictor.len(), config.len())?;
    if trials == 0 {
        return Err(Error::InvalidSetting("trials must be >= 1".into()));
    }
    let p = level.0;
    let partitions = trials.div_ceil(TRIALS_PER_PARTITION);
    let parts: Vec<Moments> = (0..partitions)
        .into_par_iter()
        .map(|part| {
            let mut rng = rng::partition_stream(seed, part as u64);
            let count = TRIALS_PER_PARTITION.min(trials - part * TRIALS_PER_PARTITION);
            let mut m = Moments::default();
            for _ in 0..count {
                let sum: f64 = predictor
                    .weights
                    .iter()
                    .zip(config.bits())
                    .filter(|&(_, &x)| x != rng.random_bool(p))
                    .map(|(t, _)| t)
                    .sum();
                m.push(predictor.predict_from_sum(sum));
            }
            m
        })
        .collect();
    let total = parts.into_iter().fold(Moments::default(), Moments::merge);
    let variance = if total.n > 1 {
        (total.m2 / (total.n - 1) as f64).max(0.0)
    } else {
        0.0
    };
    Ok(MonteCarloEstimate {
        mean: total.mean,
        ci_half_width: 1.96 * variance.sqrt() / (total.n as f64).sqrt(),
    })
}

pub fn noise_sweep(
    predictor: &TunedPredictor,
    config: &SensorConfiguration,
    levels: &[NoiseLevel],
    trials: usize,
    seed: u64,
) -> Result<NoiseSweepResult> {
    if levels.is_empty() {
        return Err(Error::EmptyLevels);
    }
    let mut analytic = Vec::with_capacity(levels.len());
    let mut monte_carlo = Vec::with_capacity(levels.len());
    for (i, &level) in levels.iter().enumerate() {
        analytic.push(expected_under_flips(predictor, config, level)?);
        // Distinct seed per level so levels do not share flip patterns.
        let level_seed = seed
            .wrapping_add(i as u64)
            .wrapping_mul(0x9E37_79B9_7F4A_7C15);
        monte_carlo.push(monte_carlo_flips(
            predictor, config, level, trials, level_seed,
        )?);
    }
    Ok(NoiseSweepResult {
        levels: levels.to_vec(),
        analytic,
        monte_carlo,
        trials_per_level: trials,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hybrid::PredictorAnchors;

    fn predictor(weights: &[f64]) -> TunedPredictor {
        TunedPredictor::new(
            PredictorAnchors::new(0.28, 0.392).unwrap(),
            weights.to_vec(),
            "t",
        )
    }

    #[test]
    fn level_bounds() {
        assert!(NoiseLevel::new(0.5).is_ok());
        assert!(NoiseLevel::new(0.51).is_err());
        assert!(NoiseLevel::new(-0.01).is_err());
        assert_eq!(NoiseLevel::defaults().len(), 8);
    }

    #[test]
    fn zero_noise_matches_prediction() {
        let p = predictor(&[0.2, -0.1, 0.4, 0.3]);
        let c: SensorConfiguration = "1011".parse().unwrap();
        let level = NoiseLevel::new(0.0).unwrap();
        assert_eq!(
            expected_under_flips(&p, &c, level).unwrap(),
            p.predict(&c).unwrap()
        );
        let mc = monte_carlo_flips(&p, &c, level, 1000, 5).unwrap();
        assert_eq!(mc.mean, p.predict(&c).unwrap());
        assert_eq!(mc.ci_half_width, 0.0);
    }

    #[test]
    fn half_noise_forgets_configuration() {
        let p = predictor(&[0.2, -0.1, 0.4, 0.3]);
        let level = NoiseLevel::new(0.5).unwrap();
        let expected = 0.28 + 0.112 * 0.5 * 0.8;
        for bits in ["0000", "1111", "1010"] {
            let v = expected_under_flips(&p, &bits.parse().unwrap(), level).unwrap();
            assert!((v - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn per_bit_expectation_oracle() {
        let t = [0.759 / 21.0; 21];
        let p = predictor(&t);
        let c = SensorConfiguration::ones(21);
        let level = NoiseLevel::new(0.1).unwrap();
        // Each present bit survives with probability 0.9.
        let mut oracle = 0.0;
        for w in t {
            oracle += w * 0.9;
        }
        let expected = 0.28 + 0.112 * oracle;
        assert!((expected_under_flips(&p, &c, level).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let p = predictor(&[0.2, 0.1, 0.4, 0.3]);
        let c: SensorConfiguration = "1101".parse().unwrap();
        let level = NoiseLevel::new(0.2).unwrap();
        let a = monte_carlo_flips(&p, &c, level, 10_000, 9).unwrap();
        assert_eq!(a, monte_carlo_flips(&p, &c, level, 10_000, 9).unwrap());
        assert!(a.ci_half_width > 0.0);
        assert!(monte_carlo_flips(&p, &c, level, 0, 9).is_err());
    }

    #[test]
    fn sweep_shapes() {
        let p = predictor(&[0.25; 4]);
        let c = SensorConfiguration::ones(4);
        let sweep = noise_sweep(&p, &c, &NoiseLevel::defaults(), 200, 1).unwrap();
        assert_eq!(sweep.analytic.len(), 8);
        for w in sweep.analytic.windows(2) {
            assert!(w[1] < w[0]);
        }
        let csv = sweep.to_csv();
        assert_eq!(csv.lines().count(), 9);
        assert!(csv.starts_with("flip_probability,analytic,mc_mean,mc_ci\n0,0.392,0.392,0\n"));
        assert!(matches!(
            noise_sweep(&p, &c, &[], 10, 1),
            Err(Error::EmptyLevels)
        ));
    }
}
