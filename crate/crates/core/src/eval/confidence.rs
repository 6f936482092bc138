//! Simulated recognizer confidence from synthesis provenance.
//!
//! The recognizer model reports one of four discrete confidence levels. We
//! derive the level from the fraction of synthesis units taken from the
//! profile under attack: high fractions always score top confidence, a middle
//! band is a seeded coin flip between the top two levels, and thin fractions
//! degrade to low or zero confidence.

use rand::Rng;
use serde::{Deserialize, Serialize};

/// What the simulation does and does not claim. Kept in the library so every
/// report can carry the caveat verbatim.
pub const SIMULATION_NOTE: &str = "Confidence levels are simulated from unit \
provenance (the fraction of output audio drawn from the attacked profile's \
own recordings); they are not measurements of a production speaker-recognition \
system, and this toolkit evaluates neither human intelligibility of the \
synthesized audio nor on-device performance.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConfidenceLevel {
    Rejected,
    Low,
    Medium,
    High,
}

impl ConfidenceLevel {
    /// The numeric score the recognizer reports for this level.
    pub fn value(self) -> u32 {
        match self {
            ConfidenceLevel::Rejected => 0,
            ConfidenceLevel::Low => 100,
            ConfidenceLevel::Medium => 200,
            ConfidenceLevel::High => 300,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("bad confidence thresholds: {message}")]
pub struct ConfidenceConfigError {
    pub message: &'static str,
}

/// Target-fraction cut points for the confidence bands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfidenceThresholds {
    /// At or above this fraction the level is always [`ConfidenceLevel::High`].
    pub full: f64,
    /// At or above this fraction the level is a coin flip between high and
    /// medium.
    pub coin_flip: f64,
    /// At or above this fraction the level is [`ConfidenceLevel::Medium`].
    pub medium: f64,
    /// At or above this fraction the level is [`ConfidenceLevel::Low`];
    /// anything below is rejected.
    pub low: f64,
    /// Probability that the coin-flip band resolves high.
    pub coin_flip_p: f64,
}

impl Default for ConfidenceThresholds {
    fn default() -> ConfidenceThresholds {
        ConfidenceThresholds {
            full: 0.8,
            coin_flip: 0.5,
            medium: 0.2,
            low: 0.05,
            coin_flip_p: 0.5,
        }
    }
}

impl ConfidenceThresholds {
    pub fn validate(&self) -> Result<(), ConfidenceConfigError> {
        let bands = [self.low, self.medium, self.coin_flip, self.full];
        if bands.iter().any(|b| !b.is_finite()) {
            return Err(ConfidenceConfigError {
                message: "thresholds must be finite",
            });
        }
        if !(0.0 < self.low && self.full <= 1.0) {
            return Err(ConfidenceConfigError {
                message: "thresholds must lie in (0, 1]",
            });
        }
        if bands.windows(2).any(|pair| pair[0] > pair[1]) {
            return Err(ConfidenceConfigError {
                message: "thresholds must be ordered low <= medium <= coin_flip <= full",
            });
        }
        if !(0.0..=1.0).contains(&self.coin_flip_p) || !self.coin_flip_p.is_finite() {
            return Err(ConfidenceConfigError {
                message: "coin_flip_p must lie in [0, 1]",
            });
        }
        Ok(())
    }
}

/// Maps a target-unit fraction to a confidence level. The only randomness is
/// the coin-flip band, so results are reproducible for a seeded `rng`.
pub fn simulate_confidence(
    fraction: f64,
    thresholds: &ConfidenceThresholds,
    rng: &mut impl Rng,
) -> ConfidenceLevel {
    let fraction = fraction.clamp(0.0, 1.0);
    if fraction >= thresholds.full {
        ConfidenceLevel::High
    } else if fraction >= thresholds.coin_flip {
        if rng.gen::<f64>() < thresholds.coin_flip_p {
            ConfidenceLevel::High
        } else {
            ConfidenceLevel::Medium
        }
    } else if fraction >= thresholds.medium {
        ConfidenceLevel::Medium
    } else if fraction >= thresholds.low {
        ConfidenceLevel::Low
    } else {
        ConfidenceLevel::Rejected
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn level(fraction: f64, seed: u64) -> ConfidenceLevel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        simulate_confidence(fraction, &ConfidenceThresholds::default(), &mut rng)
    }

    #[test]
    fn deterministic_bands_ignore_the_rng() {
        for seed in 0..8 {
            assert_eq!(level(1.0, seed), ConfidenceLevel::High);
            assert_eq!(level(0.8, seed), ConfidenceLevel::High);
            assert_eq!(level(0.35, seed), ConfidenceLevel::Medium);
            assert_eq!(level(0.1, seed), ConfidenceLevel::Low);
            assert_eq!(level(0.01, seed), ConfidenceLevel::Rejected);
            assert_eq!(level(0.0, seed), ConfidenceLevel::Rejected);
        }
    }

    #[test]
    fn level_values_are_the_reported_scores() {
        assert_eq!(ConfidenceLevel::Rejected.value(), 0);
        assert_eq!(ConfidenceLevel::Low.value(), 100);
        assert_eq!(ConfidenceLevel::Medium.value(), 200);
        assert_eq!(ConfidenceLevel::High.value(), 300);
        assert!(ConfidenceLevel::Rejected < ConfidenceLevel::High);
    }

    #[test]
    fn coin_flip_band_splits_evenly_over_seeds() {
        let high = (0..1000)
            .filter(|&seed| level(0.5, seed) == ConfidenceLevel::High)
            .count();
        let rate = high as f64 / 1000.0;
        assert!((rate - 0.5).abs() < 0.05, "high rate {rate}");
    }

    #[test]
    fn thresholds_validate_ordering_and_range() {
        assert!(ConfidenceThresholds::default().validate().is_ok());

        let mut swapped = ConfidenceThresholds::default();
        swapped.medium = 0.9;
        assert!(swapped.validate().is_err());

        let mut zero_low = ConfidenceThresholds::default();
        zero_low.low = 0.0;
        assert!(zero_low.validate().is_err());

        let mut bad_p = ConfidenceThresholds::default();
        bad_p.coin_flip_p = 1.5;
        assert!(bad_p.validate().is_err());

        let mut nan = ConfidenceThresholds::default();
        nan.full = f64::NAN;
        assert!(nan.validate().is_err());
    }

    proptest! {
        /// With a fixed seed, a larger target fraction never scores lower.
        #[test]
        fn monotone_in_fraction_for_fixed_seed(
            a in 0.0f64..=1.0,
            b in 0.0f64..=1.0,
            seed in any::<u64>(),
        ) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(level(lo, seed) <= level(hi, seed));
        }
    }
}
