//! TOML configuration for evaluation runs.

use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::eval::confidence::ConfidenceThresholds;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot parse config: {message}")]
    Parse { message: String },
    #[error("invalid config: {message}")]
    Invalid { message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Per-word transcription corruption weights for the noise model. The chance
/// that a word comes out garbled grows with its donor-unit share and with the
/// number of concatenation joins inside it. Both default to zero, which
/// disables corruption entirely.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseWeights {
    pub donor_weight: f64,
    pub join_weight: f64,
}

impl Default for NoiseWeights {
    fn default() -> NoiseWeights {
        NoiseWeights {
            donor_weight: 0.0,
            join_weight: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    /// Global seed; per-trial seeds are derived from it.
    pub seed: u64,
    /// Crossfade applied at every unit join.
    pub crossfade_ms: f64,
    /// When set, restrict target-inventory diphones to the most popular
    /// fraction of the frequency table.
    pub mask_fraction: Option<f64>,
    /// Profile whose inventory backfills diphones the target cannot supply.
    pub donor_profile: Option<String>,
    pub confidence: ConfidenceThresholds,
    pub noise: NoiseWeights,
}

impl Default for EvalConfig {
    fn default() -> EvalConfig {
        EvalConfig {
            seed: 42,
            crossfade_ms: 5.0,
            mask_fraction: None,
            donor_profile: None,
            confidence: ConfidenceThresholds::default(),
            noise: NoiseWeights::default(),
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |message: String| ConfigError::Invalid { message };
        if !self.crossfade_ms.is_finite() || self.crossfade_ms < 0.0 {
            return Err(invalid(format!(
                "crossfade_ms must be non-negative, got {}",
                self.crossfade_ms
            )));
        }
        if let Some(fraction) = self.mask_fraction {
            if !(fraction > 0.0 && fraction <= 1.0) {
                return Err(invalid(format!(
                    "mask_fraction must lie in (0, 1], got {fraction}"
                )));
            }
        }
        self.confidence
            .validate()
            .map_err(|e| invalid(e.to_string()))?;
        for (name, weight) in [
            ("noise.donor_weight", self.noise.donor_weight),
            ("noise.join_weight", self.noise.join_weight),
        ] {
            if !weight.is_finite() || weight < 0.0 {
                return Err(invalid(format!(
                    "{name} must be non-negative, got {weight}"
                )));
            }
        }
        Ok(())
    }
}

pub fn parse_config(text: &str) -> Result<EvalConfig, ConfigError> {
    let config: EvalConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
        message: e.to_string(),
    })?;
    config.validate()?;
    Ok(config)
}

pub fn load_config<P: AsRef<Path>>(path: P) -> Result<EvalConfig, ConfigError> {
    parse_config(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_all_defaults() {
        let config = parse_config("").unwrap();
        assert_eq!(config, EvalConfig::default());
        assert_eq!(config.seed, 42);
        assert_eq!(config.crossfade_ms, 5.0);
        assert_eq!(config.mask_fraction, None);
        assert_eq!(config.noise.donor_weight, 0.0);
    }

    #[test]
    fn fields_override_individually() {
        let config = parse_config(
            "seed = 7\nmask_fraction = 0.2\ndonor_profile = \"p288\"\n\
             [confidence]\nfull = 0.9\n[noise]\njoin_weight = 0.01\n",
        )
        .unwrap();
        assert_eq!(config.seed, 7);
        assert_eq!(config.mask_fraction, Some(0.2));
        assert_eq!(config.donor_profile.as_deref(), Some("p288"));
        assert_eq!(config.confidence.full, 0.9);
        assert_eq!(config.confidence.coin_flip, 0.5);
        assert_eq!(config.noise.join_weight, 0.01);
        assert_eq!(config.noise.donor_weight, 0.0);
    }

    #[test]
    fn unknown_fields_and_bad_values_are_rejected() {
        assert!(matches!(
            parse_config("sneed = 3"),
            Err(ConfigError::Parse { .. })
        ));
        assert!(matches!(
            parse_config("mask_fraction = 0.0"),
            Err(ConfigError::Invalid { .. })
        ));
        assert!(matches!(
            parse_config("crossfade_ms = -1.0"),
            Err(ConfigError::Invalid { .. })
        ));
        assert!(matches!(
            parse_config("[confidence]\nlow = 0.9"),
            Err(ConfigError::Invalid { .. })
        ));
        assert!(matches!(
            parse_config("[noise]\ndonor_weight = -0.5"),
            Err(ConfigError::Invalid { .. })
        ));
    }

    #[test]
    fn config_round_trips_through_toml() {
        let mut config = EvalConfig::default();
        config.seed = 99;
        config.mask_fraction = Some(0.4);
        let text = toml::to_string(&config).unwrap();
        assert_eq!(parse_config(&text).unwrap(), config);
    }
}
