use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Remedy applied when population diversity drops below the threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiversityAction {
    /// Re-mutate every non-elite individual with doubled spread.
    Mutate,
    /// Swap the worst fifth of the population for fresh random individuals.
    Replace,
}

impl std::str::FromStr for DiversityAction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mutate" => Ok(Self::Mutate),
            "replace" => Ok(Self::Replace),
            other => Err(Error::arg(format!(
                "unknown diversity action {other:?} (expected mutate or replace)"
            ))),
        }
    }
}

/// Fraction of the population swapped out by [`DiversityAction::Replace`].
pub const REPLACE_FRACTION: f64 = 0.2;

pub const P_MUT_RANGE: (f64, f64) = (0.01, 0.5);
pub const P_CROSS_RANGE: (f64, f64) = (0.3, 0.95);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GAConfig {
    pub population_size: usize,
    pub generations: usize,
    /// Initial per-gene mutation probability.
    pub p_mut: f64,
    /// Initial crossover probability.
    pub p_cross: f64,
    /// Average-fitness gain over `interval` generations below which the
    /// operator probabilities are raised.
    pub delta: f64,
    pub interval: usize,
    pub delta_p: f64,
    /// Stop once the best fitness gained less than `epsilon` over this many
    /// generations. Zero disables early stopping.
    pub early_stop_rounds: usize,
    pub epsilon: f64,
    pub diversity_threshold: f64,
    pub diversity_action: DiversityAction,
    pub tournament_size: usize,
    pub elite_count: usize,
    /// Mutation std of `evo_time` as a fraction of its range.
    pub sigma_scale: f64,
    pub evo_min: f64,
    pub evo_max: f64,
    pub slot_min: u32,
    pub slot_max: u32,
    pub master_seed: u64,
}

impl Default for GAConfig {
    fn default() -> Self {
        Self {
            population_size: 50,
            generations: 30,
            p_mut: 0.2,
            p_cross: 0.7,
            delta: 0.001,
            interval: 5,
            delta_p: 0.01,
            early_stop_rounds: 20,
            epsilon: 1e-4,
            diversity_threshold: 0.5,
            diversity_action: DiversityAction::Mutate,
            tournament_size: 3,
            elite_count: 1,
            sigma_scale: 0.1,
            evo_min: 0.5,
            evo_max: 5.0,
            slot_min: 2,
            slot_max: 30,
            master_seed: 0,
        }
    }
}

impl GAConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::arg(msg));
        if self.population_size < 2 {
            return fail(format!("population_size must be at least 2, got {}", self.population_size));
        }
        for (name, p) in [("p_mut", self.p_mut), ("p_cross", self.p_cross)] {
            if !(p > 0.0 && p < 1.0) {
                return fail(format!("{name} must lie strictly between 0 and 1, got {p}"));
            }
        }
        if self.tournament_size == 0 || self.tournament_size > self.population_size {
            return fail(format!(
                "tournament_size must be in 1..={}, got {}",
                self.population_size, self.tournament_size
            ));
        }
        if self.elite_count >= self.population_size {
            return fail(format!(
                "elite_count must be below population_size, got {}",
                self.elite_count
            ));
        }
        if self.interval == 0 {
            return fail("interval must be at least 1".into());
        }
        if !(self.evo_min > 0.0) || !(self.evo_min <= self.evo_max) || !self.evo_max.is_finite() {
            return fail(format!(
                "evo_time bounds must satisfy 0 < evo_min <= evo_max < inf, got [{}, {}]",
                self.evo_min, self.evo_max
            ));
        }
        if self.slot_min == 0 || self.slot_min > self.slot_max {
            return fail(format!(
                "num_tslots bounds must satisfy 1 <= slot_min <= slot_max, got [{}, {}]",
                self.slot_min, self.slot_max
            ));
        }
        for (name, v) in [
            ("delta", self.delta),
            ("delta_p", self.delta_p),
            ("epsilon", self.epsilon),
            ("diversity_threshold", self.diversity_threshold),
            ("sigma_scale", self.sigma_scale),
        ] {
            if !v.is_finite() || v < 0.0 {
                return fail(format!("{name} must be finite and non-negative, got {v}"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        GAConfig::default().validate().unwrap();
    }

    #[test]
    fn invalid_settings() {
        let bad = [
            GAConfig { population_size: 1, ..Default::default() },
            GAConfig { p_mut: 0.0, ..Default::default() },
            GAConfig { p_cross: 1.0, ..Default::default() },
            GAConfig { tournament_size: 51, ..Default::default() },
            GAConfig { elite_count: 50, ..Default::default() },
            GAConfig { evo_min: 3.0, evo_max: 2.0, ..Default::default() },
            GAConfig { slot_min: 0, ..Default::default() },
            GAConfig { interval: 0, ..Default::default() },
            GAConfig { sigma_scale: f64::NAN, ..Default::default() },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn partial_json_uses_defaults() {
        let cfg: GAConfig = serde_json::from_str(r#"{"population_size": 8, "diversity_action": "replace"}"#).unwrap();
        assert_eq!(cfg.population_size, 8);
        assert_eq!(cfg.diversity_action, DiversityAction::Replace);
        assert_eq!(cfg.tournament_size, 3);
        assert!("swap".parse::<DiversityAction>().is_err());
    }
}
