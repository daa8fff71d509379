use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::ScenarioId;
use crate::objectives::Aggregation;

/// Optimizer selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Algorithm {
    Nsga2,
    OmopsoStyle,
    Gde3Style,
    Random,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Nsga2, Algorithm::OmopsoStyle, Algorithm::Gde3Style, Algorithm::Random];

    pub fn id(self) -> &'static str {
        match self {
            Algorithm::Nsga2 => "nsga2",
            Algorithm::OmopsoStyle => "omopso_style",
            Algorithm::Gde3Style => "gde3_style",
            Algorithm::Random => "random",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.id() == s)
            .ok_or_else(|| Error::UnknownAlgorithm(s.to_string()))
    }
}

impl TryFrom<String> for Algorithm {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Algorithm> for String {
    fn from(a: Algorithm) -> String {
        a.id().to_string()
    }
}

/// Parameters of a single seeded run. Defaults follow the reference
/// experiment setup: population 50, 50,000 evaluations, snapshots every 50.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub population: usize,
    pub max_evaluations: usize,
    pub snapshot_interval: usize,
    pub mutation_rate: f64,
    pub mutation_di: f64,
    pub crossover_rate: f64,
    pub crossover_di: f64,
    /// Additive epsilon (per normalized axis) of the swarm leader archive.
    pub epsilon: f64,
    pub seed: u64,
    pub scenario: ScenarioId,
    pub aggregation: Aggregation,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            algorithm: Algorithm::Nsga2,
            population: 50,
            max_evaluations: 50_000,
            snapshot_interval: 50,
            mutation_rate: 0.5,
            mutation_di: 10.0,
            crossover_rate: 1.0,
            crossover_di: 10.0,
            epsilon: 0.0075,
            seed: 0,
            scenario: ScenarioId::Transient4,
            aggregation: Aggregation::Mean,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        let min_population = match self.algorithm {
            Algorithm::Gde3Style => 4,
            Algorithm::Nsga2 => 2,
            _ => 1,
        };
        if self.population < min_population {
            return fail(format!("{} needs a population of at least {min_population}", self.algorithm));
        }
        if self.max_evaluations == 0 {
            return fail("max_evaluations must be positive".into());
        }
        if self.snapshot_interval == 0 || self.max_evaluations % self.snapshot_interval != 0 {
            return fail(format!(
                "snapshot_interval ({}) must be positive and divide max_evaluations ({})",
                self.snapshot_interval, self.max_evaluations
            ));
        }
        for (name, rate) in [("mutation_rate", self.mutation_rate), ("crossover_rate", self.crossover_rate)] {
            if !(0.0..=1.0).contains(&rate) {
                return fail(format!("{name} must lie in [0, 1]"));
            }
        }
        for (name, di) in [("mutation_di", self.mutation_di), ("crossover_di", self.crossover_di)] {
            if !(di.is_finite() && di >= 0.0) {
                return fail(format!("{name} must be a non-negative number"));
            }
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return fail("epsilon must be positive".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_the_reference_setup() {
        let c = RunConfig::default();
        assert_eq!(c.population, 50);
        assert_eq!(c.max_evaluations, 50_000);
        assert_eq!(c.snapshot_interval, 50);
        assert_eq!((c.mutation_rate, c.mutation_di), (0.5, 10.0));
        assert_eq!((c.crossover_rate, c.crossover_di), (1.0, 10.0));
        c.validate().unwrap();
    }

    #[test]
    fn unknown_algorithm_is_rejected() {
        assert!(matches!("tabu".parse::<Algorithm>(), Err(Error::UnknownAlgorithm(_))));
        let err = serde_json::from_str::<RunConfig>(r#"{"algorithm": "tabu"}"#).unwrap_err();
        assert!(err.to_string().contains("unknown algorithm"));
    }

    #[test]
    fn interval_must_divide_budget() {
        let c = RunConfig {
            snapshot_interval: 70,
            ..RunConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn config_round_trips_through_json() {
        let c = RunConfig {
            algorithm: Algorithm::OmopsoStyle,
            seed: 7,
            ..RunConfig::default()
        };
        let text = serde_json::to_string(&c).unwrap();
        assert!(text.contains("\"omopso_style\""));
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), c);
    }
}
