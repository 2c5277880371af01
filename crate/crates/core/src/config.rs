//! JSON experiment configuration.
//!
//! Precedence: command-line flags override the config file, which overrides
//! the `DYNLEND_OUTPUT_DIR` environment variable (output directory only),
//! which overrides built-in defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::demand::DemandSpec;
use crate::error::{Error, Result};
use crate::income_dist::IncomeDistribution;
use crate::value_fn::ViConfig;

pub const OUTPUT_DIR_ENV: &str = "DYNLEND_OUTPUT_DIR";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub rho: Option<f64>,
    /// Fixed discount for the exogenous model.
    pub d: Option<f64>,
    /// Income signal for hybrid and increasing-elasticity solves.
    pub x0: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub a_min: Option<f64>,
    pub a_max: Option<f64>,
    pub points: Option<usize>,
    /// Mean income of the two-point example.
    pub u: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationSection {
    pub n_paths: Option<usize>,
    pub seed: Option<u64>,
    pub horizon: Option<usize>,
    pub antithetic: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: Option<String>,
    pub format: Option<String>,
}

/// Top-level configuration file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub model: ModelSection,
    pub distribution: Option<IncomeDistribution>,
    pub demand: Option<DemandSpec>,
    pub solver: Option<ViConfig>,
    pub sweep: SweepSection,
    pub simulation: SimulationSection,
    pub output: OutputSection,
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(s)?;
        if let Some(d) = &cfg.distribution {
            d.clone().validated()?;
        }
        if let Some(solver) = &cfg.solver {
            solver.validate()?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

/// Parses a distribution from `kind[:p1,p2]` shorthand or a JSON object.
///
/// Shorthand forms: `uniform`, `beta:a,b`, `gamma:shape,scale`,
/// `weibull:shape,scale`, `two_point:center,delta`.
pub fn parse_distribution(text: &str) -> Result<IncomeDistribution> {
    let text = text.trim();
    if text.starts_with('{') {
        return IncomeDistribution::from_json(text).map_err(|e| Error::Config(e.to_string()));
    }
    let (kind, rest) = text.split_once(':').unwrap_or((text, ""));
    let nums: Vec<f64> = if rest.is_empty() {
        Vec::new()
    } else {
        rest.split(',')
            .map(|p| {
                p.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad number '{p}' in distribution '{text}'")))
            })
            .collect::<Result<_>>()?
    };
    let need = |n: usize| {
        if nums.len() == n {
            Ok(())
        } else {
            Err(Error::Config(format!("distribution '{kind}' takes {n} parameters, got {}", nums.len())))
        }
    };
    let dist = match kind {
        "uniform" => {
            if nums.is_empty() {
                IncomeDistribution::uniform()
            } else {
                need(1)?;
                IncomeDistribution::Uniform { upper: nums[0] }
            }
        }
        "beta" => {
            need(2)?;
            IncomeDistribution::Beta { a: nums[0], b: nums[1] }
        }
        "gamma" => {
            need(2)?;
            IncomeDistribution::Gamma { shape: nums[0], scale: nums[1] }
        }
        "weibull" => {
            need(2)?;
            IncomeDistribution::Weibull { shape: nums[0], scale: nums[1] }
        }
        "two_point" => {
            need(2)?;
            IncomeDistribution::TwoPoint { center: nums[0], delta: nums[1] }
        }
        other => return Err(Error::Config(format!("unknown distribution kind '{other}'"))),
    };
    dist.validated().map_err(|e| Error::Config(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shorthand_and_json_agree() {
        let a = parse_distribution("beta:2,3").unwrap();
        let b = parse_distribution(r#"{"kind":"beta","params":{"a":2,"b":3}}"#).unwrap();
        assert_eq!(a, b);
        assert!(parse_distribution("beta:2").is_err());
        assert!(parse_distribution("cauchy:1").is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"model":{"rho":0.95}}"#).is_ok());
        assert!(ExperimentConfig::from_json(r#"{"model":{"rho":0.95,"gamma":1}}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"modle":{}}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"solver":{"grid_size":500,"tol":1e-8}}"#).is_ok());
        assert!(ExperimentConfig::from_json(r#"{"solver":{"grid":500}}"#).is_err());
    }
}
