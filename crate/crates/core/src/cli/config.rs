//! Run configuration files.
//!
//! A configuration is TOML or JSON with the same structure:
//!
//! ```toml
//! scenario = "fig2-qubit-sweep"   # one of `coolsim list`
//! seed = 7                        # optional, default 0; --seed overrides
//!
//! [params]                        # optional, scenario specific
//! omega_s = 1.0
//! gamma = { lo = 1e-4, hi = 1.0, n = 16, spacing = "log" }
//! t_m = [10.0, 100.0, 1000.0]
//! ```
//!
//! Grids are either an explicit list or `{ lo, hi, n, spacing }` with
//! `spacing` one of `"log"` (default) or `"linear"`. Unknown keys are
//! rejected. A manifest written by a previous run is also accepted: its
//! `scenario`, `seed` and resolved `params` are used.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// A one-dimensional parameter grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Values(Vec<f64>),
    Range {
        lo: f64,
        hi: f64,
        n: usize,
        #[serde(default)]
        spacing: Spacing,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Log,
    Linear,
}

impl Grid {
    pub fn log(lo: f64, hi: f64, n: usize) -> Self {
        Grid::Range { lo, hi, n, spacing: Spacing::Log }
    }

    pub fn points(&self) -> Result<Vec<f64>> {
        match self {
            Grid::Values(v) if v.is_empty() => Err(Error::Config("empty grid".into())),
            Grid::Values(v) => Ok(v.clone()),
            Grid::Range { n: 0, .. } => Err(Error::Config("grid with n = 0".into())),
            &Grid::Range { lo, hi, n, spacing } => {
                if n == 1 {
                    return Ok(vec![lo]);
                }
                let f = |k: usize| k as f64 / (n - 1) as f64;
                match spacing {
                    Spacing::Linear => Ok((0..n).map(|k| lo + (hi - lo) * f(k)).collect()),
                    Spacing::Log => {
                        if !(lo > 0.0 && hi > 0.0) {
                            return Err(Error::Config(format!("log grid needs positive bounds, got [{lo}, {hi}]")));
                        }
                        let (a, b) = (lo.ln(), hi.ln());
                        Ok((0..n).map(|k| (a + (b - a) * f(k)).exp()).collect())
                    }
                }
            }
        }
    }
}

/// A parsed configuration file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "empty_table")]
    pub params: Value,
}

fn empty_table() -> Value {
    Value::Object(Default::default())
}

impl RunConfig {
    pub fn new(scenario: &str) -> Self {
        Self { scenario: scenario.to_string(), seed: 0, params: empty_table() }
    }

    /// Parses TOML or JSON text; JSON is tried first when the text starts with `{`.
    pub fn parse(text: &str) -> Result<Self> {
        let value: Value = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid JSON: {e}")))?
        } else {
            let t: toml::Table = toml::from_str(text).map_err(|e| Error::Config(format!("invalid TOML: {e}")))?;
            serde_json::to_value(t).map_err(|e| Error::Config(e.to_string()))?
        };
        Self::from_value(value)
    }

    fn from_value(mut value: Value) -> Result<Self> {
        if let Some(obj) = value.as_object_mut() {
            // a manifest from an earlier run
            if obj.contains_key("tool_version") {
                let scenario = obj.remove("scenario").unwrap_or(Value::Null);
                let seed = obj.remove("seed").unwrap_or(Value::from(0));
                let params = obj.remove("params").unwrap_or_else(empty_table);
                value = serde_json::json!({ "scenario": scenario, "seed": seed, "params": params });
            }
        }
        let cfg: RunConfig = serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))?;
        if !cfg.params.is_object() {
            return Err(Error::Config("`params` must be a table".into()));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Deserializes `params` into a scenario's parameter type.
    pub fn params<T: for<'de> Deserialize<'de>>(&self) -> Result<T> {
        serde_json::from_value(self.params.clone())
            .map_err(|e| Error::Config(format!("scenario {}: {e}", self.scenario)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_and_json_agree() {
        let toml = r#"
            scenario = "fig2-qubit-sweep"
            seed = 3
            [params]
            gamma = { lo = 1e-3, hi = 1e-1, n = 3 }
            t_m = [1.0, 2.0]
        "#;
        let json = r#"{"scenario": "fig2-qubit-sweep", "seed": 3,
            "params": {"gamma": {"lo": 1e-3, "hi": 1e-1, "n": 3}, "t_m": [1.0, 2.0]}}"#;
        assert_eq!(RunConfig::parse(toml).unwrap(), RunConfig::parse(json).unwrap());
    }

    #[test]
    fn grids() {
        let g: Grid = serde_json::from_str(r#"{"lo": 1e-3, "hi": 1e-1, "n": 3}"#).unwrap();
        let p = g.points().unwrap();
        assert!((p[1] - 1e-2).abs() < 1e-16);
        let l = Grid::Range { lo: 0.0, hi: 1.0, n: 5, spacing: Spacing::Linear };
        assert_eq!(l.points().unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(Grid::Values(vec![]).points().is_err());
        assert!(Grid::log(0.0, 1.0, 3).points().is_err());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RunConfig::parse("scenario = 3").is_err());
        assert!(RunConfig::parse("scenario = \"x\"\nbogus = 1").is_err());
        assert!(RunConfig::parse("{ not json").is_err());
    }

    #[test]
    fn manifest_is_accepted() {
        let m = r#"{"tool_version": "0.1.0", "scenario": "fig3b-rwa-ratio", "seed": 5,
            "params": {"n_points": 10}, "outputs": []}"#;
        let cfg = RunConfig::parse(m).unwrap();
        assert_eq!(cfg.scenario, "fig3b-rwa-ratio");
        assert_eq!(cfg.seed, 5);
    }
}
