//! JSON run configuration: simulation parameters plus sweep settings.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use consim_core::SimParams;
use serde::Deserialize;
use serde_json::{Map, Value};

const SWEEP_KEYS: [&str; 5] = ["experiment", "replications", "base_seed", "jobs", "out"];

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSettings {
    pub experiment: Option<String>,
    pub replications: Option<usize>,
    pub base_seed: Option<u64>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default)]
pub struct CliConfig {
    pub sim: SimParams,
    pub sweep: SweepSettings,
}

impl CliConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("cannot read config {}", p.display()))?;
                Self::parse(&text).with_context(|| format!("invalid config {}", p.display()))
            }
        }
    }

    /// Splits one JSON object into sweep keys and simulation keys; both
    /// halves reject keys they do not know.
    pub fn parse(text: &str) -> Result<Self> {
        let Value::Object(all) = serde_json::from_str::<Value>(text)? else {
            bail!("config must be a JSON object");
        };
        let (sweep, sim): (Map<String, Value>, Map<String, Value>) =
            all.into_iter().partition(|(k, _)| SWEEP_KEYS.contains(&k.as_str()));
        let sim: SimParams = serde_json::from_value(Value::Object(sim))?;
        sim.validate()?;
        Ok(Self {
            sim,
            sweep: serde_json::from_value(Value::Object(sweep))?,
        })
    }
}
