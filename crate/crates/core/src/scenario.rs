//! Scenario files: TOML documents mapping onto [`SimConfig`] plus a
//! `[batch]` table for [`BatchSpec`]. Missing keys take their defaults;
//! unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::actuation::{ControlGains, ControllerKind};
use crate::contact::ContactParams;
use crate::dynamics::{DebrisConfig, NetConfig};
use crate::error::{Error, Result};
use crate::guidance::GuidanceConfig;
use crate::harness::BatchSpec;
use crate::net_models::{ElasticParams, NetModelKind};
use crate::orbital::OrbitParams;
use crate::sim::SimConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub controller: ControllerKind,
    pub net_model: NetModelKind,
    pub timeout_s: f64,
    pub control_step_s: f64,
    pub substeps: usize,
    pub net: NetConfig,
    pub debris: DebrisConfig,
    pub elastic: ElasticParams,
    pub contact: ContactParams,
    pub orbit: OrbitParams,
    pub guidance: GuidanceConfig,
    pub control: ControlGains,
    pub batch: BatchSpec,
}

impl Default for Scenario {
    fn default() -> Self {
        Self::new(SimConfig::default(), BatchSpec::default())
    }
}

impl Scenario {
    pub fn new(sim: SimConfig, batch: BatchSpec) -> Self {
        let SimConfig {
            controller,
            net_model,
            timeout_s,
            control_step_s,
            substeps,
            net,
            debris,
            elastic,
            contact,
            orbit,
            guidance,
            control,
        } = sim;
        Self {
            controller,
            net_model,
            timeout_s,
            control_step_s,
            substeps,
            net,
            debris,
            elastic,
            contact,
            orbit,
            guidance,
            control,
            batch,
        }
    }

    pub fn split(self) -> (SimConfig, BatchSpec) {
        let sim = SimConfig {
            controller: self.controller,
            net_model: self.net_model,
            timeout_s: self.timeout_s,
            control_step_s: self.control_step_s,
            substeps: self.substeps,
            net: self.net,
            debris: self.debris,
            elastic: self.elastic,
            contact: self.contact,
            orbit: self.orbit,
            guidance: self.guidance,
            control: self.control,
        };
        (sim, self.batch)
    }

    /// TOML text that loads back into the same scenario.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario types serialise to TOML")
    }
}

/// Parses and validates scenario text. `origin` only labels diagnostics.
pub fn parse_scenario(text: &str, origin: &Path) -> Result<(SimConfig, BatchSpec)> {
    let scenario: Scenario = toml::from_str(text).map_err(|e| Error::Scenario {
        path: origin.to_path_buf(),
        message: e.to_string(),
    })?;
    let (sim, batch) = scenario.split();
    sim.validate()?;
    batch.validate()?;
    Ok((sim, batch))
}

pub fn load_scenario(path: &Path) -> Result<(SimConfig, BatchSpec)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scenario(&text, path)
}

/// Writes the effective configuration next to run outputs.
pub fn write_echo(path: &Path, sim: &SimConfig, batch: &BatchSpec) -> Result<()> {
    let text = Scenario::new(sim.clone(), batch.clone()).to_toml();
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
