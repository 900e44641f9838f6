//! JSON run configuration.
//!
//! ```json
//! {
//!   "name": "example",
//!   "scenario": { "n": 1000, "p": 0.03, "files": "mix-5.08",
//!                 "r_t": "4Mbps", "r_max": "300Mbps", "n_max": 200 },
//!   "protocol": { "kind": "tcp_nc", "w_max": 50, "packet_size": "1000B",
//!                 "rtt": "100ms", "p_p": 0.01 },
//!   "axes": { "p": [0.01, 0.02], "r_t": ["1Mbps", "2Mbps"] },
//!   "mode": "analytic",
//!   "compare": false,
//!   "sim": { "horizon": 1000, "dt": 0.1, "iterations": 100, "seed": 0 }
//! }
//! ```
//!
//! `files` is either a built-in mixture id or a list of
//! `{"size": ..., "prob": ...}` entries. Every section and field except
//! `name` has a default. Serializing a config writes every value in base units
//! with all defaults filled in.

use serde::{Deserialize, Serialize};

use crate::capacity::{FileSizeDistribution, ScenarioParams};
use crate::error::Result;
use crate::goodput::ProtocolConfig;
use crate::mixtures;
use crate::sim::SimConfig;
use crate::sweep::{Axes, Mode, SweepSpec};
use crate::units::{self, MBPS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FilesSpec {
    Mixture(String),
    Entries(FileSizeDistribution),
}

impl FilesSpec {
    pub fn resolve(&self) -> Result<(String, FileSizeDistribution)> {
        match self {
            FilesSpec::Mixture(id) => Ok((id.clone(), mixtures::mixture(id)?)),
            FilesSpec::Entries(d) => Ok(("custom".to_string(), d.clone())),
        }
    }
}

impl Default for FilesSpec {
    fn default() -> Self {
        FilesSpec::Mixture(mixtures::MIX_3_2.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSection {
    pub n: u64,
    pub p: f64,
    pub files: FilesSpec,
    #[serde(with = "units::serde_rate")]
    pub r_t: f64,
    #[serde(with = "units::serde_rate")]
    pub r_max: f64,
    pub n_max: u64,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        Self {
            n: 1000,
            p: 0.04,
            files: FilesSpec::default(),
            r_t: MBPS,
            r_max: 300.0 * MBPS,
            n_max: 200,
        }
    }
}

impl ScenarioSection {
    pub fn resolve(&self) -> Result<(String, ScenarioParams)> {
        let (id, files) = self.files.resolve()?;
        let params = ScenarioParams {
            n: self.n,
            p: self.p,
            files,
            r_t: self.r_t,
            r_max: self.r_max,
            n_max: self.n_max,
        };
        params.validate()?;
        Ok((id, params))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub name: String,
    #[serde(default)]
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub protocol: ProtocolConfig,
    #[serde(default)]
    pub axes: Axes,
    #[serde(default)]
    pub mode: Mode,
    /// Pair TCP/NC with TCP at every grid point instead of sweeping protocols.
    #[serde(default)]
    pub compare: bool,
    #[serde(default)]
    pub sim: SimConfig,
    /// Optional power draw per base station, adds a `power_kw` column.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kw_per_station: Option<f64>,
}

impl Config {
    pub fn sweep_spec(&self) -> Result<SweepSpec> {
        let (base_mixture_id, base_scenario) = self.scenario.resolve()?;
        self.protocol.validate()?;
        Ok(SweepSpec {
            base_scenario,
            base_mixture_id,
            base_protocol: self.protocol.clone(),
            axes: self.axes.clone(),
            mode: self.mode,
            sim: Some(self.sim.clone()),
        })
    }
}
