//! Base-station capacity planning under ideal, TCP and network-coded TCP
//! goodput models.
//!
//! The analytic pipeline maps provisioned throughput to goodput
//! ([`goodput`]) and goodput to a base-station count ([`capacity`]). The
//! Monte Carlo pipeline ([`sim`]) measures the same count from simulated
//! traffic. [`sweep`] runs either pipeline over parameter grids and
//! [`cli`] wraps everything in a command-line tool.

pub mod capacity;
pub mod cli;
pub mod config;
pub mod error;
pub mod goodput;
pub mod mixtures;
pub mod output;
pub mod presets;
pub mod sim;
pub mod sweep;
pub mod units;

pub use capacity::{FileSizeDistribution, FileSizeEntry, ScenarioParams};
pub use error::{Error, Result};
pub use goodput::{ProtocolConfig, ProtocolKind};
pub use sim::{SimConfig, SimStats};
