//! Built-in sweep configurations.
//!
//! All presets use 1000 users, 300 Mbps and 200 active users per station, a
//! 50-packet window of 1000-byte packets and a 100 ms round trip. The
//! initiation probabilities `p ∈ {0.01, 0.02, 0.03, 0.04}` are inferred from
//! the published curve legends, not stated values. Rates sweep 0.1 to 10 Mbps
//! in 0.1 Mbps steps.

use crate::config::{Config, FilesSpec, ScenarioSection};
use crate::error::{Error, Result};
use crate::goodput::{ProtocolConfig, ProtocolKind};
use crate::mixtures::{MIX_3_2, MIX_5_08};
use crate::sim::SimConfig;
use crate::sweep::{Axes, Mode};
use crate::units::MBPS;

pub const P_VALUES: [f64; 4] = [0.01, 0.02, 0.03, 0.04];

/// `(name, description)` for every preset.
pub const PRESETS: &[(&str, &str)] = &[
    ("fig3a", "analytic n_bs vs r, ideal goodput, 3.2 MB mixture"),
    ("fig3b", "analytic n_bs vs r, ideal goodput, 5.08 MB mixture"),
    ("fig4a", "Monte Carlo n_bs vs r, ideal goodput, 3.2 MB mixture"),
    ("fig4b", "Monte Carlo n_bs vs r, ideal goodput, 5.08 MB mixture"),
    ("fig5", "TCP vs TCP/NC n_bs, 3.2 MB mixture, p_p in {0, 1, 2, 5}%"),
    ("fig5a", "fig5 at p_p = 0%"),
    ("fig5b", "fig5 at p_p = 1%"),
    ("fig5c", "fig5 at p_p = 2%"),
    ("fig5d", "fig5 at p_p = 5%"),
    ("fig6", "TCP vs TCP/NC n_bs, 5.08 MB mixture, p_p in {0, 1, 2, 3}%"),
    ("fig6a", "fig6 at p_p = 0%"),
    ("fig6b", "fig6 at p_p = 1%"),
    ("fig6c", "fig6 at p_p = 2%"),
    ("fig6d", "fig6 at p_p = 3%"),
    ("goodput", "TCP and TCP/NC goodput vs r_t, p_p in {0, 1, 2, 3, 4, 5}%"),
];

pub const FIG5_LOSSES: [f64; 4] = [0.0, 0.01, 0.02, 0.05];
pub const FIG6_LOSSES: [f64; 4] = [0.0, 0.01, 0.02, 0.03];

/// `0.1, 0.2, …, 10` Mbps.
pub fn rate_grid(step_mbps: f64, max_mbps: f64) -> Vec<f64> {
    let steps = (max_mbps / step_mbps).round() as u64;
    let step = step_mbps * MBPS;
    (1..=steps).map(|k| k as f64 * step).collect()
}

fn base(name: &str, mixture: &str) -> Config {
    Config {
        name: name.to_string(),
        scenario: ScenarioSection {
            files: FilesSpec::Mixture(mixture.to_string()),
            ..ScenarioSection::default()
        },
        protocol: ProtocolConfig::default(),
        axes: Axes {
            p: Some(P_VALUES.to_vec()),
            r_t: Some(rate_grid(0.1, 10.0)),
            ..Axes::default()
        },
        mode: Mode::Analytic,
        compare: false,
        sim: SimConfig::default(),
        kw_per_station: None,
    }
}

fn comparison(name: &str, mixture: &str, losses: &[f64]) -> Config {
    let mut cfg = base(name, mixture);
    cfg.compare = true;
    cfg.axes.p_p = Some(losses.to_vec());
    cfg
}

pub fn preset(name: &str) -> Result<Config> {
    let panel = |losses: &[f64; 4], letter: u8| losses[usize::from(letter - b'a')];
    let cfg = match name {
        "fig3a" => base(name, MIX_3_2),
        "fig3b" => base(name, MIX_5_08),
        "fig4a" | "fig4b" => {
            let mut cfg = base(name, if name == "fig4a" { MIX_3_2 } else { MIX_5_08 });
            cfg.mode = Mode::MonteCarlo;
            cfg
        }
        "fig5" => comparison(name, MIX_3_2, &FIG5_LOSSES),
        "fig6" => comparison(name, MIX_5_08, &FIG6_LOSSES),
        "fig5a" | "fig5b" | "fig5c" | "fig5d" => {
            comparison(name, MIX_3_2, &[panel(&FIG5_LOSSES, name.as_bytes()[4])])
        }
        "fig6a" | "fig6b" | "fig6c" | "fig6d" => {
            comparison(name, MIX_5_08, &[panel(&FIG6_LOSSES, name.as_bytes()[4])])
        }
        "goodput" => {
            let mut cfg = base(name, MIX_3_2);
            cfg.axes = Axes {
                protocol_kind: Some(vec![ProtocolKind::TcpNc, ProtocolKind::Tcp]),
                p_p: Some(vec![0.0, 0.01, 0.02, 0.03, 0.04, 0.05]),
                r_t: Some(rate_grid(0.1, 10.0)),
                ..Axes::default()
            };
            cfg
        }
        _ => {
            return Err(Error::UnknownPreset {
                name: name.to_string(),
                available: PRESETS.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", "),
            })
        }
    };
    Ok(cfg)
}
