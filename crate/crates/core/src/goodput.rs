//! Goodput achieved by a transport protocol given the provisioned throughput.
//!
//! Three transports are modelled:
//!
//! * `Ideal`: every provisioned bit that survives the channel is useful,
//!   `r_g = r_t·(1 − p_p)`.
//! * `TcpNc`: network-coded TCP. Losses only stretch the effective round
//!   trip (`srtt`), so over a connection of `t` round trips starting from a
//!   window of one packet the rate is
//!   `(t·W − ((W−1)² + (W−1))/2) / (t·srtt)` packets/s.
//! * `Tcp`: the loss-driven steady-state approximation
//!   `min(W/rtt, ((1−p_p)/p_p) / (rtt·(5/3 + sqrt(2/3·(1−p_p)/p_p))))` packets/s.
//!
//! Whatever the protocol, goodput never exceeds `r_t·(1 − p_p)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::units;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    Ideal,
    TcpNc,
    Tcp,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 3] = [ProtocolKind::Ideal, ProtocolKind::TcpNc, ProtocolKind::Tcp];

    pub fn as_str(self) -> &'static str {
        match self {
            ProtocolKind::Ideal => "ideal",
            ProtocolKind::TcpNc => "tcp_nc",
            ProtocolKind::Tcp => "tcp",
        }
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProtocolKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().replace(['-', '/'], "_").as_str() {
            "ideal" => Ok(ProtocolKind::Ideal),
            "tcp_nc" | "tcpnc" => Ok(ProtocolKind::TcpNc),
            "tcp" => Ok(ProtocolKind::Tcp),
            _ => Err(format!("unknown protocol `{s}` (expected ideal, tcp_nc or tcp)")),
        }
    }
}

/// Transport-model knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub kind: ProtocolKind,
    /// Maximum congestion window in packets.
    pub w_max: u32,
    /// Payload per packet in bits.
    #[serde(with = "units::serde_size")]
    pub packet_size: f64,
    #[serde(with = "units::serde_time")]
    pub rtt: f64,
    /// Effective round trip seen by TCP/NC; `None` means equal to `rtt`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub srtt: Option<f64>,
    /// Per-packet loss probability.
    #[serde(default)]
    pub p_p: f64,
    /// Connection length in round trips; `None` is steady state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_rtts: Option<f64>,
}

impl Default for ProtocolConfig {
    /// 50-packet window of 1000-byte packets over a 100 ms round trip, no loss.
    fn default() -> Self {
        Self {
            kind: ProtocolKind::Ideal,
            w_max: 50,
            packet_size: 1000.0 * units::BYTE,
            rtt: 0.1,
            srtt: None,
            p_p: 0.0,
            t_rtts: None,
        }
    }
}

impl ProtocolConfig {
    pub fn with_kind(&self, kind: ProtocolKind) -> Self {
        Self { kind, ..self.clone() }
    }

    pub fn srtt(&self) -> f64 {
        self.srtt.unwrap_or(self.rtt)
    }

    pub fn validate(&self) -> Result<()> {
        if self.w_max < 1 {
            return Err(invalid("w_max", self.w_max, "must be at least 1"));
        }
        if !(self.packet_size.is_finite() && self.packet_size > 0.0) {
            return Err(invalid("packet_size", self.packet_size, "must be positive"));
        }
        if !(self.rtt.is_finite() && self.rtt > 0.0) {
            return Err(invalid("rtt", self.rtt, "must be positive"));
        }
        if let Some(srtt) = self.srtt {
            if !(srtt.is_finite() && srtt >= self.rtt) {
                return Err(invalid("srtt", srtt, "must be at least rtt"));
            }
        }
        if !(0.0..1.0).contains(&self.p_p) {
            return Err(invalid("p_p", self.p_p, "must lie in [0, 1)"));
        }
        if let Some(t) = self.t_rtts {
            if !(t.is_finite() && t >= f64::from(self.w_max)) {
                return Err(invalid("t_rtts", t, "finite connection length must be at least w_max"));
            }
        }
        Ok(())
    }

    fn delivery_cap(&self, r_t: f64) -> f64 {
        r_t * (1.0 - self.p_p)
    }
}

fn check_throughput(r_t: f64) -> Result<()> {
    if !(r_t.is_finite() && r_t > 0.0) {
        return Err(invalid("r_t", r_t, "throughput must be positive"));
    }
    Ok(())
}

fn window_rate(w_max: u32, packet_size: f64, rtt: f64) -> f64 {
    f64::from(w_max) * packet_size / rtt
}

/// Rate ceiling set by the congestion window, in bits/s.
///
/// Uses `rtt` for TCP and `srtt` for TCP/NC; `None` for the ideal transport.
pub fn window_limited_rate(cfg: &ProtocolConfig) -> Result<Option<f64>> {
    cfg.validate()?;
    Ok(match cfg.kind {
        ProtocolKind::Ideal => None,
        ProtocolKind::Tcp => Some(window_rate(cfg.w_max, cfg.packet_size, cfg.rtt)),
        ProtocolKind::TcpNc => Some(window_rate(cfg.w_max, cfg.packet_size, cfg.srtt())),
    })
}

/// Uncapped TCP/NC goodput in bits/s.
pub fn raw_tcp_nc(cfg: &ProtocolConfig) -> Result<f64> {
    cfg.validate()?;
    let srtt = cfg.srtt();
    Ok(match cfg.t_rtts {
        None => window_rate(cfg.w_max, cfg.packet_size, srtt),
        Some(t) => {
            let w = f64::from(cfg.w_max);
            let ramp = ((w - 1.0) * (w - 1.0) + (w - 1.0)) / 2.0;
            (t * w - ramp) / (t * srtt) * cfg.packet_size
        }
    })
}

/// Loss-limited TCP rate in packets/s; infinite without loss.
pub fn tcp_loss_limited_packets(p_p: f64, rtt: f64) -> f64 {
    if p_p == 0.0 {
        return f64::INFINITY;
    }
    let odds = (1.0 - p_p) / p_p;
    odds / (rtt * (5.0 / 3.0 + (2.0 / 3.0 * odds).sqrt()))
}

/// Uncapped TCP goodput in bits/s.
pub fn raw_tcp(cfg: &ProtocolConfig) -> Result<f64> {
    cfg.validate()?;
    let window = window_rate(cfg.w_max, cfg.packet_size, cfg.rtt);
    let loss = tcp_loss_limited_packets(cfg.p_p, cfg.rtt) * cfg.packet_size;
    Ok(window.min(loss))
}

pub fn goodput_tcp_nc(cfg: &ProtocolConfig, r_t: f64) -> Result<f64> {
    check_throughput(r_t)?;
    Ok(raw_tcp_nc(cfg)?.min(cfg.delivery_cap(r_t)))
}

pub fn goodput_tcp(cfg: &ProtocolConfig, r_t: f64) -> Result<f64> {
    check_throughput(r_t)?;
    Ok(raw_tcp(cfg)?.min(cfg.delivery_cap(r_t)))
}

/// Goodput for the configured protocol.
pub fn goodput(cfg: &ProtocolConfig, r_t: f64) -> Result<f64> {
    match cfg.kind {
        ProtocolKind::Ideal => {
            cfg.validate()?;
            check_throughput(r_t)?;
            Ok(cfg.delivery_cap(r_t))
        }
        ProtocolKind::TcpNc => goodput_tcp_nc(cfg, r_t),
        ProtocolKind::Tcp => goodput_tcp(cfg, r_t),
    }
}
