//! Cartesian parameter sweeps over the analytic and Monte Carlo pipelines.
//!
//! Axes nest in a fixed order, outermost first: file mixture, protocol, rtt,
//! loss rate, `p`, `r_t`. Rows come out in lexicographic order over that
//! nesting regardless of how many threads evaluate them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capacity::{self, ScenarioParams};
use crate::error::{Error, Result};
use crate::goodput::{self, ProtocolConfig, ProtocolKind};
use crate::mixtures;
use crate::sim::{self, SimConfig, SimStats};
use crate::units;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Analytic,
    MonteCarlo,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Analytic => "analytic",
            Mode::MonteCarlo => "monte_carlo",
        }
    }
}

/// Values per swept parameter; `None` keeps the base value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axes {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file_mixture_id: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub protocol_kind: Option<Vec<ProtocolKind>>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "units::serde_time_vec")]
    pub rtt: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_p: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "units::serde_rate_vec")]
    pub r_t: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base_scenario: ScenarioParams,
    /// Label of the base file mixture, used when no mixture axis is given.
    pub base_mixture_id: String,
    pub base_protocol: ProtocolConfig,
    pub axes: Axes,
    pub mode: Mode,
    pub sim: Option<SimConfig>,
}

/// One grid coordinate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridPoint {
    pub file_mixture_id: String,
    pub protocol: ProtocolKind,
    pub rtt: f64,
    pub p_p: f64,
    pub p: f64,
    pub r_t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloSummary {
    pub mean_active_fraction: f64,
    pub mean_nbs_fractional: f64,
    pub nbs_required: f64,
    pub nbs_fractional_std: f64,
    pub nbs_required_std: f64,
    pub completed: u64,
    pub mean_completion_time: Option<f64>,
}

impl From<&SimStats> for MonteCarloSummary {
    fn from(s: &SimStats) -> Self {
        Self {
            mean_active_fraction: s.mean_active_fraction,
            mean_nbs_fractional: s.mean_nbs_fractional,
            nbs_required: s.nbs_required,
            nbs_fractional_std: s.nbs_fractional_std,
            nbs_required_std: s.nbs_required_std,
            completed: s.completed,
            mean_completion_time: s.mean_completion_time,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub point: GridPoint,
    /// Mean file size, bits.
    pub mu_f: f64,
    pub r_g: f64,
    pub activity: f64,
    pub nbs_fractional: f64,
    pub nbs_ceil: u64,
    pub mode: Mode,
    pub monte_carlo: Option<MonteCarloSummary>,
}

fn axis_values<T: Clone>(name: &str, axis: &Option<Vec<T>>, base: T) -> Result<Vec<T>> {
    match axis {
        None => Ok(vec![base]),
        Some(v) if v.is_empty() => Err(Error::EmptyAxis(name.to_string())),
        Some(v) => Ok(v.clone()),
    }
}

fn bad_value(axis: &str, value: impl ToString, reason: &str) -> Error {
    Error::InvalidAxisValue {
        axis: axis.to_string(),
        value: value.to_string(),
        reason: reason.to_string(),
    }
}

impl SweepSpec {
    /// Expands the axes into grid points, validating every value.
    pub fn grid(&self) -> Result<Vec<GridPoint>> {
        let mixtures = axis_values("file_mixture_id", &self.axes.file_mixture_id, self.base_mixture_id.clone())?;
        let protocols = axis_values("protocol_kind", &self.axes.protocol_kind, self.base_protocol.kind)?;
        let rtts = axis_values("rtt", &self.axes.rtt, self.base_protocol.rtt)?;
        let losses = axis_values("p_p", &self.axes.p_p, self.base_protocol.p_p)?;
        let ps = axis_values("p", &self.axes.p, self.base_scenario.p)?;
        let rates = axis_values("r_t", &self.axes.r_t, self.base_scenario.r_t)?;

        if self.axes.file_mixture_id.is_some() {
            for id in &mixtures {
                mixtures::mixture(id).map_err(|_| bad_value("file_mixture_id", id, "unknown mixture"))?;
            }
        }
        if let Some(&v) = rtts.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(bad_value("rtt", v, "must be positive"));
        }
        if let Some(&v) = losses.iter().find(|v| !(0.0..1.0).contains(*v)) {
            return Err(bad_value("p_p", v, "must lie in [0, 1)"));
        }
        if let Some(&v) = ps.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(bad_value("p", v, "must lie in [0, 1]"));
        }
        if let Some(&v) = rates.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(bad_value("r_t", v, "must be positive"));
        }

        let mut points = Vec::with_capacity(
            mixtures.len() * protocols.len() * rtts.len() * losses.len() * ps.len() * rates.len(),
        );
        for m in &mixtures {
            for &protocol in &protocols {
                for &rtt in &rtts {
                    for &p_p in &losses {
                        for &p in &ps {
                            for &r_t in &rates {
                                points.push(GridPoint {
                                    file_mixture_id: m.clone(),
                                    protocol,
                                    rtt,
                                    p_p,
                                    p,
                                    r_t,
                                });
                            }
                        }
                    }
                }
            }
        }
        Ok(points)
    }

    /// Scenario and protocol at a grid point.
    pub fn resolve(&self, point: &GridPoint) -> Result<(ScenarioParams, ProtocolConfig)> {
        let files = if self.axes.file_mixture_id.is_some() {
            mixtures::mixture(&point.file_mixture_id)?
        } else {
            self.base_scenario.files.clone()
        };
        let scenario = ScenarioParams {
            p: point.p,
            r_t: point.r_t,
            files,
            ..self.base_scenario.clone()
        };
        // An explicit srtt keeps its ratio to rtt when rtt is swept.
        let srtt = self
            .base_protocol
            .srtt
            .map(|s| s * (point.rtt / self.base_protocol.rtt));
        let protocol = ProtocolConfig {
            kind: point.protocol,
            rtt: point.rtt,
            srtt,
            p_p: point.p_p,
            ..self.base_protocol.clone()
        };
        Ok((scenario, protocol))
    }

    fn validate(&self) -> Result<()> {
        self.base_scenario.validate()?;
        self.base_protocol.validate()?;
        if self.mode == Mode::MonteCarlo {
            self.sim.as_ref().ok_or(Error::MissingSimConfig)?.validate()?;
        }
        Ok(())
    }

    /// Evaluates one grid point through the configured pipeline.
    pub fn evaluate(&self, point: &GridPoint) -> Result<SweepRow> {
        let (scenario, protocol) = self.resolve(point)?;
        let r_g = goodput::goodput(&protocol, scenario.r_t)?;
        let activity = capacity::activity_probability(&scenario.files, scenario.p, r_g)?;
        let nbs_fractional = capacity::expected_base_stations(&scenario, r_g)?;
        let monte_carlo = match self.mode {
            Mode::Analytic => None,
            Mode::MonteCarlo => {
                let sim = self.sim.as_ref().ok_or(Error::MissingSimConfig)?;
                Some(MonteCarloSummary::from(&sim::run_simulation(&scenario, sim, r_g)?))
            }
        };
        Ok(SweepRow {
            point: point.clone(),
            mu_f: scenario.files.mean(),
            r_g,
            activity,
            nbs_fractional,
            nbs_ceil: nbs_fractional.ceil() as u64,
            mode: self.mode,
            monte_carlo,
        })
    }
}

/// One row per grid point, in grid order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let grid = spec.grid()?;
    grid.par_iter().map(|pt| spec.evaluate(pt)).collect()
}

/// TCP/NC and TCP evaluated at the same grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolComparison {
    pub tcp_nc: SweepRow,
    pub tcp: SweepRow,
    /// `n_bs(TCP) − n_bs(TCP/NC)`, fractional.
    pub delta: f64,
    /// `n_bs(TCP) / n_bs(TCP/NC)`; `None` when TCP/NC needs no stations.
    pub ratio: Option<f64>,
}

/// Pairs TCP/NC and TCP at every grid point; any protocol axis is ignored.
pub fn compare_protocols(spec: &SweepSpec) -> Result<Vec<ProtocolComparison>> {
    spec.validate()?;
    let mut nc_spec = spec.clone();
    nc_spec.axes.protocol_kind = Some(vec![ProtocolKind::TcpNc]);
    let grid = nc_spec.grid()?;
    grid.par_iter()
        .map(|pt| {
            let tcp_nc = spec.evaluate(pt)?;
            let tcp = spec.evaluate(&GridPoint { protocol: ProtocolKind::Tcp, ..pt.clone() })?;
            let delta = tcp.nbs_fractional - tcp_nc.nbs_fractional;
            let ratio = (tcp_nc.nbs_fractional > 0.0).then(|| tcp.nbs_fractional / tcp_nc.nbs_fractional);
            Ok(ProtocolComparison { tcp_nc, tcp, delta, ratio })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::MBPS;

    fn spec() -> SweepSpec {
        SweepSpec {
            base_scenario: ScenarioParams {
                n: 1000,
                p: 0.03,
                files: mixtures::mixture(mixtures::MIX_3_2).unwrap(),
                r_t: MBPS,
                r_max: 300.0 * MBPS,
                n_max: 200,
            },
            base_mixture_id: mixtures::MIX_3_2.to_string(),
            base_protocol: ProtocolConfig::default(),
            axes: Axes::default(),
            mode: Mode::Analytic,
            sim: None,
        }
    }

    #[test]
    fn single_point_matches_direct_pipeline() {
        let s = spec();
        let rows = run_sweep(&s).unwrap();
        assert_eq!(rows.len(), 1);
        let r_g = goodput::goodput(&s.base_protocol, MBPS).unwrap();
        let direct = capacity::expected_base_stations(&s.base_scenario, r_g).unwrap();
        assert_eq!(rows[0].nbs_fractional, direct);
        assert_eq!(rows[0].r_g, r_g);
        assert_eq!(rows[0].nbs_ceil, capacity::required_base_stations(&s.base_scenario, r_g).unwrap());
    }

    #[test]
    fn grid_order_is_lexicographic() {
        let mut s = spec();
        s.axes.p = Some(vec![0.01, 0.02]);
        s.axes.r_t = Some(vec![1e6, 2e6, 3e6]);
        s.axes.protocol_kind = Some(vec![ProtocolKind::Tcp, ProtocolKind::TcpNc]);
        let rows = run_sweep(&s).unwrap();
        assert_eq!(rows.len(), 12);
        let keys: Vec<_> = rows.iter().map(|r| (r.point.protocol, r.point.p, r.point.r_t)).collect();
        assert_eq!(keys[0], (ProtocolKind::Tcp, 0.01, 1e6));
        assert_eq!(keys[2], (ProtocolKind::Tcp, 0.01, 3e6));
        assert_eq!(keys[3], (ProtocolKind::Tcp, 0.02, 1e6));
        assert_eq!(keys[6], (ProtocolKind::TcpNc, 0.01, 1e6));
        assert_eq!(rows, run_sweep(&s).unwrap());
    }

    #[test]
    fn empty_and_invalid_axes_are_named() {
        let mut s = spec();
        s.axes.p = Some(vec![]);
        assert_eq!(run_sweep(&s).unwrap_err(), Error::EmptyAxis("p".into()));

        let mut s = spec();
        s.axes.p_p = Some(vec![0.0, 1.0]);
        match run_sweep(&s).unwrap_err() {
            Error::InvalidAxisValue { axis, value, .. } => {
                assert_eq!(axis, "p_p");
                assert_eq!(value, "1");
            }
            e => panic!("{e}"),
        }

        let mut s = spec();
        s.axes.file_mixture_id = Some(vec!["nope".into()]);
        assert!(matches!(run_sweep(&s).unwrap_err(), Error::InvalidAxisValue { axis, .. } if axis == "file_mixture_id"));
    }

    #[test]
    fn monte_carlo_needs_sim_config() {
        let mut s = spec();
        s.mode = Mode::MonteCarlo;
        assert_eq!(run_sweep(&s).unwrap_err(), Error::MissingSimConfig);
    }

    #[test]
    fn compare_with_no_users_is_zero() {
        let mut s = spec();
        s.base_scenario.n = 0;
        s.base_protocol.p_p = 0.05;
        let cmp = compare_protocols(&s).unwrap();
        assert_eq!(cmp.len(), 1);
        assert_eq!(cmp[0].tcp.nbs_fractional, 0.0);
        assert_eq!(cmp[0].tcp_nc.nbs_fractional, 0.0);
        assert_eq!(cmp[0].delta, 0.0);
        assert_eq!(cmp[0].ratio, None);
    }

    #[test]
    fn compare_lossy_link_favours_coding() {
        let mut s = spec();
        s.base_protocol.p_p = 0.05;
        s.axes.r_t = Some((2..=20).map(|k| k as f64 * 0.5 * MBPS).collect());
        s.axes.p = Some(vec![0.005, 0.01]);
        for c in compare_protocols(&s).unwrap() {
            assert!(c.delta > 0.0, "{:?}", c.tcp_nc.point);
            assert_eq!(c.tcp_nc.point.protocol, ProtocolKind::TcpNc);
            assert_eq!(c.tcp.point.protocol, ProtocolKind::Tcp);
        }
    }

    #[test]
    fn swept_rtt_keeps_srtt_ratio() {
        let mut s = spec();
        s.base_protocol.srtt = Some(0.15);
        s.axes.rtt = Some(vec![0.2]);
        let pt = &s.grid().unwrap()[0];
        let (_, proto) = s.resolve(pt).unwrap();
        assert!((proto.srtt() - 0.3).abs() < 1e-12);
    }
}
