//! Invariant checks shared by the property tests and the acceptance suite.
//! Each check returns `Err` with a description of the first violation.
#![allow(dead_code)]

use bsplanner::capacity::{self, FileSizeDistribution, ScenarioParams};
use bsplanner::goodput::{self, ProtocolConfig, ProtocolKind};
use bsplanner::mixtures::{self, MIX_3_2, MIX_5_08};
use bsplanner::sim::{self, SimConfig, StartState, UserState};
use bsplanner::units::MBPS;

pub type Check = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

pub fn scenario(n: u64, p: f64, mean_bits: f64, r_t: f64) -> ScenarioParams {
    ScenarioParams {
        n,
        p,
        files: FileSizeDistribution::point(mean_bits).unwrap(),
        r_t,
        r_max: 300.0 * MBPS,
        n_max: 200,
    }
}

pub fn protocol(kind: ProtocolKind, p_p: f64, rtt: f64) -> ProtocolConfig {
    ProtocolConfig { kind, p_p, rtt, ..ProtocolConfig::default() }
}

// ---- capacity model ----

/// `P ∈ [0,1]`, nonincreasing in r_g, nondecreasing in p and μ_f.
pub fn activity_bounds_and_monotonicity(mu: f64, p: f64, r_g: f64, bump: f64) -> Check {
    let files = FileSizeDistribution::point(mu).unwrap();
    let bigger = FileSizeDistribution::point(mu * (1.0 + bump)).unwrap();
    let base = capacity::activity_probability(&files, p, r_g).unwrap();
    ensure!((0.0..=1.0).contains(&base), "P = {base} outside [0,1]");
    let faster = capacity::activity_probability(&files, p, r_g * (1.0 + bump)).unwrap();
    ensure!(faster <= base, "P increased with r_g: {base} -> {faster}");
    let busier = capacity::activity_probability(&files, (p * (1.0 + bump)).min(1.0), r_g).unwrap();
    ensure!(busier >= base, "P decreased with p: {base} -> {busier}");
    let heavier = capacity::activity_probability(&bigger, p, r_g).unwrap();
    ensure!(heavier >= base, "P decreased with mu_f: {base} -> {heavier}");
    Ok(())
}

/// n_bs nondecreasing in n and in p.
pub fn base_stations_monotone(n: u64, p: f64, mu: f64, r_t: f64, r_g_frac: f64, dn: u64, dp: f64) -> Check {
    let s = scenario(n, p, mu, r_t);
    let r_g = r_t * r_g_frac;
    let base = capacity::expected_base_stations(&s, r_g).unwrap();
    ensure!(base >= 0.0, "negative n_bs {base}");
    let more = capacity::expected_base_stations(&ScenarioParams { n: n + dn, ..s.clone() }, r_g).unwrap();
    ensure!(more >= base, "n_bs decreased with n: {base} -> {more}");
    let p2 = (p + dp).min(1.0);
    let busier = capacity::expected_base_stations(&ScenarioParams { p: p2, ..s }, r_g).unwrap();
    ensure!(busier >= base, "n_bs decreased with p: {base} -> {busier}");
    Ok(())
}

/// With P = 1, n_bs is flat in r_t up to R_max/N_max and linear above.
pub fn saturated_kink(n: u64, r_t: f64) -> Check {
    // Huge files keep every user active for any r_t in range.
    let s = scenario(n, 1.0, 1e12, r_t);
    let v = capacity::expected_base_stations(&s, r_t).unwrap();
    let kink = s.r_max / s.n_max as f64;
    let expected = if r_t <= kink { n as f64 / s.n_max as f64 } else { n as f64 * r_t / s.r_max };
    ensure!(
        (v - expected).abs() <= 1e-12 * expected.max(1.0),
        "r_t={r_t}: n_bs {v} expected {expected}"
    );
    Ok(())
}

/// Ceiling is at least the fractional value and less than one above it.
pub fn ceiling_gap(n: u64, p: f64, mu: f64, r_t: f64) -> Check {
    let s = scenario(n, p, mu, r_t);
    let frac = capacity::expected_base_stations(&s, r_t).unwrap();
    let ceil = capacity::required_base_stations(&s, r_t).unwrap() as f64;
    ensure!(ceil >= frac && ceil - frac < 1.0, "ceil {ceil} vs frac {frac}");
    Ok(())
}

/// Doubling p doubles n_bs exactly while the scenario stays stable.
pub fn stable_linear_in_p(n: u64, p: f64, mu: f64, r_t: f64) -> Check {
    let s = scenario(n, p, mu, r_t);
    if !capacity::is_stable(&s.files, 2.0 * p, r_t).unwrap() {
        return Ok(());
    }
    let one = capacity::expected_base_stations(&s, r_t).unwrap();
    let two = capacity::expected_base_stations(&ScenarioParams { p: 2.0 * p, ..s }, r_t).unwrap();
    ensure!(two == 2.0 * one, "doubling p: {one} -> {two}");
    Ok(())
}

// ---- goodput model ----

pub fn goodput_within_cap(kind: ProtocolKind, p_p: f64, rtt: f64, r_t: f64) -> Check {
    let cfg = protocol(kind, p_p, rtt);
    let g = goodput::goodput(&cfg, r_t).unwrap();
    let cap = r_t * (1.0 - p_p);
    ensure!(g >= 0.0 && g <= cap && cap <= r_t, "{kind} goodput {g}, cap {cap}, r_t {r_t}");
    Ok(())
}

pub fn goodput_monotone_in_throughput(kind: ProtocolKind, p_p: f64, rtt: f64, r_t: f64, bump: f64) -> Check {
    let cfg = protocol(kind, p_p, rtt);
    let a = goodput::goodput(&cfg, r_t).unwrap();
    let b = goodput::goodput(&cfg, r_t * (1.0 + bump)).unwrap();
    ensure!(b >= a, "{kind}: goodput fell from {a} to {b} as r_t grew");
    Ok(())
}

/// Loss-limited TCP rate strictly falls with p_p; the windowed rate never rises.
pub fn tcp_decreasing_in_loss(p_p: f64, rtt: f64, bump: f64) -> Check {
    let q = (p_p * (1.0 + bump)).min(0.999);
    if q <= p_p {
        return Ok(());
    }
    let a = goodput::tcp_loss_limited_packets(p_p, rtt);
    let b = goodput::tcp_loss_limited_packets(q, rtt);
    ensure!(b < a, "loss term not decreasing: {a} at {p_p}, {b} at {q}");
    let ra = goodput::raw_tcp(&protocol(ProtocolKind::Tcp, p_p, rtt)).unwrap();
    let rb = goodput::raw_tcp(&protocol(ProtocolKind::Tcp, q, rtt)).unwrap();
    ensure!(rb <= ra, "raw tcp increased with loss: {ra} -> {rb}");
    Ok(())
}

/// With srtt = rtt the coded rate ignores p_p except through the delivery cap.
pub fn tcp_nc_loss_only_through_cap(p_p: f64, rtt: f64, r_t: f64) -> Check {
    let lossless = protocol(ProtocolKind::TcpNc, 0.0, rtt);
    let lossy = protocol(ProtocolKind::TcpNc, p_p, rtt);
    let raw0 = goodput::raw_tcp_nc(&lossless).unwrap();
    let raw1 = goodput::raw_tcp_nc(&lossy).unwrap();
    ensure!(raw0 == raw1, "raw TCP/NC depends on p_p: {raw0} vs {raw1}");
    let g = goodput::goodput_tcp_nc(&lossy, r_t).unwrap();
    let expected = raw1.min(r_t * (1.0 - p_p));
    ensure!(g == expected, "TCP/NC goodput {g} expected {expected}");
    if r_t * (1.0 - p_p) >= raw1 {
        ensure!(g == goodput::goodput_tcp_nc(&lossless, r_t).unwrap(), "plateau differs with p_p");
    }
    Ok(())
}

pub fn tcp_nc_dominates_tcp(p_p: f64, rtt: f64, r_t: f64) -> Check {
    let nc = goodput::goodput_tcp_nc(&protocol(ProtocolKind::TcpNc, p_p, rtt), r_t).unwrap();
    let tcp = goodput::goodput_tcp(&protocol(ProtocolKind::Tcp, p_p, rtt), r_t).unwrap();
    ensure!(nc >= tcp, "TCP/NC {nc} below TCP {tcp} at p_p={p_p}");
    Ok(())
}

pub fn long_connection_converges(w_max: u32, rtt: f64) -> Check {
    let steady = ProtocolConfig { w_max, ..protocol(ProtocolKind::TcpNc, 0.0, rtt) };
    let long = ProtocolConfig { t_rtts: Some(1e6), ..steady.clone() };
    let limit = goodput::window_limited_rate(&steady).unwrap().unwrap();
    let finite = goodput::raw_tcp_nc(&long).unwrap();
    ensure!(((finite - limit) / limit).abs() < 1e-2, "t=1e6 gives {finite}, limit {limit}");
    Ok(())
}

// ---- traffic simulator ----

pub fn small_sim(horizon: f64, iterations: u32, seed: u64, start: StartState) -> SimConfig {
    SimConfig { horizon, dt: 0.1, warmup: 0.0, start, iterations, seed }
}

pub fn mixture(sizes: &[f64], weights: &[f64]) -> FileSizeDistribution {
    let total: f64 = weights.iter().sum();
    let pairs: Vec<_> = sizes.iter().zip(weights).map(|(&s, &w)| (s, w / total)).collect();
    FileSizeDistribution::from_pairs(&pairs).unwrap()
}

pub fn simulation_deterministic(s: &ScenarioParams, r_g: f64, seed: u64) -> Check {
    let cfg = small_sim(5.0, 3, seed, StartState::Stationary);
    let a = sim::run_simulation(s, &cfg, r_g).unwrap();
    let b = sim::run_simulation(s, &cfg, r_g).unwrap();
    ensure!(a == b, "same seed gave different stats");
    let bits = |x: &bsplanner::SimStats| x.per_iteration.iter().map(|i| i.mean_nbs_fractional.to_bits()).collect::<Vec<_>>();
    ensure!(bits(&a) == bits(&b), "results not bit-identical");
    Ok(())
}

/// Served bits equal completed sizes plus partial progress of queued work.
pub fn bits_conserved(s: &ScenarioParams, r_g: f64, seed: u64, start: StartState) -> Check {
    let cfg = small_sim(20.0, 1, seed, start);
    let it = sim::run_iteration(s, &cfg, r_g, &mut sim::iteration_rng(seed, 0)).unwrap();
    let accounted = it.bits_completed + it.bits_in_flight;
    let scale = it.bits_served.abs().max(1.0);
    ensure!(
        (it.bits_served - accounted).abs() <= 1e-6 * scale,
        "served {} vs completed+in-flight {accounted}",
        it.bits_served
    );
    Ok(())
}

/// Queues shrink only by completion; queued work strictly shrinks every slot;
/// demand never exceeds the all-active bound.
pub fn step_invariants(s: &ScenarioParams, r_g: f64, seed: u64, steps: usize) -> Check {
    let dt = 0.1;
    let mut users = vec![UserState::default(); s.n as usize];
    let mut rng = sim::iteration_rng(seed, 0);
    let bound = s.n as f64 * s.per_user_load();
    for i in 0..steps {
        let now = i as f64 * dt;
        let before: Vec<Vec<f64>> =
            users.iter().map(|u| u.queue.iter().map(|t| t.remaining).collect()).collect();
        let m = sim::step(&mut users, s, r_g, dt, now, &mut rng).unwrap();
        ensure!(m.demand <= bound * (1.0 + 1e-12), "demand {} above bound {bound}", m.demand);
        let queued_before: usize = before.iter().map(Vec::len).sum();
        let queued_after: usize = users.iter().map(|u| u.queue.len()).sum();
        ensure!(
            queued_before as u64 + m.arrivals == queued_after as u64 + m.completed,
            "queue accounting off at slot {i}"
        );
        for (u, old) in users.iter().zip(&before) {
            let arrived = u.queue.last().is_some_and(|t| t.started == Some(now));
            // An arrival may also finish within its first slot, so the share
            // divides by either the old queue length or one more.
            let shares = [old.len().max(1), old.len() + 1].map(|k| r_g * dt / k as f64);
            // Carried-over work is an ordered subsequence of the old queue,
            // each entry reduced by exactly one share.
            let carried = &u.queue[..u.queue.len() - usize::from(arrived)];
            let mut olds = old.iter();
            for t in carried {
                ensure!(t.remaining > 0.0, "non-positive remaining {}", t.remaining);
                ensure!(
                    olds.any(|&o| shares.iter().any(|&sh| o - sh == t.remaining) && t.remaining < o),
                    "remaining {} does not follow from the previous slot",
                    t.remaining
                );
            }
        }
    }
    Ok(())
}

/// Mean completion time ≈ μ_f / r_g at light load.
pub fn light_load_completion_time(mu: f64, r_g: f64, seed: u64) -> Check {
    // rho = 0.02 keeps concurrent transactions rare.
    let p = 0.02 * r_g / mu;
    let s = scenario(500, p, mu, r_g);
    let cfg = SimConfig { horizon: 400.0, ..small_sim(400.0, 1, seed, StartState::Stationary) };
    let stats = sim::run_simulation(&s, &cfg, r_g).unwrap();
    let expected = mu / r_g;
    let t = stats.mean_completion_time.ok_or("no completions")?;
    ensure!(((t - expected) / expected).abs() <= 0.10, "mean completion {t} vs {expected}");
    Ok(())
}

/// Stable points with Δp between 0.25 and 0.8.
pub const LITTLE_LAW_CASES: [(&str, f64, f64); 5] = [
    (MIX_5_08, 0.03, 4.0 * MBPS),
    (MIX_3_2, 0.01, 1.0 * MBPS),
    (MIX_3_2, 0.02, 1.0 * MBPS),
    (MIX_3_2, 0.03, 1.0 * MBPS),
    (MIX_5_08, 0.015, 0.8 * MBPS),
];

/// Active fraction within 5% of `min(1, Δp)` at n = 1000, 1000 s, 10 iterations.
pub fn little_law_concordance(id: &str, p: f64, r_g: f64) -> Check {
    let files = mixtures::mixture(id).unwrap();
    let rho = capacity::activity_probability(&files, p, r_g).unwrap();
    ensure!(rho <= 0.8 + 1e-12, "{id} p={p}: Δp = {rho} outside the stable range");
    let s = ScenarioParams { files, ..scenario(1000, p, 1.0, r_g) };
    let cfg = SimConfig { iterations: 10, ..SimConfig::default() };
    let stats = sim::run_simulation(&s, &cfg, r_g).unwrap();
    let rel = (stats.mean_active_fraction - rho) / rho;
    ensure!(
        rel.abs() <= 0.05,
        "{id} p={p} r_g={r_g}: active {} vs {rho}",
        stats.mean_active_fraction
    );
    Ok(())
}
