//! Discrete-time Monte Carlo simulation of user transactions.
//!
//! Time advances in slots of `dt` seconds. In every slot each user first
//! starts a new transaction with probability `p·dt` (the per-second
//! probability thinned linearly), then every active user splits its goodput
//! equally among the `k` transactions it holds at that point, serving
//! `(r_g/k)·dt` bits to each. Bandwidth released by a transaction that finishes
//! mid-slot is not handed to the others until the next slot.
//!
//! Each user's queue is an M/G/1 processor-sharing queue with load
//! `ρ = p·μ_f/r_g`. With [`StartState::Stationary`] a stable user (`ρ < 1`)
//! starts from that queue's stationary law: `k` transactions with
//! `P(k) = (1−ρ)·ρ^k`, each of a size-biased type with a uniformly
//! distributed fraction left to deliver. Users with `ρ ≥ 1` have no stationary
//! law and start idle, as every user does under [`StartState::Idle`].
//!
//! Runs whose users start idle first simulate a warm-up period that is
//! excluded from the time averages and completion statistics. A stationary
//! start needs none and skips it.
//!
//! Every iteration draws from its own ChaCha8 stream: the master seed keys
//! the generator and the iteration index selects the stream, so iterations can
//! run in parallel while results stay bit-identical for a given seed.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capacity::{FileSizeDistribution, ScenarioParams};
use crate::error::{invalid, Result};
use crate::units;

/// Above this per-slot arrival probability the linear thinning `p·dt` is a
/// visibly poor stand-in for the per-second process.
pub const THINNING_WARN_THRESHOLD: f64 = 0.1;

/// Remaining work at or below this fraction of the file size counts as done.
const COMPLETION_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartState {
    /// Every queue empty.
    Idle,
    /// Stable users drawn from the stationary queue law.
    #[default]
    Stationary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    #[serde(with = "units::serde_time")]
    pub horizon: f64,
    #[serde(with = "units::serde_time")]
    pub dt: f64,
    /// Unmeasured lead-in for runs starting idle, seconds.
    #[serde(default, with = "units::serde_time")]
    pub warmup: f64,
    #[serde(default)]
    pub start: StartState,
    pub iterations: u32,
    #[serde(default)]
    pub seed: u64,
}

impl Default for SimConfig {
    /// 1000 s at 0.1 s resolution, 100 iterations, stationary start with a
    /// 1000 s warm-up for saturated scenarios.
    fn default() -> Self {
        Self {
            horizon: 1000.0,
            dt: 0.1,
            warmup: 1000.0,
            start: StartState::Stationary,
            iterations: 100,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(invalid("dt", self.dt, "must be positive"));
        }
        if !(self.horizon.is_finite() && self.horizon >= self.dt) {
            return Err(invalid("horizon", self.horizon, "must be at least dt"));
        }
        if !(self.warmup.is_finite() && self.warmup >= 0.0) {
            return Err(invalid("warmup", self.warmup, "must be nonnegative"));
        }
        if self.iterations < 1 {
            return Err(invalid("iterations", self.iterations, "need at least one iteration"));
        }
        Ok(())
    }

    /// Measured slots.
    pub fn steps(&self) -> u64 {
        (self.horizon / self.dt).round() as u64
    }

    pub fn warmup_steps(&self) -> u64 {
        (self.warmup / self.dt).round() as u64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transaction {
    /// Original size in bits.
    pub size: f64,
    /// Bits still to deliver, always positive while queued.
    pub remaining: f64,
    /// Time the transaction was started, seconds. `None` for transactions
    /// placed in the queue by the initial state.
    pub started: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct UserState {
    pub queue: Vec<Transaction>,
}

impl UserState {
    pub fn is_active(&self) -> bool {
        !self.queue.is_empty()
    }

    pub fn push(&mut self, size: f64, started: f64) {
        self.queue.push(Transaction { size, remaining: size, started: Some(started) });
    }
}

/// What happened during one slot.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepMetrics {
    /// Users holding at least one transaction while being served.
    pub active: u64,
    /// `active · max(r_t/R_max, 1/N_max)`.
    pub demand: f64,
    pub arrivals: u64,
    /// Completed transactions that arrived during the run.
    pub completed: u64,
    /// Sum of completion times of transactions finished in this slot.
    pub completion_time_sum: f64,
    pub bits_served: f64,
    /// Total original size of transactions finished in this slot.
    pub bits_completed: f64,
}

/// Draws a file size by inverse CDF over the entries in order.
pub fn sample_file_size<R: Rng + ?Sized>(files: &FileSizeDistribution, rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for e in files.entries() {
        acc += e.prob;
        if u < acc {
            return e.size;
        }
    }
    // Rounding can leave the total mass a hair under one.
    files
        .entries()
        .iter()
        .rev()
        .find(|e| e.prob > 0.0)
        .map_or(files.entries()[0].size, |e| e.size)
}

/// Draws one user from the stationary law of its processor-sharing queue at
/// load `rho < 1`.
pub fn stationary_user<R: Rng + ?Sized>(
    files: &FileSizeDistribution,
    rho: f64,
    rng: &mut R,
) -> UserState {
    let mut user = UserState::default();
    if !(rho > 0.0 && rho < 1.0) {
        return user;
    }
    let mean = files.mean();
    while rng.random::<f64>() < rho {
        // Type chosen with probability prob·size/μ_f.
        let u: f64 = rng.random::<f64>() * mean;
        let mut acc = 0.0;
        let mut size = files.entries().last().map_or(mean, |e| e.size);
        for e in files.entries() {
            acc += e.prob * e.size;
            if u < acc {
                size = e.size;
                break;
            }
        }
        let remaining = size * (1.0 - rng.random::<f64>());
        user.queue.push(Transaction { size, remaining, started: None });
    }
    user
}

fn user_load(scenario: &ScenarioParams, r_g: f64) -> f64 {
    scenario.p * scenario.files.mean() / r_g
}

/// Whether a run with this start mode begins from the stationary law.
pub fn starts_stationary(scenario: &ScenarioParams, r_g: f64, start: StartState) -> bool {
    start == StartState::Stationary && user_load(scenario, r_g) < 1.0
}

/// Initial population for a run.
pub fn initial_users<R: Rng + ?Sized>(
    scenario: &ScenarioParams,
    r_g: f64,
    start: StartState,
    rng: &mut R,
) -> Vec<UserState> {
    let n = scenario.n as usize;
    if starts_stationary(scenario, r_g, start) {
        let rho = user_load(scenario, r_g);
        (0..n).map(|_| stationary_user(&scenario.files, rho, rng)).collect()
    } else {
        vec![UserState::default(); n]
    }
}

fn check_slot(scenario: &ScenarioParams, r_g: f64, dt: f64) -> Result<f64> {
    scenario.validate()?;
    if !(r_g.is_finite() && r_g > 0.0) {
        return Err(invalid("r_g", r_g, "goodput must be positive"));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(invalid("dt", dt, "must be positive"));
    }
    let p_slot = scenario.p * dt;
    if p_slot > 1.0 {
        return Err(invalid("dt", dt, format!("p·dt = {p_slot} exceeds 1")));
    }
    Ok(p_slot)
}

fn step_unchecked<R: Rng + ?Sized>(
    users: &mut [UserState],
    scenario: &ScenarioParams,
    p_slot: f64,
    r_g: f64,
    dt: f64,
    now: f64,
    rng: &mut R,
) -> StepMetrics {
    let mut m = StepMetrics::default();
    let end = now + dt;
    for user in users.iter_mut() {
        if rng.random::<f64>() < p_slot {
            user.push(sample_file_size(&scenario.files, rng), now);
            m.arrivals += 1;
        }
        if user.queue.is_empty() {
            continue;
        }
        m.active += 1;
        let share = r_g * dt / user.queue.len() as f64;
        user.queue.retain_mut(|tx| {
            if tx.remaining - share <= COMPLETION_EPS * tx.size {
                m.bits_served += tx.remaining;
                m.bits_completed += tx.size;
                if let Some(started) = tx.started {
                    m.completed += 1;
                    m.completion_time_sum += end - started;
                }
                false
            } else {
                tx.remaining -= share;
                m.bits_served += share;
                true
            }
        });
    }
    m.demand = scenario.stations_for(m.active as f64);
    m
}

/// Advances every user by one slot of `dt` seconds starting at time `now`.
pub fn step<R: Rng + ?Sized>(
    users: &mut [UserState],
    scenario: &ScenarioParams,
    r_g: f64,
    dt: f64,
    now: f64,
    rng: &mut R,
) -> Result<StepMetrics> {
    let p_slot = check_slot(scenario, r_g, dt)?;
    Ok(step_unchecked(
        users,
        scenario,
        p_slot,
        r_g,
        dt,
        now,
        rng,
    ))
}

/// Outcome of a single run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationStats {
    pub mean_active_fraction: f64,
    pub mean_nbs_fractional: f64,
    pub nbs_required: u64,
    /// Largest instantaneous fractional demand seen.
    pub peak_demand: f64,
    pub arrivals: u64,
    pub completed: u64,
    /// `None` when nothing finished.
    pub mean_completion_time: Option<f64>,
    /// Bits delivered over the whole run, warm-up included.
    pub bits_served: f64,
    /// Bits already delivered for transactions still queued at the end.
    pub bits_in_flight: f64,
    /// Total size of transactions completed over the whole run.
    pub bits_completed: f64,
}

/// Runs one iteration from idle users.
pub fn run_iteration<R: Rng + ?Sized>(
    scenario: &ScenarioParams,
    sim: &SimConfig,
    r_g: f64,
    rng: &mut R,
) -> Result<IterationStats> {
    sim.validate()?;
    let p_slot = check_slot(scenario, r_g, sim.dt)?;
    if p_slot > THINNING_WARN_THRESHOLD {
        log::warn!("per-slot arrival probability p·dt = {p_slot} is large; consider a smaller dt");
    }
    let mut users = initial_users(scenario, r_g, sim.start, rng);
    let initial_bits: f64 = users.iter().flat_map(|u| &u.queue).map(|tx| tx.size - tx.remaining).sum();
    let warmup = if starts_stationary(scenario, r_g, sim.start) { 0 } else { sim.warmup_steps() };
    let steps = sim.steps();

    let mut active_sum = 0u64;
    let mut peak_demand = 0.0f64;
    let mut arrivals = 0;
    let mut completed = 0;
    let mut completion_time_sum = 0.0;
    let mut bits_served = 0.0;
    let mut bits_completed = 0.0;

    for i in 0..warmup + steps {
        let now = i as f64 * sim.dt;
        let m = step_unchecked(&mut users, scenario, p_slot, r_g, sim.dt, now, rng);
        bits_served += m.bits_served;
        bits_completed += m.bits_completed;
        if i < warmup {
            continue;
        }
        active_sum += m.active;
        peak_demand = peak_demand.max(m.demand);
        arrivals += m.arrivals;
        completed += m.completed;
        completion_time_sum += m.completion_time_sum;
    }

    let bits_in_flight: f64 = users
        .iter()
        .flat_map(|u| u.queue.iter())
        .map(|tx| tx.size - tx.remaining)
        .sum();
    // Work delivered before the run started counts as served.
    bits_served += initial_bits;

    let slots = steps as f64;
    let mean_active_fraction = if scenario.n == 0 {
        0.0
    } else {
        active_sum as f64 / (slots * scenario.n as f64)
    };
    // Demand is linear in the active count, so average the exact integer count.
    let mean_nbs_fractional = scenario.stations_for(active_sum as f64 / slots);
    Ok(IterationStats {
        mean_active_fraction,
        mean_nbs_fractional,
        nbs_required: mean_nbs_fractional.ceil() as u64,
        peak_demand,
        arrivals,
        completed,
        mean_completion_time: (completed > 0).then(|| completion_time_sum / completed as f64),
        bits_served,
        bits_in_flight,
        bits_completed,
    })
}

/// Aggregate over all iterations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimStats {
    pub mean_active_fraction: f64,
    pub mean_nbs_fractional: f64,
    /// Mean over iterations of the per-iteration ceiling.
    pub nbs_required: f64,
    /// Sample standard deviation of the per-iteration fractional demand.
    pub nbs_fractional_std: f64,
    /// Sample standard deviation of the per-iteration ceiling.
    pub nbs_required_std: f64,
    pub completed: u64,
    pub mean_completion_time: Option<f64>,
    pub per_iteration: Vec<IterationStats>,
}

/// Generator for iteration `index` under master seed `seed`.
pub fn iteration_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn mean_std(values: impl ExactSizeIterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.clone().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Runs `sim.iterations` independent iterations, in parallel, and aggregates.
pub fn run_simulation(scenario: &ScenarioParams, sim: &SimConfig, r_g: f64) -> Result<SimStats> {
    sim.validate()?;
    check_slot(scenario, r_g, sim.dt)?;
    let per_iteration = (0..u64::from(sim.iterations))
        .into_par_iter()
        .map(|i| run_iteration(scenario, sim, r_g, &mut iteration_rng(sim.seed, i)))
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(per_iteration))
}

fn aggregate(per_iteration: Vec<IterationStats>) -> SimStats {
    let (mean_active_fraction, _) = mean_std(per_iteration.iter().map(|s| s.mean_active_fraction));
    let (mean_nbs_fractional, nbs_fractional_std) =
        mean_std(per_iteration.iter().map(|s| s.mean_nbs_fractional));
    let (nbs_required, nbs_required_std) =
        mean_std(per_iteration.iter().map(|s| s.nbs_required as f64));
    let completed = per_iteration.iter().map(|s| s.completed).sum::<u64>();
    let time_sum: f64 = per_iteration
        .iter()
        .filter_map(|s| s.mean_completion_time.map(|t| t * s.completed as f64))
        .sum();
    SimStats {
        mean_active_fraction,
        mean_nbs_fractional,
        nbs_required,
        nbs_fractional_std,
        nbs_required_std,
        completed,
        mean_completion_time: (completed > 0).then(|| time_sum / completed as f64),
        per_iteration,
    }
}
