//! Closed-form activity probability and base-station requirement.
//!
//! A user initiating transactions with per-second probability `p`, whose
//! transactions take on average `Δ = μ_f / r_g` seconds, holds `Δ·p`
//! transactions on average (Little's law). Read as the fraction of time the
//! user is active, this is capped at one once arrivals outpace service:
//!
//! ```text
//! P(Δ, p) = min(1, Δ·p)
//! n_bs    = n · P(Δ, p) · max(r_t / R_max, 1 / N_max)
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::units;

/// Tolerance on the total probability mass of a [`FileSizeDistribution`].
pub const PROB_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FileSizeEntry {
    /// Size in bits.
    #[serde(with = "units::serde_size")]
    pub size: f64,
    pub prob: f64,
}

/// Discrete distribution over file sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<FileSizeEntry>", into = "Vec<FileSizeEntry>")]
pub struct FileSizeDistribution {
    entries: Vec<FileSizeEntry>,
    mean: f64,
}

impl FileSizeDistribution {
    pub fn new(entries: Vec<FileSizeEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(invalid("files", "[]", "distribution needs at least one entry"));
        }
        for e in &entries {
            if !(e.size.is_finite() && e.size > 0.0) {
                return Err(invalid("files.size", e.size, "file sizes must be positive"));
            }
            if !(e.prob.is_finite() && e.prob >= 0.0) {
                return Err(invalid("files.prob", e.prob, "probabilities must be nonnegative"));
            }
        }
        let total: f64 = entries.iter().map(|e| e.prob).sum();
        if (total - 1.0).abs() > PROB_SUM_TOLERANCE {
            return Err(invalid("files.prob", total, "probabilities must sum to 1"));
        }
        let mean = entries.iter().map(|e| e.size * e.prob).sum();
        Ok(Self { entries, mean })
    }

    /// Builds a distribution from `(size_bits, prob)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(size, prob)| FileSizeEntry { size, prob })
                .collect(),
        )
    }

    /// Always returns `size`.
    pub fn point(size: f64) -> Result<Self> {
        Self::from_pairs(&[(size, 1.0)])
    }

    pub fn entries(&self) -> &[FileSizeEntry] {
        &self.entries
    }

    /// Mean file size μ_f in bits.
    pub fn mean(&self) -> f64 {
        self.mean
    }
}

impl TryFrom<Vec<FileSizeEntry>> for FileSizeDistribution {
    type Error = crate::Error;

    fn try_from(entries: Vec<FileSizeEntry>) -> Result<Self> {
        Self::new(entries)
    }
}

impl From<FileSizeDistribution> for Vec<FileSizeEntry> {
    fn from(d: FileSizeDistribution) -> Self {
        d.entries
    }
}

/// Population and provisioning knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    /// Number of users.
    pub n: u64,
    /// Transaction-initiation probability per one-second slot.
    pub p: f64,
    pub files: FileSizeDistribution,
    /// Provisioned per-user throughput, bits/s.
    #[serde(with = "units::serde_rate")]
    pub r_t: f64,
    /// Per-station throughput capacity, bits/s.
    #[serde(with = "units::serde_rate")]
    pub r_max: f64,
    /// Per-station limit on simultaneously active users.
    pub n_max: u64,
}

impl ScenarioParams {
    pub fn validate(&self) -> Result<()> {
        check_p(self.p)?;
        if !(self.r_t.is_finite() && self.r_t > 0.0) {
            return Err(invalid("r_t", self.r_t, "must be positive"));
        }
        if !(self.r_max.is_finite() && self.r_max > 0.0) {
            return Err(invalid("r_max", self.r_max, "must be positive"));
        }
        if self.n_max < 1 {
            return Err(invalid("n_max", self.n_max, "must be at least 1"));
        }
        Ok(())
    }

    /// Share of one base station consumed by a single active user.
    pub fn per_user_load(&self) -> f64 {
        (self.r_t / self.r_max).max(1.0 / self.n_max as f64)
    }

    /// Fractional stations needed by `active` concurrently active users.
    ///
    /// Divides last, so whole-station answers come out exact.
    pub fn stations_for(&self, active: f64) -> f64 {
        if self.r_t * self.n_max as f64 > self.r_max {
            active * self.r_t / self.r_max
        } else {
            active / self.n_max as f64
        }
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid("p", p, "must lie in [0, 1]"));
    }
    Ok(())
}

fn check_goodput(r_g: f64) -> Result<()> {
    if !(r_g.is_finite() && r_g > 0.0) {
        return Err(invalid("r_g", r_g, "goodput must be positive"));
    }
    Ok(())
}

/// Expected transaction duration `μ_f / r_g` in seconds.
pub fn mean_transaction_duration(files: &FileSizeDistribution, r_g: f64) -> Result<f64> {
    check_goodput(r_g)?;
    Ok(files.mean() / r_g)
}

fn load(files: &FileSizeDistribution, p: f64, r_g: f64) -> Result<f64> {
    check_p(p)?;
    Ok(mean_transaction_duration(files, r_g)? * p)
}

/// Long-run probability that a user is active, `min(1, Δ·p)`.
pub fn activity_probability(files: &FileSizeDistribution, p: f64, r_g: f64) -> Result<f64> {
    Ok(load(files, p, r_g)?.min(1.0))
}

/// True iff `Δ·p < 1`.
pub fn is_stable(files: &FileSizeDistribution, p: f64, r_g: f64) -> Result<bool> {
    Ok(load(files, p, r_g)? < 1.0)
}

/// Fractional number of base stations, not rounded.
pub fn expected_base_stations(params: &ScenarioParams, r_g: f64) -> Result<f64> {
    params.validate()?;
    let prob = activity_probability(&params.files, params.p, r_g)?;
    Ok(params.stations_for(params.n as f64 * prob))
}

/// Whole number of base stations, the ceiling of [`expected_base_stations`].
pub fn required_base_stations(params: &ScenarioParams, r_g: f64) -> Result<u64> {
    Ok(expected_base_stations(params, r_g)?.ceil() as u64)
}
