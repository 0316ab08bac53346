//! Seeded simulation of multiplicative repetition.
//!
//! A gamble evaluated at reference wealth `W` becomes a set of growth factors
//! `(W + dW) / W`. Each round multiplies current wealth by one factor drawn
//! independently, so the venture scales with wealth. The per-trajectory
//! realized growth rate converges almost surely to the time-average growth
//! rate of the gamble.
//!
//! Trajectory `i` draws from its own ChaCha stream keyed by `(seed, i)`, so
//! results do not depend on how trajectories are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gamble::Gamble;
use crate::paradigms::log_ratio;

/// Largest number of paths ruin estimation will enumerate exactly.
pub const EXACT_ENUMERATION_LIMIT: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthFactor {
    pub factor: f64,
    pub log_factor: f64,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthFactors {
    factors: Vec<GrowthFactor>,
    duration: f64,
}

impl GrowthFactors {
    pub fn factors(&self) -> &[GrowthFactor] {
        &self.factors
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// `<f>`, the per-round growth of expected wealth.
    pub fn expected_factor(&self) -> f64 {
        self.factors.iter().map(|f| f.probability * f.factor).sum()
    }

    /// `<ln f>`, the per-round time-average log growth.
    pub fn mean_log_factor(&self) -> f64 {
        self.factors.iter().map(|f| f.probability * f.log_factor).sum()
    }

    /// Variance of `ln f` over one round.
    pub fn log_variance(&self) -> f64 {
        let mean = self.mean_log_factor();
        self.factors
            .iter()
            .map(|f| f.probability * (f.log_factor - mean).powi(2))
            .sum()
    }

    fn live(&self) -> impl Iterator<Item = &GrowthFactor> {
        self.factors.iter().filter(|f| f.probability > 0.0)
    }
}

/// Per-round growth factors of `g` at reference wealth `wealth`.
///
/// Zero-probability outcomes with a nonpositive factor are dropped; any
/// other nonpositive factor is a bankruptcy.
pub fn multiplicative_factors(g: &Gamble, wealth: f64) -> Result<GrowthFactors> {
    if !(wealth.is_finite() && wealth > 0.0) {
        return Err(Error::invalid("wealth", format!("{wealth} must be > 0")));
    }
    let mut factors = Vec::with_capacity(g.outcomes().len());
    for o in g.outcomes() {
        let end = wealth + o.delta_wealth;
        if !(end > 0.0) {
            if o.probability > 0.0 {
                return Err(Error::Bankruptcy {
                    wealth,
                    delta: o.delta_wealth,
                    probability: o.probability,
                });
            }
            continue;
        }
        factors.push(GrowthFactor {
            factor: end / wealth,
            log_factor: log_ratio(wealth, end),
            probability: o.probability,
        });
    }
    Ok(GrowthFactors {
        factors,
        duration: g.duration(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimulationConfig {
    pub rounds: usize,
    pub trajectories: usize,
    pub seed: u64,
    pub initial_wealth: f64,
}

impl SimulationConfig {
    pub fn new(rounds: usize, trajectories: usize, seed: u64, initial_wealth: f64) -> Result<Self> {
        if rounds == 0 {
            return Err(Error::invalid("rounds", "at least one round is required"));
        }
        if trajectories == 0 {
            return Err(Error::invalid("trajectories", "at least one trajectory is required"));
        }
        if !(initial_wealth.is_finite() && initial_wealth > 0.0) {
            return Err(Error::invalid(
                "initial_wealth",
                format!("{initial_wealth} must be > 0"),
            ));
        }
        Ok(Self {
            rounds,
            trajectories,
            seed,
            initial_wealth,
        })
    }
}

/// One simulated wealth path in log space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    /// `ln(W(t_j) / W(t_0))` for rounds `j = 0..=k`; entry 0 is always 0.
    pub log_wealth_path: Vec<f64>,
    /// Final log-wealth ratio divided by `k * dt`.
    pub realized_growth: f64,
}

impl Trajectory {
    pub fn rounds(&self) -> usize {
        self.log_wealth_path.len() - 1
    }

    pub fn final_log_wealth(&self) -> f64 {
        *self.log_wealth_path.last().expect("path holds the starting point")
    }

    pub fn final_wealth(&self, initial_wealth: f64) -> f64 {
        initial_wealth * self.final_log_wealth().exp()
    }
}

/// Draws outcome indices according to the factor probabilities.
struct Sampler {
    cumulative: Vec<f64>,
    last_live: usize,
}

impl Sampler {
    fn new(factors: &GrowthFactors) -> Self {
        let mut acc = 0.0;
        let cumulative = factors
            .factors
            .iter()
            .map(|f| {
                acc += f.probability;
                acc
            })
            .collect();
        let last_live = factors.factors.iter().rposition(|f| f.probability > 0.0).unwrap_or(0);
        Self { cumulative, last_live }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        // sums that fall short of 1 by rounding send the remainder to the last live outcome
        self.cumulative.iter().position(|&c| u < c).unwrap_or(self.last_live)
    }
}

fn stream_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn run_trajectory(config: &SimulationConfig, factors: &GrowthFactors, sampler: &Sampler, index: usize) -> Trajectory {
    let mut rng = stream_rng(config.seed, index);
    let mut path = Vec::with_capacity(config.rounds + 1);
    let mut log_w = 0.0;
    path.push(log_w);
    for _ in 0..config.rounds {
        log_w += factors.factors[sampler.draw(&mut rng)].log_factor;
        path.push(log_w);
    }
    Trajectory {
        log_wealth_path: path,
        realized_growth: log_w / (config.rounds as f64 * factors.duration),
    }
}

/// Simulates `config.trajectories` independent paths of `config.rounds` rounds.
pub fn simulate(config: &SimulationConfig, factors: &GrowthFactors) -> Result<Vec<Trajectory>> {
    if factors.live().next().is_none() {
        return Err(Error::invalid("factors", "no factor has positive probability"));
    }
    let sampler = Sampler::new(factors);
    Ok((0..config.trajectories)
        .into_par_iter()
        .map(|i| run_trajectory(config, factors, &sampler, i))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthEstimate {
    pub mean: f64,
    /// Standard error of the mean; NaN for a single trajectory.
    pub standard_error: f64,
    pub trajectories: usize,
}

/// Sample mean and standard error of the realized growth rates.
pub fn estimate_growth(trajectories: &[Trajectory]) -> Result<GrowthEstimate> {
    let n = trajectories.len();
    if n == 0 {
        return Err(Error::invalid("trajectories", "no trajectories to estimate from"));
    }
    // Welford: exact for identical samples
    let (mut mean, mut m2) = (0.0, 0.0);
    for (i, t) in trajectories.iter().enumerate() {
        let d = t.realized_growth - mean;
        mean += d / (i + 1) as f64;
        m2 += d * (t.realized_growth - mean);
    }
    let standard_error = if n > 1 {
        (m2 / (n - 1) as f64 / n as f64).sqrt()
    } else {
        f64::NAN
    };
    Ok(GrowthEstimate {
        mean,
        standard_error,
        trajectories: n,
    })
}

pub fn median_growth(trajectories: &[Trajectory]) -> Option<f64> {
    if trajectories.is_empty() {
        return None;
    }
    let mut g: Vec<f64> = trajectories.iter().map(|t| t.realized_growth).collect();
    g.sort_by(f64::total_cmp);
    let mid = g.len() / 2;
    Some(if g.len().is_multiple_of(2) {
        0.5 * (g[mid - 1] + g[mid])
    } else {
        g[mid]
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RuinMethod {
    Enumeration,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RuinEstimate {
    pub probability: f64,
    pub method: RuinMethod,
}

fn enumerate_ruin(factors: &[GrowthFactor], remaining: usize, log_w: f64, prob: f64, log_threshold: f64) -> f64 {
    let mut ruined = 0.0;
    for f in factors.iter().filter(|f| f.probability > 0.0) {
        let next = log_w + f.log_factor;
        let p = prob * f.probability;
        if next <= log_threshold {
            ruined += p;
        } else if remaining > 1 {
            ruined += enumerate_ruin(factors, remaining - 1, next, p, log_threshold);
        }
    }
    ruined
}

/// Probability that `W(t) / W(0)` falls to `threshold_fraction` or below at
/// some round within `config.rounds`.
///
/// Exact when there are at most [`EXACT_ENUMERATION_LIMIT`] paths, otherwise
/// the fraction of ruined trajectories in a seeded simulation.
pub fn ruin_probability(
    factors: &GrowthFactors,
    config: &SimulationConfig,
    threshold_fraction: f64,
) -> Result<RuinEstimate> {
    if !(0.0..1.0).contains(&threshold_fraction) {
        return Err(Error::invalid(
            "threshold_fraction",
            format!("{threshold_fraction} is not in [0, 1)"),
        ));
    }
    let log_threshold = threshold_fraction.ln();
    let n = factors.factors.len() as u64;
    let exact = u32::try_from(config.rounds)
        .ok()
        .and_then(|k| n.checked_pow(k))
        .is_some_and(|paths| paths <= EXACT_ENUMERATION_LIMIT);
    if exact {
        return Ok(RuinEstimate {
            probability: enumerate_ruin(&factors.factors, config.rounds, 0.0, 1.0, log_threshold),
            method: RuinMethod::Enumeration,
        });
    }
    if factors.live().next().is_none() {
        return Err(Error::invalid("factors", "no factor has positive probability"));
    }
    let sampler = Sampler::new(factors);
    let ruined = (0..config.trajectories)
        .into_par_iter()
        .filter(|&i| {
            let mut rng = stream_rng(config.seed, i);
            let mut log_w = 0.0;
            (0..config.rounds).any(|_| {
                log_w += factors.factors[sampler.draw(&mut rng)].log_factor;
                log_w <= log_threshold
            })
        })
        .count();
    Ok(RuinEstimate {
        probability: ruined as f64 / config.trajectories as f64,
        method: RuinMethod::MonteCarlo,
    })
}
