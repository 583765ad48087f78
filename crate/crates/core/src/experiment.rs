//! Seeded batches of trustor agents and the statistics computed from them.
//!
//! A batch runs `agents` independent learners for `trials` rounds each.
//! Agent `k` draws from [`SeededSource::for_agent`]`(base_seed, k)`, so a
//! batch is a pure function of its [`ExperimentConfig`] no matter how the
//! agents are scheduled across threads.
//!
//! The headline statistic is the cumulative choice frequency: at trial `t`,
//! the share of trials `1..=t` on which each arm was played, averaged over
//! agents.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agent::{TrialRecord, TrustorAgent};
use crate::error::{Error, Result};
use crate::game::{ActionGrid, GameParams, TrusteePolicy};
use crate::oracle::OracleVerdict;
use crate::rng::SeededSource;

pub const DEFAULT_TRIALS: u64 = 20_000;
pub const DEFAULT_AGENTS: u64 = 10;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_RECORD_EVERY: u64 = 10;
pub const DEFAULT_WINDOW: u64 = 2_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub params: GameParams,
    pub policy: TrusteePolicy,
    pub grid: ActionGrid,
    pub trials: u64,
    pub agents: u64,
    pub base_seed: u64,
    pub record_every: u64,
}

impl ExperimentConfig {
    /// Defaults for everything but the game and the trustee.
    pub fn new(params: GameParams, policy: TrusteePolicy) -> Self {
        Self {
            params,
            policy,
            grid: ActionGrid::tenths(),
            trials: DEFAULT_TRIALS,
            agents: DEFAULT_AGENTS,
            base_seed: DEFAULT_SEED,
            record_every: DEFAULT_RECORD_EVERY,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.policy.validate()?;
        self.grid.validate()?;
        self.policy.check_grid(&self.grid)?;
        if self.trials == 0 {
            return Err(Error::validation("trials", "must be at least 1"));
        }
        if self.agents == 0 {
            return Err(Error::validation("agents", "must be at least 1"));
        }
        if self.record_every == 0 {
            return Err(Error::validation("record_every", "must be at least 1"));
        }
        Ok(())
    }

    /// Trial indices at which curves are sampled.
    pub fn checkpoints(&self) -> Vec<u64> {
        checkpoints(self.trials, self.record_every)
    }
}

/// Trial 1, every multiple of `stride`, and the last trial; ascending,
/// without duplicates.
pub fn checkpoints(trials: u64, stride: u64) -> Vec<u64> {
    let mut out = vec![1];
    out.extend((1..=trials / stride).map(|k| k * stride).filter(|&t| t > 1));
    if *out.last().unwrap() != trials {
        out.push(trials);
    }
    out
}

fn check_agent(config: &ExperimentConfig, agent_index: u64) -> Result<()> {
    if agent_index >= config.agents {
        return Err(Error::Usage(format!(
            "agent index {agent_index} out of range for a batch of {}",
            config.agents
        )));
    }
    Ok(())
}

/// Every trial of one agent, in order.
pub fn run_single(config: &ExperimentConfig, agent_index: u64) -> Result<Vec<TrialRecord>> {
    config.validate()?;
    check_agent(config, agent_index)?;
    let mut rng = SeededSource::for_agent(config.base_seed, agent_index);
    let mut agent = TrustorAgent::new(config.grid);
    (0..config.trials)
        .map(|_| agent.step(&config.params, &config.policy, &mut rng))
        .collect()
}

/// Only the arm sequence of one agent.
pub fn run_choices(config: &ExperimentConfig, agent_index: u64) -> Result<Vec<usize>> {
    config.validate()?;
    check_agent(config, agent_index)?;
    let mut rng = SeededSource::for_agent(config.base_seed, agent_index);
    let mut agent = TrustorAgent::new(config.grid);
    (0..config.trials)
        .map(|_| {
            Ok(agent
                .step(&config.params, &config.policy, &mut rng)?
                .chosen_arm)
        })
        .collect()
}

/// Across-agent mean cumulative choice frequencies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyCurves {
    /// Transfer fraction of each column.
    pub fractions: Vec<f64>,
    pub checkpoints: Vec<u64>,
    /// `mean_freq[c][arm]`, one row per checkpoint. Rows sum to 1.
    pub mean_freq: Vec<Vec<f64>>,
}

impl FrequencyCurves {
    /// Aggregate per-agent arm sequences. Counts are summed as integers
    /// before the single division, so agent order cannot change the result.
    pub fn from_choices(grid: &ActionGrid, checkpoints: &[u64], choices: &[Vec<usize>]) -> Self {
        let arms = grid.count();
        let mut totals = vec![vec![0u64; arms]; checkpoints.len()];
        for seq in choices {
            let mut counts = vec![0u64; arms];
            let mut next = 0;
            for (i, &arm) in seq.iter().enumerate() {
                counts[arm] += 1;
                let t = i as u64 + 1;
                while next < checkpoints.len() && checkpoints[next] == t {
                    for (tot, c) in totals[next].iter_mut().zip(&counts) {
                        *tot += c;
                    }
                    next += 1;
                }
            }
        }
        let n_agents = choices.len() as f64;
        let mean_freq = totals
            .iter()
            .zip(checkpoints)
            .map(|(row, &t)| {
                let denom = n_agents * t as f64;
                row.iter().map(|&c| c as f64 / denom).collect()
            })
            .collect();
        Self {
            fractions: grid.fractions().collect(),
            checkpoints: checkpoints.to_vec(),
            mean_freq,
        }
    }

    pub fn final_row(&self) -> &[f64] {
        self.mean_freq.last().map(Vec::as_slice).unwrap_or(&[])
    }

    /// Row at trial `t`, if `t` is a checkpoint.
    pub fn row_at(&self, t: u64) -> Option<&[f64]> {
        let i = self.checkpoints.binary_search(&t).ok()?;
        Some(&self.mean_freq[i])
    }
}

/// Curves plus the raw arm sequences they were built from.
#[derive(Clone, Debug, PartialEq)]
pub struct BatchOutcome {
    pub curves: FrequencyCurves,
    /// `choices[k]` is agent `k`'s arm on trials `1..=N`.
    pub choices: Vec<Vec<usize>>,
}

/// Run every agent (in parallel) and keep their arm sequences.
pub fn run_batch_detailed(config: &ExperimentConfig) -> Result<BatchOutcome> {
    config.validate()?;
    let choices = (0..config.agents)
        .into_par_iter()
        .map(|k| run_choices(config, k))
        .collect::<Result<Vec<_>>>()?;
    let curves = FrequencyCurves::from_choices(&config.grid, &config.checkpoints(), &choices);
    Ok(BatchOutcome { curves, choices })
}

pub fn run_batch(config: &ExperimentConfig) -> Result<FrequencyCurves> {
    run_batch_detailed(config).map(|b| b.curves)
}

/// Most played arm (lowest index on ties) and per-arm counts of a window.
fn window_counts(arms: usize, window: &[usize]) -> Vec<u64> {
    let mut counts = vec![0u64; arms];
    for &a in window {
        counts[a] += 1;
    }
    counts
}

fn modal(counts: &[u64]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowSummary {
    pub modal_arm: usize,
    pub modal_fraction: f64,
    /// Share of window choices that landed on an optimal arm.
    pub oracle_share: f64,
    /// Whether the modal arm is optimal.
    pub matches_oracle: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub window: u64,
    pub optimal_set: Vec<usize>,
    pub per_agent: Vec<WindowSummary>,
    /// Same statistics over all agents' window choices pooled together.
    pub pooled: WindowSummary,
    pub agents_matching: usize,
}

fn summarize(grid: &ActionGrid, verdict: &OracleVerdict, counts: &[u64]) -> WindowSummary {
    let total: u64 = counts.iter().sum();
    let on_oracle: u64 = verdict.optimal_set.iter().map(|&i| counts[i]).sum();
    let modal_arm = modal(counts);
    WindowSummary {
        modal_arm,
        modal_fraction: grid.fraction(modal_arm),
        oracle_share: on_oracle as f64 / total as f64,
        matches_oracle: verdict.is_optimal(modal_arm),
    }
}

/// Compare the last `window` trials of every agent with the oracle.
pub fn convergence_report(
    batch: &BatchOutcome,
    grid: &ActionGrid,
    verdict: &OracleVerdict,
    window: u64,
) -> Result<ConvergenceReport> {
    let trials = batch.choices.first().map_or(0, Vec::len) as u64;
    if window == 0 || window > trials {
        return Err(Error::validation(
            "window",
            format!("must lie in [1, {trials}] (the number of trials)"),
        ));
    }
    if verdict.objective_values.len() != grid.count() {
        return Err(Error::Usage(
            "oracle verdict was computed on a different grid".into(),
        ));
    }
    let mut pooled = vec![0u64; grid.count()];
    let per_agent: Vec<WindowSummary> = batch
        .choices
        .iter()
        .map(|seq| {
            let counts = window_counts(grid.count(), &seq[seq.len() - window as usize..]);
            for (p, c) in pooled.iter_mut().zip(&counts) {
                *p += c;
            }
            summarize(grid, verdict, &counts)
        })
        .collect();
    Ok(ConvergenceReport {
        window,
        optimal_set: verdict.optimal_set.clone(),
        agents_matching: per_agent.iter().filter(|s| s.matches_oracle).count(),
        pooled: summarize(grid, verdict, &pooled),
        per_agent,
    })
}
