//! Thompson-Sampling trustor.
//!
//! The agent knows the trustee's return fraction `α(r)` but not the return
//! probability `p(r)`. For each arm it keeps a Beta(`S + 1`, `F + 1`)
//! posterior over `p(r)`, where `S` and `F` count past returns and
//! non-returns at that arm. Each trial it draws `β_r` from every posterior,
//! scores arm `r` as
//!
//! ```text
//! s_r = (T − rT + KrTα(r))·β_r + (T − rT)·(1 − β_r)
//! ```
//!
//! and plays the highest score.
//!
//! Draw order per trial is fixed: one Beta draw per arm in index order, then
//! one uniform draw for the trustee.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{self, ActionGrid, GameParams, TrusteeOutcome, TrusteePolicy};
use crate::rng::RandomSource;

/// Score of transferring `r` when the trustee returns `α` with believed
/// probability `beta`. Written as `T·((1 − r) + K·r·α·β)`, which is the
/// two-branch mixture above rearranged; at `r = 0` it is exactly `T`.
pub fn score(params: &GameParams, r: f64, alpha: f64, beta: f64) -> f64 {
    params.endowment * ((1.0 - r) + params.multiplier * r * alpha * beta)
}

/// Index of the largest score. Ties go to the lowest index.
pub fn select_arm(scores: &[f64]) -> Result<usize> {
    let (first, rest) = scores
        .split_first()
        .ok_or_else(|| Error::Usage("cannot select an arm from an empty score list".into()))?;
    let mut best = (0, *first);
    for (i, &s) in rest.iter().enumerate() {
        if s > best.1 {
            best = (i + 1, s);
        }
    }
    Ok(best.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    /// 1-based.
    pub trial_index: u64,
    pub chosen_arm: usize,
    pub sampled_scores: Vec<f64>,
    pub outcome: TrusteeOutcome,
    pub trustor_payoff: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrustorAgent {
    grid: ActionGrid,
    successes: Vec<u64>,
    failures: Vec<u64>,
}

impl TrustorAgent {
    pub fn new(grid: ActionGrid) -> Self {
        Self {
            grid,
            successes: vec![0; grid.count()],
            failures: vec![0; grid.count()],
        }
    }

    pub fn grid(&self) -> &ActionGrid {
        &self.grid
    }

    pub fn successes(&self) -> &[u64] {
        &self.successes
    }

    pub fn failures(&self) -> &[u64] {
        &self.failures
    }

    /// Completed trials, i.e. the sum of all counts.
    pub fn trials(&self) -> u64 {
        self.successes.iter().chain(&self.failures).sum()
    }

    /// Beta parameters `(S + 1, F + 1)` of the posterior at `arm`.
    pub fn posterior(&self, arm: usize) -> (f64, f64) {
        (
            self.successes[arm] as f64 + 1.0,
            self.failures[arm] as f64 + 1.0,
        )
    }

    /// `(S + 1) / (S + F + 2)`.
    pub fn posterior_mean(&self, arm: usize) -> f64 {
        let (a, b) = self.posterior(arm);
        a / (a + b)
    }

    pub fn sample_scores(
        &self,
        params: &GameParams,
        policy: &TrusteePolicy,
        rng: &mut impl RandomSource,
    ) -> Result<Vec<f64>> {
        let table = policy.table(&self.grid)?;
        Ok(table
            .iter()
            .enumerate()
            .map(|(arm, pt)| {
                let (a, b) = self.posterior(arm);
                let beta = rng.beta(a, b);
                score(params, self.grid.fraction(arm), pt.alpha, beta)
            })
            .collect())
    }

    pub fn update(&mut self, arm: usize, was_positive_return: bool) -> Result<()> {
        if arm >= self.grid.count() {
            return Err(Error::Usage(format!(
                "arm {arm} out of range for a {}-arm grid",
                self.grid.count()
            )));
        }
        if was_positive_return {
            self.successes[arm] += 1;
        } else {
            self.failures[arm] += 1;
        }
        Ok(())
    }

    /// One full round: sample, choose, let the trustee respond, learn.
    pub fn step(
        &mut self,
        params: &GameParams,
        policy: &TrusteePolicy,
        rng: &mut impl RandomSource,
    ) -> Result<TrialRecord> {
        let sampled_scores = self.sample_scores(params, policy, rng)?;
        let arm = select_arm(&sampled_scores)?;
        let r = self.grid.fraction(arm);
        let point = policy.at_arm(&self.grid, arm)?;
        let outcome = game::respond_with(params, point, r, rng);
        self.update(arm, outcome.was_positive_return)?;
        Ok(TrialRecord {
            trial_index: self.trials(),
            chosen_arm: arm,
            sampled_scores,
            outcome,
            trustor_payoff: game::trustor_payoff(params, r, &outcome),
        })
    }
}
