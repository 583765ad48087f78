//! The optimal transfer fraction, computed from the trustee's policy.
//!
//! The trustor's expected wealth is `T · (1 + g(r))` with
//! `g(r) = (α(r)·p(r)·K − 1)·r`, so the best transfers are the maximizers of
//! `g`. For power-law policies the answer depends only on the sign of
//! `α₀·p₀·K − 1`: send everything when it is positive, nothing when it is
//! negative.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::game::{ActionGrid, TrusteePolicy};

/// Objective values within this distance of the maximum count as ties.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Classification {
    /// `α₀p₀K > 1`: transfer the whole endowment.
    FullTrust,
    /// `α₀p₀K < 1`: transfer nothing.
    NoTrust,
    /// `α₀p₀K = 1`.
    Indifferent,
    /// Tabulated policies have no closed-form verdict.
    NotApplicable,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Classification::FullTrust => "FullTrust",
            Classification::NoTrust => "NoTrust",
            Classification::Indifferent => "Indifferent",
            Classification::NotApplicable => "NotApplicable",
        };
        f.write_str(s)
    }
}

/// Classify a power-law trustee by the exact product `α₀·p₀·K`.
pub fn classify(alpha0: f64, p0: f64, multiplier: f64) -> Classification {
    let product = alpha0 * p0 * multiplier;
    if product > 1.0 {
        Classification::FullTrust
    } else if product < 1.0 {
        Classification::NoTrust
    } else {
        Classification::Indifferent
    }
}

pub fn classify_policy(policy: &TrusteePolicy, multiplier: f64) -> Classification {
    match policy {
        TrusteePolicy::PowerLaw { alpha0, p0, .. } => classify(*alpha0, *p0, multiplier),
        TrusteePolicy::Tabulated { .. } => Classification::NotApplicable,
    }
}

fn gain(alpha: f64, p: f64, multiplier: f64, r: f64) -> f64 {
    // `+ 0.0` turns the -0.0 produced at r = 0 into 0.0.
    (alpha * p * multiplier - 1.0) * r + 0.0
}

/// `g(r) = (α(r)·p(r)·K − 1)·r`.
pub fn objective(policy: &TrusteePolicy, multiplier: f64, r: f64) -> Result<f64> {
    let pt = policy.eval(r)?;
    Ok(gain(pt.alpha, pt.p, multiplier, r))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleVerdict {
    /// Every arm whose objective is within [`TIE_TOLERANCE`] of the best.
    /// Never empty, sorted ascending.
    pub optimal_set: Vec<usize>,
    /// `g` at each arm.
    pub objective_values: Vec<f64>,
    pub classification: Classification,
}

impl OracleVerdict {
    pub fn is_optimal(&self, arm: usize) -> bool {
        self.optimal_set.binary_search(&arm).is_ok()
    }

    pub fn optimal_fractions(&self, grid: &ActionGrid) -> Vec<f64> {
        self.optimal_set.iter().map(|&i| grid.fraction(i)).collect()
    }
}

/// Indices of all values within `tol` of the maximum.
pub(crate) fn maximizers(values: &[f64], tol: f64) -> Vec<usize> {
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v >= best - tol)
        .map(|(i, _)| i)
        .collect()
}

/// Evaluate `g` on every arm and collect the maximizers.
pub fn grid_argmax(
    policy: &TrusteePolicy,
    multiplier: f64,
    grid: &ActionGrid,
) -> Result<OracleVerdict> {
    policy.check_grid(grid)?;
    let objective_values = (0..grid.count())
        .map(|arm| {
            let pt = policy.at_arm(grid, arm)?;
            Ok(gain(pt.alpha, pt.p, multiplier, grid.fraction(arm)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OracleVerdict {
        optimal_set: maximizers(&objective_values, TIE_TOLERANCE),
        objective_values,
        classification: classify_policy(policy, multiplier),
    })
}
