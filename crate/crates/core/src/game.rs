//! Trust game mechanics: parameters, the trustee's return policy, and payoffs.
//!
//! The trustor holds an endowment `T` and sends a fraction `r` of it. The
//! transfer is multiplied by `K`. With probability `p(r)` the trustee then
//! returns the fraction `α(r)` of the `K·r·T` it received, otherwise it
//! returns nothing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomSource;

fn check_unit(field: &'static str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::validation(field, "must lie in [0,1]"))
    }
}

fn check_positive(field: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::validation(field, "must be a positive finite number"))
    }
}

/// Endowment `T` and multiplier `K` of one game.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameParams {
    pub endowment: f64,
    pub multiplier: f64,
}

impl GameParams {
    pub fn new(endowment: f64, multiplier: f64) -> Result<Self> {
        let params = Self {
            endowment,
            multiplier,
        };
        params.validate()?;
        Ok(params)
    }

    /// Unit endowment. Optimal transfers do not depend on `T`.
    pub fn with_multiplier(multiplier: f64) -> Result<Self> {
        Self::new(1.0, multiplier)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("endowment", self.endowment)?;
        check_positive("K", self.multiplier)
    }
}

/// The finite set of transfer fractions `{0, 1/(n-1), ..., 1}`.
///
/// Arms are integer indices; fractions are always computed as `i / (n - 1)`
/// so that, for instance, arm 3 of the 11-arm grid is exactly `0.3_f64`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionGrid {
    count: usize,
}

impl ActionGrid {
    pub fn new(count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::validation("grid_size", "must be at least 2"));
        }
        Ok(Self { count })
    }

    /// The eleven tenths `{0, 0.1, ..., 1}`.
    pub fn tenths() -> Self {
        Self { count: 11 }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn fraction(&self, arm: usize) -> f64 {
        debug_assert!(arm < self.count);
        arm as f64 / (self.count - 1) as f64
    }

    pub fn fractions(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(|i| self.fraction(i))
    }

    /// Index of the arm whose fraction is `r`, if any.
    pub fn arm_of(&self, r: f64) -> Option<usize> {
        if !(0.0..=1.0).contains(&r) {
            return None;
        }
        let x = r * (self.count - 1) as f64;
        let i = x.round();
        ((x - i).abs() <= 1e-9).then_some(i as usize)
    }

    /// Column label used in output files, e.g. `0.3` or `1.0`.
    pub fn label(&self, arm: usize) -> String {
        format!("{:?}", self.fraction(arm))
    }

    pub fn validate(&self) -> Result<()> {
        Self::new(self.count).map(|_| ())
    }
}

impl Default for ActionGrid {
    fn default() -> Self {
        Self::tenths()
    }
}

/// Return fraction `α` and return probability `p` at one transfer fraction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyPoint {
    pub alpha: f64,
    pub p: f64,
}

/// How the trustee responds to a transfer of fraction `r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrusteePolicy {
    /// `α(r) = alpha0 · r^m`, `p(r) = p0 · r^n`, with `0^0 = 1`.
    PowerLaw {
        alpha0: f64,
        m: u32,
        p0: f64,
        n: u32,
    },
    /// One `(α, p)` pair per arm of a grid with `points.len()` arms.
    Tabulated { points: Vec<PolicyPoint> },
}

impl TrusteePolicy {
    pub fn power_law(alpha0: f64, m: u32, p0: f64, n: u32) -> Result<Self> {
        let policy = TrusteePolicy::PowerLaw { alpha0, m, p0, n };
        policy.validate()?;
        Ok(policy)
    }

    /// Returns a fixed fraction with a fixed probability, whatever `r` is.
    pub fn constant(alpha0: f64, p0: f64) -> Result<Self> {
        Self::power_law(alpha0, 0, p0, 0)
    }

    pub fn tabulated(points: Vec<PolicyPoint>) -> Result<Self> {
        let policy = TrusteePolicy::Tabulated { points };
        policy.validate()?;
        Ok(policy)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            TrusteePolicy::PowerLaw { alpha0, p0, .. } => {
                check_unit("alpha0", *alpha0)?;
                check_unit("p0", *p0)
            }
            TrusteePolicy::Tabulated { points } => {
                if points.len() < 2 {
                    return Err(Error::validation(
                        "points",
                        "must hold one entry per arm of a grid with at least 2 arms",
                    ));
                }
                for pt in points {
                    check_unit("alpha", pt.alpha)?;
                    check_unit("p", pt.p)?;
                }
                Ok(())
            }
        }
    }

    /// Errors unless the policy can be evaluated at every arm of `grid`.
    pub fn check_grid(&self, grid: &ActionGrid) -> Result<()> {
        match self {
            TrusteePolicy::PowerLaw { .. } => Ok(()),
            TrusteePolicy::Tabulated { points } if points.len() == grid.count() => Ok(()),
            TrusteePolicy::Tabulated { points } => Err(Error::validation(
                "points",
                format!(
                    "has {} entries but the grid has {} arms",
                    points.len(),
                    grid.count()
                ),
            )),
        }
    }

    /// `(α(r), p(r))`. Tabulated policies only answer at their grid points.
    pub fn eval(&self, r: f64) -> Result<PolicyPoint> {
        check_unit("r", r)?;
        match self {
            TrusteePolicy::PowerLaw { alpha0, m, p0, n } => Ok(PolicyPoint {
                alpha: alpha0 * power(r, *m),
                p: p0 * power(r, *n),
            }),
            TrusteePolicy::Tabulated { points } => {
                let grid = ActionGrid::new(points.len())?;
                let arm = grid.arm_of(r).ok_or(Error::OffGrid {
                    fraction: r,
                    count: points.len(),
                })?;
                Ok(points[arm])
            }
        }
    }

    /// `(α, p)` at arm `arm` of `grid`.
    pub fn at_arm(&self, grid: &ActionGrid, arm: usize) -> Result<PolicyPoint> {
        if arm >= grid.count() {
            return Err(Error::Usage(format!(
                "arm {arm} out of range for a {}-arm grid",
                grid.count()
            )));
        }
        match self {
            TrusteePolicy::PowerLaw { .. } => self.eval(grid.fraction(arm)),
            TrusteePolicy::Tabulated { points } => {
                self.check_grid(grid)?;
                Ok(points[arm])
            }
        }
    }

    /// `(α, p)` at every arm of `grid`, in arm order.
    pub fn table(&self, grid: &ActionGrid) -> Result<Vec<PolicyPoint>> {
        (0..grid.count()).map(|i| self.at_arm(grid, i)).collect()
    }
}

/// `r^k` with `0^0 = 1`.
fn power(r: f64, k: u32) -> f64 {
    // powi(0) is 1 for every base, including 0.
    match i32::try_from(k) {
        Ok(k) => r.powi(k),
        Err(_) => r.powf(k as f64),
    }
}

/// What the trustee sent back in one round.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrusteeOutcome {
    pub returned: f64,
    pub was_positive_return: bool,
}

impl TrusteeOutcome {
    pub const NOTHING: Self = Self {
        returned: 0.0,
        was_positive_return: false,
    };
}

/// Amount returned when the trustee does return: `K · r · T · α`.
pub fn return_amount(params: &GameParams, r: f64, alpha: f64) -> f64 {
    params.multiplier * r * params.endowment * alpha
}

/// Trustor's wealth after the round: `T − rT + returned`.
pub fn trustor_payoff(params: &GameParams, r: f64, outcome: &TrusteeOutcome) -> f64 {
    let t = params.endowment;
    t - r * t + outcome.returned
}

/// Trustee's take: what it received minus what it gave back.
pub fn trustee_net(params: &GameParams, r: f64, outcome: &TrusteeOutcome) -> f64 {
    params.multiplier * r * params.endowment - outcome.returned
}

/// Resolve the trustee's move with a known `(α, p)`. Draws one uniform `u`
/// and returns iff `u < p`.
pub fn respond_with(
    params: &GameParams,
    point: PolicyPoint,
    r: f64,
    rng: &mut impl RandomSource,
) -> TrusteeOutcome {
    let u = rng.uniform();
    if u < point.p {
        TrusteeOutcome {
            returned: return_amount(params, r, point.alpha),
            was_positive_return: true,
        }
    } else {
        TrusteeOutcome::NOTHING
    }
}

pub fn trustee_respond(
    params: &GameParams,
    policy: &TrusteePolicy,
    r: f64,
    rng: &mut impl RandomSource,
) -> Result<TrusteeOutcome> {
    let point = policy.eval(r)?;
    Ok(respond_with(params, point, r, rng))
}

/// `T + (α(r)·p(r)·K − 1)·r·T`.
pub fn expected_trustor_reward(params: &GameParams, policy: &TrusteePolicy, r: f64) -> Result<f64> {
    let PolicyPoint { alpha, p } = policy.eval(r)?;
    let t = params.endowment;
    Ok(t + (alpha * p * params.multiplier - 1.0) * r * t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{Fixed, SeededSource};

    fn pl(alpha0: f64, m: u32, p0: f64, n: u32) -> TrusteePolicy {
        TrusteePolicy::power_law(alpha0, m, p0, n).unwrap()
    }

    #[test]
    fn eval_constant_policy() {
        let pt = pl(0.5, 0, 0.5, 0).eval(0.3).unwrap();
        assert_eq!((pt.alpha, pt.p), (0.5, 0.5));
    }

    #[test]
    fn eval_zero_power_at_zero_is_constant() {
        let pt = pl(0.7, 0, 0.4, 0).eval(0.0).unwrap();
        assert_eq!((pt.alpha, pt.p), (0.7, 0.4));
    }

    #[test]
    fn eval_linear_at_zero() {
        let pt = pl(1.0, 1, 0.5, 1).eval(0.0).unwrap();
        assert_eq!((pt.alpha, pt.p), (0.0, 0.0));
    }

    #[test]
    fn eval_quadratic() {
        let pt = pl(1.0, 2, 0.5, 2).eval(0.5).unwrap();
        assert_eq!((pt.alpha, pt.p), (1.0 * 0.5 * 0.5, 0.5 * 0.5 * 0.5));
        assert_eq!((pt.alpha, pt.p), (0.25, 0.125));
    }

    #[test]
    fn eval_rejects_r_outside_unit_interval() {
        assert!(pl(1.0, 1, 1.0, 1).eval(1.5).is_err());
        assert!(pl(1.0, 1, 1.0, 1).eval(f64::NAN).is_err());
    }

    #[test]
    fn tabulated_lookup_on_and_off_grid() {
        let points: Vec<_> = (0..11)
            .map(|i| PolicyPoint {
                alpha: i as f64 / 10.0,
                p: 1.0 - i as f64 / 10.0,
            })
            .collect();
        let policy = TrusteePolicy::tabulated(points).unwrap();
        let pt = policy.eval(0.3).unwrap();
        assert_eq!((pt.alpha, pt.p), (0.3, 0.7));
        assert!(matches!(policy.eval(0.35), Err(Error::OffGrid { .. })));
        assert!(policy.check_grid(&ActionGrid::new(5).unwrap()).is_err());
        assert!(policy.check_grid(&ActionGrid::tenths()).is_ok());
    }

    #[test]
    fn policy_validation_names_the_field() {
        let err = TrusteePolicy::power_law(1.5, 0, 0.5, 0).unwrap_err();
        assert_eq!(err.to_string(), "alpha0 must lie in [0,1]");
        let err = TrusteePolicy::power_law(0.5, 0, -0.1, 0).unwrap_err();
        assert_eq!(err.to_string(), "p0 must lie in [0,1]");
        assert!(GameParams::new(0.0, 3.0).is_err());
        assert!(GameParams::new(1.0, -1.0).is_err());
        assert!(GameParams::new(1.0, f64::INFINITY).is_err());
        assert!(TrusteePolicy::tabulated(vec![PolicyPoint { alpha: 0.5, p: 0.5 }]).is_err());
    }

    #[test]
    fn grid_fractions_are_exact_tenths() {
        let grid = ActionGrid::tenths();
        let expected = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];
        assert_eq!(grid.fractions().collect::<Vec<_>>(), expected);
        assert_eq!(grid.label(0), "0.0");
        assert_eq!(grid.label(3), "0.3");
        assert_eq!(grid.label(10), "1.0");
        assert_eq!(grid.arm_of(0.7), Some(7));
        assert_eq!(grid.arm_of(0.75), None);
        assert!(ActionGrid::new(1).is_err());
    }

    #[test]
    fn payoff_examples() {
        let g = GameParams::new(1.0, 3.0).unwrap();
        let full = TrusteeOutcome {
            returned: return_amount(&g, 1.0, 1.0),
            was_positive_return: true,
        };
        assert_eq!(trustor_payoff(&g, 1.0, &full), 3.0);
        assert_eq!(trustor_payoff(&g, 0.0, &TrusteeOutcome::NOTHING), 1.0);
        let half = TrusteeOutcome {
            returned: return_amount(&g, 0.5, 0.5),
            was_positive_return: true,
        };
        assert_eq!(trustor_payoff(&g, 0.5, &half), 1.25);
    }

    #[test]
    fn respond_endpoints_and_forced_draw() {
        let g = GameParams::new(1.0, 3.0).unwrap();
        let never = pl(1.0, 0, 0.0, 0);
        let always = pl(1.0, 0, 1.0, 0);
        // u = 0 is the smallest possible draw and still fails u < 0.
        let out = trustee_respond(
            &g,
            &never,
            1.0,
            &mut Fixed {
                uniform: 0.0,
                beta: 0.5,
            },
        )
        .unwrap();
        assert_eq!(out, TrusteeOutcome::NOTHING);
        let out = trustee_respond(
            &g,
            &always,
            1.0,
            &mut Fixed {
                uniform: 0.999,
                beta: 0.5,
            },
        )
        .unwrap();
        assert!(out.was_positive_return);

        let half = pl(1.0, 0, 0.5, 0);
        let out = trustee_respond(
            &g,
            &half,
            1.0,
            &mut Fixed {
                uniform: 0.2,
                beta: 0.5,
            },
        )
        .unwrap();
        assert_eq!(
            out,
            TrusteeOutcome {
                returned: 3.0,
                was_positive_return: true
            }
        );
        let out = trustee_respond(
            &g,
            &half,
            1.0,
            &mut Fixed {
                uniform: 0.5,
                beta: 0.5,
            },
        )
        .unwrap();
        assert_eq!(out, TrusteeOutcome::NOTHING, "comparison is strict");
    }

    #[test]
    fn respond_endpoints_over_many_draws() {
        let g = GameParams::new(1.0, 3.0).unwrap();
        let mut rng = SeededSource::new(9);
        for _ in 0..10_000 {
            let r = rng.uniform();
            assert!(
                !trustee_respond(&g, &pl(1.0, 0, 0.0, 0), r, &mut rng)
                    .unwrap()
                    .was_positive_return
            );
            assert!(
                trustee_respond(&g, &pl(1.0, 0, 1.0, 0), r, &mut rng)
                    .unwrap()
                    .was_positive_return
            );
        }
    }

    #[test]
    fn expected_reward_examples() {
        let g = GameParams::new(1.0, 3.0).unwrap();
        assert_eq!(
            expected_trustor_reward(&g, &pl(0.3, 2, 0.9, 1), 0.0).unwrap(),
            1.0
        );
        assert_eq!(
            expected_trustor_reward(&g, &pl(1.0, 0, 0.5, 0), 1.0).unwrap(),
            1.5
        );
        assert_eq!(
            expected_trustor_reward(&g, &pl(0.5, 0, 0.5, 0), 1.0).unwrap(),
            0.75
        );
    }
}
