//! The robustness-to-reward transform driving the search.
//!
//! Falsification wants robustness minimized; learning agents maximize
//! reward.  The bridge is `reward(ρ) = exp(−ρ) − 1`: zero robustness
//! maps to zero reward, satisfying traces earn negative rewards
//! approaching −1, and near-violations blow up exponentially, which
//! concentrates the agent's attention exactly where the property is
//! weakest.

use serde::{Deserialize, Serialize};

/// Exponent ceiling for the reward transform.  `exp(40) − 1 ≈ 2.35e17`
/// is far beyond any realistic robustness scale but keeps the
/// arithmetic finite when a boolean property yields ρ = −∞.
pub const REWARD_EXPONENT_CAP: f64 = 40.0;

/// Reward earned by a robustness value: `exp(−ρ) − 1`, with the
/// exponent capped at [`REWARD_EXPONENT_CAP`].
///
/// Extended reals behave as limits: `ρ = +∞ → −1` (deep inside the
/// satisfying region) and `ρ = −∞ → exp(cap) − 1` (violation with
/// infinite margin).  NaN propagates.
pub fn reward(rho: f64) -> f64 {
    if rho.is_nan() {
        return f64::NAN;
    }
    (-rho).min(REWARD_EXPONENT_CAP).exp() - 1.0
}

/// The reward regime of the falsification objective: the transform
/// above plus the discount applied to the reward sum.  The discount is
/// fixed at 1 — every step of an episode counts equally — and is
/// exposed read-only so configuration cannot quietly change the
/// objective.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RewardSpec;

impl RewardSpec {
    /// Discount factor of the objective sum.  Always exactly 1.
    pub fn gamma(&self) -> f64 {
        1.0
    }

    /// Apply the robustness-to-reward transform.
    pub fn transform(&self, rho: f64) -> f64 {
        reward(rho)
    }
}
