use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::formula::Formula;

#[derive(Debug, Error, PartialEq)]
pub enum ReachError {
    #[error("future reach of the body is unbounded; a life-long property needs a finite horizon")]
    UnboundedFutureReach,
    #[error("past reach of the body is unbounded")]
    UnboundedPastReach,
    #[error("sample period must be positive and finite, got {0}")]
    InvalidSamplePeriod(f64),
}

/// How far a formula's truth value reaches from its evaluation instant,
/// expressed as `steps · Δ + seconds` where `Δ` is the sample period.
///
/// Interval bounds contribute seconds; `X`/`P` contribute whole sample
/// steps, which only become a concrete duration once `Δ` is known —
/// [`Reach::resolve`] performs that substitution. Components may go negative
/// in intermediate arithmetic (a past operator *consumes* future reach, and
/// vice versa); a reach is clamped at zero only when resolved, because a
/// data requirement cannot be negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reach {
    pub steps: i64,
    pub seconds: f64,
}

impl Reach {
    pub const ZERO: Reach = Reach { steps: 0, seconds: 0.0 };

    fn add_seconds(self, s: f64) -> Reach {
        Reach { steps: self.steps, seconds: self.seconds + s }
    }

    fn sub_seconds(self, s: f64) -> Reach {
        Reach { steps: self.steps, seconds: self.seconds - s }
    }

    fn add_step(self) -> Reach {
        Reach { steps: self.steps + 1, seconds: self.seconds }
    }

    fn sub_step(self) -> Reach {
        Reach { steps: self.steps - 1, seconds: self.seconds }
    }

    /// Componentwise maximum: an upper bound on the pointwise maximum for
    /// every sample period, exact whenever one argument dominates.
    fn join(self, other: Reach) -> Reach {
        Reach { steps: self.steps.max(other.steps), seconds: self.seconds.max(other.seconds) }
    }

    pub fn is_finite(&self) -> bool {
        self.seconds.is_finite()
    }

    /// The reach in seconds at a concrete sample period, clamped at zero.
    pub fn resolve(&self, dt: f64) -> f64 {
        let v = self.steps as f64 * dt + self.seconds;
        if v > 0.0 {
            v
        } else {
            0.0
        }
    }

    /// True when the reach resolves to zero for every positive sample
    /// period (both components non-positive).
    pub fn is_zero_for_all_dt(&self) -> bool {
        self.steps <= 0 && self.seconds <= 0.0
    }
}

/// Future reach (`hrz`): how far past the evaluation instant the trace must
/// extend for the formula's value to be determined.
///
/// Future operators add their window's upper bound; past operators give
/// back their window's *lower* bound (a formula evaluated `lo` seconds in
/// the past needs that much less future), clamped at zero on resolution.
/// The give-back is what makes `⊟_{[h,h]} φ` past-dependent when
/// `h = hrz(φ)` — the identity the monitoring rewrite is built on.
pub fn future_reach(f: &Formula) -> Reach {
    match f {
        Formula::Atom(_) => Reach::ZERO,
        Formula::Not(x) => future_reach(x),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            future_reach(a).join(future_reach(b))
        }
        Formula::Always(i, x) | Formula::Eventually(i, x) => future_reach(x).add_seconds(i.hi()),
        Formula::Until(i, a, b) => future_reach(a).join(future_reach(b)).add_seconds(i.hi()),
        Formula::Since(i, a, b) => future_reach(a).join(future_reach(b).sub_seconds(i.lo())),
        Formula::Historically(i, x) | Formula::Once(i, x) => future_reach(x).sub_seconds(i.lo()),
        Formula::Next(x) => future_reach(x).add_step(),
        Formula::Prev(x) => future_reach(x).sub_step(),
    }
}

/// Past reach (`hst`): how far before the evaluation instant the trace
/// prefix must extend. Dual of [`future_reach`].
pub fn past_reach(f: &Formula) -> Reach {
    match f {
        Formula::Atom(_) => Reach::ZERO,
        Formula::Not(x) => past_reach(x),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            past_reach(a).join(past_reach(b))
        }
        Formula::Since(i, a, b) => past_reach(a).join(past_reach(b)).add_seconds(i.hi()),
        Formula::Historically(i, x) | Formula::Once(i, x) => past_reach(x).add_seconds(i.hi()),
        Formula::Always(i, x) | Formula::Eventually(i, x) => past_reach(x).sub_seconds(i.lo()),
        Formula::Until(i, a, b) => past_reach(a).join(past_reach(b).sub_seconds(i.lo())),
        Formula::Prev(x) => past_reach(x).add_step(),
        Formula::Next(x) => past_reach(x).sub_step(),
    }
}
