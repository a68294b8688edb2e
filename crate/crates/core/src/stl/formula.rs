use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::reach::{future_reach, Reach, ReachError};

/// Comparison operator of a linear atom.
///
/// Strictness does not affect quantitative evaluation (both `<` and `≤` give
/// the same signed distance); it matters only to boolean evaluation at exact
/// equality, which compares literally.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparator {
    Lt,
    Le,
    Gt,
    Ge,
}

impl Comparator {
    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Lt => "<",
            Comparator::Le => "<=",
            Comparator::Gt => ">",
            Comparator::Ge => ">=",
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum IntervalError {
    #[error("interval bounds must not be NaN")]
    Nan,
    #[error("interval lower bound {0} is negative")]
    NegativeLower(f64),
    #[error("interval lower bound must be finite, got {0}")]
    InfiniteLower(f64),
    #[error("interval is empty: lower bound {lo} exceeds upper bound {hi}")]
    Empty { lo: f64, hi: f64 },
}

/// Closed time window `[lo, hi]` in seconds attached to a temporal operator.
/// `hi` may be `+∞`; `lo` is finite and non-negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self, IntervalError> {
        if lo.is_nan() || hi.is_nan() {
            return Err(IntervalError::Nan);
        }
        if lo < 0.0 {
            return Err(IntervalError::NegativeLower(lo));
        }
        if lo.is_infinite() {
            return Err(IntervalError::InfiniteLower(lo));
        }
        if lo > hi {
            return Err(IntervalError::Empty { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    /// The default window `[0, +∞)` of an operator written without bounds.
    pub fn unbounded() -> Self {
        Self { lo: 0.0, hi: f64::INFINITY }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn is_unbounded(&self) -> bool {
        self.hi.is_infinite()
    }

    /// Membership test used by every window computation; callers pass the
    /// difference between a candidate sample time and the anchor time.
    pub fn contains(&self, offset: f64) -> bool {
        offset >= self.lo && offset <= self.hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.hi.is_infinite() {
            write!(f, "[{},inf]", self.lo)
        } else {
            write!(f, "[{},{}]", self.lo, self.hi)
        }
    }
}

/// Atomic formula: a comparison against a real signal or a boolean signal
/// used as a proposition. `index` is the signal's position in the schema the
/// atom was resolved against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Atom {
    Cmp { signal: String, index: usize, cmp: Comparator, bound: f64 },
    Prop { signal: String, index: usize },
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Cmp { signal, cmp, bound, .. } => {
                write!(f, "{} {} {}", signal, cmp.symbol(), bound)
            }
            Atom::Prop { signal, .. } => write!(f, "{signal}"),
        }
    }
}

/// Temporal-logic formula over named signals.
///
/// `Implies(a, b)` is definitionally `Or(Not(a), b)` and `Historically`/
/// `Once` are the past duals of `Always`/`Eventually`; the evaluators treat
/// them by those definitions, but the tree keeps the nodes as written so
/// printing round-trips.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Formula {
    Atom(Atom),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Always(Interval, Box<Formula>),
    Eventually(Interval, Box<Formula>),
    Until(Interval, Box<Formula>, Box<Formula>),
    Since(Interval, Box<Formula>, Box<Formula>),
    Historically(Interval, Box<Formula>),
    Once(Interval, Box<Formula>),
    Next(Box<Formula>),
    Prev(Box<Formula>),
}

impl Formula {
    pub fn cmp(signal: &str, index: usize, cmp: Comparator, bound: f64) -> Self {
        Formula::Atom(Atom::Cmp { signal: signal.into(), index, cmp, bound })
    }

    pub fn prop(signal: &str, index: usize) -> Self {
        Formula::Atom(Atom::Prop { signal: signal.into(), index })
    }

    #[must_use]
    pub fn negate(self) -> Self {
        Formula::Not(Box::new(self))
    }

    #[must_use]
    pub fn and(self, other: Self) -> Self {
        Formula::And(Box::new(self), Box::new(other))
    }

    #[must_use]
    pub fn or(self, other: Self) -> Self {
        Formula::Or(Box::new(self), Box::new(other))
    }

    #[must_use]
    pub fn implies(self, other: Self) -> Self {
        Formula::Implies(Box::new(self), Box::new(other))
    }

    #[must_use]
    pub fn always(self, i: Interval) -> Self {
        Formula::Always(i, Box::new(self))
    }

    #[must_use]
    pub fn eventually(self, i: Interval) -> Self {
        Formula::Eventually(i, Box::new(self))
    }

    #[must_use]
    pub fn until(self, i: Interval, rhs: Self) -> Self {
        Formula::Until(i, Box::new(self), Box::new(rhs))
    }

    #[must_use]
    pub fn since(self, i: Interval, rhs: Self) -> Self {
        Formula::Since(i, Box::new(self), Box::new(rhs))
    }

    #[must_use]
    pub fn historically(self, i: Interval) -> Self {
        Formula::Historically(i, Box::new(self))
    }

    #[must_use]
    pub fn once(self, i: Interval) -> Self {
        Formula::Once(i, Box::new(self))
    }

    #[must_use]
    pub fn next(self) -> Self {
        Formula::Next(Box::new(self))
    }

    #[must_use]
    pub fn prev(self) -> Self {
        Formula::Prev(Box::new(self))
    }
}

// Printer precedence tiers, loosest to tightest: -> | & U/S unary atom.
fn prec(f: &Formula) -> u8 {
    match f {
        Formula::Implies(..) => 1,
        Formula::Or(..) => 2,
        Formula::And(..) => 3,
        Formula::Until(..) | Formula::Since(..) => 4,
        Formula::Not(..)
        | Formula::Always(..)
        | Formula::Eventually(..)
        | Formula::Historically(..)
        | Formula::Once(..)
        | Formula::Next(..)
        | Formula::Prev(..) => 5,
        Formula::Atom(..) => 6,
    }
}

fn write_interval(f: &mut fmt::Formatter<'_>, i: &Interval) -> fmt::Result {
    // The default window needs no annotation.
    if i.lo() == 0.0 && i.hi().is_infinite() {
        Ok(())
    } else {
        write!(f, "{i}")
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, child: &Formula, min_prec: u8) -> fmt::Result {
    if prec(child) < min_prec {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(x) => {
                write!(f, "!")?;
                write_child(f, x, 5)
            }
            Formula::And(a, b) => {
                write_child(f, a, 3)?;
                write!(f, " & ")?;
                write_child(f, b, 4)
            }
            Formula::Or(a, b) => {
                write_child(f, a, 2)?;
                write!(f, " | ")?;
                write_child(f, b, 3)
            }
            Formula::Implies(a, b) => {
                write_child(f, a, 2)?;
                write!(f, " -> ")?;
                write_child(f, b, 1)
            }
            Formula::Until(i, a, b) => {
                write_child(f, a, 4)?;
                write!(f, " U")?;
                write_interval(f, i)?;
                write!(f, " ")?;
                write_child(f, b, 5)
            }
            Formula::Since(i, a, b) => {
                write_child(f, a, 4)?;
                write!(f, " S")?;
                write_interval(f, i)?;
                write!(f, " ")?;
                write_child(f, b, 5)
            }
            Formula::Always(i, x) => {
                write!(f, "G")?;
                write_interval(f, i)?;
                write!(f, " ")?;
                write_child(f, x, 5)
            }
            Formula::Eventually(i, x) => {
                write!(f, "F")?;
                write_interval(f, i)?;
                write!(f, " ")?;
                write_child(f, x, 5)
            }
            Formula::Historically(i, x) => {
                write!(f, "H")?;
                write_interval(f, i)?;
                write!(f, " ")?;
                write_child(f, x, 5)
            }
            Formula::Once(i, x) => {
                write!(f, "O")?;
                write_interval(f, i)?;
                write!(f, " ")?;
                write_child(f, x, 5)
            }
            Formula::Next(x) => {
                write!(f, "X ")?;
                write_child(f, x, 5)
            }
            Formula::Prev(x) => {
                write!(f, "P ")?;
                write_child(f, x, 5)
            }
        }
    }
}

/// Property of the shape `□φ`: the body must hold at every sampled instant,
/// forever. Falsification targets exactly this shape; the engine rewrites
/// the body to past-dependent form before monitoring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifeLongProperty {
    body: Formula,
}

impl LifeLongProperty {
    pub fn new(body: Formula) -> Self {
        Self { body }
    }

    /// Builds the property from a parsed formula. A top-level `G` with the
    /// default `[0, inf]` window is absorbed as the life-long quantifier;
    /// anything else becomes the body of an implicit one.
    pub fn from_formula(f: Formula) -> Self {
        match f {
            Formula::Always(i, body) if i.lo() == 0.0 && i.is_unbounded() => Self { body: *body },
            other => Self { body: other },
        }
    }

    pub fn body(&self) -> &Formula {
        &self.body
    }

    /// Rewrites the body so its value at an instant depends only on the
    /// trace up to that instant: `□φ` becomes `□ ⊟_{[h,h]} φ` with
    /// `h = future_reach(φ)` resolved at the given sample period. A body
    /// that is already past-dependent is returned unchanged; an unbounded
    /// future reach is rejected.
    pub fn to_past_dependent(&self, dt: f64) -> Result<LifeLongProperty, ReachError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(ReachError::InvalidSamplePeriod(dt));
        }
        let reach = future_reach(&self.body);
        let h = reach.resolve(dt);
        if h.is_infinite() {
            return Err(ReachError::UnboundedFutureReach);
        }
        if h == 0.0 {
            return Ok(self.clone());
        }
        let shifted = Interval::new(h, h).expect("reach is finite and non-negative");
        Ok(LifeLongProperty { body: self.body.clone().historically(shifted) })
    }

    /// True when the body's robustness at an instant is fully determined by
    /// the trace prefix up to that instant, at the given sample period.
    pub fn is_past_dependent(&self, dt: f64) -> bool {
        future_reach(&self.body).resolve(dt) == 0.0
    }

    /// Both reaches resolved at the sample period; `Err` when either is
    /// infinite, which disqualifies the property from falsification.
    pub fn check_finite_reaches(&self, dt: f64) -> Result<(f64, f64), ReachError> {
        let hrz = future_reach(&self.body).resolve(dt);
        let hst = super::reach::past_reach(&self.body).resolve(dt);
        if hrz.is_infinite() {
            return Err(ReachError::UnboundedFutureReach);
        }
        if hst.is_infinite() {
            return Err(ReachError::UnboundedPastReach);
        }
        Ok((hrz, hst))
    }
}

/// Reach metadata resolved for monitoring; re-exported here for callers that
/// size buffers from a property.
pub fn monitor_window(prop: &LifeLongProperty) -> Reach {
    super::reach::past_reach(prop.body())
}
