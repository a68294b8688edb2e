//! Offline recursive evaluation of formulas over sampled traces: boolean
//! satisfaction, quantitative robustness, and the discretized global minimum
//! used to judge life-long properties.
//!
//! Window semantics are discrete: a quantifier over interval `I` anchored at
//! sample `n` ranges over exactly the sampled instants whose time offset
//! lies in `I` — no interpolation. Empty windows collapse to the lattice
//! identities `min ∅ = +∞`, `max ∅ = −∞`.
//!
//! A future-directed window must fit inside the trace: if the anchor time
//! plus the interval's upper bound lands past the last sample, evaluation
//! reports an insufficient-trace error instead of silently truncating.
//! Subformulas are evaluated at exactly the demanded indices — and all of
//! them, with no short-circuiting — so the boolean and quantitative
//! evaluators (and the brute-force reference) agree about which inputs are
//! errors, not just about values.

use thiserror::Error;

use crate::robustness::Trace;
use crate::stl::{Atom, Comparator, Formula, Interval};

/// Robustness credited to a boolean proposition: `+kappa` when it holds,
/// `-kappa` when it does not.
pub const DEFAULT_KAPPA: f64 = 1.0;

#[derive(Debug, Error, PartialEq, Clone)]
pub enum EvalError {
    #[error(
        "trace ends at {trace_end} s but evaluation anchored at {at} s \
         needs samples through {needed} s"
    )]
    InsufficientTrace { at: f64, needed: f64, trace_end: f64 },
    #[error("next-step operator demanded sample {demanded} but the trace has {len}")]
    PastEnd { demanded: usize, len: usize },
    #[error("sample index {index} out of range for trace of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
}

/// Boolean satisfaction of `f` at sample `n`.
pub fn eval_bool(f: &Formula, tr: &Trace, n: usize) -> Result<bool, EvalError> {
    check_index(tr, n)?;
    bool_at(f, tr, n)
}

/// Quantitative robustness of `f` at sample `n` with the default
/// proposition weight.
pub fn eval_rob(f: &Formula, tr: &Trace, n: usize) -> Result<f64, EvalError> {
    eval_rob_kappa(f, tr, n, DEFAULT_KAPPA)
}

/// Quantitative robustness with an explicit proposition weight `kappa`.
pub fn eval_rob_kappa(f: &Formula, tr: &Trace, n: usize, kappa: f64) -> Result<f64, EvalError> {
    check_index(tr, n)?;
    rob_at(f, tr, n, kappa)
}

/// Minimum robustness over every index where `f` evaluates, with the first
/// index attaining it. Indices whose evaluation fails (insufficient trace)
/// are skipped; if none remain the result is `(+∞, None)`.
pub fn global_min_rob(f: &Formula, tr: &Trace) -> (f64, Option<usize>) {
    global_min_rob_kappa(f, tr, DEFAULT_KAPPA)
}

pub fn global_min_rob_kappa(f: &Formula, tr: &Trace, kappa: f64) -> (f64, Option<usize>) {
    let mut best = f64::INFINITY;
    let mut arg = None;
    for n in 0..tr.len() {
        if let Ok(rho) = eval_rob_kappa(f, tr, n, kappa) {
            if rho < best || arg.is_none() {
                best = rho.min(best);
                arg = Some(n);
            }
        }
    }
    (best, arg)
}

fn check_index(tr: &Trace, n: usize) -> Result<(), EvalError> {
    if n >= tr.len() {
        return Err(EvalError::IndexOutOfRange { index: n, len: tr.len() });
    }
    Ok(())
}

/// Errors unless every sampled instant the window at `n` may demand exists:
/// the anchor time plus the upper bound must not pass the last sample.
fn check_future_window(tr: &Trace, n: usize, interval: &Interval) -> Result<(), EvalError> {
    let needed = tr.time(n) + interval.hi();
    if needed > tr.last_time().expect("index checked") {
        return Err(EvalError::InsufficientTrace {
            at: tr.time(n),
            needed,
            trace_end: tr.last_time().expect("index checked"),
        });
    }
    Ok(())
}

fn rob_at(f: &Formula, tr: &Trace, n: usize, kappa: f64) -> Result<f64, EvalError> {
    match f {
        Formula::Atom(atom) => Ok(atom_rob(atom, tr, n, kappa)),
        Formula::Not(inner) => Ok(-rob_at(inner, tr, n, kappa)?),
        Formula::And(a, b) => {
            let ra = rob_at(a, tr, n, kappa)?;
            let rb = rob_at(b, tr, n, kappa)?;
            Ok(ra.min(rb))
        }
        Formula::Or(a, b) => {
            let ra = rob_at(a, tr, n, kappa)?;
            let rb = rob_at(b, tr, n, kappa)?;
            Ok(ra.max(rb))
        }
        Formula::Implies(a, b) => {
            let ra = rob_at(a, tr, n, kappa)?;
            let rb = rob_at(b, tr, n, kappa)?;
            Ok((-ra).max(rb))
        }
        Formula::Always(interval, inner) => {
            check_future_window(tr, n, interval)?;
            let mut worst = f64::INFINITY;
            for_future_window(tr, n, interval, |k| {
                worst = worst.min(rob_at(inner, tr, k, kappa)?);
                Ok(())
            })?;
            Ok(worst)
        }
        Formula::Eventually(interval, inner) => {
            check_future_window(tr, n, interval)?;
            let mut best = f64::NEG_INFINITY;
            for_future_window(tr, n, interval, |k| {
                best = best.max(rob_at(inner, tr, k, kappa)?);
                Ok(())
            })?;
            Ok(best)
        }
        Formula::Until(interval, hold, goal) => {
            check_future_window(tr, n, interval)?;
            // max over window candidates n' of
            //   min(rob(goal, n'), min_{k in [n, n')} rob(hold, k))
            // with the running prefix minimum folded lazily so `hold` is
            // only demanded up to the last candidate.
            let mut best = f64::NEG_INFINITY;
            let mut prefix_min = f64::INFINITY;
            let mut next_fold = n;
            for_future_window(tr, n, interval, |k| {
                while next_fold < k {
                    prefix_min = prefix_min.min(rob_at(hold, tr, next_fold, kappa)?);
                    next_fold += 1;
                }
                let goal_rho = rob_at(goal, tr, k, kappa)?;
                best = best.max(goal_rho.min(prefix_min));
                Ok(())
            })?;
            Ok(best)
        }
        Formula::Since(interval, hold, goal) => {
            // Mirror of Until into the past: candidates n' ≤ n, with `hold`
            // demanded on (n', n].
            let mut best = f64::NEG_INFINITY;
            let mut suffix_min = f64::INFINITY;
            let mut next_fold = n;
            for_past_window(tr, n, interval, |k| {
                while next_fold > k {
                    suffix_min = suffix_min.min(rob_at(hold, tr, next_fold, kappa)?);
                    next_fold -= 1;
                }
                let goal_rho = rob_at(goal, tr, k, kappa)?;
                best = best.max(goal_rho.min(suffix_min));
                Ok(())
            })?;
            Ok(best)
        }
        Formula::Historically(interval, inner) => {
            let mut worst = f64::INFINITY;
            for_past_window(tr, n, interval, |k| {
                worst = worst.min(rob_at(inner, tr, k, kappa)?);
                Ok(())
            })?;
            Ok(worst)
        }
        Formula::Once(interval, inner) => {
            let mut best = f64::NEG_INFINITY;
            for_past_window(tr, n, interval, |k| {
                best = best.max(rob_at(inner, tr, k, kappa)?);
                Ok(())
            })?;
            Ok(best)
        }
        Formula::Next(inner) => {
            if n + 1 >= tr.len() {
                return Err(EvalError::PastEnd { demanded: n + 1, len: tr.len() });
            }
            rob_at(inner, tr, n + 1, kappa)
        }
        Formula::Prev(inner) => {
            if n == 0 {
                Ok(f64::NEG_INFINITY)
            } else {
                rob_at(inner, tr, n - 1, kappa)
            }
        }
    }
}

fn bool_at(f: &Formula, tr: &Trace, n: usize) -> Result<bool, EvalError> {
    match f {
        Formula::Atom(atom) => Ok(atom_bool(atom, tr, n)),
        Formula::Not(inner) => Ok(!bool_at(inner, tr, n)?),
        Formula::And(a, b) => {
            let ba = bool_at(a, tr, n)?;
            let bb = bool_at(b, tr, n)?;
            Ok(ba && bb)
        }
        Formula::Or(a, b) => {
            let ba = bool_at(a, tr, n)?;
            let bb = bool_at(b, tr, n)?;
            Ok(ba || bb)
        }
        Formula::Implies(a, b) => {
            let ba = bool_at(a, tr, n)?;
            let bb = bool_at(b, tr, n)?;
            Ok(!ba || bb)
        }
        Formula::Always(interval, inner) => {
            check_future_window(tr, n, interval)?;
            let mut all = true;
            for_future_window(tr, n, interval, |k| {
                all &= bool_at(inner, tr, k)?;
                Ok(())
            })?;
            Ok(all)
        }
        Formula::Eventually(interval, inner) => {
            check_future_window(tr, n, interval)?;
            let mut any = false;
            for_future_window(tr, n, interval, |k| {
                any |= bool_at(inner, tr, k)?;
                Ok(())
            })?;
            Ok(any)
        }
        Formula::Until(interval, hold, goal) => {
            check_future_window(tr, n, interval)?;
            let mut sat = false;
            let mut prefix_all = true;
            let mut next_fold = n;
            for_future_window(tr, n, interval, |k| {
                while next_fold < k {
                    prefix_all &= bool_at(hold, tr, next_fold)?;
                    next_fold += 1;
                }
                let goal_ok = bool_at(goal, tr, k)?;
                sat |= goal_ok && prefix_all;
                Ok(())
            })?;
            Ok(sat)
        }
        Formula::Since(interval, hold, goal) => {
            let mut sat = false;
            let mut suffix_all = true;
            let mut next_fold = n;
            for_past_window(tr, n, interval, |k| {
                while next_fold > k {
                    suffix_all &= bool_at(hold, tr, next_fold)?;
                    next_fold -= 1;
                }
                let goal_ok = bool_at(goal, tr, k)?;
                sat |= goal_ok && suffix_all;
                Ok(())
            })?;
            Ok(sat)
        }
        Formula::Historically(interval, inner) => {
            let mut all = true;
            for_past_window(tr, n, interval, |k| {
                all &= bool_at(inner, tr, k)?;
                Ok(())
            })?;
            Ok(all)
        }
        Formula::Once(interval, inner) => {
            let mut any = false;
            for_past_window(tr, n, interval, |k| {
                any |= bool_at(inner, tr, k)?;
                Ok(())
            })?;
            Ok(any)
        }
        Formula::Next(inner) => {
            if n + 1 >= tr.len() {
                return Err(EvalError::PastEnd { demanded: n + 1, len: tr.len() });
            }
            bool_at(inner, tr, n + 1)
        }
        Formula::Prev(inner) => {
            if n == 0 {
                Ok(false)
            } else {
                bool_at(inner, tr, n - 1)
            }
        }
    }
}

fn atom_rob(atom: &Atom, tr: &Trace, n: usize, kappa: f64) -> f64 {
    match atom {
        // Signed distance to the violating set: positive margin when the
        // comparison holds. Strictness does not change the distance.
        Atom::Cmp { index, cmp, bound, .. } => {
            let v = tr.value(n, *index);
            match cmp {
                Comparator::Lt | Comparator::Le => bound - v,
                Comparator::Gt | Comparator::Ge => v - bound,
            }
        }
        Atom::Prop { index, .. } => {
            if prop_holds(tr.value(n, *index)) {
                kappa
            } else {
                -kappa
            }
        }
    }
}

fn atom_bool(atom: &Atom, tr: &Trace, n: usize) -> bool {
    match atom {
        Atom::Cmp { index, cmp, bound, .. } => {
            let v = tr.value(n, *index);
            match cmp {
                Comparator::Lt => v < *bound,
                Comparator::Le => v <= *bound,
                Comparator::Gt => v > *bound,
                Comparator::Ge => v >= *bound,
            }
        }
        Atom::Prop { index, .. } => prop_holds(tr.value(n, *index)),
    }
}

pub(crate) fn prop_holds(value: f64) -> bool {
    value >= 0.5
}

/// Visits the sampled instants k ≥ n with time(k) − time(n) ∈ interval, in
/// increasing order. Instants beyond the upper bound stop the scan; gaps
/// below the lower bound are passed over without being demanded.
fn for_future_window<E>(
    tr: &Trace,
    n: usize,
    interval: &Interval,
    mut visit: impl FnMut(usize) -> Result<(), E>,
) -> Result<(), E> {
    for k in n..tr.len() {
        let offset = tr.time(k) - tr.time(n);
        if offset > interval.hi() {
            break;
        }
        if interval.contains(offset) {
            visit(k)?;
        }
    }
    Ok(())
}

/// Visits the sampled instants k ≤ n with time(n) − time(k) ∈ interval, in
/// decreasing order (newest first).
fn for_past_window<E>(
    tr: &Trace,
    n: usize,
    interval: &Interval,
    mut visit: impl FnMut(usize) -> Result<(), E>,
) -> Result<(), E> {
    for k in (0..=n).rev() {
        let offset = tr.time(n) - tr.time(k);
        if offset > interval.hi() {
            break;
        }
        if interval.contains(offset) {
            visit(k)?;
        }
    }
    Ok(())
}
