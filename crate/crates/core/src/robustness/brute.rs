//! Brute-force reference evaluator. Deliberately naive: every quantified
//! index set is materialized as a vector and every inner minimum is
//! recomputed from scratch, so this shares no evaluation strategy with the
//! incremental evaluator in `eval` beyond the interval-membership test.
//! Tests hold the two implementations exactly equal (values and errors);
//! the `oracle` CLI subcommand exposes the cross-check at runtime.

use crate::robustness::eval::{prop_holds, EvalError, DEFAULT_KAPPA};
use crate::robustness::Trace;
use crate::stl::{Atom, Comparator, Formula, Interval};

pub fn brute_rob(f: &Formula, tr: &Trace, n: usize) -> Result<f64, EvalError> {
    brute_rob_kappa(f, tr, n, DEFAULT_KAPPA)
}

pub fn brute_rob_kappa(f: &Formula, tr: &Trace, n: usize, kappa: f64) -> Result<f64, EvalError> {
    if n >= tr.len() {
        return Err(EvalError::IndexOutOfRange { index: n, len: tr.len() });
    }
    rob(f, tr, n, kappa)
}

pub fn brute_bool(f: &Formula, tr: &Trace, n: usize) -> Result<bool, EvalError> {
    if n >= tr.len() {
        return Err(EvalError::IndexOutOfRange { index: n, len: tr.len() });
    }
    sat(f, tr, n)
}

fn min_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::INFINITY, f64::min)
}

fn max_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// All indexes k ≥ n whose offset from n lies in the interval.
fn future_indexes(tr: &Trace, n: usize, interval: &Interval) -> Vec<usize> {
    (n..tr.len())
        .filter(|&k| interval.contains(tr.time(k) - tr.time(n)))
        .collect()
}

/// All indexes k ≤ n whose offset back from n lies in the interval.
fn past_indexes(tr: &Trace, n: usize, interval: &Interval) -> Vec<usize> {
    (0..=n)
        .filter(|&k| interval.contains(tr.time(n) - tr.time(k)))
        .collect()
}

fn require_window_sampled(tr: &Trace, n: usize, interval: &Interval) -> Result<(), EvalError> {
    let needed = tr.time(n) + interval.hi();
    let trace_end = tr.time(tr.len() - 1);
    if needed > trace_end {
        Err(EvalError::InsufficientTrace { at: tr.time(n), needed, trace_end })
    } else {
        Ok(())
    }
}

fn rob(f: &Formula, tr: &Trace, n: usize, kappa: f64) -> Result<f64, EvalError> {
    Ok(match f {
        Formula::Atom(a) => atom_rob(a, tr, n, kappa),
        Formula::Not(g) => -rob(g, tr, n, kappa)?,
        Formula::And(a, b) => min_of(&[rob(a, tr, n, kappa)?, rob(b, tr, n, kappa)?]),
        Formula::Or(a, b) => max_of(&[rob(a, tr, n, kappa)?, rob(b, tr, n, kappa)?]),
        Formula::Implies(a, b) => max_of(&[-rob(a, tr, n, kappa)?, rob(b, tr, n, kappa)?]),
        Formula::Always(i, g) => {
            require_window_sampled(tr, n, i)?;
            let mut vals = Vec::new();
            for k in future_indexes(tr, n, i) {
                vals.push(rob(g, tr, k, kappa)?);
            }
            min_of(&vals)
        }
        Formula::Eventually(i, g) => {
            require_window_sampled(tr, n, i)?;
            let mut vals = Vec::new();
            for k in future_indexes(tr, n, i) {
                vals.push(rob(g, tr, k, kappa)?);
            }
            max_of(&vals)
        }
        Formula::Until(i, hold, goal) => {
            require_window_sampled(tr, n, i)?;
            let mut vals = Vec::new();
            for k in future_indexes(tr, n, i) {
                let goal_rho = rob(goal, tr, k, kappa)?;
                let mut held = Vec::new();
                for j in n..k {
                    held.push(rob(hold, tr, j, kappa)?);
                }
                vals.push(min_of(&[goal_rho, min_of(&held)]));
            }
            max_of(&vals)
        }
        Formula::Since(i, hold, goal) => {
            let mut vals = Vec::new();
            for k in past_indexes(tr, n, i) {
                let goal_rho = rob(goal, tr, k, kappa)?;
                let mut held = Vec::new();
                for j in (k + 1)..=n {
                    held.push(rob(hold, tr, j, kappa)?);
                }
                vals.push(min_of(&[goal_rho, min_of(&held)]));
            }
            max_of(&vals)
        }
        Formula::Historically(i, g) => {
            let mut vals = Vec::new();
            for k in past_indexes(tr, n, i) {
                vals.push(rob(g, tr, k, kappa)?);
            }
            min_of(&vals)
        }
        Formula::Once(i, g) => {
            let mut vals = Vec::new();
            for k in past_indexes(tr, n, i) {
                vals.push(rob(g, tr, k, kappa)?);
            }
            max_of(&vals)
        }
        Formula::Next(g) => {
            if n + 1 >= tr.len() {
                return Err(EvalError::PastEnd { demanded: n + 1, len: tr.len() });
            }
            rob(g, tr, n + 1, kappa)?
        }
        Formula::Prev(g) => {
            if n == 0 {
                f64::NEG_INFINITY
            } else {
                rob(g, tr, n - 1, kappa)?
            }
        }
    })
}

fn sat(f: &Formula, tr: &Trace, n: usize) -> Result<bool, EvalError> {
    Ok(match f {
        Formula::Atom(a) => atom_sat(a, tr, n),
        Formula::Not(g) => !sat(g, tr, n)?,
        Formula::And(a, b) => {
            let va = sat(a, tr, n)?;
            let vb = sat(b, tr, n)?;
            va && vb
        }
        Formula::Or(a, b) => {
            let va = sat(a, tr, n)?;
            let vb = sat(b, tr, n)?;
            va || vb
        }
        Formula::Implies(a, b) => {
            let va = sat(a, tr, n)?;
            let vb = sat(b, tr, n)?;
            !va || vb
        }
        Formula::Always(i, g) => {
            require_window_sampled(tr, n, i)?;
            let mut vals = Vec::new();
            for k in future_indexes(tr, n, i) {
                vals.push(sat(g, tr, k)?);
            }
            vals.iter().all(|&b| b)
        }
        Formula::Eventually(i, g) => {
            require_window_sampled(tr, n, i)?;
            let mut vals = Vec::new();
            for k in future_indexes(tr, n, i) {
                vals.push(sat(g, tr, k)?);
            }
            vals.iter().any(|&b| b)
        }
        Formula::Until(i, hold, goal) => {
            require_window_sampled(tr, n, i)?;
            let mut vals = Vec::new();
            for k in future_indexes(tr, n, i) {
                let goal_ok = sat(goal, tr, k)?;
                let mut held = Vec::new();
                for j in n..k {
                    held.push(sat(hold, tr, j)?);
                }
                vals.push(goal_ok && held.iter().all(|&b| b));
            }
            vals.iter().any(|&b| b)
        }
        Formula::Since(i, hold, goal) => {
            let mut vals = Vec::new();
            for k in past_indexes(tr, n, i) {
                let goal_ok = sat(goal, tr, k)?;
                let mut held = Vec::new();
                for j in (k + 1)..=n {
                    held.push(sat(hold, tr, j)?);
                }
                vals.push(goal_ok && held.iter().all(|&b| b));
            }
            vals.iter().any(|&b| b)
        }
        Formula::Historically(i, g) => {
            let mut vals = Vec::new();
            for k in past_indexes(tr, n, i) {
                vals.push(sat(g, tr, k)?);
            }
            vals.iter().all(|&b| b)
        }
        Formula::Once(i, g) => {
            let mut vals = Vec::new();
            for k in past_indexes(tr, n, i) {
                vals.push(sat(g, tr, k)?);
            }
            vals.iter().any(|&b| b)
        }
        Formula::Next(g) => {
            if n + 1 >= tr.len() {
                return Err(EvalError::PastEnd { demanded: n + 1, len: tr.len() });
            }
            sat(g, tr, n + 1)?
        }
        Formula::Prev(g) => n != 0 && sat(g, tr, n - 1)?,
    })
}

fn atom_rob(atom: &Atom, tr: &Trace, n: usize, kappa: f64) -> f64 {
    match atom {
        Atom::Cmp { index, cmp, bound, .. } => match cmp {
            Comparator::Lt | Comparator::Le => bound - tr.value(n, *index),
            Comparator::Gt | Comparator::Ge => tr.value(n, *index) - bound,
        },
        Atom::Prop { index, .. } => {
            if prop_holds(tr.value(n, *index)) {
                kappa
            } else {
                -kappa
            }
        }
    }
}

fn atom_sat(atom: &Atom, tr: &Trace, n: usize) -> bool {
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
