//! Incremental robustness monitoring for past-dependent formulas.
//!
//! Because a past-dependent formula's robustness at an instant depends only
//! on the trace up to that instant — and only as far back as its past
//! reach — a bounded buffer of recent samples suffices: each push appends
//! one sample, evicts samples that have aged out of every window, and
//! returns exactly the robustness the offline evaluator would report at the
//! newest instant of the full prefix.

use thiserror::Error;

use crate::robustness::eval::{eval_rob_kappa, EvalError, DEFAULT_KAPPA};
use crate::robustness::{Trace, TraceError};
use crate::stl::{future_reach, past_reach, Formula, SignalSchema};

#[derive(Debug, Error, PartialEq)]
pub enum MonitorError {
    #[error("sample period must be a positive finite number of seconds, got {0}")]
    InvalidSamplePeriod(f64),
    #[error(
        "formula still looks {residual} s into the future at sample period {dt} s; \
         only past-dependent formulas can be monitored"
    )]
    NotPastDependent { residual: f64, dt: f64 },
    #[error("formula's past reach is unbounded; the retention window would be infinite")]
    UnboundedPastReach,
    #[error(transparent)]
    Sample(#[from] TraceError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Streaming evaluator for a past-dependent formula.
///
/// Samples are expected on the sample grid declared by `dt`; formulas using
/// the one-step operators rely on that spacing to line up step counts with
/// seconds.
#[derive(Debug, Clone)]
pub struct Monitor {
    formula: Formula,
    kappa: f64,
    /// Retention horizon in seconds: the formula's past reach resolved at
    /// the declared sample period.
    horizon: f64,
    buffer: Trace,
    pushes: usize,
}

impl Monitor {
    pub fn new(formula: Formula, schema: SignalSchema, dt: f64) -> Result<Self, MonitorError> {
        Self::with_kappa(formula, schema, dt, DEFAULT_KAPPA)
    }

    pub fn with_kappa(
        formula: Formula,
        schema: SignalSchema,
        dt: f64,
        kappa: f64,
    ) -> Result<Self, MonitorError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(MonitorError::InvalidSamplePeriod(dt));
        }
        let residual = future_reach(&formula).resolve(dt);
        if residual > 0.0 {
            return Err(MonitorError::NotPastDependent { residual, dt });
        }
        let past = past_reach(&formula);
        if !past.is_finite() {
            return Err(MonitorError::UnboundedPastReach);
        }
        Ok(Self {
            formula,
            kappa,
            horizon: past.resolve(dt),
            buffer: Trace::new(schema),
            pushes: 0,
        })
    }

    /// Appends a sample and returns the robustness at that newest instant.
    pub fn push(&mut self, t: f64, state: &[f64]) -> Result<f64, MonitorError> {
        self.buffer.push(t, state)?;
        self.pushes += 1;
        self.evict(t);
        let newest = self.buffer.len() - 1;
        Ok(eval_rob_kappa(&self.formula, &self.buffer, newest, self.kappa)?)
    }

    /// Drops samples that have aged out of every window the formula can
    /// anchor at `now` or later, always keeping one sample of slack behind
    /// the cutoff so a window whose edge lands exactly on the boundary is
    /// never starved.
    fn evict(&mut self, now: f64) {
        let cutoff = now - self.horizon;
        let mut drop = 0;
        while drop + 1 < self.buffer.len() && self.buffer.time(drop + 1) < cutoff {
            drop += 1;
        }
        self.buffer.remove_oldest(drop);
    }

    /// Total samples pushed over the monitor's lifetime (retention may hold
    /// fewer).
    pub fn pushes(&self) -> usize {
        self.pushes
    }

    /// Samples currently retained.
    pub fn retained(&self) -> usize {
        self.buffer.len()
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn formula(&self) -> &Formula {
        &self.formula
    }
}
