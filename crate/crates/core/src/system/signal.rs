//! Piecewise-constant input signals on a uniform sample grid.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum InputSignalError {
    #[error("sample period must be positive and finite, got {0}")]
    InvalidSamplePeriod(f64),
    #[error("input step has {got} values but the signal carries {want} channels")]
    Width { got: usize, want: usize },
}

/// A finite input signal: step `k` holds the input vector applied over
/// `[k·dt, (k+1)·dt)`. The value at an arbitrary time is the step with the
/// largest grid time not exceeding it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputSignal {
    dt: f64,
    width: usize,
    steps: Vec<Vec<f64>>,
}

impl InputSignal {
    pub fn new(dt: f64, width: usize) -> Result<Self, InputSignalError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(InputSignalError::InvalidSamplePeriod(dt));
        }
        Ok(Self { dt, width, steps: Vec::new() })
    }

    pub fn from_steps(
        dt: f64,
        width: usize,
        steps: impl IntoIterator<Item = Vec<f64>>,
    ) -> Result<Self, InputSignalError> {
        let mut signal = Self::new(dt, width)?;
        for step in steps {
            signal.push(step)?;
        }
        Ok(signal)
    }

    pub fn push(&mut self, step: Vec<f64>) -> Result<(), InputSignalError> {
        if step.len() != self.width {
            return Err(InputSignalError::Width { got: step.len(), want: self.width });
        }
        self.steps.push(step);
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Grid time of step `k`.
    pub fn time(&self, k: usize) -> f64 {
        (k as f64) * self.dt
    }

    pub fn step(&self, k: usize) -> &[f64] {
        &self.steps[k]
    }

    pub fn steps(&self) -> impl Iterator<Item = &[f64]> {
        self.steps.iter().map(Vec::as_slice)
    }

    /// Piecewise-constant lookup: the step with the largest grid time ≤ `t`,
    /// or `None` before the first step or on an empty signal.
    pub fn value_at(&self, t: f64) -> Option<&[f64]> {
        if t < 0.0 || self.steps.is_empty() {
            return None;
        }
        let k = ((t / self.dt).floor() as usize).min(self.steps.len() - 1);
        Some(&self.steps[k])
    }

    /// The first `k` steps as a signal of their own.
    pub fn prefix(&self, k: usize) -> Self {
        Self { dt: self.dt, width: self.width, steps: self.steps[..k.min(self.len())].to_vec() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_period_and_width() {
        assert_eq!(InputSignal::new(0.0, 1), Err(InputSignalError::InvalidSamplePeriod(0.0)));
        assert_eq!(
            InputSignal::new(f64::INFINITY, 1),
            Err(InputSignalError::InvalidSamplePeriod(f64::INFINITY))
        );
        let mut u = InputSignal::new(0.5, 2).unwrap();
        assert_eq!(u.push(vec![1.0]), Err(InputSignalError::Width { got: 1, want: 2 }));
        u.push(vec![1.0, 2.0]).unwrap();
        assert_eq!(u.len(), 1);
        assert_eq!(u.time(3), 1.5);
    }

    #[test]
    fn piecewise_constant_lookup() {
        let u = InputSignal::from_steps(0.5, 1, [vec![10.0], vec![20.0], vec![30.0]]).unwrap();
        assert_eq!(u.value_at(-0.1), None);
        assert_eq!(u.value_at(0.0), Some(&[10.0][..]));
        assert_eq!(u.value_at(0.49), Some(&[10.0][..]));
        assert_eq!(u.value_at(0.5), Some(&[20.0][..]));
        assert_eq!(u.value_at(7.0), Some(&[30.0][..]));
    }

    #[test]
    fn prefix_truncates() {
        let u = InputSignal::from_steps(1.0, 1, [vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        let p = u.prefix(2);
        assert_eq!(p.len(), 2);
        assert_eq!(p.step(1), &[2.0]);
        assert_eq!(u.prefix(10).len(), 3);
    }

    #[test]
    fn serde_round_trip() {
        let u = InputSignal::from_steps(0.5, 2, [vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let json = serde_json::to_string(&u).unwrap();
        let back: InputSignal = serde_json::from_str(&json).unwrap();
        assert_eq!(back, u);
    }
}
