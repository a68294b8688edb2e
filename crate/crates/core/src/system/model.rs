//! The system-under-test abstraction: a causal, deterministic map from
//! input signals to output traces, stepped one sample period at a time.

use thiserror::Error;

use crate::robustness::Trace;
use crate::stl::{SchemaError, SignalKind, SignalSchema};
use crate::system::InputSignal;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("sample period must be positive and finite, got {0}")]
    InvalidSamplePeriod(f64),
    #[error("input vector has {got} values but the model declares {want} channels")]
    InputWidth { got: usize, want: usize },
    #[error("model produced a state of {got} values but its schema declares {want}")]
    OutputWidth { got: usize, want: usize },
    #[error("simulator protocol violation: {0}")]
    Protocol(String),
    #[error("simulator process is gone: {0}")]
    ChildGone(String),
    #[error("no reply from simulator within {0:?}")]
    Timeout(std::time::Duration),
    #[error("failed to launch simulator `{command}`: {source}")]
    Spawn {
        command: String,
        #[source]
        source: std::io::Error,
    },
    #[error("simulator i/o failed: {0}")]
    Io(#[from] std::io::Error),
}

/// One input port: its name and the closed range of values the system
/// accepts (out-of-range inputs are clamped).
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct InputChannel {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
}

impl InputChannel {
    pub fn new(name: impl Into<String>, lo: f64, hi: f64) -> Self {
        let name = name.into();
        assert!(lo <= hi, "channel {name}: empty range [{lo},{hi}]");
        Self { name, lo, hi }
    }
}

/// A deterministic causal system: `reset` returns the initial output state,
/// `step` advances one sample period under a constant input vector and
/// returns the new output state. Identical reset-and-input sequences must
/// reproduce identical outputs bit for bit.
pub trait SystemModel {
    fn input_channels(&self) -> &[InputChannel];
    fn output_schema(&self) -> &SignalSchema;
    fn reset(&mut self) -> Result<Vec<f64>, ModelError>;
    fn step(&mut self, u: &[f64], dt: f64) -> Result<Vec<f64>, ModelError>;
}

/// Clamps an input vector into the declared channel ranges, logging when a
/// value actually moves. NaN clamps to the channel's lower bound so a wild
/// action can never poison model state.
pub fn clamp_input(channels: &[InputChannel], u: &[f64]) -> Result<Vec<f64>, ModelError> {
    if u.len() != channels.len() {
        return Err(ModelError::InputWidth { got: u.len(), want: channels.len() });
    }
    Ok(channels
        .iter()
        .zip(u)
        .map(|(ch, &raw)| {
            let clamped = if raw.is_nan() { ch.lo } else { raw.clamp(ch.lo, ch.hi) };
            if clamped != raw {
                log::warn!(
                    "input {} = {raw} outside [{}, {}], clamped to {clamped}",
                    ch.name,
                    ch.lo,
                    ch.hi
                );
            }
            clamped
        })
        .collect())
}

/// Runs a whole input signal from reset: sample 0 is the reset state at
/// t = 0 and sample k+1 is the state after applying step k, so the trace has
/// one more sample than the signal has steps.
pub fn run_signal(model: &mut dyn SystemModel, u: &InputSignal) -> Result<Trace, ModelError> {
    let schema = model.output_schema().clone();
    let mut tr = Trace::new(schema);
    let x0 = model.reset()?;
    push_state(&mut tr, 0.0, &x0)?;
    for k in 0..u.len() {
        let x = model.step(u.step(k), u.dt())?;
        push_state(&mut tr, u.time(k + 1), &x)?;
    }
    Ok(tr)
}

fn push_state(tr: &mut Trace, t: f64, state: &[f64]) -> Result<(), ModelError> {
    let want = tr.schema().len();
    if state.len() != want {
        return Err(ModelError::OutputWidth { got: state.len(), want });
    }
    tr.push(t, state)
        .map_err(|e| ModelError::Protocol(format!("state rejected at t={t}: {e}")))
}

/// Trivial system whose output state equals its (clamped) input vector;
/// reset state is all zeros. One real output signal per input channel.
#[derive(Debug, Clone)]
pub struct EchoModel {
    channels: Vec<InputChannel>,
    schema: SignalSchema,
}

impl EchoModel {
    pub fn new(channels: Vec<InputChannel>) -> Result<Self, SchemaError> {
        let schema = SignalSchema::new(
            channels.iter().map(|c| (c.name.clone(), SignalKind::Real)).collect(),
        )?;
        Ok(Self { channels, schema })
    }
}

impl SystemModel for EchoModel {
    fn input_channels(&self) -> &[InputChannel] {
        &self.channels
    }

    fn output_schema(&self) -> &SignalSchema {
        &self.schema
    }

    fn reset(&mut self) -> Result<Vec<f64>, ModelError> {
        Ok(vec![0.0; self.channels.len()])
    }

    fn step(&mut self, u: &[f64], dt: f64) -> Result<Vec<f64>, ModelError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(ModelError::InvalidSamplePeriod(dt));
        }
        clamp_input(&self.channels, u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_channels() -> Vec<InputChannel> {
        vec![InputChannel::new("a", 0.0, 1.0), InputChannel::new("b", -1.0, 1.0)]
    }

    #[test]
    fn clamping_is_per_channel() {
        let ch = unit_channels();
        assert_eq!(clamp_input(&ch, &[0.5, 0.5]).unwrap(), vec![0.5, 0.5]);
        assert_eq!(clamp_input(&ch, &[7.0, -9.0]).unwrap(), vec![1.0, -1.0]);
        assert_eq!(clamp_input(&ch, &[f64::NAN, f64::INFINITY]).unwrap(), vec![0.0, 1.0]);
        assert!(matches!(
            clamp_input(&ch, &[0.0]),
            Err(ModelError::InputWidth { got: 1, want: 2 })
        ));
    }

    #[test]
    fn echo_runs_a_signal_into_a_trace() {
        let mut model = EchoModel::new(unit_channels()).unwrap();
        let u = InputSignal::from_steps(0.5, 2, [vec![0.25, -0.5], vec![2.0, 0.0]]).unwrap();
        let tr = run_signal(&mut model, &u).unwrap();
        assert_eq!(tr.len(), 3);
        assert_eq!(tr.time(2), 1.0);
        assert_eq!(tr.state(0), &[0.0, 0.0]);
        assert_eq!(tr.state(1), &[0.25, -0.5]);
        assert_eq!(tr.state(2), &[1.0, 0.0]); // clamped
    }

    #[test]
    fn empty_signal_yields_only_the_reset_sample() {
        let mut model = EchoModel::new(unit_channels()).unwrap();
        let u = InputSignal::new(1.0, 2).unwrap();
        let tr = run_signal(&mut model, &u).unwrap();
        assert_eq!(tr.len(), 1);
        assert_eq!(tr.time(0), 0.0);
    }

    #[test]
    fn echo_rejects_bad_period() {
        let mut model = EchoModel::new(unit_channels()).unwrap();
        assert!(matches!(
            model.step(&[0.0, 0.0], -1.0),
            Err(ModelError::InvalidSamplePeriod(_))
        ));
    }
}
