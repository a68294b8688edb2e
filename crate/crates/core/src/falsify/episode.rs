//! One falsification episode: the agent and the system in closed loop,
//! monitored incrementally.

use thiserror::Error;

use crate::agents::Agent;
use crate::falsify::reward;
use crate::robustness::{Monitor, MonitorError, Trace, TraceError};
use crate::stl::LifeLongProperty;
use crate::system::{
    clamp_input, InputSignal, InputSignalError, ModelError, SystemModel,
};

/// How each episode is driven.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeOptions {
    /// Control period: the agent picks one input per `dt` seconds.
    pub dt: f64,
    /// Episode length; steps run while `i * dt < t_end`.
    pub t_end: f64,
    /// Margin assigned to boolean atoms by the robustness evaluator.
    pub kappa: f64,
    /// Stop the episode at the first negative robustness instead of
    /// running to `t_end`.  Off by default: the search loop checks for
    /// violation at episode end, and the full-length episode is what
    /// the learning agents train on.
    pub early_exit: bool,
}

impl EpisodeOptions {
    pub fn new(dt: f64, t_end: f64) -> Self {
        Self { dt, t_end, kappa: crate::robustness::DEFAULT_KAPPA, early_exit: false }
    }
}

/// Everything one episode produced.
///
/// The per-step sequences cover the monitored instants `1..=k` (one
/// entry per control step): `robustness[j]` is the monitor output after
/// step `j+1`, and `rewards[j]` is its reward transform, exactly.  The
/// instant-0 robustness (of the reset state, before any input) is kept
/// separately in `initial_rho`; no reward corresponds to it.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    /// The piecewise-constant input signal the agent produced.
    pub inputs: InputSignal,
    /// The full sampled output trace, instant 0 included.
    pub trace: Trace,
    /// Robustness of the monitored body at instant 0.
    pub initial_rho: f64,
    /// Robustness at instants `1..=k`.
    pub robustness: Vec<f64>,
    /// Elementwise reward transform of `robustness`.
    pub rewards: Vec<f64>,
    /// Smallest robustness over all monitored instants, instant 0
    /// included.
    pub min_rho: f64,
    /// Whether the trace violates the property: `min_rho < 0`, strictly.
    /// A robustness of exactly 0 sits on the boundary where boolean
    /// semantics may still hold, so it does not count as falsified.
    pub falsified: bool,
}

impl EpisodeRecord {
    /// Number of control steps taken.
    pub fn steps(&self) -> usize {
        self.robustness.len()
    }

    /// State and reward the episode ended on — what the agent's
    /// end-of-episode notification should carry.
    pub fn final_state_and_reward(&self) -> (Vec<f64>, f64) {
        let last = self.trace.len() - 1;
        (self.trace.state(last).to_vec(), self.rewards.last().copied().unwrap_or(0.0))
    }
}

/// Why an episode could not run to completion.
#[derive(Debug, Error)]
pub enum EpisodeError {
    #[error("monitor setup or update failed: {0}")]
    Monitor(#[from] MonitorError),
    #[error("model failed at step {step} (t = {time}): {source}")]
    Model {
        step: usize,
        time: f64,
        source: ModelError,
    },
    #[error("recording the output trace failed: {0}")]
    Trace(#[from] TraceError),
    #[error("recording the input signal failed: {0}")]
    Signal(#[from] InputSignalError),
}

/// Run one episode of the falsification loop.
///
/// `prop` must already be past-dependent at `dt` (the search loop
/// converts once up front); the monitor will refuse it otherwise.  The
/// loop is the literal transcription of the episodic search: the agent
/// is asked for an input (seeing reward 0 on its first call), the model
/// advances one control period, the monitor scores the newest instant,
/// and that score's reward is handed to the agent on its next call.
/// The final reward of the episode is delivered by the caller via
/// `agent.reset`, not here.
pub fn run_episode(
    model: &mut dyn SystemModel,
    agent: &mut dyn Agent,
    prop: &LifeLongProperty,
    opts: &EpisodeOptions,
) -> Result<EpisodeRecord, EpisodeError> {
    let schema = model.output_schema().clone();
    let channels = model.input_channels().to_vec();
    let mut monitor =
        Monitor::with_kappa(prop.body().clone(), schema.clone(), opts.dt, opts.kappa)?;

    let x0 = model
        .reset()
        .map_err(|source| EpisodeError::Model { step: 0, time: 0.0, source })?;
    let mut trace = Trace::new(schema);
    trace.push(0.0, &x0)?;
    let initial_rho = monitor.push(0.0, &x0)?;

    let mut inputs = InputSignal::new(opts.dt, channels.len())?;
    let mut robustness = Vec::new();
    let mut rewards = Vec::new();
    let mut min_rho = initial_rho;
    let mut x = x0;
    let mut r = 0.0;
    let mut i = 0usize;
    while (i as f64) * opts.dt < opts.t_end {
        let time = (i as f64) * opts.dt;
        let proposed = agent.step(&x, r);
        // Agents are bound to stay inside the box; clamp defensively in
        // case one misbehaves, so the model always sees legal inputs.
        let u = clamp_input(&channels, &proposed)
            .map_err(|source| EpisodeError::Model { step: i, time, source })?;
        inputs.push(u.clone())?;
        x = model
            .step(&u, opts.dt)
            .map_err(|source| EpisodeError::Model { step: i, time, source })?;
        let next_time = ((i + 1) as f64) * opts.dt;
        trace.push(next_time, &x)?;
        let rho = monitor.push(next_time, &x)?;
        r = reward(rho);
        robustness.push(rho);
        rewards.push(r);
        min_rho = min_rho.min(rho);
        i += 1;
        if opts.early_exit && rho < 0.0 {
            break;
        }
    }

    Ok(EpisodeRecord {
        inputs,
        trace,
        initial_rho,
        robustness,
        rewards,
        min_rho,
        falsified: min_rho < 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::RandomAgent;
    use crate::stl::parse_spec_file;
    use crate::system::SurrogateAt;

    fn surrogate_prop(formula: &str) -> LifeLongProperty {
        let text = format!(
            "real v\nreal omega\nreal g\nbool g1\nbool g2\nbool g3\nbool g4\n{formula}"
        );
        let spec = parse_spec_file(&text).unwrap();
        LifeLongProperty::from_formula(spec.formula)
    }

    fn random_agent(model: &SurrogateAt, seed: u64) -> RandomAgent {
        RandomAgent::new(model.input_channels().to_vec(), seed)
    }

    #[test]
    fn unsatisfiable_threshold_is_violated_at_the_first_sample() {
        // v starts at 0, so v <= -1 already fails at instant 0 with
        // robustness -1 - 0 = -1.
        let mut model = SurrogateAt::new();
        let mut agent = random_agent(&model, 1);
        let prop = surrogate_prop("G (v <= -1)");
        let opts = EpisodeOptions::new(5.0, 30.0);
        let record = run_episode(&mut model, &mut agent, &prop, &opts).unwrap();
        assert_eq!(record.initial_rho, -1.0);
        assert!(record.falsified);
        assert!(record.min_rho < 0.0);
        assert_eq!(record.steps(), 6); // 6 * 5 = 30, loop runs i = 0..=5
    }

    #[test]
    fn plant_invariant_is_never_violated() {
        // v >= -1 holds forever on the surrogate (v is clamped at 0).
        let mut model = SurrogateAt::new();
        let mut agent = random_agent(&model, 2);
        let prop = surrogate_prop("G (v >= -1)");
        let opts = EpisodeOptions::new(5.0, 30.0);
        for _ in 0..5 {
            let record = run_episode(&mut model, &mut agent, &prop, &opts).unwrap();
            assert!(!record.falsified);
            assert!(record.min_rho >= 1.0); // v >= 0 ⇒ rho = v + 1 >= 1
        }
    }

    #[test]
    fn rewards_are_the_elementwise_transform_of_robustness() {
        let mut model = SurrogateAt::new();
        let mut agent = random_agent(&model, 3);
        let prop = surrogate_prop("G (v <= 40)");
        let opts = EpisodeOptions::new(1.0, 20.0);
        let record = run_episode(&mut model, &mut agent, &prop, &opts).unwrap();
        assert_eq!(record.robustness.len(), record.rewards.len());
        assert_eq!(record.steps(), 20);
        for (rho, r) in record.robustness.iter().zip(&record.rewards) {
            assert_eq!(*r, reward(*rho), "reward mismatch at rho = {rho}");
        }
        // min_rho accounts for the initial instant too.
        let full_min =
            record.robustness.iter().fold(record.initial_rho, |m, &v| m.min(v));
        assert_eq!(record.min_rho, full_min);
    }

    #[test]
    fn trace_and_inputs_line_up_with_the_step_count() {
        let mut model = SurrogateAt::new();
        let mut agent = random_agent(&model, 4);
        let prop = surrogate_prop("G (v <= 100)");
        let opts = EpisodeOptions::new(2.0, 9.0); // steps at 0,2,4,6,8 → 5 steps
        let record = run_episode(&mut model, &mut agent, &prop, &opts).unwrap();
        assert_eq!(record.steps(), 5);
        assert_eq!(record.inputs.len(), 5);
        assert_eq!(record.trace.len(), 6); // instant 0 plus one per step
        assert_eq!(record.trace.last_time(), Some(10.0));
    }

    #[test]
    fn early_exit_stops_at_the_first_violation() {
        let mut model = SurrogateAt::new();
        let mut agent = random_agent(&model, 5);
        let prop = surrogate_prop("G (v <= -1)"); // violated at instant 0... and instant 1
        let mut opts = EpisodeOptions::new(5.0, 60.0);
        opts.early_exit = true;
        let record = run_episode(&mut model, &mut agent, &prop, &opts).unwrap();
        // The violation is visible from the very first monitored step.
        assert_eq!(record.steps(), 1);
        assert!(record.falsified);
    }

    #[test]
    fn future_dependent_body_is_refused() {
        let mut model = SurrogateAt::new();
        let mut agent = random_agent(&model, 6);
        let prop = surrogate_prop("G (F[0,10] (v >= 5))");
        let opts = EpisodeOptions::new(5.0, 30.0);
        let err = run_episode(&mut model, &mut agent, &prop, &opts).unwrap_err();
        assert!(matches!(err, EpisodeError::Monitor(MonitorError::NotPastDependent { .. })));
    }
}
