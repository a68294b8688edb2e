//! The falsification search: run episodes against a budget, return the
//! first violating input signal or exhaust the budget trying.

use std::time::{Duration, Instant};

use serde_json::json;
use thiserror::Error;

use crate::agents::Agent;
use crate::falsify::{run_episode, EpisodeError, EpisodeOptions, EpisodeRecord};
use crate::robustness::{global_min_rob_kappa, DEFAULT_KAPPA};
use crate::stl::{LifeLongProperty, ReachError};
use crate::system::{InputSignal, ModelError, SystemModel};

/// Full configuration of one falsification run.
#[derive(Debug, Clone, PartialEq)]
pub struct FalsifyOptions {
    /// Control period Δ.
    pub dt: f64,
    /// Episode length in seconds.
    pub t_end: f64,
    /// Maximum number of episodes.
    pub episode_budget: usize,
    /// Seed recorded in the result.  The engine does not draw from it —
    /// the agent carries its own RNG — but a result must name the seed
    /// that built its agent for the run to be reproducible.
    pub seed: u64,
    /// Boolean-atom margin for robustness.
    pub kappa: f64,
    /// Stop episodes at the first observed violation instead of running
    /// them to `t_end` (off by default; the search checks at episode
    /// end).
    pub early_exit: bool,
}

impl FalsifyOptions {
    pub fn new(dt: f64, t_end: f64, episode_budget: usize) -> Self {
        Self { dt, t_end, episode_budget, seed: 0, kappa: DEFAULT_KAPPA, early_exit: false }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn episode_options(&self) -> EpisodeOptions {
        EpisodeOptions {
            dt: self.dt,
            t_end: self.t_end,
            kappa: self.kappa,
            early_exit: self.early_exit,
        }
    }
}

/// How the search ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    /// A violating input signal was found in the given episode
    /// (1-based).
    Falsified { episode: usize },
    /// The budget ran out with no violation.
    Exhausted { budget: usize },
}

/// Everything a falsification run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct FalsificationResult {
    pub outcome: Outcome,
    /// One record per episode actually run, in order.
    pub episodes: Vec<EpisodeRecord>,
    /// Wall-clock duration of the search.
    pub wall: Duration,
    /// Seed the run's agent was built from.
    pub seed: u64,
}

impl FalsificationResult {
    pub fn falsified(&self) -> bool {
        matches!(self.outcome, Outcome::Falsified { .. })
    }

    /// The violating input signal, when one was found.
    pub fn counterexample(&self) -> Option<&InputSignal> {
        match self.outcome {
            Outcome::Falsified { episode } => Some(&self.episodes[episode - 1].inputs),
            Outcome::Exhausted { .. } => None,
        }
    }

    /// Result as a JSON document:
    /// `{outcome, episode_index, counterexample, episodes, seed, wall_ms}`.
    /// The counterexample is a list of `[t, u...]` rows; non-finite
    /// robustness values are encoded as the strings `"inf"` / `"-inf"`
    /// because JSON numbers cannot carry them.
    pub fn to_json(&self) -> serde_json::Value {
        let (outcome, episode_index) = match self.outcome {
            Outcome::Falsified { episode } => ("falsified", Some(episode)),
            Outcome::Exhausted { .. } => ("exhausted", None),
        };
        let counterexample = self.counterexample().map(|u| {
            (0..u.len())
                .map(|k| {
                    let mut row = vec![json!(u.time(k))];
                    row.extend(u.step(k).iter().map(|v| json!(v)));
                    serde_json::Value::Array(row)
                })
                .collect::<Vec<_>>()
        });
        json!({
            "outcome": outcome,
            "episode_index": episode_index,
            "counterexample": counterexample,
            "episodes": self
                .episodes
                .iter()
                .map(|e| {
                    json!({
                        "min_rho": rho_json(e.min_rho),
                        "falsified": e.falsified,
                        "steps": e.steps(),
                    })
                })
                .collect::<Vec<_>>(),
            "seed": self.seed,
            "wall_ms": self.wall.as_millis() as u64,
        })
    }
}

/// JSON encoding for an extended-real robustness value.
fn rho_json(rho: f64) -> serde_json::Value {
    if rho.is_finite() {
        json!(rho)
    } else if rho > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

/// Why a search could not run.
#[derive(Debug, Error)]
pub enum FalsifyError {
    #[error("invalid search options: {0}")]
    InvalidOptions(String),
    #[error("property cannot be monitored: {0}")]
    Reach(#[from] ReachError),
    #[error("episode {episode} failed: {source}")]
    Episode {
        episode: usize,
        source: EpisodeError,
    },
}

/// Search for an input signal violating the life-long property.
///
/// The property is rewritten to past-dependent form once up front; each
/// episode then drives the agent/model loop and the episode-end check
/// decides violation.  The agent is notified with `reset` after every
/// completed non-violating episode, so its learning state persists
/// across the whole call.
pub fn falsify(
    model: &mut dyn SystemModel,
    agent: &mut dyn Agent,
    property: &LifeLongProperty,
    opts: &FalsifyOptions,
) -> Result<FalsificationResult, FalsifyError> {
    if opts.episode_budget < 1 {
        return Err(FalsifyError::InvalidOptions("episode budget must be at least 1".into()));
    }
    if !(opts.dt.is_finite() && opts.dt > 0.0) {
        return Err(FalsifyError::InvalidOptions(format!(
            "control period must be positive and finite, got {}",
            opts.dt
        )));
    }
    if !(opts.t_end.is_finite() && opts.t_end > 0.0) {
        return Err(FalsifyError::InvalidOptions(format!(
            "episode length must be positive and finite, got {}",
            opts.t_end
        )));
    }
    // Both reaches must resolve finitely for the rewrite and the
    // monitor window to exist.
    property.check_finite_reaches(opts.dt)?;
    let past = property.to_past_dependent(opts.dt)?;

    let started = Instant::now();
    let episode_opts = opts.episode_options();
    let mut episodes = Vec::new();
    for episode in 1..=opts.episode_budget {
        let record = run_episode(model, agent, &past, &episode_opts)
            .map_err(|source| FalsifyError::Episode { episode, source })?;
        if record.falsified {
            episodes.push(record);
            return Ok(FalsificationResult {
                outcome: Outcome::Falsified { episode },
                episodes,
                wall: started.elapsed(),
                seed: opts.seed,
            });
        }
        // Episode completed without a violation: notify the agent so it
        // can fold the final state/reward into its learning state.
        let (final_state, final_reward) = record.final_state_and_reward();
        agent.reset(&final_state, final_reward);
        episodes.push(record);
    }
    Ok(FalsificationResult {
        outcome: Outcome::Exhausted { budget: opts.episode_budget },
        episodes,
        wall: started.elapsed(),
        seed: opts.seed,
    })
}

/// Why a counterexample replay could not be judged.
#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("property cannot be monitored: {0}")]
    Reach(#[from] ReachError),
    #[error("model failed during replay: {0}")]
    Model(#[from] ModelError),
}

/// Re-run a recorded input signal through a model and report whether
/// the resulting trace violates the property — the independent check
/// that a returned counterexample actually falsifies.
///
/// Uses the offline evaluator over the full replayed trace rather than
/// the streaming monitor, so it exercises a separate code path from the
/// search itself.
pub fn replay_is_falsifying(
    model: &mut dyn SystemModel,
    property: &LifeLongProperty,
    inputs: &InputSignal,
    kappa: f64,
) -> Result<bool, ReplayError> {
    let past = property.to_past_dependent(inputs.dt())?;
    let trace = crate::system::run_signal(model, inputs)?;
    let (min_rho, _) = global_min_rob_kappa(past.body(), &trace, kappa);
    Ok(min_rho < 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{AgentConfig, AgentEnv, RandomAgent};
    use crate::robustness::eval_bool;
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
    fn unsatisfiable_property_falsifies_in_episode_one() {
        let mut model = SurrogateAt::new();
        let mut agent = random_agent(&model, 1);
        let prop = surrogate_prop("G (v <= -1)");
        let opts = FalsifyOptions::new(5.0, 30.0, 10).with_seed(1);
        let result = falsify(&mut model, &mut agent, &prop, &opts).unwrap();
        assert_eq!(result.outcome, Outcome::Falsified { episode: 1 });
        assert_eq!(result.episodes.len(), 1);
        assert!(result.counterexample().is_some());
        // The counterexample replays to a violation.
        let ce = result.counterexample().unwrap().clone();
        assert!(replay_is_falsifying(&mut model, &prop, &ce, DEFAULT_KAPPA).unwrap());
    }

    #[test]
    fn unfalsifiable_property_exhausts_the_budget_with_full_records() {
        let mut model = SurrogateAt::new();
        let mut agent = random_agent(&model, 2);
        let prop = surrogate_prop("G (v >= -1)");
        let opts = FalsifyOptions::new(5.0, 30.0, 5).with_seed(2);
        let result = falsify(&mut model, &mut agent, &prop, &opts).unwrap();
        assert_eq!(result.outcome, Outcome::Exhausted { budget: 5 });
        assert_eq!(result.episodes.len(), 5);
        assert!(result.counterexample().is_none());
        for e in &result.episodes {
            assert!(!e.falsified);
            assert_eq!(e.steps(), 6);
        }
    }

    #[test]
    fn verdicts_agree_with_boolean_semantics() {
        // For each episode, falsified must equal "the boolean semantics
        // of the (converted) property fail somewhere on the trace" —
        // checked by evaluating the past-dependent body at every
        // instant with the boolean evaluator.
        let mut model = SurrogateAt::new();
        let mut agent = random_agent(&model, 3);
        let prop = surrogate_prop("G (v <= 60)");
        let opts = FalsifyOptions::new(5.0, 60.0, 6).with_seed(3);
        let result = falsify(&mut model, &mut agent, &prop, &opts).unwrap();
        let past = prop.to_past_dependent(5.0).unwrap();
        for record in &result.episodes {
            let mut any_false = false;
            for n in 0..record.trace.len() {
                if let Ok(holds) = eval_bool(past.body(), &record.trace, n) {
                    if !holds {
                        any_false = true;
                    }
                }
            }
            // min_rho = 0 exactly counts as not falsified; exclude that
            // boundary from the equivalence.
            if record.min_rho != 0.0 {
                assert_eq!(record.falsified, any_false, "verdict mismatch");
            }
        }
    }

    #[test]
    fn fixed_seed_reproduces_the_result_bit_for_bit() {
        let run = |seed: u64| {
            let mut model = SurrogateAt::new();
            let env = AgentEnv::new(
                model.input_channels().to_vec(),
                model.output_schema().clone(),
                crate::agents::episode_steps(5.0, 60.0),
                4,
            );
            let mut agent = AgentConfig::from_name("annealing").unwrap().build(&env, seed);
            let prop = surrogate_prop("G (v <= 50)");
            let opts = FalsifyOptions::new(5.0, 60.0, 4).with_seed(seed);
            falsify(&mut model, agent.as_mut(), &prop, &opts).unwrap()
        };
        let mut a = run(7);
        let mut b = run(7);
        // Wall-clock time is the one field allowed to differ.
        a.wall = Duration::ZERO;
        b.wall = Duration::ZERO;
        assert_eq!(a, b, "identical seeds must give identical results");
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn zero_budget_is_rejected() {
        let mut model = SurrogateAt::new();
        let mut agent = random_agent(&model, 4);
        let prop = surrogate_prop("G (v <= 10)");
        let opts = FalsifyOptions::new(5.0, 30.0, 0);
        let err = falsify(&mut model, &mut agent, &prop, &opts).unwrap_err();
        assert!(matches!(err, FalsifyError::InvalidOptions(_)));
    }

    #[test]
    fn result_json_has_the_documented_shape() {
        let mut model = SurrogateAt::new();
        let mut agent = random_agent(&model, 5);
        let prop = surrogate_prop("G (v <= -1)");
        let opts = FalsifyOptions::new(5.0, 15.0, 3).with_seed(5);
        let result = falsify(&mut model, &mut agent, &prop, &opts).unwrap();
        let doc = result.to_json();
        assert_eq!(doc["outcome"], "falsified");
        assert_eq!(doc["episode_index"], 1);
        assert_eq!(doc["seed"], 5);
        assert!(doc["wall_ms"].is_u64());
        let ce = doc["counterexample"].as_array().unwrap();
        assert_eq!(ce.len(), 3); // 3 steps at dt = 5 until t_end = 15
        let row = ce[0].as_array().unwrap();
        assert_eq!(row.len(), 3); // t, throttle, brake
        assert_eq!(row[0], 0.0);
        let eps = doc["episodes"].as_array().unwrap();
        assert_eq!(eps.len(), 1);
        assert_eq!(eps[0]["falsified"], true);
        assert_eq!(eps[0]["steps"], 3);
        assert!(eps[0]["min_rho"].is_number());
    }

    #[test]
    fn exhausted_json_encodes_the_missing_counterexample_as_null() {
        let mut model = SurrogateAt::new();
        let mut agent = random_agent(&model, 6);
        let prop = surrogate_prop("G (v >= -1)");
        let opts = FalsifyOptions::new(5.0, 15.0, 2).with_seed(6);
        let doc = falsify(&mut model, &mut agent, &prop, &opts).unwrap().to_json();
        assert_eq!(doc["outcome"], "exhausted");
        assert!(doc["episode_index"].is_null());
        assert!(doc["counterexample"].is_null());
        assert_eq!(doc["episodes"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn learning_state_persists_across_episodes_within_one_call() {
        // The annealing agent proposes a fresh plan between episodes;
        // observing different first-step inputs across episodes proves
        // reset was called and state carried over.
        let mut model = SurrogateAt::new();
        let env = AgentEnv::new(
            model.input_channels().to_vec(),
            model.output_schema().clone(),
            crate::agents::episode_steps(5.0, 30.0),
            3,
        );
        let mut agent = AgentConfig::from_name("annealing").unwrap().build(&env, 11);
        let prop = surrogate_prop("G (v >= -1)");
        let opts = FalsifyOptions::new(5.0, 30.0, 3).with_seed(11);
        let result = falsify(&mut model, agent.as_mut(), &prop, &opts).unwrap();
        let plans: Vec<_> = result.episodes.iter().map(|e| e.inputs.clone()).collect();
        assert_eq!(plans.len(), 3);
        // Every annealing proposal perturbs at least one coordinate, so
        // consecutive episode plans must differ if reset reached the
        // agent and its state carried over.
        for w in plans.windows(2) {
            assert_ne!(w[0], w[1], "plan repeated — was the agent reset?");
        }
    }
}
