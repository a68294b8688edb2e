//! Input-generation agents for the falsification loop.
//!
//! An [`Agent`] proposes one input vector per control step and is told,
//! one step later, the reward its previous action earned.  Four
//! strategies are provided:
//!
//! * [`RandomAgent`] — uniform draws over the input box; the baseline.
//! * [`AnnealingAgent`] — keeps a whole episode's worth of inputs as one
//!   parameter vector, replays it, and anneals it between episodes.
//! * [`CrossEntropyAgent`] — samples episode parameter vectors from a
//!   diagonal Gaussian and refits it to the elite episodes.
//! * [`QAgent`] — tabular double-Q learning over a discretized
//!   observation space and a finite action grid.
//!
//! Every agent is deterministic given its seed, keeps its learning
//! state in serializable form, and never emits a value outside the
//! declared input bounds.

mod annealing;
mod cross_entropy;
mod qlearn;
mod random;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stl::{SignalKind, SignalSchema};
use crate::system::InputChannel;

pub use annealing::{AnnealingAgent, AnnealingConfig};
pub use cross_entropy::{CrossEntropyAgent, CrossEntropyConfig};
pub use qlearn::{ActionGrid, DoubleQ, ObsBins, ObsSpec, QAgent, QConfig};
pub use random::RandomAgent;

/// A strategy that proposes the next input vector for the system under
/// test, one control step at a time.
///
/// The driving loop interleaves calls as
/// `step(x_0, 0), step(x_1, r_1), ..., step(x_{k-1}, r_{k-1})` within an
/// episode and then `reset(x_k, r_k)` when the episode ends without a
/// violation.  The reward passed to each call scores the *previous*
/// action; the very first `step` of an episode always receives `0.0`,
/// which is a placeholder rather than an earned reward.
pub trait Agent {
    /// Observe the current system state and the reward earned by the
    /// previous action, and return the next input vector (one value per
    /// input channel, inside that channel's bounds).
    fn step(&mut self, state: &[f64], reward: f64) -> Vec<f64>;

    /// Episode boundary: observe the final state and final reward, fold
    /// whatever was learned into persistent state, and prepare for the
    /// next episode.
    fn reset(&mut self, state: &[f64], reward: f64);

    /// The agent's complete learning state, for snapshots.
    fn state(&self) -> AgentState;
}

/// Everything an agent needs to know about the loop it will run in:
/// the input box it must respect, the shape of the states it will
/// observe, and the episode geometry (for parameter-vector sizing and
/// exploration schedules).
#[derive(Debug, Clone)]
pub struct AgentEnv {
    /// Input channels, in emission order.  Bounds are authoritative.
    pub channels: Vec<InputChannel>,
    /// Names and kinds of the observed state signals.
    pub output_schema: SignalSchema,
    /// Number of `step` calls per episode.
    pub steps_per_episode: usize,
    /// Total number of episodes the run may use.
    pub episode_budget: usize,
}

impl AgentEnv {
    pub fn new(
        channels: Vec<InputChannel>,
        output_schema: SignalSchema,
        steps_per_episode: usize,
        episode_budget: usize,
    ) -> Self {
        Self { channels, output_schema, steps_per_episode, episode_budget }
    }
}

/// Number of control steps in one episode: the count of step indices
/// `i` with `i * dt < t_end`.  This mirrors the falsification loop's
/// own termination test exactly, floating point and all, so agents that
/// size parameter vectors by it never disagree with the loop.
pub fn episode_steps(dt: f64, t_end: f64) -> usize {
    assert!(dt > 0.0 && dt.is_finite(), "sample period must be positive and finite");
    assert!(t_end > 0.0 && t_end.is_finite(), "episode length must be positive and finite");
    let mut i = 0usize;
    while (i as f64) * dt < t_end {
        i += 1;
    }
    i
}

/// Agent selection plus hyperparameters, in config-file-friendly form.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AgentConfig {
    /// Uniform random inputs.
    Random,
    /// Episode-parameter simulated annealing.
    Annealing(AnnealingConfig),
    /// Episode-parameter cross-entropy search.
    CrossEntropy(CrossEntropyConfig),
    /// Tabular double-Q learning.
    Q(QConfig),
}

impl AgentConfig {
    /// Short stable name for output tables.
    pub fn kind_name(&self) -> &'static str {
        match self {
            AgentConfig::Random => "random",
            AgentConfig::Annealing(_) => "annealing",
            AgentConfig::CrossEntropy(_) => "cross-entropy",
            AgentConfig::Q(_) => "q",
        }
    }

    /// Instantiate the configured agent for the given environment.
    pub fn build(&self, env: &AgentEnv, seed: u64) -> Box<dyn Agent> {
        match self {
            AgentConfig::Random => Box::new(RandomAgent::new(env.channels.clone(), seed)),
            AgentConfig::Annealing(cfg) => Box::new(AnnealingAgent::new(cfg.clone(), env, seed)),
            AgentConfig::CrossEntropy(cfg) => {
                Box::new(CrossEntropyAgent::new(cfg.clone(), env, seed))
            }
            AgentConfig::Q(cfg) => Box::new(QAgent::new(cfg.clone(), env, seed)),
        }
    }

    /// Parse a command-line agent name with default hyperparameters.
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "random" => Some(AgentConfig::Random),
            "annealing" | "sa" => Some(AgentConfig::Annealing(AnnealingConfig::default())),
            "cross-entropy" | "ce" => Some(AgentConfig::CrossEntropy(CrossEntropyConfig::default())),
            "q" => Some(AgentConfig::Q(QConfig::default())),
            _ => None,
        }
    }
}

/// Complete learning state of one agent, tagged by strategy.  This is
/// what snapshots carry; [`AgentState::into_agent`] resumes from it.
///
/// Externally tagged on purpose: internal tagging would buffer the
/// variant body through serde's `Content` tree, which cannot represent
/// the RNG's 128-bit stream position or the integer-keyed value tables.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AgentState {
    Random(RandomAgent),
    Annealing(AnnealingAgent),
    CrossEntropy(CrossEntropyAgent),
    Q(QAgent),
}

impl AgentState {
    /// Turn a restored state back into a live agent.
    pub fn into_agent(self) -> Box<dyn Agent> {
        match self {
            AgentState::Random(a) => Box::new(a),
            AgentState::Annealing(a) => Box::new(a),
            AgentState::CrossEntropy(a) => Box::new(a),
            AgentState::Q(a) => Box::new(a),
        }
    }
}

/// File format for persisted agent state: a self-describing header
/// around the tagged state, so a reader can refuse files it does not
/// understand instead of misparsing them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgentSnapshot {
    /// Always `"falstl-agent"`.
    pub format: String,
    /// Layout version; currently 1.
    pub version: u32,
    pub state: AgentState,
}

pub const SNAPSHOT_FORMAT: &str = "falstl-agent";
pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("snapshot i/o failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("snapshot is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("not an agent snapshot (format {found:?}, expected {expected:?})")]
    Format { found: String, expected: &'static str },
    #[error("unsupported snapshot version {found} (this build reads version {supported})")]
    Version { found: u32, supported: u32 },
}

impl AgentSnapshot {
    pub fn new(state: AgentState) -> Self {
        Self { format: SNAPSHOT_FORMAT.to_string(), version: SNAPSHOT_VERSION, state }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("agent state serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, SnapshotError> {
        // Check the header before committing to the full layout, so a
        // wrong-format file gets a format error rather than a parse error.
        #[derive(Deserialize)]
        struct Header {
            format: String,
            version: u32,
        }
        let header: Header = serde_json::from_str(text)?;
        if header.format != SNAPSHOT_FORMAT {
            return Err(SnapshotError::Format { found: header.format, expected: SNAPSHOT_FORMAT });
        }
        if header.version != SNAPSHOT_VERSION {
            return Err(SnapshotError::Version {
                found: header.version,
                supported: SNAPSHOT_VERSION,
            });
        }
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), SnapshotError> {
        Ok(std::fs::write(path, self.to_json())?)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, SnapshotError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Recover the episode's minimum robustness from the rewards the agent
/// saw.  Rewards are `exp(-rho) - 1`, strictly decreasing in `rho`, so
/// the largest reward corresponds to the smallest robustness and
/// `-ln(1 + r_max)` inverts the map (up to the overflow cap, which only
/// compresses values far below any falsification threshold).
///
/// Returns `+inf` when no reward was observed or all were `-1`
/// (robustness `+inf` throughout).
pub(crate) fn objective_from_max_reward(max_reward: f64) -> f64 {
    if max_reward.is_nan() {
        return f64::INFINITY;
    }
    -(max_reward.max(-1.0)).ln_1p()
}

/// Default observation bin count for real-valued signals.
pub(crate) fn default_bins_for(kind: SignalKind, real_bins: usize) -> usize {
    match kind {
        SignalKind::Real => real_bins,
        SignalKind::Bool => 2,
    }
}
