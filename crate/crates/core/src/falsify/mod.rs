//! The episodic falsification loop: model, monitor, reward, and agent
//! in closed loop against an episode budget.
//!
//! One episode drives the system for `t_end` seconds in `dt`-sized
//! control steps.  At each step the agent proposes the next input from
//! the latest state and reward, the model advances, and the streaming
//! monitor scores the newest instant; the reward transform
//! `exp(−ρ) − 1` turns that score into the learning signal.  At episode
//! end the trace either violates the property — the input signal is the
//! counterexample — or the agent is notified and the next episode
//! starts, with learning state carried over.

mod engine;
mod episode;
mod reward;

pub use engine::{
    falsify, replay_is_falsifying, FalsificationResult, FalsifyError, FalsifyOptions, Outcome,
    ReplayError,
};
pub use episode::{run_episode, EpisodeError, EpisodeOptions, EpisodeRecord};
pub use reward::{reward, RewardSpec, REWARD_EXPONENT_CAP};
