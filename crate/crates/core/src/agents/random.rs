//! Baseline agent: every input is an independent uniform draw.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::agents::{Agent, AgentState};
use crate::system::InputChannel;

/// Uniform random search over the input box.  Ignores states and
/// rewards entirely; useful as the control arm any learning agent has
/// to beat.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RandomAgent {
    channels: Vec<InputChannel>,
    rng: ChaCha20Rng,
}

impl RandomAgent {
    pub fn new(channels: Vec<InputChannel>, seed: u64) -> Self {
        assert!(!channels.is_empty(), "at least one input channel is required");
        Self { channels, rng: ChaCha20Rng::seed_from_u64(seed) }
    }
}

impl Agent for RandomAgent {
    fn step(&mut self, _state: &[f64], _reward: f64) -> Vec<f64> {
        self.channels
            .iter()
            .map(|ch| {
                if ch.lo == ch.hi {
                    ch.lo
                } else {
                    self.rng.gen_range(ch.lo..=ch.hi)
                }
            })
            .collect()
    }

    fn reset(&mut self, _state: &[f64], _reward: f64) {}

    fn state(&self) -> AgentState {
        AgentState::Random(self.clone())
    }
}
