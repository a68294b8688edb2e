//! Cross-entropy search over whole-episode input plans.
//!
//! The agent keeps a diagonal Gaussian over the parameter vector θ
//! (one input vector per control step).  Each episode replays one
//! sample from the distribution; after a full generation of episodes
//! the distribution is refit to the elite samples — the ones with the
//! lowest recovered minimum robustness — with a per-coordinate floor on
//! the standard deviation so the search never collapses to a point.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::agents::{Agent, AgentEnv, AgentState};
use crate::system::InputChannel;

/// Population shape for the cross-entropy method.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct CrossEntropyConfig {
    /// Episodes per generation; at least 4.
    pub population: usize,
    /// Fraction of the population kept as elites (at least one sample).
    pub elite_fraction: f64,
    /// Minimum standard deviation, as a fraction of each channel's
    /// range.
    pub sigma_floor_fraction: f64,
}

impl Default for CrossEntropyConfig {
    fn default() -> Self {
        Self { population: 10, elite_fraction: 0.2, sigma_floor_fraction: 0.01 }
    }
}

/// Episode-parameter cross-entropy agent.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrossEntropyAgent {
    cfg: CrossEntropyConfig,
    channels: Vec<InputChannel>,
    steps: usize,
    mean: Vec<f64>,
    sigma: Vec<f64>,
    /// Plan being replayed this episode.
    active: Vec<f64>,
    /// Scored plans of the current generation, keyed by the largest
    /// reward each episode earned.  Rewards rather than objectives so
    /// the persisted state never holds an infinity (the reward map is
    /// strictly monotone, so ranking by reward descending is ranking by
    /// minimum robustness ascending).
    scored: Vec<(Vec<f64>, f64)>,
    step_index: usize,
    max_reward: Option<f64>,
    rng: ChaCha20Rng,
}

/// See the annealing agent: NaN rewards carry no signal, infinities are
/// pinned finite so serialized state survives JSON.
fn sanitize_reward(r: f64) -> f64 {
    if r.is_nan() {
        -1.0
    } else {
        r.clamp(-1.0, f64::MAX)
    }
}

impl CrossEntropyAgent {
    pub fn new(cfg: CrossEntropyConfig, env: &AgentEnv, seed: u64) -> Self {
        assert!(cfg.population >= 4, "population must be at least 4");
        assert!(
            cfg.elite_fraction > 0.0 && cfg.elite_fraction <= 1.0,
            "elite fraction must be in (0, 1]"
        );
        assert!(cfg.sigma_floor_fraction >= 0.0, "sigma floor cannot be negative");
        assert!(!env.channels.is_empty(), "at least one input channel is required");
        assert!(env.steps_per_episode >= 1, "episodes must have at least one step");
        let dim = env.steps_per_episode * env.channels.len();
        let width = env.channels.len();
        let mean: Vec<f64> =
            (0..dim).map(|i| midpoint(&env.channels[i % width])).collect();
        let sigma: Vec<f64> =
            (0..dim).map(|i| half_range(&env.channels[i % width])).collect();
        let mut agent = Self {
            cfg,
            channels: env.channels.clone(),
            steps: env.steps_per_episode,
            mean,
            sigma,
            active: Vec::new(),
            scored: Vec::new(),
            step_index: 0,
            max_reward: None,
            rng: ChaCha20Rng::seed_from_u64(seed),
        };
        agent.active = agent.sample();
        agent
    }

    /// Number of elites per generation.
    pub fn elite_count(&self) -> usize {
        ((self.cfg.population as f64 * self.cfg.elite_fraction).round() as usize)
            .clamp(1, self.cfg.population)
    }

    /// Current distribution mean (one value per step × channel slot).
    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Current per-coordinate standard deviation.
    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    fn width(&self) -> usize {
        self.channels.len()
    }

    fn fold_reward(&mut self, reward: f64) {
        let r = sanitize_reward(reward);
        self.max_reward = Some(match self.max_reward {
            Some(prev) => prev.max(r),
            None => r,
        });
    }

    /// Draw one plan from the current distribution, clamped into the
    /// input box.
    fn sample(&mut self) -> Vec<f64> {
        let width = self.width();
        (0..self.mean.len())
            .map(|i| {
                let ch = &self.channels[i % width];
                let value = if self.sigma[i] > 0.0 {
                    let noise = Normal::new(self.mean[i], self.sigma[i])
                        .expect("mean finite, sigma positive");
                    noise.sample(&mut self.rng)
                } else {
                    self.mean[i]
                };
                value.clamp(ch.lo, ch.hi)
            })
            .collect()
    }

    /// Refit mean and sigma to the elite plans of a finished
    /// generation (the episodes with the highest rewards, i.e. the
    /// lowest minimum robustness).
    fn refit(&mut self) {
        let mut order: Vec<usize> = (0..self.scored.len()).collect();
        order.sort_by(|&a, &b| {
            self.scored[b].1.total_cmp(&self.scored[a].1).then(a.cmp(&b))
        });
        let elites: Vec<&Vec<f64>> =
            order.iter().take(self.elite_count()).map(|&i| &self.scored[i].0).collect();
        let n = elites.len() as f64;
        let width = self.width();
        for i in 0..self.mean.len() {
            let mean = elites.iter().map(|e| e[i]).sum::<f64>() / n;
            let variance = elites.iter().map(|e| (e[i] - mean).powi(2)).sum::<f64>() / n;
            let floor =
                self.cfg.sigma_floor_fraction * range(&self.channels[i % width]);
            self.mean[i] = mean;
            self.sigma[i] = variance.sqrt().max(floor);
        }
        self.scored.clear();
    }
}

fn midpoint(ch: &InputChannel) -> f64 {
    (ch.lo + ch.hi) / 2.0
}

fn half_range(ch: &InputChannel) -> f64 {
    (ch.hi - ch.lo) / 2.0
}

fn range(ch: &InputChannel) -> f64 {
    ch.hi - ch.lo
}

impl Agent for CrossEntropyAgent {
    fn step(&mut self, _state: &[f64], reward: f64) -> Vec<f64> {
        if self.step_index > 0 {
            self.fold_reward(reward);
        }
        let k = self.step_index.min(self.steps - 1);
        self.step_index += 1;
        let w = self.width();
        self.active[k * w..(k + 1) * w].to_vec()
    }

    fn reset(&mut self, _state: &[f64], reward: f64) {
        self.fold_reward(reward);
        let episode_reward = self.max_reward.unwrap_or(-1.0);
        let plan = std::mem::take(&mut self.active);
        self.scored.push((plan, episode_reward));
        if self.scored.len() >= self.cfg.population {
            self.refit();
        }
        self.active = self.sample();
        self.step_index = 0;
        self.max_reward = None;
    }

    fn state(&self) -> AgentState {
        AgentState::CrossEntropy(self.clone())
    }
}
