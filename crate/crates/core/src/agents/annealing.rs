//! Simulated annealing over whole-episode input plans.
//!
//! The agent's parameter vector θ lays out one input vector per control
//! step.  During an episode it replays θ verbatim; when the episode
//! ends it recovers the episode's minimum robustness from the rewards
//! it saw, runs one Metropolis accept/reject step against the best plan
//! so far, and perturbs to get the next proposal.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::agents::{objective_from_max_reward, Agent, AgentEnv, AgentState};
use crate::system::InputChannel;

/// Annealing schedule and neighborhood shape.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct AnnealingConfig {
    /// Temperature before any cooling.
    pub initial_temperature: f64,
    /// Geometric cooling factor applied once per completed episode.
    pub cooling: f64,
    /// Perturbation standard deviation, as a fraction of each
    /// channel's range.
    pub sigma_fraction: f64,
    /// Probability that each coordinate joins the perturbed subset (at
    /// least one coordinate is always perturbed).
    pub perturb_probability: f64,
}

impl Default for AnnealingConfig {
    fn default() -> Self {
        Self {
            initial_temperature: 1.0,
            cooling: 0.97,
            sigma_fraction: 0.10,
            perturb_probability: 0.3,
        }
    }
}

/// Episode-parameter simulated annealing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnnealingAgent {
    cfg: AnnealingConfig,
    channels: Vec<InputChannel>,
    steps: usize,
    /// Plan being replayed this episode.
    active: Vec<f64>,
    /// Best accepted plan; meaningful once `accepted_reward` is set.
    accepted: Vec<f64>,
    /// Largest reward the accepted episode earned; `None` until the
    /// first episode has been scored.  Rewards are kept instead of
    /// objectives because they are always finite, which keeps the
    /// serialized state lossless (JSON has no infinities).
    accepted_reward: Option<f64>,
    episodes_done: u64,
    step_index: usize,
    /// Largest reward seen this episode (placeholder first-step reward
    /// excluded); inverts to the episode's minimum robustness.
    max_reward: Option<f64>,
    rng: ChaCha20Rng,
}

/// Keep rewards usable as persisted scores: NaN carries no signal and
/// counts as "no violation in sight" (-1); infinities are pinned to the
/// nearest finite value.
fn sanitize_reward(r: f64) -> f64 {
    if r.is_nan() {
        -1.0
    } else {
        r.clamp(-1.0, f64::MAX)
    }
}

impl AnnealingAgent {
    pub fn new(cfg: AnnealingConfig, env: &AgentEnv, seed: u64) -> Self {
        assert!(cfg.initial_temperature > 0.0, "initial temperature must be positive");
        assert!(cfg.cooling > 0.0 && cfg.cooling < 1.0, "cooling factor must be in (0, 1)");
        assert!(cfg.sigma_fraction > 0.0, "sigma fraction must be positive");
        assert!(
            cfg.perturb_probability > 0.0 && cfg.perturb_probability <= 1.0,
            "perturb probability must be in (0, 1]"
        );
        assert!(!env.channels.is_empty(), "at least one input channel is required");
        assert!(env.steps_per_episode >= 1, "episodes must have at least one step");
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let dim = env.steps_per_episode * env.channels.len();
        let mut active = Vec::with_capacity(dim);
        for i in 0..dim {
            let ch = &env.channels[i % env.channels.len()];
            active.push(if ch.lo == ch.hi { ch.lo } else { rng.gen_range(ch.lo..=ch.hi) });
        }
        Self {
            cfg,
            channels: env.channels.clone(),
            steps: env.steps_per_episode,
            accepted: active.clone(),
            active,
            accepted_reward: None,
            episodes_done: 0,
            step_index: 0,
            max_reward: None,
            rng,
        }
    }

    /// Temperature used for the accept/reject decision after `k`
    /// completed episodes.
    pub fn temperature(&self) -> f64 {
        self.cfg.initial_temperature * self.cfg.cooling.powi(self.episodes_done as i32)
    }

    /// Objective (minimum robustness) of the best plan accepted so
    /// far, if any episode has finished.
    pub fn best_objective(&self) -> Option<f64> {
        self.accepted_reward.map(objective_from_max_reward)
    }

    fn fold_reward(&mut self, reward: f64) {
        let r = sanitize_reward(reward);
        self.max_reward = Some(match self.max_reward {
            Some(prev) => prev.max(r),
            None => r,
        });
    }

    fn width(&self) -> usize {
        self.channels.len()
    }

    /// Gaussian perturbation of the accepted plan on a random
    /// coordinate subset, clamped back into the input box.
    fn propose(&mut self) -> Vec<f64> {
        let dim = self.accepted.len();
        let mut chosen: Vec<usize> =
            (0..dim).filter(|_| self.rng.gen_bool(self.cfg.perturb_probability)).collect();
        if chosen.is_empty() {
            chosen.push(self.rng.gen_range(0..dim));
        }
        let mut next = self.accepted.clone();
        for &i in &chosen {
            let ch = &self.channels[i % self.width()];
            let sigma = self.cfg.sigma_fraction * (ch.hi - ch.lo);
            if sigma > 0.0 {
                let noise = Normal::new(0.0, sigma).expect("sigma is positive and finite");
                next[i] += noise.sample(&mut self.rng);
            }
        }
        let width = self.width();
        for (i, value) in next.iter_mut().enumerate() {
            let ch = &self.channels[i % width];
            *value = value.clamp(ch.lo, ch.hi);
        }
        next
    }
}

impl Agent for AnnealingAgent {
    fn step(&mut self, _state: &[f64], reward: f64) -> Vec<f64> {
        if self.step_index > 0 {
            self.fold_reward(reward);
        }
        // Replay the active plan; if the loop runs longer than the plan
        // was sized for, hold the last planned input.
        let k = self.step_index.min(self.steps - 1);
        self.step_index += 1;
        let w = self.width();
        self.active[k * w..(k + 1) * w].to_vec()
    }

    fn reset(&mut self, _state: &[f64], reward: f64) {
        self.fold_reward(reward);
        let episode_reward = self.max_reward.unwrap_or(-1.0);
        let objective = objective_from_max_reward(episode_reward);
        let accept = match self.accepted_reward.map(objective_from_max_reward) {
            // First scored episode: adopt unconditionally.
            None => true,
            Some(best) => {
                if objective < best {
                    true
                } else if !objective.is_finite() || !best.is_finite() {
                    // No usable gap between non-finite scores; keep the
                    // incumbent.
                    false
                } else {
                    // Metropolis: accept uphill with probability
                    // exp(-delta / T); T shrinking toward zero makes
                    // worse plans ever less likely to pass.
                    let t = self.temperature();
                    self.rng.gen::<f64>() < ((best - objective) / t).exp()
                }
            }
        };
        if accept {
            self.accepted = self.active.clone();
            self.accepted_reward = Some(episode_reward);
        }
        self.episodes_done += 1;
        self.active = self.propose();
        self.step_index = 0;
        self.max_reward = None;
    }

    fn state(&self) -> AgentState {
        AgentState::Annealing(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stl::SignalSchema;

    fn env(steps: usize) -> AgentEnv {
        AgentEnv::new(
            vec![InputChannel::new("u", 0.0, 1.0)],
            SignalSchema::reals(["x"]).unwrap(),
            steps,
            200,
        )
    }

    /// Feed one episode through the agent: placeholder reward on the
    /// first step, no signal in between, the episode objective at
    /// reset.  Returns the plan the agent replayed.
    fn run_episode(agent: &mut AnnealingAgent, steps: usize, objective: f64) -> Vec<f64> {
        let mut plan = Vec::new();
        for i in 0..steps {
            let r = if i == 0 { 0.0 } else { -1.0 }; // -1 encodes "+inf robustness so far"
            plan.extend(agent.step(&[0.0], r));
        }
        agent.reset(&[0.0], (-objective).exp() - 1.0);
        plan
    }

    #[test]
    fn replays_the_same_plan_for_the_whole_episode() {
        let mut agent = AnnealingAgent::new(AnnealingConfig::default(), &env(5), 3);
        let expected = agent.active.clone();
        let mut seen = Vec::new();
        for i in 0..5 {
            let r = if i == 0 { 0.0 } else { -1.0 };
            seen.extend(agent.step(&[0.0], r));
        }
        assert_eq!(seen, expected);
    }

    fn assert_objective_near(agent: &AnnealingAgent, expected: f64) {
        let got = agent.best_objective().expect("an episode has been scored");
        assert!(
            (got - expected).abs() < 1e-9,
            "best objective {got} should be within 1e-9 of {expected}"
        );
    }

    #[test]
    fn improving_episodes_are_always_adopted() {
        let mut agent = AnnealingAgent::new(AnnealingConfig::default(), &env(3), 7);
        run_episode(&mut agent, 3, 5.0);
        assert_objective_near(&agent, 5.0);
        let plan = agent.active.clone();
        run_episode(&mut agent, 3, 4.0); // strictly better: must be accepted
        assert_objective_near(&agent, 4.0);
        assert_eq!(agent.accepted, plan);
    }

    #[test]
    fn uphill_moves_die_out_as_temperature_drops() {
        // With the temperature driven to ~0, a worse episode must be
        // rejected (acceptance probability exp(-delta/T) -> 0).
        let mut agent = AnnealingAgent::new(AnnealingConfig::default(), &env(3), 1);
        run_episode(&mut agent, 3, 1.0);
        agent.episodes_done = 2000; // temperature ~ 0.97^2000 ≈ 0
        assert!(agent.temperature() < 1e-25);
        for _ in 0..50 {
            run_episode(&mut agent, 3, 1.5); // worse by 0.5
            assert_objective_near(&agent, 1.0); // uphill move must be rejected
        }
    }

    #[test]
    fn proposals_stay_inside_the_box() {
        let channels =
            vec![InputChannel::new("a", -2.0, -1.0), InputChannel::new("b", 10.0, 10.0)];
        let env = AgentEnv::new(channels, SignalSchema::reals(["x"]).unwrap(), 4, 100);
        let mut agent = AnnealingAgent::new(AnnealingConfig::default(), &env, 9);
        for e in 0..100 {
            for i in 0..4 {
                let u = agent.step(&[0.0], if i == 0 { 0.0 } else { -0.5 });
                assert!((-2.0..=-1.0).contains(&u[0]), "episode {e}: a = {} escaped", u[0]);
                assert_eq!(u[1], 10.0, "degenerate channel must stay fixed");
            }
            agent.reset(&[0.0], (e as f64 * 0.37).sin());
        }
    }

    #[test]
    fn same_seed_and_objectives_mean_same_plans() {
        let mut a = AnnealingAgent::new(AnnealingConfig::default(), &env(4), 21);
        let mut b = AnnealingAgent::new(AnnealingConfig::default(), &env(4), 21);
        for k in 0..30 {
            let objective = 3.0 + ((k * 7) % 5) as f64;
            assert_eq!(
                run_episode(&mut a, 4, objective),
                run_episode(&mut b, 4, objective),
                "plans diverged at episode {k}"
            );
        }
    }

    #[test]
    fn snapshot_round_trip_resumes_identically() {
        let mut agent = AnnealingAgent::new(AnnealingConfig::default(), &env(4), 5);
        for k in 0..7 {
            run_episode(&mut agent, 4, 2.0 + k as f64);
        }
        let json = serde_json::to_string(&agent.state()).unwrap();
        let mut restored: AnnealingAgent =
            match serde_json::from_str::<AgentState>(&json).unwrap() {
                AgentState::Annealing(a) => a,
                other => panic!("wrong variant: {other:?}"),
            };
        for k in 0..10 {
            let objective = 1.0 + (k % 3) as f64;
            assert_eq!(
                run_episode(&mut agent, 4, objective),
                run_episode(&mut restored, 4, objective)
            );
        }
    }
}
