//! Tabular double-Q learning over a discretized observation space and a
//! finite action grid.
//!
//! Two value tables are kept.  Each update draws a coin, picks one
//! table, and moves it toward a target whose action is chosen by that
//! table but whose value is read from the *other* table — the classic
//! double-estimator trick that damps the maximization bias of plain
//! Q-learning.  Action selection is ε-greedy over the sum of both
//! tables, with ε annealed linearly from 1.0 to 0.05 over the first
//! half of the episode budget.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::agents::{default_bins_for, Agent, AgentEnv, AgentState};
use crate::system::InputChannel;

/// Discretization override for one named state signal.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ObsSpec {
    pub signal: String,
    pub lo: f64,
    pub hi: f64,
    pub bins: usize,
}

/// Q-learner hyperparameters.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct QConfig {
    /// Learning rate, in (0, 1].
    pub alpha: f64,
    /// Agent-internal discount for bootstrapped targets.
    pub gamma: f64,
    /// Grid resolution per input channel (grid size is this raised to
    /// the number of channels).
    pub actions_per_channel: usize,
    /// Default bin count for real-valued state signals (boolean signals
    /// always get two bins).
    pub real_bins: usize,
    /// Default value range assumed for real signals with no explicit
    /// [`ObsSpec`]; values outside it share the edge bins.
    pub fallback_lo: f64,
    pub fallback_hi: f64,
    /// Per-signal discretization overrides, matched by name.
    pub obs: Vec<ObsSpec>,
    /// Exploration schedule: ε moves linearly from `eps_start` to
    /// `eps_end` over the first half of the episode budget.
    pub eps_start: f64,
    pub eps_end: f64,
}

impl Default for QConfig {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            gamma: 0.99,
            actions_per_channel: 5,
            real_bins: 8,
            fallback_lo: -1000.0,
            fallback_hi: 1000.0,
            obs: Vec::new(),
            eps_start: 1.0,
            eps_end: 0.05,
        }
    }
}

/// Per-signal bin layout: maps a raw state vector to a single
/// observation index by mixed-radix encoding of the per-signal bins.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ObsBins {
    signals: Vec<BinRange>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
struct BinRange {
    lo: f64,
    hi: f64,
    bins: u64,
}

impl ObsBins {
    fn from_env(cfg: &QConfig, env: &AgentEnv) -> Self {
        let signals = env
            .output_schema
            .iter()
            .map(|(name, kind)| {
                if let Some(spec) = cfg.obs.iter().find(|o| o.signal == name) {
                    assert!(spec.bins >= 1, "signal {name:?} needs at least one bin");
                    assert!(spec.lo <= spec.hi, "signal {name:?} has lo > hi");
                    BinRange { lo: spec.lo, hi: spec.hi, bins: spec.bins as u64 }
                } else {
                    let bins = default_bins_for(kind, cfg.real_bins) as u64;
                    match kind {
                        crate::stl::SignalKind::Real => {
                            BinRange { lo: cfg.fallback_lo, hi: cfg.fallback_hi, bins }
                        }
                        crate::stl::SignalKind::Bool => BinRange { lo: 0.0, hi: 1.0, bins },
                    }
                }
            })
            .collect::<Vec<_>>();
        let total: u128 = signals.iter().map(|s| s.bins as u128).product();
        assert!(total <= u64::MAX as u128, "observation space too large to index");
        Self { signals }
    }

    /// Total number of observation bins.
    pub fn count(&self) -> u64 {
        self.signals.iter().map(|s| s.bins).product()
    }

    /// Observation index for a raw state vector.  Values outside a
    /// signal's range fall into its edge bins; NaN falls into bin 0.
    pub fn index(&self, state: &[f64]) -> u64 {
        assert_eq!(state.len(), self.signals.len(), "state width mismatch");
        let mut idx = 0u64;
        for (value, sig) in state.iter().zip(&self.signals) {
            let bin = if sig.bins <= 1 || sig.hi <= sig.lo || value.is_nan() {
                0
            } else {
                let frac = (value.clamp(sig.lo, sig.hi) - sig.lo) / (sig.hi - sig.lo);
                ((frac * sig.bins as f64) as u64).min(sig.bins - 1)
            };
            idx = idx * sig.bins + bin;
        }
        idx
    }
}

/// Finite action set: the cartesian product of evenly spaced levels per
/// input channel, endpoints included.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ActionGrid {
    levels: Vec<Vec<f64>>,
}

impl ActionGrid {
    pub fn new(channels: &[InputChannel], per_channel: usize) -> Self {
        assert!(per_channel >= 1, "need at least one action level per channel");
        assert!(!channels.is_empty(), "need at least one input channel");
        let levels = channels
            .iter()
            .map(|ch| {
                if per_channel == 1 || ch.hi == ch.lo {
                    vec![(ch.lo + ch.hi) / 2.0]
                } else {
                    (0..per_channel)
                        .map(|i| {
                            ch.lo + (ch.hi - ch.lo) * (i as f64) / ((per_channel - 1) as f64)
                        })
                        .collect()
                }
            })
            .collect::<Vec<_>>();
        let total: u128 = levels.iter().map(|l| l.len() as u128).product();
        assert!(total <= usize::MAX as u128 && total > 0, "action grid too large");
        Self { levels }
    }

    /// Number of distinct actions.
    pub fn count(&self) -> usize {
        self.levels.iter().map(|l| l.len()).product()
    }

    /// Decode an action index (first channel most significant) into an
    /// input vector.
    pub fn action(&self, mut index: usize) -> Vec<f64> {
        assert!(index < self.count(), "action index out of range");
        let mut out = vec![0.0; self.levels.len()];
        for (slot, level) in out.iter_mut().zip(&self.levels).rev() {
            let n = level.len();
            *slot = level[index % n];
            index /= n;
        }
        out
    }
}

/// The two value tables and the double-estimator update rules.  Kept
/// separate from the agent wrapper so the learning rule can be driven
/// directly on small synthetic processes.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct DoubleQ {
    table_a: BTreeMap<u64, f64>,
    table_b: BTreeMap<u64, f64>,
    actions: u64,
}

impl DoubleQ {
    pub fn new(actions: usize) -> Self {
        assert!(actions >= 1, "need at least one action");
        Self { table_a: BTreeMap::new(), table_b: BTreeMap::new(), actions: actions as u64 }
    }

    fn key(&self, obs: u64, action: usize) -> u64 {
        debug_assert!((action as u64) < self.actions);
        obs.checked_mul(self.actions).expect("observation index overflow") + action as u64
    }

    /// Q_A(s, a); unvisited entries read as 0.
    pub fn q_a(&self, obs: u64, action: usize) -> f64 {
        self.table_a.get(&self.key(obs, action)).copied().unwrap_or(0.0)
    }

    /// Q_B(s, a); unvisited entries read as 0.
    pub fn q_b(&self, obs: u64, action: usize) -> f64 {
        self.table_b.get(&self.key(obs, action)).copied().unwrap_or(0.0)
    }

    pub fn set_q_a(&mut self, obs: u64, action: usize, value: f64) {
        let key = self.key(obs, action);
        self.table_a.insert(key, value);
    }

    pub fn set_q_b(&mut self, obs: u64, action: usize, value: f64) {
        let key = self.key(obs, action);
        self.table_b.insert(key, value);
    }

    fn argmax(&self, obs: u64, read: impl Fn(&Self, u64, usize) -> f64) -> usize {
        let mut best = 0usize;
        let mut best_value = read(self, obs, 0);
        for action in 1..self.actions as usize {
            let value = read(self, obs, action);
            if value > best_value {
                best = action;
                best_value = value;
            }
        }
        best
    }

    /// Greedy action under the combined estimate Q_A + Q_B, lowest
    /// index winning ties.
    pub fn greedy(&self, obs: u64) -> usize {
        self.argmax(obs, |q, s, a| q.q_a(s, a) + q.q_b(s, a))
    }

    /// One double-estimator update for the transition
    /// `(obs, action) --reward--> next_obs`.  When `update_a` is true
    /// the A-table moves toward `r + γ·Q_B(s', argmax_a' Q_A(s', a'))`;
    /// otherwise the roles are swapped.
    pub fn update(
        &mut self,
        obs: u64,
        action: usize,
        reward: f64,
        next_obs: u64,
        gamma: f64,
        alpha: f64,
        update_a: bool,
    ) {
        let target = if update_a {
            let pick = self.argmax(next_obs, |q, s, a| q.q_a(s, a));
            reward + gamma * self.q_b(next_obs, pick)
        } else {
            let pick = self.argmax(next_obs, |q, s, a| q.q_b(s, a));
            reward + gamma * self.q_a(next_obs, pick)
        };
        self.nudge(obs, action, target, alpha, update_a);
    }

    /// Terminal update: no bootstrap, the target is the reward alone.
    pub fn update_terminal(
        &mut self,
        obs: u64,
        action: usize,
        reward: f64,
        alpha: f64,
        update_a: bool,
    ) {
        self.nudge(obs, action, reward, alpha, update_a);
    }

    fn nudge(&mut self, obs: u64, action: usize, target: f64, alpha: f64, update_a: bool) {
        let key = self.key(obs, action);
        let table = if update_a { &mut self.table_a } else { &mut self.table_b };
        let entry = table.entry(key).or_insert(0.0);
        *entry += alpha * (target - *entry);
        debug_assert!(entry.is_finite(), "value table entry diverged");
    }
}

/// ε-greedy tabular double-Q agent over binned observations and a grid
/// of actions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QAgent {
    bins: ObsBins,
    grid: ActionGrid,
    q: DoubleQ,
    alpha: f64,
    gamma: f64,
    eps_start: f64,
    eps_end: f64,
    episode_budget: u64,
    episodes_done: u64,
    /// The (observation, action) pair awaiting its reward.
    pending: Option<(u64, usize)>,
    rng: ChaCha20Rng,
}

impl QAgent {
    pub fn new(cfg: QConfig, env: &AgentEnv, seed: u64) -> Self {
        assert!(cfg.alpha > 0.0 && cfg.alpha <= 1.0, "alpha must be in (0, 1]");
        assert!((0.0..=1.0).contains(&cfg.gamma), "gamma must be in [0, 1]");
        assert!(
            (0.0..=1.0).contains(&cfg.eps_start) && (0.0..=1.0).contains(&cfg.eps_end),
            "epsilon bounds must be in [0, 1]"
        );
        let bins = ObsBins::from_env(&cfg, env);
        let grid = ActionGrid::new(&env.channels, cfg.actions_per_channel);
        let q = DoubleQ::new(grid.count());
        Self {
            bins,
            grid,
            q,
            alpha: cfg.alpha,
            gamma: cfg.gamma,
            eps_start: cfg.eps_start,
            eps_end: cfg.eps_end,
            episode_budget: env.episode_budget as u64,
            episodes_done: 0,
            pending: None,
            rng: ChaCha20Rng::seed_from_u64(seed),
        }
    }

    /// Exploration rate for the current episode: linear from
    /// `eps_start` to `eps_end` over the first half of the budget,
    /// constant afterwards.
    pub fn epsilon(&self) -> f64 {
        let half = self.episode_budget as f64 / 2.0;
        if half <= 0.0 {
            return self.eps_end;
        }
        let frac = (self.episodes_done as f64 / half).min(1.0);
        self.eps_start + (self.eps_end - self.eps_start) * frac
    }

    /// Read-only view of the value tables.
    pub fn tables(&self) -> &DoubleQ {
        &self.q
    }
}

impl Agent for QAgent {
    fn step(&mut self, state: &[f64], reward: f64) -> Vec<f64> {
        let obs = self.bins.index(state);
        if let Some((prev_obs, prev_action)) = self.pending {
            let update_a = self.rng.gen_bool(0.5);
            self.q.update(prev_obs, prev_action, reward, obs, self.gamma, self.alpha, update_a);
        }
        let action = if self.rng.gen::<f64>() < self.epsilon() {
            self.rng.gen_range(0..self.grid.count())
        } else {
            self.q.greedy(obs)
        };
        self.pending = Some((obs, action));
        self.grid.action(action)
    }

    fn reset(&mut self, _state: &[f64], reward: f64) {
        // The episode is over: close out the pending transition against
        // the final reward with no bootstrap term.
        if let Some((prev_obs, prev_action)) = self.pending.take() {
            let update_a = self.rng.gen_bool(0.5);
            self.q.update_terminal(prev_obs, prev_action, reward, self.alpha, update_a);
        }
        self.episodes_done += 1;
    }

    fn state(&self) -> AgentState {
        AgentState::Q(self.clone())
    }
}
