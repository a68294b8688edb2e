//! Falsification of life-long temporal properties over simulated systems.
//!
//! The crate searches for input signals that drive a system model into
//! violating a property of the shape `□φ` ("φ holds at every sampled
//! instant"). The search is episodic: an agent proposes piecewise-constant
//! inputs, an incremental monitor scores every simulation step with a
//! quantitative robustness value, and the sign of the episode-wide minimum
//! decides falsification. Robustness doubles as the learning signal: each
//! step's value is fed back to the agent as `exp(−ρ) − 1`, so adaptive
//! agents learn to push the system toward violation.
//!
//! Module map:
//! - [`stl`] — formula syntax tree, text format, reach analysis, and the
//!   past-dependence rewrite that makes online monitoring possible
//! - [`robustness`] — boolean and quantitative semantics over sampled
//!   traces, a brute-force reference evaluator, and the sliding-window
//!   monitor
//! - [`system`] — the system-under-test contract, a deterministic surrogate
//!   drivetrain plant, and a line-delimited JSON bridge to external
//!   simulator processes
//! - [`falsify`] — the episodic falsification loop and the reward law
//! - [`agents`] — interchangeable input-generation policies: uniform random,
//!   tabular double-Q, simulated annealing, cross-entropy
//! - [`experiment`] — multi-trial benchmark harness with significance tests,
//!   bundled property presets, and report emission

pub mod agents;
pub mod experiment;
pub mod falsify;
pub mod robustness;
pub mod stl;
pub mod system;
