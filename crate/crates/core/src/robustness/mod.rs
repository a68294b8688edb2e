//! Evaluating formulas over sampled traces: offline boolean and
//! quantitative semantics, a brute-force cross-check, the discretized
//! global minimum, and an incremental monitor for past-dependent formulas.

mod brute;
mod eval;
mod monitor;
mod trace;

pub use brute::{brute_bool, brute_rob, brute_rob_kappa};
pub use eval::{
    eval_bool, eval_rob, eval_rob_kappa, global_min_rob, global_min_rob_kappa, EvalError,
    DEFAULT_KAPPA,
};
pub use monitor::{Monitor, MonitorError};
pub use trace::{write_robustness_csv, Trace, TraceCsvError, TraceError};
