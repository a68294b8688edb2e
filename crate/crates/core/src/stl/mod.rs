//! Temporal-logic formulas: abstract syntax, a plain-text surface format,
//! reach analysis, and the rewrite to past-dependent form.

mod formula;
mod parser;
mod reach;
mod schema;

pub use formula::{monitor_window, Atom, Comparator, Formula, Interval, LifeLongProperty};
pub use parser::{parse_formula, parse_spec_file, ParseError, SpecFile};
pub use reach::{future_reach, past_reach, Reach, ReachError};
pub use schema::{SchemaError, SignalKind, SignalSchema};
