use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Kind of a named signal in a trace.
///
/// State vectors store every signal as `f64`; a [`SignalKind::Bool`] entry is
/// read as true when the stored value is `>= 0.5`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalKind {
    Real,
    Bool,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SchemaError {
    #[error("duplicate signal name `{0}`")]
    Duplicate(String),
    #[error("signal name `{0}` is reserved by the formula grammar")]
    Reserved(String),
    #[error("signal name `{0}` is not a valid identifier")]
    Invalid(String),
}

/// Single-letter operator names and keywords of the formula grammar; signals
/// may not shadow them.
pub(crate) const RESERVED_NAMES: &[&str] = &["G", "F", "U", "S", "H", "O", "X", "P", "inf"];

pub(crate) fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Ordered list of named, typed signals; fixes the layout of state vectors
/// and trace columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignalSchema {
    signals: Vec<(String, SignalKind)>,
}

impl SignalSchema {
    pub fn new(signals: Vec<(String, SignalKind)>) -> Result<Self, SchemaError> {
        for (i, (name, _)) in signals.iter().enumerate() {
            if !is_identifier(name) {
                return Err(SchemaError::Invalid(name.clone()));
            }
            if RESERVED_NAMES.contains(&name.as_str()) {
                return Err(SchemaError::Reserved(name.clone()));
            }
            if signals[..i].iter().any(|(other, _)| other == name) {
                return Err(SchemaError::Duplicate(name.clone()));
            }
        }
        Ok(Self { signals })
    }

    /// Convenience constructor for all-real schemas (model input ports).
    pub fn reals<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self, SchemaError> {
        Self::new(names.into_iter().map(|n| (n.into(), SignalKind::Real)).collect())
    }

    pub fn len(&self) -> usize {
        self.signals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signals.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.signals.iter().position(|(n, _)| n == name)
    }

    pub fn name(&self, index: usize) -> &str {
        &self.signals[index].0
    }

    pub fn kind(&self, index: usize) -> SignalKind {
        self.signals[index].1
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, SignalKind)> {
        self.signals.iter().map(|(n, k)| (n.as_str(), *k))
    }
}
