//! TOML experiment configuration: which property, which model, which
//! agents, and the sweep/trial protocol.
//!
//! A minimal config looks like:
//!
//! ```toml
//! [experiment]
//! t_end = 60.0
//! dt = [1.0, 5.0, 10.0]
//! episode_budget = 200
//! trials = 20
//! master_seed = 7
//!
//! [model]
//! kind = "surrogate-at"
//!
//! [property]
//! preset = "phi7"
//!
//! [[agents]]
//! kind = "q"
//!
//! [[agents]]
//! kind = "random"
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::AgentConfig;
use crate::stl::SignalKind;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config does not parse: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Complete experiment description, typically loaded from a TOML file.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub model: ModelSection,
    pub property: PropertySection,
    #[serde(default)]
    pub agents: Vec<AgentEntry>,
}

/// The `[experiment]` table: protocol parameters shared by every cell.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    /// Episode length in seconds.
    pub t_end: f64,
    /// Sample periods to sweep; each (agent, dt) pair is one cell.
    pub dt: Vec<f64>,
    /// Maximum episodes per falsification trial.
    pub episode_budget: usize,
    /// Independent trials per cell.
    pub trials: usize,
    /// Root of the per-trial seed derivation.
    #[serde(default)]
    pub master_seed: u64,
    /// Agent labels whose best cell is significance-tested against the
    /// best remaining (baseline) cell.
    #[serde(default = "default_ours")]
    pub ours: Vec<String>,
    /// Margin a true boolean signal counts as, in robustness units.
    #[serde(default = "default_kappa")]
    pub kappa: f64,
}

fn default_ours() -> Vec<String> {
    vec!["q".to_string()]
}

fn default_kappa() -> f64 {
    crate::robustness::DEFAULT_KAPPA
}

/// The `[model]` table.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSection {
    /// Bundled automatic-transmission drivetrain.
    SurrogateAt,
    /// Pass-through model: outputs echo the clamped inputs.
    Echo { inputs: Vec<ChannelSpec> },
    /// Child-process simulator speaking the newline-JSON protocol.
    External { command: String, inputs: Vec<ChannelSpec>, outputs: Vec<OutputSpec> },
}

/// One input channel: name and actuation box.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
}

/// One output signal of an external model.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub name: String,
    pub kind: SignalKind,
}

/// The `[property]` table: exactly one source must be given.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PropertySection {
    /// Name of a bundled preset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    /// Path to a property file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    /// Inline property text (schema header plus formula).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

impl PropertySection {
    /// A short label for report rows: the preset name, the file stem, or
    /// `custom` for inline text.
    pub fn label(&self) -> String {
        if let Some(p) = &self.preset {
            return p.clone();
        }
        if let Some(f) = &self.file {
            let base = f.rsplit(['/', '\\']).next().unwrap_or(f);
            return base.strip_suffix(".stl").unwrap_or(base).to_string();
        }
        "custom".to_string()
    }
}

/// One `[[agents]]` entry: an agent configuration plus an optional label
/// overriding the kind name (needed when the same kind appears twice).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct AgentEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(flatten)]
    pub agent: AgentConfig,
}

impl AgentEntry {
    pub fn label(&self) -> &str {
        self.name.as_deref().unwrap_or_else(|| self.agent.kind_name())
    }
}

impl ExperimentConfig {
    /// Parses and validates a TOML document.
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |msg: String| Err(ConfigError::Invalid(msg));
        let e = &self.experiment;
        if e.trials < 1 {
            return invalid("trials must be at least 1".into());
        }
        if e.episode_budget < 1 {
            return invalid("episode_budget must be at least 1".into());
        }
        if !(e.t_end.is_finite() && e.t_end > 0.0) {
            return invalid(format!("t_end must be positive and finite, got {}", e.t_end));
        }
        if e.dt.is_empty() {
            return invalid("dt list must not be empty".into());
        }
        for &dt in &e.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return invalid(format!("every dt must be positive and finite, got {dt}"));
            }
        }
        if !(e.kappa.is_finite() && e.kappa > 0.0) {
            return invalid(format!("kappa must be positive and finite, got {}", e.kappa));
        }
        if self.agents.is_empty() {
            return invalid("at least one [[agents]] entry is required".into());
        }
        let mut labels: Vec<&str> = self.agents.iter().map(|a| a.label()).collect();
        labels.sort_unstable();
        for pair in labels.windows(2) {
            if pair[0] == pair[1] {
                return invalid(format!(
                    "duplicate agent label `{}`; give one of them an explicit name",
                    pair[0]
                ));
            }
        }
        let sources = [&self.property.preset, &self.property.file, &self.property.text];
        if sources.iter().filter(|s| s.is_some()).count() != 1 {
            return invalid(
                "property must set exactly one of `preset`, `file`, or `text`".into(),
            );
        }
        match &self.model {
            ModelSection::SurrogateAt => {}
            ModelSection::Echo { inputs } => {
                if inputs.is_empty() {
                    return invalid("echo model needs at least one input channel".into());
                }
            }
            ModelSection::External { command, inputs, outputs } => {
                if command.trim().is_empty() {
                    return invalid("external model needs a non-empty command".into());
                }
                if inputs.is_empty() || outputs.is_empty() {
                    return invalid("external model needs input channels and output signals".into());
                }
            }
        }
        Ok(())
    }
}
