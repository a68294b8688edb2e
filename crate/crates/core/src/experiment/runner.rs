//! Multi-trial experiment execution: a (agent × sample-period) grid of
//! independent falsification trials, aggregated into per-agent summary
//! rows with significance tests between the designated method group and
//! the best baseline.
//!
//! Trials are independent work units keyed by `(agent, dt, trial)`;
//! with the `parallel` feature they run on the rayon pool, and the
//! aggregation is identical either way because results are collected in
//! unit order, not completion order.

use std::time::Instant;

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use thiserror::Error;

use crate::agents::{episode_steps, AgentEnv};
use crate::experiment::config::{ExperimentConfig, ModelSection, PropertySection};
use crate::experiment::presets;
use crate::experiment::stats::{fisher_exact, mann_whitney_u};
use crate::falsify::{falsify, FalsifyOptions};
use crate::stl::{parse_spec_file, LifeLongProperty, SignalSchema, SpecFile};
use crate::system::{EchoModel, ExternalModel, InputChannel, SurrogateAt, SystemModel};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] crate::experiment::config::ConfigError),
    #[error("no preset named `{0}`; available: {1}")]
    PresetNotFound(String, String),
    #[error("cannot read property file `{path}`: {source}")]
    PropertyIo {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("property does not parse: {0}")]
    PropertyParse(#[from] crate::stl::ParseError),
    #[error("property schema does not match the model outputs: {0}")]
    SchemaMismatch(String),
    #[error("property windows are unbounded: {0}")]
    Reach(#[from] crate::stl::ReachError),
}

/// One falsification trial's outcome.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TrialRecord {
    pub agent: String,
    pub dt: f64,
    /// Trial index within its cell, 0-based.
    pub trial: usize,
    /// Seed the trial's agent was built from.
    pub seed: u64,
    pub falsified: bool,
    /// Episodes charged to the trial: the episodes actually used on
    /// success, the full budget otherwise (failures cost the maximum).
    pub episodes: usize,
    /// Lowest robustness seen across the trial's episodes.
    pub min_rho: f64,
    pub wall_ms: u128,
    /// Present when the trial aborted instead of finishing; such trials
    /// count as failures at full budget.
    pub error: Option<String>,
}

/// Aggregate over one (agent, dt) cell.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CellSummary {
    pub agent: String,
    pub dt: f64,
    pub trials: usize,
    pub successes: usize,
    /// Per-trial charged episode counts, in trial order.
    pub episode_counts: Vec<usize>,
    pub success_rate: f64,
    pub median_episodes: f64,
}

/// One summary line: an agent at its best sample period.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SummaryRow {
    pub property: String,
    pub agent: String,
    pub dt: f64,
    pub success_rate: f64,
    pub median_episodes: f64,
    /// Success-count significance vs the best baseline (only on the
    /// method group's best row).
    pub p_fisher: Option<f64>,
    /// Episode-count significance vs the best baseline (ditto).
    pub p_mwu: Option<f64>,
    /// Compact rendering of the significant results, e.g.
    /// `success:*;episodes:**` (`*` p < 0.05, `**` p < 0.001).
    pub marks: String,
}

/// Everything an experiment produces.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ExperimentOutcome {
    pub property: String,
    /// One row per agent, in configuration order.
    pub rows: Vec<SummaryRow>,
    /// Every cell, agent-major, sample periods in configuration order.
    pub cells: Vec<CellSummary>,
    /// Every trial, in (agent, dt, trial) order.
    pub records: Vec<TrialRecord>,
}

/// How trials are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        {
            Execution::Parallel
        }
        #[cfg(not(feature = "parallel"))]
        {
            Execution::Sequential
        }
    }
}

/// Runs the full experiment grid with the default scheduling.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome, ExperimentError> {
    run_experiment_with(cfg, Execution::default())
}

/// Runs the full experiment grid with explicit scheduling.
pub fn run_experiment_with(
    cfg: &ExperimentConfig,
    exec: Execution,
) -> Result<ExperimentOutcome, ExperimentError> {
    cfg.validate()?;
    let spec = resolve_property(&cfg.property)?;
    let (channels, schema) = model_interface(&cfg.model);
    if spec.schema != schema {
        return Err(ExperimentError::SchemaMismatch(format!(
            "property declares [{}], model produces [{}]",
            describe_schema(&spec.schema),
            describe_schema(&schema)
        )));
    }
    let property = LifeLongProperty::from_formula(spec.formula);
    // Fail fast on unbounded windows before spending any simulation time;
    // the finest sweep period is the binding one.
    for &dt in &cfg.experiment.dt {
        property.check_finite_reaches(dt)?;
    }

    let trials = cfg.experiment.trials;
    let n_dt = cfg.experiment.dt.len();
    let units: Vec<(usize, usize, usize)> = (0..cfg.agents.len())
        .flat_map(|a| (0..n_dt).flat_map(move |d| (0..trials).map(move |t| (a, d, t))))
        .collect();

    let run_one = |&(a, d, t): &(usize, usize, usize)| -> TrialRecord {
        run_trial(cfg, &property, &channels, &schema, a, d, t)
    };
    let records: Vec<TrialRecord> = match exec {
        Execution::Sequential => units.iter().map(run_one).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => units.par_iter().map(run_one).collect(),
    };

    Ok(aggregate(cfg, records))
}

/// Per-trial seed: a few mixing rounds over the master seed and the
/// unit's grid coordinates, so every trial draws from its own stream and
/// the whole grid is reproducible from one number.
pub fn trial_seed(master: u64, agent_idx: usize, dt_idx: usize, trial_idx: usize) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    let mut s = mix(master ^ 0x9E37_79B9_7F4A_7C15);
    s = mix(s ^ (agent_idx as u64).wrapping_mul(0xA24B_AED4_963E_E407));
    s = mix(s ^ (dt_idx as u64).wrapping_mul(0x9FB2_1C65_1E98_DF25));
    s = mix(s ^ (trial_idx as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93));
    s
}

/// Loads the property from whichever source the config names.
pub fn resolve_property(section: &PropertySection) -> Result<SpecFile, ExperimentError> {
    if let Some(name) = &section.preset {
        let text = presets::preset_source(name).ok_or_else(|| {
            ExperimentError::PresetNotFound(name.clone(), presets::preset_names().join(", "))
        })?;
        return Ok(parse_spec_file(text)?);
    }
    if let Some(path) = &section.file {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ExperimentError::PropertyIo { path: path.clone(), source })?;
        return Ok(parse_spec_file(&text)?);
    }
    let text = section.text.as_deref().unwrap_or_default();
    Ok(parse_spec_file(text)?)
}

/// Input channels and output schema of the configured model, without
/// spawning anything.
fn model_interface(model: &ModelSection) -> (Vec<InputChannel>, SignalSchema) {
    match model {
        ModelSection::SurrogateAt => {
            let probe = SurrogateAt::new();
            (probe.input_channels().to_vec(), probe.output_schema().clone())
        }
        ModelSection::Echo { inputs } => {
            let channels: Vec<InputChannel> =
                inputs.iter().map(|c| InputChannel::new(c.name.clone(), c.lo, c.hi)).collect();
            let probe = EchoModel::new(channels.clone()).expect("validated channel names");
            (channels, probe.output_schema().clone())
        }
        ModelSection::External { inputs, outputs, .. } => {
            let channels =
                inputs.iter().map(|c| InputChannel::new(c.name.clone(), c.lo, c.hi)).collect();
            let schema = SignalSchema::new(
                outputs.iter().map(|o| (o.name.clone(), o.kind)).collect(),
            )
            .expect("validated output names");
            (channels, schema)
        }
    }
}

fn describe_schema(schema: &SignalSchema) -> String {
    schema
        .iter()
        .map(|(name, kind)| format!("{name}:{kind:?}"))
        .collect::<Vec<_>>()
        .join(", ")
        .to_lowercase()
}

fn build_model(model: &ModelSection, dt: f64) -> Result<Box<dyn SystemModel>, String> {
    match model {
        ModelSection::SurrogateAt => Ok(Box::new(SurrogateAt::new())),
        ModelSection::Echo { inputs } => {
            let channels =
                inputs.iter().map(|c| InputChannel::new(c.name.clone(), c.lo, c.hi)).collect();
            EchoModel::new(channels).map(|m| Box::new(m) as Box<dyn SystemModel>).map_err(|e| e.to_string())
        }
        ModelSection::External { command, inputs, outputs } => {
            let channels =
                inputs.iter().map(|c| InputChannel::new(c.name.clone(), c.lo, c.hi)).collect();
            let schema =
                SignalSchema::new(outputs.iter().map(|o| (o.name.clone(), o.kind)).collect())
                    .map_err(|e| e.to_string())?;
            ExternalModel::connect(command, channels, schema, dt)
                .map(|m| Box::new(m) as Box<dyn SystemModel>)
                .map_err(|e| e.to_string())
        }
    }
}

fn run_trial(
    cfg: &ExperimentConfig,
    property: &LifeLongProperty,
    channels: &[InputChannel],
    schema: &SignalSchema,
    agent_idx: usize,
    dt_idx: usize,
    trial_idx: usize,
) -> TrialRecord {
    let e = &cfg.experiment;
    let entry = &cfg.agents[agent_idx];
    let dt = e.dt[dt_idx];
    let seed = trial_seed(e.master_seed, agent_idx, dt_idx, trial_idx);
    let budget = e.episode_budget;
    let mut record = TrialRecord {
        agent: entry.label().to_string(),
        dt,
        trial: trial_idx,
        seed,
        falsified: false,
        episodes: budget,
        min_rho: f64::INFINITY,
        wall_ms: 0,
        error: None,
    };

    let started = Instant::now();
    let mut model = match build_model(&cfg.model, dt) {
        Ok(m) => m,
        Err(msg) => {
            record.error = Some(format!("model construction failed: {msg}"));
            record.wall_ms = started.elapsed().as_millis();
            return record;
        }
    };
    let env = AgentEnv::new(
        channels.to_vec(),
        schema.clone(),
        episode_steps(dt, e.t_end),
        budget,
    );
    let mut agent = entry.agent.build(&env, seed);
    let mut opts = FalsifyOptions::new(dt, e.t_end, budget).with_seed(seed);
    opts.kappa = e.kappa;

    match falsify(model.as_mut(), agent.as_mut(), property, &opts) {
        Ok(result) => {
            record.falsified = result.falsified();
            record.episodes = if record.falsified { result.episodes.len() } else { budget };
            record.min_rho = result
                .episodes
                .iter()
                .map(|ep| ep.min_rho)
                .fold(f64::INFINITY, f64::min);
        }
        Err(err) => record.error = Some(err.to_string()),
    }
    record.wall_ms = started.elapsed().as_millis();
    record
}

/// Median of charged episode counts: mean of the two middle order
/// statistics for even sizes, the middle one for odd.  Callers charge a
/// failed trial the full episode budget before taking the median, so an
/// unfinished search weighs in at its cap rather than dropping out.
pub fn median_episodes(counts: &[usize]) -> f64 {
    assert!(!counts.is_empty());
    let mut sorted = counts.to_vec();
    sorted.sort_unstable();
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2] as f64
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) as f64 / 2.0
    }
}

fn summarize_cell(agent: &str, dt: f64, trials: &[TrialRecord]) -> CellSummary {
    let successes = trials.iter().filter(|r| r.falsified).count();
    let episode_counts: Vec<usize> = trials.iter().map(|r| r.episodes).collect();
    CellSummary {
        agent: agent.to_string(),
        dt,
        trials: trials.len(),
        successes,
        success_rate: successes as f64 / trials.len() as f64,
        median_episodes: median_episodes(&episode_counts),
    episode_counts,
    }
}

/// Cell preference order: more successes, then lower median, then the
/// smaller sample period.
fn better_cell(a: &CellSummary, b: &CellSummary) -> bool {
    if a.successes != b.successes {
        return a.successes > b.successes;
    }
    if a.median_episodes != b.median_episodes {
        return a.median_episodes < b.median_episodes;
    }
    a.dt < b.dt
}

fn aggregate(cfg: &ExperimentConfig, records: Vec<TrialRecord>) -> ExperimentOutcome {
    let e = &cfg.experiment;
    let trials = e.trials;
    let n_dt = e.dt.len();
    let property = cfg.property.label();

    let mut cells: Vec<CellSummary> = Vec::with_capacity(cfg.agents.len() * n_dt);
    for (a, entry) in cfg.agents.iter().enumerate() {
        for (d, &dt) in e.dt.iter().enumerate() {
            let start = (a * n_dt + d) * trials;
            cells.push(summarize_cell(entry.label(), dt, &records[start..start + trials]));
        }
    }

    // Each agent's best cell, in agent order.
    let best: Vec<&CellSummary> = (0..cfg.agents.len())
        .map(|a| {
            let mine = &cells[a * n_dt..(a + 1) * n_dt];
            mine.iter().reduce(|keep, c| if better_cell(c, keep) { c } else { keep }).unwrap()
        })
        .collect();

    // Significance: the method group's best cell against the best
    // baseline cell, computed on the already-selected cells.
    let is_ours = |idx: usize| e.ours.iter().any(|n| n == cfg.agents[idx].label());
    let best_of = |group: &[usize]| -> Option<usize> {
        group
            .iter()
            .copied()
            .reduce(|keep, i| if better_cell(best[i], best[keep]) { i } else { keep })
    };
    let ours_idx: Vec<usize> = (0..cfg.agents.len()).filter(|&i| is_ours(i)).collect();
    let base_idx: Vec<usize> = (0..cfg.agents.len()).filter(|&i| !is_ours(i)).collect();
    let comparison = match (best_of(&ours_idx), best_of(&base_idx)) {
        (Some(o), Some(b)) => {
            let co = best[o];
            let cb = best[b];
            let p_fisher = fisher_exact([
                [co.successes as u64, (co.trials - co.successes) as u64],
                [cb.successes as u64, (cb.trials - cb.successes) as u64],
            ]);
            let ours_counts: Vec<f64> = co.episode_counts.iter().map(|&c| c as f64).collect();
            let base_counts: Vec<f64> = cb.episode_counts.iter().map(|&c| c as f64).collect();
            let (_, p_mwu) = mann_whitney_u(&ours_counts, &base_counts);
            Some((o, p_fisher, p_mwu))
        }
        _ => None,
    };

    let rows = (0..cfg.agents.len())
        .map(|a| {
            let cell = best[a];
            let (p_fisher, p_mwu, marks) = match comparison {
                Some((winner, pf, pm)) if winner == a => {
                    (Some(pf), Some(pm), render_marks(pf, pm))
                }
                _ => (None, None, String::new()),
            };
            SummaryRow {
                property: property.clone(),
                agent: cell.agent.clone(),
                dt: cell.dt,
                success_rate: cell.success_rate,
                median_episodes: cell.median_episodes,
                p_fisher,
                p_mwu,
                marks,
            }
        })
        .collect();

    ExperimentOutcome { property, rows, cells, records }
}

fn render_marks(p_fisher: f64, p_mwu: f64) -> String {
    fn stars(p: f64) -> Option<&'static str> {
        if p < 0.001 {
            Some("**")
        } else if p < 0.05 {
            Some("*")
        } else {
            None
        }
    }
    let mut parts = Vec::new();
    if let Some(s) = stars(p_fisher) {
        parts.push(format!("success:{s}"));
    }
    if let Some(s) = stars(p_mwu) {
        parts.push(format!("episodes:{s}"));
    }
    parts.join(";")
}

/// Summary table as CSV.  Deliberately excludes wall-clock columns so a
/// rerun with the same config and master seed is byte-identical.
pub fn summary_csv(outcome: &ExperimentOutcome) -> String {
    let mut out = String::from("property,agent,dt,success_rate,median_episodes,p_fisher,p_mwu,marks\n");
    for row in &outcome.rows {
        let p_f = row.p_fisher.map(|p| p.to_string()).unwrap_or_default();
        let p_m = row.p_mwu.map(|p| p.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            csv_field(&row.property),
            csv_field(&row.agent),
            row.dt,
            row.success_rate,
            row.median_episodes,
            p_f,
            p_m,
            csv_field(&row.marks),
        ));
    }
    out
}

/// Raw per-trial records as CSV (includes wall-clock, so not expected to
/// be identical across reruns).
pub fn records_csv(outcome: &ExperimentOutcome) -> String {
    let mut out =
        String::from("property,agent,dt,trial,seed,falsified,episodes,min_rho,wall_ms,error\n");
    for r in &outcome.records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            csv_field(&outcome.property),
            csv_field(&r.agent),
            r.dt,
            r.trial,
            r.seed,
            r.falsified,
            r.episodes,
            float_field(r.min_rho),
            r.wall_ms,
            csv_field(r.error.as_deref().unwrap_or_default()),
        ));
    }
    out
}

fn float_field(x: f64) -> String {
    if x.is_finite() {
        x.to_string()
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::config::ExperimentConfig;

    /// Echo-model config over one channel; property text injected per test.
    fn echo_config(property_text: &str, trials: usize, budget: usize) -> ExperimentConfig {
        let toml = format!(
            r#"
[experiment]
t_end = 3.0
dt = [1.0]
episode_budget = {budget}
trials = {trials}
master_seed = 11

[model]
kind = "echo"
inputs = [{{name = "u", lo = 0.0, hi = 1.0}}]

[property]
text = """
{property_text}
"""

[[agents]]
kind = "random"
"#
        );
        ExperimentConfig::from_toml_str(&toml).unwrap()
    }

    #[test]
    fn trivially_violated_property_costs_one_episode() {
        let cfg = echo_config("real u\nG (u <= -1)", 5, 10);
        let out = run_experiment_with(&cfg, Execution::Sequential).unwrap();
        assert_eq!(out.rows.len(), 1);
        assert_eq!(out.rows[0].success_rate, 1.0);
        assert_eq!(out.rows[0].median_episodes, 1.0);
        assert!(out.records.iter().all(|r| r.falsified && r.episodes == 1));
    }

    #[test]
    fn unfalsifiable_property_charges_the_full_budget() {
        let cfg = echo_config("real u\nG (u >= -0.5)", 5, 10);
        let out = run_experiment_with(&cfg, Execution::Sequential).unwrap();
        assert_eq!(out.rows[0].success_rate, 0.0);
        assert_eq!(out.rows[0].median_episodes, 10.0);
        assert!(out.records.iter().all(|r| !r.falsified && r.episodes == 10));
    }

    #[test]
    fn same_master_seed_reproduces_the_summary_byte_for_byte() {
        let cfg = echo_config("real u\nG (u <= 0.97)", 4, 6);
        let a = run_experiment_with(&cfg, Execution::Sequential).unwrap();
        let b = run_experiment_with(&cfg, Execution::Sequential).unwrap();
        assert_eq!(summary_csv(&a), summary_csv(&b));
        // Records agree on everything but wall clock.
        let strip = |o: &ExperimentOutcome| {
            let mut rs = o.records.clone();
            for r in &mut rs {
                r.wall_ms = 0;
            }
            rs
        };
        assert_eq!(strip(&a), strip(&b));
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn parallel_and_sequential_runs_agree() {
        let cfg = echo_config("real u\nG (u <= 0.9)", 6, 8);
        let seq = run_experiment_with(&cfg, Execution::Sequential).unwrap();
        let par = run_experiment_with(&cfg, Execution::Parallel).unwrap();
        assert_eq!(summary_csv(&seq), summary_csv(&par));
        assert_eq!(seq.rows, par.rows);
    }

    #[test]
    fn median_uses_the_capped_counts() {
        assert_eq!(median_episodes(&[1, 1, 1, 1, 1]), 1.0);
        // One failure capped at 10 in an otherwise all-success cell of
        // five: sorted counts 1,1,1,1,10 → median still 1.
        assert_eq!(median_episodes(&[1, 1, 1, 10, 1]), 1.0);
        // Even size: mean of the middle two.
        assert_eq!(median_episodes(&[1, 2, 10, 10]), 6.0);
        assert_eq!(median_episodes(&[3]), 3.0);
    }

    #[test]
    fn best_cell_prefers_successes_then_median_then_smaller_dt() {
        let cell = |dt: f64, successes: usize, median: f64| CellSummary {
            agent: "x".into(),
            dt,
            trials: 10,
            successes,
            episode_counts: vec![],
            success_rate: successes as f64 / 10.0,
            median_episodes: median,
        };
        // More successes beat a lower median.
        assert!(better_cell(&cell(5.0, 9, 50.0), &cell(1.0, 8, 10.0)));
        // Equal successes: lower median wins.
        assert!(better_cell(&cell(10.0, 9, 20.0), &cell(1.0, 9, 30.0)));
        // Full tie: smaller dt wins.
        assert!(better_cell(&cell(1.0, 9, 20.0), &cell(5.0, 9, 20.0)));
    }

    #[test]
    fn seeds_differ_across_the_grid_and_reproduce() {
        let mut seen = std::collections::HashSet::new();
        for a in 0..3 {
            for d in 0..3 {
                for t in 0..10 {
                    assert!(seen.insert(trial_seed(42, a, d, t)), "collision at {a},{d},{t}");
                }
            }
        }
        assert_eq!(trial_seed(42, 1, 2, 3), trial_seed(42, 1, 2, 3));
        assert_ne!(trial_seed(42, 0, 0, 0), trial_seed(43, 0, 0, 0));
    }

    #[test]
    fn marks_render_only_significant_results() {
        assert_eq!(render_marks(0.5, 0.5), "");
        assert_eq!(render_marks(0.04, 0.5), "success:*");
        assert_eq!(render_marks(0.0005, 0.04), "success:**;episodes:*");
        assert_eq!(render_marks(0.06, 0.0001), "episodes:**");
    }

    #[test]
    fn csv_fields_escape_commas_and_quotes() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
        assert_eq!(float_field(f64::INFINITY), "inf");
        assert_eq!(float_field(f64::NEG_INFINITY), "-inf");
        assert_eq!(float_field(1.5), "1.5");
    }

    #[test]
    fn significance_lands_on_the_method_groups_best_row() {
        // Two agents on a property random falsifies instantly; mark the
        // baseline as "ours" to check group routing rather than skill.
        let toml = r#"
[experiment]
t_end = 3.0
dt = [1.0]
episode_budget = 4
trials = 3
master_seed = 5
ours = ["random"]

[model]
kind = "echo"
inputs = [{name = "u", lo = 0.0, hi = 1.0}]

[property]
text = """
real u
G (u <= -1)
"""

[[agents]]
kind = "random"

[[agents]]
kind = "annealing"
"#;
        let cfg = ExperimentConfig::from_toml_str(toml).unwrap();
        let out = run_experiment_with(&cfg, Execution::Sequential).unwrap();
        // Both succeed instantly; p-values exist only on the random row.
        let random_row = out.rows.iter().find(|r| r.agent == "random").unwrap();
        let annealing_row = out.rows.iter().find(|r| r.agent == "annealing").unwrap();
        assert!(random_row.p_fisher.is_some() && random_row.p_mwu.is_some());
        assert!(annealing_row.p_fisher.is_none() && annealing_row.p_mwu.is_none());
        // Identical perfect cells: nothing is significant.
        assert_eq!(random_row.marks, "");
        assert_eq!(random_row.p_fisher, Some(1.0));
    }
}
