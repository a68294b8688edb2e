//! `falstl` — falsification from the command line.
//!
//! Four subcommands: `falsify` searches one model/property pair for a
//! violating input signal; `bench` runs a full multi-trial experiment
//! from a TOML config; `monitor` streams a recorded trace through the
//! causal monitor; `oracle` scores the same kind of trace with the
//! brute-force evaluator, for cross-checks.
//!
//! Usage errors exit 2 (the argument parser's convention); runtime
//! failures exit 1 with a diagnostic on standard error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use falstl::agents::{episode_steps, AgentConfig, AgentEnv};
use falstl::experiment::{
    preset, preset_names, records_csv, run_experiment_with, summary_csv, Execution,
    ExperimentConfig,
};
use falstl::falsify::{falsify, FalsifyOptions};
use falstl::robustness::{write_robustness_csv, Monitor, Trace, DEFAULT_KAPPA};
use falstl::robustness::{brute_rob_kappa, eval_rob_kappa};
use falstl::stl::{parse_spec_file, LifeLongProperty, SignalSchema, SpecFile};
use falstl::system::{EchoModel, ExternalModel, InputChannel, SurrogateAt, SystemModel};

#[derive(Parser)]
#[command(
    name = "falstl",
    about = "Search for input signals that violate sampled-time temporal properties",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one falsification search and print the result as JSON.
    Falsify(FalsifyArgs),
    /// Run a multi-trial experiment from a TOML config and print the
    /// summary table.
    Bench(BenchArgs),
    /// Stream a recorded trace through the causal monitor; print
    /// `time,rho` per sample.
    Monitor(TraceArgs),
    /// Score a recorded trace with the brute-force evaluator (full
    /// future visibility); print `time,rho` per sample.
    Oracle(TraceArgs),
}

#[derive(Args)]
struct FalsifyArgs {
    /// Property file, or the name of a bundled preset (e.g. `phi7`).
    #[arg(long)]
    spec: String,
    /// Model to drive: `surrogate-at`, `echo`, or `external:<command>`.
    #[arg(long, default_value = "surrogate-at")]
    model: String,
    /// Input channel for `echo`/`external` models, as `name:lo:hi`.
    /// Repeatable, in channel order.
    #[arg(long = "input", value_name = "NAME:LO:HI")]
    inputs: Vec<String>,
    /// Search agent: random, annealing (sa), cross-entropy (ce), or q.
    #[arg(long, default_value = "random")]
    agent: String,
    /// Control period in seconds.
    #[arg(long, default_value_t = 5.0)]
    dt: f64,
    /// Episode length in seconds.
    #[arg(long = "t-end", default_value_t = 100.0)]
    t_end: f64,
    /// Episode budget.
    #[arg(long, default_value_t = 200)]
    episodes: usize,
    /// Agent seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the result JSON here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also dump the final episode's robustness as `time,rho` CSV.
    #[arg(long = "trace-out")]
    trace_out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the config's trials-per-cell count.
    #[arg(long)]
    trials: Option<usize>,
    /// Override the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output format for the summary.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write the summary here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write every raw trial record as CSV.
    #[arg(long)]
    records: Option<PathBuf>,
    /// Worker threads for trials (0 = one per core, 1 = sequential).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args)]
struct TraceArgs {
    /// Property file, or the name of a bundled preset.
    #[arg(long)]
    spec: String,
    /// Recorded trace CSV (`time,<signal>...` matching the property's
    /// header).
    #[arg(long)]
    trace: PathBuf,
    /// Write the robustness CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Falsify(args) => run_falsify(args),
        Command::Bench(args) => run_bench(args),
        Command::Monitor(args) => run_trace(args, Scorer::Causal),
        Command::Oracle(args) => run_trace(args, Scorer::BruteForce),
    }
}

/// Loads a property from a file path, falling back to the bundled
/// presets when no such file exists.
fn load_spec(spec: &str) -> Result<SpecFile> {
    let path = Path::new(spec);
    if path.is_file() {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading property file {}", path.display()))?;
        return parse_spec_file(&text)
            .map_err(|e| anyhow!("property file {} does not parse: {e}", path.display()));
    }
    match preset(spec) {
        Some(Ok(file)) => Ok(file),
        Some(Err(e)) => Err(anyhow!("bundled preset {spec} does not parse: {e}")),
        None => bail!(
            "{spec} is neither a readable file nor a bundled preset (available: {})",
            preset_names().join(", ")
        ),
    }
}

/// Parses one `name:lo:hi` channel description.
fn parse_channel(text: &str) -> Result<InputChannel> {
    let parts: Vec<&str> = text.split(':').collect();
    let [name, lo, hi] = parts.as_slice() else {
        bail!("input channel {text:?} is not of the form name:lo:hi");
    };
    let lo: f64 = lo.parse().with_context(|| format!("channel {name}: bad lower bound"))?;
    let hi: f64 = hi.parse().with_context(|| format!("channel {name}: bad upper bound"))?;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        bail!("channel {name}: bounds [{lo}, {hi}] must be finite and ordered");
    }
    Ok(InputChannel::new(*name, lo, hi))
}

/// Builds the model named on the command line.  `echo` and
/// `external:<command>` take their channels from `--input`;
/// `surrogate-at` has fixed channels and rejects `--input`.
fn build_model(
    model: &str,
    inputs: &[String],
    schema: &SignalSchema,
    dt: f64,
) -> Result<Box<dyn SystemModel>> {
    match model {
        "surrogate-at" => {
            if !inputs.is_empty() {
                bail!("surrogate-at has fixed input channels; --input does not apply");
            }
            Ok(Box::new(SurrogateAt::new()))
        }
        "echo" => {
            let channels = parse_channels(inputs)?;
            Ok(Box::new(EchoModel::new(channels).map_err(|e| anyhow!("echo model: {e}"))?))
        }
        other => {
            let Some(command) = other.strip_prefix("external:") else {
                bail!("unknown model {other}; expected surrogate-at, echo, or external:<command>");
            };
            let channels = parse_channels(inputs)?;
            let model = ExternalModel::connect(command, channels, schema.clone(), dt)
                .map_err(|e| anyhow!("external model: {e}"))?;
            Ok(Box::new(model))
        }
    }
}

fn parse_channels(inputs: &[String]) -> Result<Vec<InputChannel>> {
    if inputs.is_empty() {
        bail!("this model needs at least one --input name:lo:hi channel");
    }
    inputs.iter().map(|text| parse_channel(text)).collect()
}

fn run_falsify(args: FalsifyArgs) -> Result<()> {
    let spec = load_spec(&args.spec)?;
    let mut model = build_model(&args.model, &args.inputs, &spec.schema, args.dt)?;
    if model.output_schema() != &spec.schema {
        let names = |s: &SignalSchema| {
            (0..s.len()).map(|i| s.name(i).to_string()).collect::<Vec<_>>().join(", ")
        };
        bail!(
            "property signals ({}) do not match the model's outputs ({})",
            names(&spec.schema),
            names(model.output_schema())
        );
    }
    let agent_cfg = AgentConfig::from_name(&args.agent)
        .ok_or_else(|| anyhow!("unknown agent {}; expected random, annealing, cross-entropy, or q", args.agent))?;
    let property = LifeLongProperty::from_formula(spec.formula);
    let env = AgentEnv::new(
        model.input_channels().to_vec(),
        spec.schema.clone(),
        episode_steps(args.dt, args.t_end),
        args.episodes,
    );
    let mut agent = agent_cfg.build(&env, args.seed);
    let opts = FalsifyOptions::new(args.dt, args.t_end, args.episodes).with_seed(args.seed);
    let result = falsify(model.as_mut(), agent.as_mut(), &property, &opts)
        .map_err(|e| anyhow!("search failed: {e}"))?;

    if let Some(path) = &args.trace_out {
        let record = result.episodes.last().expect("a run has at least one episode");
        let rows = std::iter::once((record.trace.time(0), record.initial_rho)).chain(
            record.robustness.iter().enumerate().map(|(k, &rho)| (record.trace.time(k + 1), rho)),
        );
        let mut file = fs::File::create(path)
            .with_context(|| format!("creating {}", path.display()))?;
        write_robustness_csv(&mut file, rows)?;
    }

    let json = serde_json::to_string_pretty(&result.to_json())?;
    emit(args.out.as_deref(), &json)
}

fn run_bench(args: BenchArgs) -> Result<()> {
    let text = fs::read_to_string(&args.config)
        .with_context(|| format!("reading config {}", args.config.display()))?;
    let mut cfg = ExperimentConfig::from_toml_str(&text)
        .map_err(|e| anyhow!("config {}: {e}", args.config.display()))?;
    if let Some(trials) = args.trials {
        cfg.experiment.trials = trials;
    }
    if let Some(seed) = args.seed {
        cfg.experiment.master_seed = seed;
    }

    let outcome = match args.jobs {
        1 => run_experiment_with(&cfg, Execution::Sequential),
        0 => run_experiment_with(&cfg, Execution::Parallel),
        n => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("building worker pool")?
            .install(|| run_experiment_with(&cfg, Execution::Parallel)),
    }
    .map_err(|e| anyhow!("experiment failed: {e}"))?;

    if let Some(path) = &args.records {
        fs::write(path, records_csv(&outcome))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let rendered = match args.format {
        Format::Csv => summary_csv(&outcome),
        Format::Json => serde_json::to_string_pretty(&outcome)?,
    };
    emit(args.out.as_deref(), &rendered)
}

/// Which evaluator scores the trace.
enum Scorer {
    /// The streaming monitor: each instant sees only its prefix.
    Causal,
    /// The offline brute-force evaluator over the full trace.
    BruteForce,
}

fn run_trace(args: TraceArgs, scorer: Scorer) -> Result<()> {
    let spec = load_spec(&args.spec)?;
    let text = fs::read_to_string(&args.trace)
        .with_context(|| format!("reading trace {}", args.trace.display()))?;
    let trace = Trace::parse_csv(&text, &spec.schema)
        .map_err(|e| anyhow!("trace {}: {e}", args.trace.display()))?;
    if trace.len() < 2 {
        bail!("trace needs at least two samples to fix the sample period");
    }
    let dt = trace.time(1) - trace.time(0);
    let property = LifeLongProperty::from_formula(spec.formula);

    let mut rows: Vec<(f64, f64)> = Vec::with_capacity(trace.len());
    let mut skipped = 0usize;
    match scorer {
        Scorer::Causal => {
            let past = property
                .to_past_dependent(dt)
                .map_err(|e| anyhow!("property cannot be monitored at dt = {dt}: {e}"))?;
            let mut monitor =
                Monitor::with_kappa(past.body().clone(), spec.schema.clone(), dt, DEFAULT_KAPPA)
                    .map_err(|e| anyhow!("property cannot be monitored at dt = {dt}: {e}"))?;
            for n in 0..trace.len() {
                match monitor.push(trace.time(n), trace.state(n)) {
                    Ok(rho) => rows.push((trace.time(n), rho)),
                    Err(_) => skipped += 1,
                }
            }
        }
        Scorer::BruteForce => {
            for n in 0..trace.len() {
                let t = trace.time(n);
                match brute_rob_kappa(property.body(), &trace, n, DEFAULT_KAPPA) {
                    Ok(rho) => {
                        // The recursive evaluator must agree wherever the
                        // brute-force one scored; disagreement means the
                        // trace tripped a defect worth reporting loudly.
                        let fast = eval_rob_kappa(property.body(), &trace, n, DEFAULT_KAPPA)
                            .map_err(|e| {
                                anyhow!("evaluators disagree at t = {t}: recursive refused ({e})")
                            })?;
                        if fast != rho && !(fast.is_nan() && rho.is_nan()) {
                            bail!(
                                "evaluators disagree at t = {t}: recursive {fast}, brute-force {rho}"
                            );
                        }
                        rows.push((t, rho));
                    }
                    Err(_) => skipped += 1,
                }
            }
        }
    }
    if skipped > 0 {
        eprintln!(
            "note: {skipped} of {} instants were not evaluable (window demands samples beyond the trace)",
            trace.len()
        );
    }

    let mut out = Vec::new();
    write_robustness_csv(&mut out, rows)?;
    emit(args.out.as_deref(), std::str::from_utf8(&out)?)
}

/// Prints to standard output, or writes the file named by `--out`.
fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            let write = lock.write_all(text.as_bytes()).and_then(|()| {
                if text.ends_with('\n') {
                    Ok(())
                } else {
                    writeln!(lock)
                }
            });
            if let Err(e) = write {
                // A reader that hangs up early (e.g. `| head`) is not a
                // failure of ours.
                if e.kind() == std::io::ErrorKind::BrokenPipe {
                    return Ok(());
                }
                return Err(e.into());
            }
        }
    }
    Ok(())
}
