//! Command-line driver: reads inputs, runs the selected stages and renders
//! the reports. All file access happens here.

use crate::conformance::{verify_sources, verify_subsystems, verify_system, MatchPolicy};
use crate::finding::{Severity, Stage, VerificationReport};
use crate::model::{parse_model, validate_model, ElementPath, SystemModel};
use crate::par::Execution;
use crate::report::{self, ColorChoice, Section};
use crate::scenario::{annotate_activities, match_plans, PlanRegistry, ScenarioResult};
use crate::snapshot::{
    parse_runtime_snapshot, parse_source_snapshot, parse_trace, EventTrace, RuntimeSnapshot, SourceSnapshot,
};
use crate::traceability::{build_matrix, TraceabilityMatrix};
use clap::{Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FINDINGS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Check the design model for internal consistency.
    CheckModel,
    /// Compare the realised system with the design.
    Verify,
    /// Match an event trace against validation plans.
    Validate,
    /// Print the requirement traceability matrix.
    Matrix,
    /// Run every stage and print reports and matrix.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StageSelector {
    Model,
    Ssrve,
    Srve,
    Sources,
    Trace,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "meros-verify", version, about = "Verify a ROS 2 system against its design model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Design model (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    model: Option<PathBuf>,
    /// Runtime computation-graph snapshot (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    snapshot: Option<PathBuf>,
    /// Source-tree snapshot (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    sources: Option<PathBuf>,
    /// Event trace (JSON lines).
    #[arg(long, global = true, value_name = "PATH")]
    trace: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "all")]
    stage: StageSelector,
    /// Element path of the subsystem to verify at ssrve.
    #[arg(long, global = true, value_name = "PATH-STRING")]
    scope: Option<String>,
    /// Validation plan id; defaults to every top-level plan.
    #[arg(long, global = true, value_name = "ID")]
    plan: Option<String>,
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Channel or node name pattern to leave out of comparisons.
    #[arg(long = "ignore", global = true, value_name = "PATTERN")]
    ignore: Vec<String>,
    #[arg(long, global = true, env = "MEROS_VERIFY_COLOR", default_value = "auto", hide = true)]
    color: ColorChoice,
}

/// Everything one invocation needs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub command: Command,
    pub model_path: PathBuf,
    pub snapshot_path: Option<PathBuf>,
    pub source_snapshot_path: Option<PathBuf>,
    pub trace_path: Option<PathBuf>,
    pub stage: StageSelector,
    pub scope: Option<String>,
    pub plan: Option<String>,
    pub ignore: Vec<String>,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub color: ColorChoice,
}

impl RunConfig {
    pub fn new(command: Command, model_path: impl Into<PathBuf>) -> Self {
        RunConfig {
            command,
            model_path: model_path.into(),
            snapshot_path: None,
            source_snapshot_path: None,
            trace_path: None,
            stage: StageSelector::All,
            scope: None,
            plan: None,
            ignore: Vec::new(),
            format: Format::Text,
            out: None,
            color: ColorChoice::Never,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
}

/// Rendered output and the exit code it implies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub output: String,
    pub exit_code: i32,
}

/// Exit code for a set of findings: 1 when any has error severity.
pub fn exit_code(reports: &[VerificationReport]) -> i32 {
    match reports.iter().filter_map(VerificationReport::max_severity).max() {
        Some(Severity::Error) => EXIT_FINDINGS,
        _ => EXIT_PASS,
    }
}

struct Inputs {
    model: SystemModel,
    snapshot: Option<RuntimeSnapshot>,
    sources: Option<SourceSnapshot>,
    trace: Option<EventTrace>,
    policy: MatchPolicy,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn parse_error(path: &Path, err: impl std::fmt::Display) -> CliError {
    CliError::Parse { path: path.display().to_string(), message: err.to_string() }
}

fn load(config: &RunConfig) -> Result<Inputs, CliError> {
    let model = parse_model(&read(&config.model_path)?).map_err(|e| parse_error(&config.model_path, e))?;
    let snapshot = match &config.snapshot_path {
        Some(p) => Some(parse_runtime_snapshot(&read(p)?).map_err(|e| parse_error(p, e))?),
        None => None,
    };
    let sources = match &config.source_snapshot_path {
        Some(p) => Some(parse_source_snapshot(&read(p)?).map_err(|e| parse_error(p, e))?),
        None => None,
    };
    let trace = match &config.trace_path {
        Some(p) => Some(parse_trace(&read(p)?).map_err(|e| parse_error(p, e))?),
        None => None,
    };
    let mut policy = MatchPolicy::for_model(&model).map_err(|e| parse_error(&config.model_path, e))?;
    let patterns = config.ignore.iter().map(String::as_str);
    policy
        .extend_channels(patterns.clone())
        .and_then(|_| policy.extend_nodes(patterns))
        .map_err(|e| CliError::Usage(format!("--ignore: {e}")))?;
    Ok(Inputs { model, snapshot, sources, trace, policy })
}

fn require<'a, T>(value: &'a Option<T>, flag: &str, stage: &str) -> Result<&'a T, CliError> {
    value.as_ref().ok_or_else(|| CliError::Usage(format!("stage {stage} needs {flag}")))
}

fn ssrve_scopes(config: &RunConfig, model: &SystemModel) -> Result<Vec<ElementPath>, CliError> {
    match &config.scope {
        Some(scope) => {
            let path = scope.parse().map_err(|e| CliError::Usage(format!("--scope: {e}")))?;
            Ok(vec![path])
        }
        None => Ok(model.systems.iter().map(|s| ElementPath::root().child(&s.name)).collect()),
    }
}

fn run_scenarios(
    config: &RunConfig,
    model: &SystemModel,
    trace: &EventTrace,
) -> Result<Vec<ScenarioResult>, CliError> {
    let registry = PlanRegistry::new(&model.plans).map_err(|e| parse_error(&config.model_path, e))?;
    let plans = match &config.plan {
        Some(id) => vec![registry.get(id).ok_or_else(|| CliError::Usage(format!("--plan: no plan `{id}` in model")))?],
        None => registry.roots(),
    };
    match_plans(&plans, trace, &registry).map_err(|e| parse_error(&config.model_path, e))
}

fn scenario_section(result: &ScenarioResult) -> Section {
    let report = VerificationReport::new(Stage::Trace, result.scope.clone(), result.findings.clone());
    let mut notes = Vec::new();
    if result.matched {
        let seqs: Vec<String> = result.matched_indices.iter().map(u64::to_string).collect();
        notes.push(format!("plan {}: matched at seq {}", result.plan_id, seqs.join(", ")));
    } else if let Some(step) = result.first_failed_step {
        notes.push(format!("plan {}: failed at step {step}", result.plan_id));
    }
    let activities = annotate_activities(result);
    if !activities.is_empty() {
        let tags: Vec<String> =
            activities.iter().map(|(tag, ok)| format!("{tag} {}", if *ok { "ok" } else { "missing" })).collect();
        notes.push(format!("activities: {}", tags.join(", ")));
    }
    Section { report, notes }
}

/// Evidence gathered for one run, in stage order.
struct Evidence {
    sections: Vec<Section>,
    scenarios: Vec<ScenarioResult>,
}

impl Evidence {
    fn reports(&self) -> Vec<VerificationReport> {
        self.sections.iter().map(|s| s.report.clone()).collect()
    }
}

/// Runs the stages picked by `stages`. `optional` stages whose input is
/// absent are skipped instead of rejected.
fn gather(config: &RunConfig, inputs: &Inputs, stages: &[Stage], optional: &[Stage]) -> Result<Evidence, CliError> {
    let mut sections: Vec<Section> = Vec::new();
    let mut scenarios = Vec::new();
    let skip = |stage: Stage, present: bool| !present && optional.contains(&stage);
    for &stage in stages {
        match stage {
            Stage::Model => {
                sections.push(VerificationReport::new(Stage::Model, "/", validate_model(&inputs.model)).into());
            }
            Stage::Ssrve => {
                if skip(stage, inputs.snapshot.is_some()) {
                    continue;
                }
                let snapshot = require(&inputs.snapshot, "--snapshot", "ssrve")?;
                let scopes = ssrve_scopes(config, &inputs.model)?;
                let reports =
                    verify_subsystems(&inputs.model, snapshot, &scopes, &inputs.policy, Execution::default())
                        .map_err(|e| CliError::Usage(format!("--scope: {e}")))?;
                sections.extend(reports.into_iter().map(Section::from));
            }
            Stage::Srve => {
                if skip(stage, inputs.snapshot.is_some()) {
                    continue;
                }
                let snapshot = require(&inputs.snapshot, "--snapshot", "srve")?;
                sections.push(verify_system(&inputs.model, snapshot, &inputs.policy).into());
            }
            Stage::Sources => {
                if skip(stage, inputs.sources.is_some()) {
                    continue;
                }
                let sources = require(&inputs.sources, "--sources", "sources")?;
                sections.push(verify_sources(&inputs.model, sources).into());
            }
            Stage::Trace => {
                if skip(stage, inputs.trace.is_some()) {
                    continue;
                }
                let trace = require(&inputs.trace, "--trace", "trace")?;
                let results = run_scenarios(config, &inputs.model, trace)?;
                sections.extend(results.iter().map(scenario_section));
                scenarios = results;
            }
        }
    }
    Ok(Evidence { sections, scenarios })
}

fn matrix_of(inputs: &Inputs, evidence: &Evidence) -> Result<TraceabilityMatrix, CliError> {
    build_matrix(&inputs.model, &evidence.reports(), &evidence.scenarios).map_err(|e| CliError::Usage(e.to_string()))
}

/// Runs one invocation and renders its output without touching stdout.
pub fn run(config: &RunConfig, color: bool) -> Result<Outcome, CliError> {
    let inputs = load(config)?;
    let all = [Stage::Model, Stage::Ssrve, Stage::Srve, Stage::Sources, Stage::Trace];
    let (evidence, matrix) = match config.command {
        Command::CheckModel => (gather(config, &inputs, &[Stage::Model], &[])?, None),
        Command::Validate => (gather(config, &inputs, &[Stage::Trace], &[])?, None),
        Command::Verify => {
            let evidence = match config.stage {
                StageSelector::Model => gather(config, &inputs, &[Stage::Model], &[])?,
                StageSelector::Ssrve => gather(config, &inputs, &[Stage::Ssrve], &[])?,
                StageSelector::Srve => gather(config, &inputs, &[Stage::Srve], &[])?,
                StageSelector::Sources => gather(config, &inputs, &[Stage::Sources], &[])?,
                StageSelector::Trace => gather(config, &inputs, &[Stage::Trace], &[])?,
                StageSelector::All => gather(config, &inputs, &all, &[Stage::Trace])?,
            };
            (evidence, None)
        }
        Command::Matrix => {
            let evidence = gather(config, &inputs, &all, &all[1..])?;
            let matrix = matrix_of(&inputs, &evidence)?;
            (evidence, Some(matrix))
        }
        Command::All => {
            let evidence = gather(config, &inputs, &all, &[Stage::Trace])?;
            let matrix = matrix_of(&inputs, &evidence)?;
            (evidence, Some(matrix))
        }
    };

    let reports = evidence.reports();
    let exit_code = exit_code(&reports);
    let output = match (config.format, config.command, &matrix) {
        (Format::Json, Command::Matrix, Some(m)) => report::to_json_string(&m.to_json_value()),
        (Format::Json, _, Some(m)) => report::to_json_string(&report::pipeline_json(&reports, m)),
        (Format::Json, _, None) => report::to_json_string(&report::reports_json(&reports)),
        (Format::Text, Command::Matrix, Some(m)) => report::render_matrix_text(m),
        (Format::Text, _, Some(m)) => {
            let mut text = report::render_text(&evidence.sections, color);
            text.push('\n');
            text.push_str(&report::render_matrix_text(m));
            text
        }
        (Format::Text, _, None) => report::render_text(&evidence.sections, color),
    };
    Ok(Outcome { output, exit_code })
}

fn config_from(cli: Cli) -> Result<RunConfig, CliError> {
    let model_path = cli.model.ok_or_else(|| CliError::Usage("--model is required".to_string()))?;
    Ok(RunConfig {
        command: cli.command,
        model_path,
        snapshot_path: cli.snapshot,
        source_snapshot_path: cli.sources,
        trace_path: cli.trace,
        stage: cli.stage,
        scope: cli.scope,
        plan: cli.plan,
        ignore: cli.ignore,
        format: cli.format,
        out: cli.out,
        color: cli.color,
    })
}

/// Entry point for the binary. Returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return EXIT_PASS;
        }
        Err(e) => {
            let rendered = e.to_string();
            let line = rendered.lines().next().unwrap_or("invalid arguments");
            eprintln!("meros-verify: {}", line.trim_start_matches("error: "));
            return EXIT_USAGE;
        }
    };
    let result = config_from(cli).and_then(|config| {
        let color = match config.color {
            ColorChoice::Always => true,
            ColorChoice::Never => false,
            ColorChoice::Auto => config.out.is_none() && std::io::stdout().is_terminal(),
        };
        let outcome = run(&config, color)?;
        match &config.out {
            Some(path) => std::fs::write(path, &outcome.output)
                .map_err(|source| CliError::Io { path: path.display().to_string(), source })?,
            None => {
                let mut stdout = std::io::stdout().lock();
                let _ = stdout.write_all(outcome.output.as_bytes());
                let _ = stdout.flush();
            }
        }
        Ok(outcome.exit_code)
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            let message = e.to_string();
            eprintln!("meros-verify: {}", message.lines().next().unwrap_or_default());
            EXIT_USAGE
        }
    }
}
