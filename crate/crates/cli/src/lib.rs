//! The `provaud` command line: scenario replay, audit questions, export,
//! norm mining and the conversational REPL.
//!
//! Every command writes to the given output streams, so tests can drive the
//! same code as the binary.

use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use provaud_core::auditor::{load_trail, AuditError, AuditTrail, LogError, TrailFilter, BINDINGS_LOG};
use provaud_core::ids;
use provaud_core::messages;
use provaud_core::norms::{
    check_violation, extract_events, mine_norms, norms_from_json_lines, norms_to_json_lines, NormConfig, NormError,
    ACTION_PAIRS,
};
use provaud_core::pipeline::{replay, ReplayError};
use provaud_core::prov::{serialize_provn, QualifiedName};
use provaud_core::query::{privacy_report, DisplayNames, QuestionContext, QuestionError, QuestionRegistry};
use provaud_core::sim::{demo_services, Scenario, SkillError};
use provaud_core::Timestamp;

mod repl;

pub const DEFAULT_OUT: &str = "provaud-out";
pub const NORMS_FILE: &str = "norms.jsonl";
pub const EXPORT_FILE: &str = "trail.provn";

#[derive(Debug, Parser)]
#[command(
    name = "provaud",
    version,
    about = "Provenance audit trails for a simulated voice assistant"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Replay a scenario and store its binding log.
    Run(RunArgs),
    /// Answer an audit question from the stored log.
    Query(QueryArgs),
    /// Talk to the assistant and its auditor line by line.
    Repl(OutArgs),
    /// Write the audit trail as PROV-N.
    Export(ExportArgs),
    /// Mine usage norms from the stored log.
    NormsMine(NormsArgs),
    /// Check the stored log against mined norms.
    NormsCheck(NormsArgs),
    /// Print a privacy report of the stored log.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Directory holding bindings.log and friends.
    #[arg(long, env = "PROVAUD_OUT", default_value = DEFAULT_OUT)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    /// Earliest row time, ISO-8601.
    #[arg(long)]
    pub from: Option<Timestamp>,
    /// Latest row time, ISO-8601.
    #[arg(long)]
    pub to: Option<Timestamp>,
    /// Skill id (`joke-skill`, `mycroft:joke-skill`) or display name.
    #[arg(long)]
    pub skill: Option<String>,
    #[arg(long)]
    pub trace: Option<String>,
    #[arg(long)]
    pub user: Option<String>,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[command(flatten)]
    pub out: OutArgs,
    #[arg(long)]
    pub question: String,
    #[command(flatten)]
    pub filter: FilterArgs,
    #[arg(long, value_enum, default_value = "on")]
    pub generalize: Switch,
    /// Also print the structured rows behind the answer.
    #[arg(long)]
    pub rows: bool,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[command(flatten)]
    pub out: OutArgs,
    /// Defaults to `<out>/trail.provn`.
    #[arg(long)]
    pub provn: Option<PathBuf>,
    #[command(flatten)]
    pub filter: FilterArgs,
}

#[derive(Debug, Args)]
pub struct NormsArgs {
    #[command(flatten)]
    pub out: OutArgs,
    /// Norms file. Defaults to `<out>/norms.jsonl`.
    #[arg(long)]
    pub norms: Option<PathBuf>,
    /// TOML file with norm mining settings.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub filter: FilterArgs,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub out: OutArgs,
    #[command(flatten)]
    pub filter: FilterArgs,
    #[arg(long, value_enum, default_value = "on")]
    pub generalize: Switch,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Storage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Storage(_) => 3,
        }
    }

    fn storage(path: &Path, e: io::Error) -> Self {
        CliError::Storage(format!("{}: {e}", path.display()))
    }
}

impl From<LogError> for CliError {
    fn from(e: LogError) -> Self {
        match e {
            LogError::Storage { .. } => CliError::Storage(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<AuditError> for CliError {
    fn from(e: AuditError) -> Self {
        match e {
            AuditError::Log(log) => log.into(),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<ReplayError> for CliError {
    fn from(e: ReplayError) -> Self {
        match e {
            ReplayError::Audit(audit) => (*audit).into(),
            ReplayError::Storage { .. } => CliError::Storage(e.to_string()),
            ReplayError::Skill(skill) => CliError::Input(skill.to_string()),
        }
    }
}

impl From<SkillError> for CliError {
    fn from(e: SkillError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<NormError> for CliError {
    fn from(e: NormError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<QuestionError> for CliError {
    fn from(e: QuestionError) -> Self {
        match e {
            QuestionError::UnknownQuestion { id, supported } => {
                let supported: Vec<&str> = supported.iter().map(String::as_str).collect();
                CliError::Input(messages::unknown_question(&id, &supported))
            }
            other => CliError::Input(other.to_string()),
        }
    }
}

fn write_err(e: io::Error) -> CliError {
    CliError::Storage(format!("cannot write output: {e}"))
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run_cli<I, T>(
    args: I,
    input: &mut dyn BufRead,
    interactive: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command, input, interactive, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(
    command: Command,
    input: &mut dyn BufRead,
    interactive: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    match command {
        Command::Run(args) => cmd_run(&args, out),
        Command::Query(args) => cmd_query(&args, out, err),
        Command::Repl(args) => repl::cmd_repl(&args, input, interactive, out, err),
        Command::Export(args) => cmd_export(&args, out, err),
        Command::NormsMine(args) => cmd_norms_mine(&args, out, err),
        Command::NormsCheck(args) => cmd_norms_check(&args, out, err),
        Command::Report(args) => cmd_report(&args, out, err),
    }
}

pub fn cmd_run(args: &RunArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let text = fs::read_to_string(&args.scenario)
        .map_err(|e| CliError::Input(format!("cannot read scenario {}: {e}", args.scenario.display())))?;
    let scenario = Scenario::parse(&text).map_err(|e| CliError::Input(format!("{}: {e}", args.scenario.display())))?;
    let result = replay(&scenario, demo_services(), &args.out.out)?;
    for report in &result.reports {
        for line in report.transcript() {
            writeln!(out, "{line}").map_err(write_err)?;
        }
    }
    let log = args.out.out.join(BINDINGS_LOG);
    writeln!(
        out,
        "{}",
        messages::bindings_written(result.stats.rows, result.stats.dead, &log.display().to_string())
    )
    .map_err(write_err)?;
    Ok(())
}

fn load_names(out_dir: &Path) -> Result<DisplayNames, CliError> {
    DisplayNames::load(out_dir).map_err(|e| CliError::storage(&out_dir.join(provaud_core::query::NAMES_FILE), e))
}

fn resolve_skill(text: &str, names: &DisplayNames) -> Result<QualifiedName, CliError> {
    names
        .find(text)
        .cloned()
        .or_else(|| ids::parse_skill_id(text))
        .ok_or_else(|| CliError::Input(messages::unknown_skill(text)))
}

fn trail_filter(args: &FilterArgs, names: &DisplayNames) -> Result<TrailFilter, CliError> {
    let filter = TrailFilter {
        from: args.from,
        to: args.to,
        user: args.user.clone(),
        skill: args.skill.as_deref().map(|s| resolve_skill(s, names)).transpose()?,
        trace: args.trace.clone(),
    };
    filter.validate()?;
    Ok(filter)
}

fn load_filtered(out_dir: &Path, filter: &TrailFilter, err: &mut dyn Write) -> Result<AuditTrail, CliError> {
    let trail = load_trail(out_dir, filter)?;
    if trail.corrupt > 0 {
        writeln!(err, "{}", messages::corrupt_entries(trail.corrupt)).map_err(write_err)?;
    }
    Ok(trail)
}

pub fn cmd_query(args: &QueryArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let registry = QuestionRegistry::builtin();
    let question = registry.get(&args.question)?;
    let out_dir = &args.out.out;
    let names = load_names(out_dir)?;
    let filter = trail_filter(&args.filter, &names)?;
    let trail = load_filtered(out_dir, &filter, err)?;
    let ctx = QuestionContext {
        names: &names,
        generalize: args.generalize == Switch::On,
        skill: args.filter.skill.clone(),
        from: args.filter.from,
        to: args.filter.to,
    };
    let answer = question.answer(&trail.document, &ctx)?;
    writeln!(out, "{}", answer.text).map_err(write_err)?;
    if args.rows {
        if question.id() == "data-recipients" {
            writeln!(out, "{}", messages::rows_header()).map_err(write_err)?;
        }
        for row in &answer.rows {
            writeln!(out, "{row}").map_err(write_err)?;
        }
    }
    Ok(())
}

pub fn cmd_export(args: &ExportArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let out_dir = &args.out.out;
    let names = load_names(out_dir)?;
    let filter = trail_filter(&args.filter, &names)?;
    let trail = load_filtered(out_dir, &filter, err)?;
    let text = serialize_provn(&trail.document).map_err(|e| CliError::Input(e.to_string()))?;
    let path = args.provn.clone().unwrap_or_else(|| out_dir.join(EXPORT_FILE));
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::storage(parent, e))?;
    }
    fs::write(&path, text).map_err(|e| CliError::storage(&path, e))?;
    writeln!(
        out,
        "{} statements written to {}",
        trail.document.statement_count(),
        path.display()
    )
    .map_err(write_err)?;
    Ok(())
}

fn norm_config(path: Option<&Path>) -> Result<NormConfig, CliError> {
    match path {
        None => Ok(NormConfig::default()),
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
            NormConfig::from_toml(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
        }
    }
}

fn norms_path(args: &NormsArgs) -> PathBuf {
    args.norms.clone().unwrap_or_else(|| args.out.out.join(NORMS_FILE))
}

fn trail_events(args: &NormsArgs, err: &mut dyn Write) -> Result<Vec<provaud_core::norms::ActionEvent>, CliError> {
    let out_dir = &args.out.out;
    let names = load_names(out_dir)?;
    let filter = trail_filter(&args.filter, &names)?;
    let trail = load_filtered(out_dir, &filter, err)?;
    Ok(ACTION_PAIRS
        .iter()
        .flat_map(|(action_type, _, _)| extract_events(&trail.document, action_type))
        .collect())
}

pub fn cmd_norms_mine(args: &NormsArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let config = norm_config(args.config.as_deref())?;
    let log = args.out.out.join(BINDINGS_LOG);
    if !log.is_file() {
        return Err(CliError::Input(format!("no binding log at {}", log.display())));
    }
    let events = trail_events(args, err)?;
    let norms = mine_norms(&events, &config);
    let path = norms_path(args);
    fs::write(&path, norms_to_json_lines(&norms)).map_err(|e| CliError::storage(&path, e))?;
    if norms.is_empty() {
        writeln!(out, "{}", messages::NO_NORMS).map_err(write_err)?;
    }
    for norm in &norms {
        writeln!(out, "{}", norm.summary()).map_err(write_err)?;
    }
    writeln!(
        out,
        "{}",
        messages::norms_written(norms.len(), &path.display().to_string())
    )
    .map_err(write_err)?;
    Ok(())
}

pub fn cmd_norms_check(args: &NormsArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let config = norm_config(args.config.as_deref())?;
    let path = norms_path(args);
    let text =
        fs::read_to_string(&path).map_err(|e| CliError::Input(format!("cannot read norms {}: {e}", path.display())))?;
    let norms = norms_from_json_lines(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let events = trail_events(args, err)?;
    if events.is_empty() {
        return Ok(());
    }
    let violations: Vec<_> = events
        .iter()
        .filter_map(|e| check_violation(e, &norms, &config))
        .collect();
    if violations.is_empty() {
        writeln!(out, "{}", messages::NO_VIOLATIONS).map_err(write_err)?;
    }
    for v in &violations {
        writeln!(out, "{v}").map_err(write_err)?;
    }
    Ok(())
}

pub fn cmd_report(args: &ReportArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let out_dir = &args.out.out;
    let names = load_names(out_dir)?;
    let filter = trail_filter(&args.filter, &names)?;
    let trail = load_filtered(out_dir, &filter, err)?;
    out.write_all(privacy_report(&trail.document, &names, args.generalize == Switch::On).as_bytes())
        .map_err(write_err)
}
