use std::fs;
use std::io::{BufRead, Write};
use std::path::Path;

use provaud_core::auditor::{catalogue_for, load, load_trail, Auditor, TrailFilter, BINDINGS_LOG, TEMPLATES_DIR};
use provaud_core::demo::demo_profiles;
use provaud_core::messages;
use provaud_core::query::{DisplayNames, QuestionContext, QuestionRegistry, NAMES_FILE};
use provaud_core::sim::{demo_services, match_intent, skill_registry, Assistant};
use provaud_core::template::TemplateCatalogue;
use provaud_core::Timestamp;

use crate::{load_names, write_err, CliError};

const QUIT: &str = ":quit";
const PROMPT: &str = "> ";
const STEP_SECONDS: i64 = 60;

fn default_start() -> Timestamp {
    Timestamp::from_ymd_hms(2024, 3, 12, 8, 0, 0).expect("valid start")
}

/// Prepares `out_dir` so a fresh session can append to it.
fn prepare(out_dir: &Path, assistant: &Assistant) -> Result<(), CliError> {
    fs::create_dir_all(out_dir).map_err(|e| CliError::storage(out_dir, e))?;
    let templates = out_dir.join(TEMPLATES_DIR);
    if !templates.is_dir() {
        TemplateCatalogue::canonical()
            .write_dir(&templates)
            .map_err(|e| CliError::storage(&templates, e))?;
    }
    let names = out_dir.join(NAMES_FILE);
    if !names.is_file() {
        let text = DisplayNames::from_registries(assistant.skills(), assistant.services()).to_toml();
        fs::write(&names, text).map_err(|e| CliError::storage(&names, e))?;
    }
    Ok(())
}

/// Clock and trace counter continuing after whatever the log already holds.
fn resume_point(out_dir: &Path) -> Result<(Timestamp, u64), CliError> {
    let rows = load(&out_dir.join(BINDINGS_LOG), &TrailFilter::default())?.rows;
    let clock = rows
        .iter()
        .map(|r| r.timestamp)
        .max()
        .map_or_else(default_start, |t| t.plus_seconds(STEP_SECONDS));
    let next_trace = rows
        .iter()
        .filter_map(|r| r.trace_id.strip_prefix('t')?.parse::<u64>().ok())
        .max()
        .map_or(1, |n| n + 1);
    Ok((clock, next_trace))
}

pub fn cmd_repl(
    args: &crate::OutArgs,
    input: &mut dyn BufRead,
    interactive: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    let out_dir = args.out.as_path();
    let mut assistant = Assistant::new(skill_registry(&[])?, demo_services(), demo_profiles());
    prepare(out_dir, &assistant)?;
    let (mut clock, next_trace) = resume_point(out_dir)?;
    assistant.set_next_trace(next_trace);
    let catalogue = catalogue_for(out_dir).map_err(|e| CliError::Input(e.to_string()))?;
    let mut auditor = Auditor::open(out_dir, catalogue)?;
    let sub = assistant.bus_mut().subscribe("prov.*").expect("valid filter");
    let questions = QuestionRegistry::builtin();
    let question_rules = questions.intent_rules();
    let names = load_names(out_dir)?;

    let mut line = String::new();
    loop {
        if interactive {
            write!(out, "{PROMPT}").and_then(|_| out.flush()).map_err(write_err)?;
        }
        line.clear();
        let read = input
            .read_line(&mut line)
            .map_err(|e| CliError::Input(format!("cannot read input: {e}")))?;
        let text = line.trim();
        if read == 0 || text == QUIT {
            return Ok(());
        }
        if text.is_empty() {
            continue;
        }

        if let Ok(intent) = match_intent(&question_rules, text) {
            let question = questions.get(&intent.name)?;
            let trail = load_trail(out_dir, &TrailFilter::default())?;
            if trail.corrupt > 0 {
                writeln!(err, "{}", messages::corrupt_entries(trail.corrupt)).map_err(write_err)?;
            }
            let ctx = QuestionContext {
                names: &names,
                generalize: true,
                skill: intent.slots.get("skill").cloned(),
                from: None,
                to: None,
            };
            let reply = match question.answer(&trail.document, &ctx) {
                Ok(answer) => answer.text,
                Err(e) => e.to_string(),
            };
            writeln!(out, "{reply}").map_err(write_err)?;
            continue;
        }

        let report = assistant.handle_utterance(clock, provaud_core::demo::DEMO_USER, text);
        clock = clock.plus_seconds(STEP_SECONDS);
        for msg in assistant.bus_mut().drain(sub).expect("own subscription") {
            auditor.handle(&msg, assistant.profiles())?;
        }
        writeln!(out, "{}", report.reply()).map_err(write_err)?;
    }
}
