//! Every sentence a user can see, in one place.

use crate::time::Timestamp;

pub const NOT_UNDERSTOOD: &str = "Sorry, I didn't understand.";
pub const SKILL_FAILED: &str = "Sorry, something went wrong.";
pub const NO_DATA_SENT: &str = "No personal data was sent to any external service.";
pub const NO_VIOLATIONS: &str = "No norm violations.";
pub const WHICH_SKILL: &str = "Which skill do you mean?";
pub const NO_NORMS: &str = "No norms mined.";

pub fn transcript_user(time: Timestamp, user_id: &str, text: &str) -> String {
    format!("[{} {}] {user_id}: {text}", time.date_string(), time.hm_string())
}

pub fn transcript_assistant(time: Timestamp, skill_name: Option<&str>, text: &str) -> String {
    match skill_name {
        Some(name) => format!(
            "[{} {}] assistant ({name}): {text}",
            time.date_string(),
            time.hm_string()
        ),
        None => format!("[{} {}] assistant: {text}", time.date_string(), time.hm_string()),
    }
}

/// `a`, `a and b`, `a, b and c`.
pub fn conjunction(items: &[String]) -> String {
    match items {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

pub fn on_date_at(time: Timestamp) -> String {
    format!("on {} at {}", time.date_string(), time.hm_string())
}

pub const SENT_TO: &str = "was sent to";

pub fn data_subject(data_type: &str) -> String {
    format!("Your {data_type}")
}

pub fn by_skills(names: &[String]) -> String {
    let noun = if names.len() == 1 { "skill" } else { "skills" };
    format!("by the {} {noun}", conjunction(names))
}

pub fn repeated(count: usize) -> String {
    format!("{count} times")
}

pub fn most_recently(time: Timestamp) -> String {
    format!("most recently {}", on_date_at(time))
}

pub const REPORT_DATA_HEADER: &str = "Personal data sent to external services:";
pub const REPORT_USAGE_HEADER: &str = "Skill usage:";
pub const REPORT_NONE: &str = "  none";

pub fn report_data_line(
    data_type: &str,
    value: Option<&str>,
    services: &str,
    skills: &str,
    count: usize,
    last: Option<Timestamp>,
) -> String {
    let value = value.map(|v| format!(" ({v})")).unwrap_or_default();
    let last = last.map(|t| format!(", last {}", on_date_at(t))).unwrap_or_default();
    format!(
        "  {data_type}{value}: {services} via {skills}, {count} {}{last}",
        if count == 1 { "time" } else { "times" }
    )
}

pub fn report_usage_line(skill_name: &str, count: usize) -> String {
    format!("  {skill_name}: {count}")
}

pub fn usage_count(skill_name: &str, count: usize) -> String {
    let times = if count == 1 { "time" } else { "times" };
    format!("The {skill_name} skill was used {count} {times}.")
}

pub fn unknown_question(id: &str, supported: &[&str]) -> String {
    format!("unknown question `{id}`; supported: {}", supported.join(", "))
}

pub fn unknown_skill(name: &str) -> String {
    format!("I don't know a skill called {name}.")
}

pub fn rows_header() -> &'static str {
    "datapoint\tdata_type\tvalue\tservice\tskill\tactivity\ttime"
}

pub fn bindings_written(rows: usize, dead: usize, path: &str) -> String {
    if dead == 0 {
        format!("{rows} binding rows written to {path}")
    } else {
        format!("{rows} binding rows written to {path}; {dead} rejected to bindings.dead")
    }
}

pub fn corrupt_entries(count: usize) -> String {
    format!("warning: skipped {count} corrupt log entries")
}

pub fn norms_written(count: usize, path: &str) -> String {
    format!("{count} norms written to {path}")
}
