//! Turns provenance bus messages into stored binding rows and rebuilds
//! audit trails from them.

mod log;

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::prov::{Literal, ProvDocument, QualifiedName};
use crate::sim::{BusMessage, Topic, UserProfiles};
use crate::template::{
    expand_all, BindingRow, ExpandAllError, ExpandError, TemplateCatalogue, INTENT_MATCHING, SA_RESPONSE,
    SKILL_INVOCATION, USER_DATAPOINT,
};
use crate::time::Timestamp;

pub use log::{apply_filter, load, BindingLog, LoadedRows, LogError, TrailFilter};

pub const BINDINGS_LOG: &str = "bindings.log";
pub const DEAD_LETTERS: &str = "bindings.dead";
pub const TEMPLATES_DIR: &str = "templates";

#[derive(Debug, Error)]
pub enum AuditError {
    #[error("topic {0} carries no provenance")]
    NotProvenance(Topic),
    #[error("{topic} message for trace {trace_id} is missing `{variable}`")]
    SchemaViolation {
        topic: Topic,
        trace_id: String,
        variable: String,
    },
    #[error("{topic} message for trace {trace_id} does not fit its template: {source}")]
    InvalidRow {
        topic: Topic,
        trace_id: String,
        #[source]
        source: ExpandError,
    },
    #[error(transparent)]
    Log(#[from] LogError),
    #[error(transparent)]
    Expand(#[from] ExpandAllError),
}

pub fn template_for(topic: Topic) -> Option<&'static str> {
    match topic {
        Topic::ProvIntentMatching => Some(INTENT_MATCHING),
        Topic::ProvSkillInvocation => Some(SKILL_INVOCATION),
        Topic::ProvSaResponse => Some(SA_RESPONSE),
        _ => None,
    }
}

/// Maps one message onto its template's variables. Payload fields the
/// template does not use are dropped.
pub fn ingest(msg: &BusMessage, catalogue: &TemplateCatalogue) -> Result<BindingRow, AuditError> {
    let template_id = template_for(msg.topic).ok_or(AuditError::NotProvenance(msg.topic))?;
    let template = catalogue
        .get(template_id)
        .expect("canonical templates are always in the catalogue");
    let mut row = BindingRow::new(template_id, &msg.trace_id, msg.sim_time);
    for name in template.variable_names() {
        let value = msg.field(name).ok_or_else(|| AuditError::SchemaViolation {
            topic: msg.topic,
            trace_id: msg.trace_id.clone(),
            variable: name.to_string(),
        })?;
        row.values.insert(name.to_string(), value.clone());
    }
    template.check_row(&row).map_err(|source| AuditError::InvalidRow {
        topic: msg.topic,
        trace_id: msg.trace_id.clone(),
        source,
    })?;
    Ok(row)
}

/// The user_datapoint row for a datapoint id, built from the profile.
pub fn datapoint_row(
    id: &QualifiedName,
    profiles: &UserProfiles,
    trace_id: &str,
    timestamp: Timestamp,
) -> Option<BindingRow> {
    let dp = profiles.resolve(id)?;
    Some(
        BindingRow::new(USER_DATAPOINT, trace_id, timestamp)
            .bind("user", crate::ids::user_agent(dp.user_id))
            .bind("user_datapoint", id.clone())
            .bind("data_type", dp.data_type)
            .bind("data_value", dp.value),
    )
}

#[derive(Debug, Serialize)]
struct DeadLetter<'a> {
    reason: String,
    message: &'a BusMessage,
}

/// What happened to one message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IngestOutcome {
    Stored(Vec<BindingRow>),
    Ignored,
    Rejected(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IngestStats {
    pub rows: usize,
    pub dead: usize,
}

/// The auditor skill: listens for provenance messages and persists rows.
pub struct Auditor {
    catalogue: TemplateCatalogue,
    log: BindingLog,
    dead_path: PathBuf,
    seen_datapoints: BTreeSet<QualifiedName>,
    stats: IngestStats,
}

impl Auditor {
    /// Starts a fresh log in `out_dir`, removing any previous log and
    /// dead-letter file.
    pub fn create(out_dir: &Path, catalogue: TemplateCatalogue) -> Result<Self, AuditError> {
        let dead_path = out_dir.join(DEAD_LETTERS);
        if dead_path.exists() {
            fs::remove_file(&dead_path).map_err(|source| LogError::Storage {
                path: dead_path.clone(),
                source,
            })?;
        }
        Ok(Self {
            catalogue,
            log: BindingLog::create(&out_dir.join(BINDINGS_LOG))?,
            dead_path,
            seen_datapoints: BTreeSet::new(),
            stats: IngestStats::default(),
        })
    }

    /// Continues an existing log in `out_dir`.
    pub fn open(out_dir: &Path, catalogue: TemplateCatalogue) -> Result<Self, AuditError> {
        let path = out_dir.join(BINDINGS_LOG);
        let existing = load(&path, &TrailFilter::default())?;
        let seen_datapoints = existing
            .rows
            .iter()
            .filter(|r| r.template_id == USER_DATAPOINT)
            .filter_map(|r| r.value("user_datapoint").and_then(Literal::as_qname).cloned())
            .collect();
        Ok(Self {
            catalogue,
            log: BindingLog::open(&path)?,
            dead_path: out_dir.join(DEAD_LETTERS),
            seen_datapoints,
            stats: IngestStats::default(),
        })
    }

    pub fn stats(&self) -> IngestStats {
        self.stats
    }

    pub fn log_path(&self) -> &Path {
        self.log.path()
    }

    /// Handles one bus message. Non-provenance topics are ignored; messages
    /// that do not fit their template go to the dead-letter file.
    pub fn handle(&mut self, msg: &BusMessage, profiles: &UserProfiles) -> Result<IngestOutcome, AuditError> {
        if !msg.topic.is_prov() {
            return Ok(IngestOutcome::Ignored);
        }
        let row = match ingest(msg, &self.catalogue) {
            Ok(row) => row,
            Err(err @ (AuditError::SchemaViolation { .. } | AuditError::InvalidRow { .. })) => {
                let reason = err.to_string();
                tracing::warn!("{reason}");
                self.dead_letter(msg, &reason)?;
                return Ok(IngestOutcome::Rejected(reason));
            }
            Err(err) => return Err(err),
        };
        let mut stored = Vec::new();
        if let Some(dp) = row.value("user_datapoint").and_then(Literal::as_qname) {
            if !self.seen_datapoints.contains(dp) {
                match datapoint_row(dp, profiles, &row.trace_id, row.timestamp) {
                    Some(dp_row) => {
                        stored.push(self.log.append(dp_row)?);
                        self.seen_datapoints.insert(dp.clone());
                    }
                    None => tracing::warn!(datapoint = %dp, "datapoint not found in any profile"),
                }
            }
        }
        stored.push(self.log.append(row)?);
        self.stats.rows += stored.len();
        Ok(IngestOutcome::Stored(stored))
    }

    fn dead_letter(&mut self, msg: &BusMessage, reason: &str) -> Result<(), AuditError> {
        let entry = DeadLetter {
            reason: reason.to_string(),
            message: msg,
        };
        let mut line = serde_json::to_string(&entry).expect("dead letters serialize");
        line.push('\n');
        OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.dead_path)
            .and_then(|mut f| f.write_all(line.as_bytes()))
            .map_err(|source| LogError::Storage {
                path: self.dead_path.clone(),
                source,
            })?;
        self.stats.dead += 1;
        Ok(())
    }
}

/// Canonical templates plus any extra ones stored under `<out_dir>/templates`.
pub fn catalogue_for(out_dir: &Path) -> Result<TemplateCatalogue, crate::template::TemplateError> {
    let mut catalogue = TemplateCatalogue::canonical();
    let dir = out_dir.join(TEMPLATES_DIR);
    if dir.is_dir() {
        catalogue.load_dir(&dir)?;
    }
    Ok(catalogue)
}

pub fn build_audit_trail(catalogue: &TemplateCatalogue, rows: &[BindingRow]) -> Result<ProvDocument, ExpandAllError> {
    expand_all(catalogue, rows)
}

/// A rebuilt trail and how many log lines were unreadable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditTrail {
    pub document: ProvDocument,
    pub rows: usize,
    pub corrupt: usize,
}

/// Loads `<out_dir>/bindings.log`, filters it and expands the result.
pub fn load_trail(out_dir: &Path, filter: &TrailFilter) -> Result<AuditTrail, AuditError> {
    let catalogue = catalogue_for(out_dir).map_err(|e| LogError::Storage {
        path: out_dir.join(TEMPLATES_DIR),
        source: std::io::Error::new(std::io::ErrorKind::InvalidData, e),
    })?;
    let loaded = load(&out_dir.join(BINDINGS_LOG), filter)?;
    let document = build_audit_trail(&catalogue, &loaded.rows)?;
    Ok(AuditTrail {
        document,
        rows: loaded.rows.len(),
        corrupt: loaded.corrupt,
    })
}

/// Rows grouped by trace, in log order.
pub fn rows_by_trace(rows: &[BindingRow]) -> BTreeMap<&str, Vec<&BindingRow>> {
    let mut map: BTreeMap<&str, Vec<&BindingRow>> = BTreeMap::new();
    for row in rows {
        map.entry(row.trace_id.as_str()).or_default().push(row);
    }
    map
}
