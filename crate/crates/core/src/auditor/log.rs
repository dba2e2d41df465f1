//! Append-only binding log: one JSON record per line.

use std::collections::BTreeSet;
use std::fs::{self, File, OpenOptions};
use std::io::{self, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::ids;
use crate::prov::{Literal, QualifiedName};
use crate::template::{BindingRow, USER_DATAPOINT};
use crate::time::Timestamp;

#[derive(Debug, Error)]
pub enum LogError {
    #[error("storage error on {path}: {source}")]
    Storage {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("row at {row} is older than the last logged row at {last}")]
    OutOfOrder { row: Timestamp, last: Timestamp },
    #[error("filter range is empty: {from} is after {to}")]
    InvalidRange { from: Timestamp, to: Timestamp },
}

impl LogError {
    fn storage(path: &Path, source: io::Error) -> Self {
        LogError::Storage {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[derive(Debug)]
pub struct BindingLog {
    path: PathBuf,
    file: File,
    last: Option<Timestamp>,
    next_seq: u64,
}

impl BindingLog {
    /// Starts an empty log, replacing any existing file.
    pub fn create(path: &Path) -> Result<Self, LogError> {
        let file = File::create(path).map_err(|e| LogError::storage(path, e))?;
        Ok(Self {
            path: path.to_path_buf(),
            file,
            last: None,
            next_seq: 0,
        })
    }

    /// Opens a log for appending, creating it if needed.
    pub fn open(path: &Path) -> Result<Self, LogError> {
        let err = |e| LogError::storage(path, e);
        let mut file = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(path)
            .map_err(err)?;
        let mut text = String::new();
        file.read_to_string(&mut text).map_err(err)?;
        let mut last = None;
        let mut next_seq = 0;
        for row in text.lines().filter_map(|l| serde_json::from_str::<BindingRow>(l).ok()) {
            last = last.max(Some(row.timestamp));
            next_seq = next_seq.max(row.seq + 1);
        }
        if !text.is_empty() && !text.ends_with('\n') {
            file.write_all(b"\n").map_err(err)?;
        }
        file.seek(SeekFrom::End(0)).map_err(err)?;
        Ok(Self {
            path: path.to_path_buf(),
            file,
            last,
            next_seq,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Appends a row with the next sequence number. The record goes out in a
    /// single write so a crash leaves at most one unparseable tail line.
    pub fn append(&mut self, mut row: BindingRow) -> Result<BindingRow, LogError> {
        if let Some(last) = self.last.filter(|last| row.timestamp < *last) {
            return Err(LogError::OutOfOrder {
                row: row.timestamp,
                last,
            });
        }
        row.seq = self.next_seq;
        let mut line = serde_json::to_string(&row).expect("rows serialize");
        line.push('\n');
        self.file
            .write_all(line.as_bytes())
            .and_then(|_| self.file.flush())
            .map_err(|e| LogError::storage(&self.path, e))?;
        self.next_seq += 1;
        self.last = Some(row.timestamp);
        Ok(row)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TrailFilter {
    pub from: Option<Timestamp>,
    pub to: Option<Timestamp>,
    pub user: Option<String>,
    pub skill: Option<QualifiedName>,
    pub trace: Option<String>,
}

impl TrailFilter {
    pub fn validate(&self) -> Result<(), LogError> {
        match (self.from, self.to) {
            (Some(from), Some(to)) if from > to => Err(LogError::InvalidRange { from, to }),
            _ => Ok(()),
        }
    }

    pub fn is_empty(&self) -> bool {
        *self == TrailFilter::default()
    }

    fn in_range(&self, t: Timestamp) -> bool {
        self.from.is_none_or(|f| t >= f) && self.to.is_none_or(|to| t <= to)
    }
}

/// Rows that passed the filter plus the number of unreadable lines skipped.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadedRows {
    pub rows: Vec<BindingRow>,
    pub corrupt: usize,
}

/// Reads a log. A missing file reads as empty.
pub fn load(path: &Path, filter: &TrailFilter) -> Result<LoadedRows, LogError> {
    filter.validate()?;
    let text = match fs::read_to_string(path) {
        Ok(text) => text,
        Err(e) if e.kind() == io::ErrorKind::NotFound => String::new(),
        Err(e) => return Err(LogError::storage(path, e)),
    };
    let mut rows = Vec::new();
    let mut corrupt = 0;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<BindingRow>(line) {
            Ok(row) => rows.push(row),
            Err(e) => {
                tracing::warn!(line = i + 1, "corrupt binding log entry: {e}");
                corrupt += 1;
            }
        }
    }
    Ok(LoadedRows {
        rows: apply_filter(rows, filter),
        corrupt,
    })
}

fn qname_value<'a>(row: &'a BindingRow, var: &str) -> Option<&'a QualifiedName> {
    row.value(var).and_then(Literal::as_qname)
}

/// Keeps matching rows in their original order. User and skill criteria
/// select whole traces. Datapoint rows are kept when a kept row refers to
/// the datapoint.
pub fn apply_filter(rows: Vec<BindingRow>, filter: &TrailFilter) -> Vec<BindingRow> {
    if filter.is_empty() {
        return rows;
    }
    let user = filter.user.as_deref().map(ids::user_agent);
    let traces_with = |pred: &dyn Fn(&BindingRow) -> bool| -> BTreeSet<String> {
        rows.iter()
            .filter(|r| r.template_id != USER_DATAPOINT && pred(r))
            .map(|r| r.trace_id.clone())
            .collect()
    };
    let user_traces = user
        .as_ref()
        .map(|u| traces_with(&|r| qname_value(r, "user") == Some(u)));
    let skill_traces = filter
        .skill
        .as_ref()
        .map(|s| traces_with(&|r| qname_value(r, "skill") == Some(s)));

    let keep_primary = |r: &BindingRow| {
        r.template_id != USER_DATAPOINT
            && filter.in_range(r.timestamp)
            && filter.trace.as_ref().is_none_or(|t| &r.trace_id == t)
            && user_traces.as_ref().is_none_or(|set| set.contains(&r.trace_id))
            && skill_traces.as_ref().is_none_or(|set| set.contains(&r.trace_id))
    };
    let referenced: BTreeSet<&QualifiedName> = rows
        .iter()
        .filter(|r| keep_primary(r))
        .filter_map(|r| qname_value(r, "user_datapoint"))
        .collect();
    let keep = |r: &BindingRow| {
        keep_primary(r)
            || (r.template_id == USER_DATAPOINT
                && qname_value(r, "user_datapoint").is_some_and(|d| referenced.contains(d)))
    };
    let kept: Vec<bool> = rows.iter().map(keep).collect();
    rows.into_iter()
        .zip(kept)
        .filter_map(|(row, keep)| keep.then_some(row))
        .collect()
}
