//! Usage norms mined from action timings, and checks against them.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ids;
use crate::prov::{NodeKind, ProvDocument};
use crate::sim::skills::{DOOR_CLOSED, DOOR_OPENED};
use crate::time::Timestamp;

pub const DOOR_OPEN_INTERVAL: &str = "door_open_interval";

/// `(action_type, opening action, closing action)`
pub const ACTION_PAIRS: [(&str, &str, &str); 1] = [(DOOR_OPEN_INTERVAL, DOOR_OPENED, DOOR_CLOSED)];

const MINUTES_PER_DAY: u32 = 24 * 60;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NormError {
    #[error("invalid norm config: {0}")]
    Config(String),
    #[error("norms file line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DayClass {
    Weekday,
    Weekend,
}

impl DayClass {
    pub fn of(t: Timestamp) -> Self {
        if t.is_weekend() {
            DayClass::Weekend
        } else {
            DayClass::Weekday
        }
    }

    pub fn plural(self) -> &'static str {
        match self {
            DayClass::Weekday => "weekdays",
            DayClass::Weekend => "weekends",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionEvent {
    pub action_type: String,
    pub start: Timestamp,
    /// Seconds. For open-ended events, the time until the last recorded
    /// activity in the trail.
    pub duration: u64,
    #[serde(default)]
    pub open_ended: bool,
}

impl ActionEvent {
    pub fn new(action_type: &str, start: Timestamp, duration: u64) -> Self {
        Self {
            action_type: action_type.to_string(),
            start,
            duration,
            open_ended: false,
        }
    }
}

impl fmt::Display for ActionEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let minutes = self.duration.div_ceil(60);
        let open = if self.open_ended { ", still open" } else { "" };
        write!(f, "{} at {} for {minutes} min{open}", self.action_type, self.start)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormConfig {
    /// Minutes.
    pub bin_width: u32,
    pub min_support: usize,
    /// Minutes added on each side of a mined run.
    pub window_pad: u32,
    pub duration_factor: f64,
}

impl Default for NormConfig {
    fn default() -> Self {
        Self {
            bin_width: 30,
            min_support: 3,
            window_pad: 30,
            duration_factor: 2.0,
        }
    }
}

impl NormConfig {
    pub fn validate(&self) -> Result<(), NormError> {
        if self.bin_width == 0 || self.bin_width > MINUTES_PER_DAY {
            return Err(NormError::Config(format!(
                "bin_width must be 1..=1440, got {}",
                self.bin_width
            )));
        }
        if self.min_support == 0 {
            return Err(NormError::Config("min_support must be positive".into()));
        }
        if !(self.duration_factor.is_finite() && self.duration_factor > 0.0) {
            return Err(NormError::Config("duration_factor must be positive".into()));
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self, NormError> {
        let config: NormConfig = toml::from_str(text).map_err(|e| NormError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Norm {
    pub action_type: String,
    pub day_class: DayClass,
    /// Minutes of day, padded; both ends inclusive.
    pub window: (u32, u32),
    /// The unpadded run of bins the norm was mined from.
    pub core: (u32, u32),
    /// Seconds.
    pub duration_range: (u64, u64),
    pub support: usize,
}

fn hm(minutes: u32) -> String {
    format!("{:02}:{:02}", minutes / 60, minutes % 60)
}

impl Norm {
    pub fn contains(&self, t: Timestamp) -> bool {
        let s = t.seconds_of_day();
        s >= self.window.0 * 60 && s <= self.window.1 * 60
    }

    pub fn summary(&self) -> String {
        format!(
            "{} {}–{}, {}–{} min, support {}",
            self.day_class.plural(),
            hm(self.core.0),
            hm(self.core.1),
            self.duration_range.0 / 60,
            self.duration_range.1.div_ceil(60),
            self.support
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationKind {
    OutsideWindow,
    ExcessiveDuration,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub event: ActionEvent,
    pub kind: ViolationKind,
    pub matched_norm: Option<Norm>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.kind, self.event)?;
        if let Some(norm) = &self.matched_norm {
            write!(f, " (norm: {})", norm.summary())?;
        }
        Ok(())
    }
}

/// Pairs each opening action with the next closing action. An opening
/// followed by another opening, or by nothing, becomes open-ended.
pub fn extract_events(trail: &ProvDocument, action_type: &str) -> Vec<ActionEvent> {
    let Some((_, open, close)) = ACTION_PAIRS.iter().find(|(t, _, _)| *t == action_type) else {
        return Vec::new();
    };
    let response = ids::skill_response_type();
    let action_key = ids::action_key();
    let mut actions: Vec<(Timestamp, &str)> = Vec::new();
    let mut latest: Option<Timestamp> = None;
    for activity in trail.nodes_of_kind(NodeKind::Activity) {
        latest = latest.max(activity.start_time).max(activity.end_time);
        let Some(start) = activity.start_time else { continue };
        if !activity.has_type(&response) {
            continue;
        }
        match activity.attr(&action_key).and_then(|l| l.as_str()) {
            Some(a) if a == *open => actions.push((start, open)),
            Some(a) if a == *close => actions.push((start, close)),
            _ => {}
        }
    }
    actions.sort();
    let mut events = Vec::new();
    let mut pending: Option<Timestamp> = None;
    let open_ended = |start: Timestamp| ActionEvent {
        open_ended: true,
        ..ActionEvent::new(
            action_type,
            start,
            latest.map_or(0, |l| (l.unix() - start.unix()).max(0) as u64),
        )
    };
    for (time, action) in actions {
        if action == *open {
            if let Some(start) = pending.replace(time) {
                events.push(open_ended(start));
            }
        } else if let Some(start) = pending.take() {
            events.push(ActionEvent::new(
                action_type,
                start,
                (time.unix() - start.unix()) as u64,
            ));
        }
    }
    if let Some(start) = pending {
        events.push(open_ended(start));
    }
    events
}

/// Histogram mining: per (action type, day class), start times fall into
/// `bin_width` bins; every maximal run of bins holding at least
/// `min_support` closed events becomes a norm.
pub fn mine_norms(events: &[ActionEvent], config: &NormConfig) -> Vec<Norm> {
    let bw = config.bin_width;
    let bins = MINUTES_PER_DAY.div_ceil(bw) as usize;
    let mut partitions: BTreeMap<(&str, DayClass), Vec<Vec<&ActionEvent>>> = BTreeMap::new();
    for event in events.iter().filter(|e| !e.open_ended) {
        let key = (event.action_type.as_str(), DayClass::of(event.start));
        let hist = partitions.entry(key).or_insert_with(|| vec![Vec::new(); bins]);
        hist[(event.start.minute_of_day() / bw) as usize].push(event);
    }
    let mut norms = Vec::new();
    for ((action_type, day_class), hist) in partitions {
        let mut bin = 0;
        while bin < bins {
            if hist[bin].len() < config.min_support {
                bin += 1;
                continue;
            }
            let first = bin;
            while bin < bins && hist[bin].len() >= config.min_support {
                bin += 1;
            }
            let members: Vec<&ActionEvent> = hist[first..bin].iter().flatten().copied().collect();
            let core = (first as u32 * bw, (bin as u32 * bw).min(MINUTES_PER_DAY));
            let durations = members.iter().map(|e| e.duration);
            norms.push(Norm {
                action_type: action_type.to_string(),
                day_class,
                window: (
                    core.0.saturating_sub(config.window_pad),
                    (core.1 + config.window_pad).min(MINUTES_PER_DAY),
                ),
                core,
                duration_range: (durations.clone().min().unwrap_or(0), durations.max().unwrap_or(0)),
                support: members.len(),
            });
        }
    }
    norms
}

/// Outside every matching window, or longer than `duration_factor` times
/// the longest duration of every window that contains it.
pub fn check_violation(event: &ActionEvent, norms: &[Norm], config: &NormConfig) -> Option<Violation> {
    let day_class = DayClass::of(event.start);
    let containing: Vec<&Norm> = norms
        .iter()
        .filter(|n| n.action_type == event.action_type && n.day_class == day_class && n.contains(event.start))
        .collect();
    if containing.is_empty() {
        return Some(Violation {
            event: event.clone(),
            kind: ViolationKind::OutsideWindow,
            matched_norm: None,
        });
    }
    let limit = |n: &Norm| n.duration_range.1 as f64 * config.duration_factor;
    if containing.iter().any(|n| event.duration as f64 <= limit(n)) {
        return None;
    }
    let widest = containing.iter().max_by_key(|n| n.duration_range.1).expect("non-empty");
    Some(Violation {
        event: event.clone(),
        kind: ViolationKind::ExcessiveDuration,
        matched_norm: Some((*widest).clone()),
    })
}

pub fn norms_to_json_lines(norms: &[Norm]) -> String {
    norms
        .iter()
        .map(|n| serde_json::to_string(n).expect("norms serialize") + "\n")
        .collect()
}

pub fn norms_from_json_lines(text: &str) -> Result<Vec<Norm>, NormError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| NormError::Parse {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests;
