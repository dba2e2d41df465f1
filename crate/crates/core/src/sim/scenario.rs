//! Scenario files: scripted utterances plus the profile data behind them.
//!
//! ```text
//! # comment
//! @skill weather-skill
//! @datapoint alice geo-location 51.5128,-0.1168
//! 2024-03-12T08:07:00Z | alice | What is the weather today?
//! ```

use thiserror::Error;

use super::profile::UserProfiles;
use crate::ids;
use crate::time::Timestamp;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ScenarioError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Turn {
    pub time: Timestamp,
    pub user_id: String,
    pub text: String,
    pub line: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Scenario {
    pub profiles: UserProfiles,
    /// Skills named by `@skill`; empty means all built-ins.
    pub skills: Vec<String>,
    /// Sorted by time; file order among equal times.
    pub turns: Vec<Turn>,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let mut scenario = Scenario::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |message: String| ScenarioError { line, message };
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            if let Some(rest) = trimmed.strip_prefix('@') {
                let (directive, args) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
                match directive {
                    "datapoint" => {
                        let mut parts = args.trim().splitn(3, char::is_whitespace);
                        let (Some(user), Some(kind), Some(value)) = (parts.next(), parts.next(), parts.next()) else {
                            return Err(err("expected `@datapoint <user> <type> <value>`".into()));
                        };
                        scenario
                            .profiles
                            .set(user, kind, value)
                            .map_err(|e| err(e.to_string()))?;
                    }
                    "skill" => {
                        let name = args.trim();
                        if name.is_empty() || name.contains(char::is_whitespace) {
                            return Err(err("expected `@skill <id>`".into()));
                        }
                        scenario.skills.push(name.to_string());
                    }
                    other => return Err(err(format!("unknown directive `@{other}`"))),
                }
                continue;
            }
            let fields: Vec<&str> = trimmed.splitn(3, '|').map(str::trim).collect();
            let [time, user, utterance] = fields[..] else {
                return Err(err("expected `<time> | <user> | <utterance>`".into()));
            };
            let time: Timestamp = time.parse().map_err(|e| err(format!("{e}")))?;
            if !ids::is_token(user) {
                return Err(err(format!("invalid user id `{user}`")));
            }
            if utterance.is_empty() {
                return Err(err("empty utterance".into()));
            }
            scenario.turns.push(Turn {
                time,
                user_id: user.to_string(),
                text: utterance.to_string(),
                line,
            });
        }
        scenario.turns.sort_by_key(|t| t.time);
        Ok(scenario)
    }
}
