//! Frame-based sentence realizer for query answers.

use std::collections::BTreeMap;

use super::generalize::{generalize_location_text, generalize_time};
use super::names::DisplayNames;
use super::{query_data_recipients, query_usage_count, DataFlowRow};
use crate::ids;
use crate::messages;
use crate::prov::{NodeKind, ProvDocument, QualifiedName, RelationKind};
use crate::time::Timestamp;

/// One sentence: subject, verb, aggregated objects, trailing modifiers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub subject: String,
    pub verb: String,
    pub objects: Vec<String>,
    pub modifiers: Vec<String>,
}

impl Frame {
    pub fn realize(&self) -> String {
        let mut out = format!(
            "{} {} {}",
            self.subject,
            self.verb,
            messages::conjunction(&self.objects)
        );
        for m in &self.modifiers {
            out.push(' ');
            out.push_str(m);
        }
        out.push('.');
        out
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NarrativePlan {
    pub frames: Vec<Frame>,
    /// Used when there are no frames.
    pub fallback: String,
}

impl NarrativePlan {
    pub fn realize(&self) -> String {
        if self.frames.is_empty() {
            return self.fallback.clone();
        }
        self.frames.iter().map(Frame::realize).collect::<Vec<_>>().join(" ")
    }
}

fn push_unique(list: &mut Vec<String>, item: String) {
    if !list.contains(&item) {
        list.push(item);
    }
}

struct Group {
    services: Vec<String>,
    skills: Vec<String>,
    activities: Vec<QualifiedName>,
    latest: Option<Timestamp>,
    value: Option<String>,
}

/// Rows grouped by data type, in order of first appearance.
fn group_rows(rows: &[DataFlowRow], names: &DisplayNames) -> Vec<(String, Group)> {
    let mut groups: Vec<(String, Group)> = Vec::new();
    for row in rows {
        let pos = match groups.iter().position(|(t, _)| *t == row.data_type) {
            Some(pos) => pos,
            None => {
                groups.push((
                    row.data_type.clone(),
                    Group {
                        services: Vec::new(),
                        skills: Vec::new(),
                        activities: Vec::new(),
                        latest: None,
                        value: None,
                    },
                ));
                groups.len() - 1
            }
        };
        let group = &mut groups[pos].1;
        push_unique(&mut group.services, names.name(&row.service_id));
        push_unique(&mut group.skills, names.name(&row.skill_id));
        if !group.activities.contains(&row.activity_id) {
            group.activities.push(row.activity_id.clone());
        }
        group.latest = group.latest.max(row.time);
        if row.data_value.is_some() {
            group.value.clone_from(&row.data_value);
        }
    }
    groups
}

/// One sentence per data type. Times are shown to the nearest half hour
/// when `generalize` is on.
pub fn plan_recipients(rows: &[DataFlowRow], names: &DisplayNames, generalize: bool) -> NarrativePlan {
    let shown = |t: Timestamp| if generalize { generalize_time(t) } else { t };
    let frames = group_rows(rows, names)
        .into_iter()
        .map(|(data_type, group)| {
            let mut modifiers = vec![messages::by_skills(&group.skills)];
            let count = group.activities.len();
            match (count, group.latest) {
                (1, Some(t)) => modifiers.push(messages::on_date_at(shown(t))),
                (1, None) => {}
                (n, Some(t)) => {
                    modifiers.push(format!("{},", messages::repeated(n)));
                    modifiers.push(messages::most_recently(shown(t)));
                }
                (n, None) => modifiers.push(messages::repeated(n)),
            }
            Frame {
                subject: messages::data_subject(&data_type),
                verb: messages::SENT_TO.to_string(),
                objects: group.services,
                modifiers,
            }
        })
        .collect();
    NarrativePlan {
        frames,
        fallback: messages::NO_DATA_SENT.to_string(),
    }
}

pub fn narrate_recipients(rows: &[DataFlowRow], names: &DisplayNames, generalize: bool) -> String {
    plan_recipients(rows, names, generalize).realize()
}

/// Shows a datapoint value, coarsened when it is a location.
pub fn shown_value(data_type: &str, value: &str, generalize: bool) -> String {
    if generalize && data_type == "geo-location" {
        generalize_location_text(value).unwrap_or_else(|_| "[location]".to_string())
    } else {
        value.to_string()
    }
}

/// Everything the trail says about where personal data went and which
/// skills ran.
pub fn privacy_report(trail: &ProvDocument, names: &DisplayNames, generalize: bool) -> String {
    let rows = query_data_recipients(trail);
    let mut lines = vec![messages::REPORT_DATA_HEADER.to_string()];
    let groups = group_rows(&rows, names);
    if groups.is_empty() {
        lines.push(messages::REPORT_NONE.to_string());
    }
    for (data_type, group) in groups {
        let value = group.value.as_deref().map(|v| shown_value(&data_type, v, generalize));
        let last = group.latest.map(|t| if generalize { generalize_time(t) } else { t });
        lines.push(messages::report_data_line(
            &data_type,
            value.as_deref(),
            &messages::conjunction(&group.services),
            &messages::conjunction(&group.skills),
            group.activities.len(),
            last,
        ));
    }
    lines.push(messages::REPORT_USAGE_HEADER.to_string());
    let response_type = ids::skill_response_type();
    let mut skills: BTreeMap<String, usize> = BTreeMap::new();
    for rel in trail.relations_of_kind(RelationKind::WasAssociatedWith) {
        let is_response = trail
            .node(&rel.source)
            .is_some_and(|n| n.kind == NodeKind::Activity && n.has_type(&response_type));
        if is_response && !skills.contains_key(&names.name(&rel.target)) {
            let count = query_usage_count(trail, &rel.target, None, None);
            skills.insert(names.name(&rel.target), count);
        }
    }
    if skills.is_empty() {
        lines.push(messages::REPORT_NONE.to_string());
    }
    for (name, count) in skills {
        lines.push(messages::report_usage_line(&name, count));
    }
    lines.join("\n") + "\n"
}
