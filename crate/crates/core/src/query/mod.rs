//! Questions over audit trails and their plain-language answers.

mod generalize;
mod names;
mod narrate;
mod questions;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ids;
use crate::prov::{NodeKind, ProvDocument, QualifiedName, RelationKind};
use crate::time::Timestamp;

pub use generalize::{generalize_location, generalize_location_text, generalize_time, GeneralizeError};
pub use names::{DisplayNames, NAMES_FILE};
pub use narrate::{narrate_recipients, plan_recipients, privacy_report, shown_value, Frame, NarrativePlan};
pub use questions::{
    auditor_skill_id, Answer, AuditQuestion, DataRecipients, QuestionContext, QuestionError, QuestionRegistry,
    UsageCount, AUDITOR_SKILL,
};

/// A datapoint that left the assistant: who sent it, to whom, and when.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DataFlowRow {
    pub time: Option<Timestamp>,
    pub service_id: QualifiedName,
    pub datapoint_id: QualifiedName,
    pub activity_id: QualifiedName,
    pub data_type: String,
    pub data_value: Option<String>,
    pub skill_id: QualifiedName,
}

struct Index<'a> {
    used: BTreeMap<&'a QualifiedName, Vec<&'a QualifiedName>>,
    generated: BTreeMap<&'a QualifiedName, Vec<&'a QualifiedName>>,
    associated: BTreeMap<&'a QualifiedName, Vec<&'a QualifiedName>>,
    attributed: BTreeMap<&'a QualifiedName, Vec<&'a QualifiedName>>,
}

impl<'a> Index<'a> {
    fn new(doc: &'a ProvDocument) -> Self {
        let mut index = Index {
            used: BTreeMap::new(),
            generated: BTreeMap::new(),
            associated: BTreeMap::new(),
            attributed: BTreeMap::new(),
        };
        for rel in doc.relations() {
            let map = match rel.kind {
                RelationKind::Used => &mut index.used,
                RelationKind::WasGeneratedBy => &mut index.generated,
                RelationKind::WasAssociatedWith => &mut index.associated,
                RelationKind::WasAttributedTo => &mut index.attributed,
                _ => continue,
            };
            // Generation is indexed by activity; the rest by source.
            let (key, value) = match rel.kind {
                RelationKind::WasGeneratedBy => (&rel.target, &rel.source),
                _ => (&rel.source, &rel.target),
            };
            map.entry(key).or_default().push(value);
        }
        for list in [
            &mut index.used,
            &mut index.generated,
            &mut index.associated,
            &mut index.attributed,
        ] {
            for targets in list.values_mut() {
                targets.sort();
                targets.dedup();
            }
        }
        index
    }
}

/// Every personal datapoint used by an activity that produced an API
/// response, one row per (datapoint, activity, receiving service).
pub fn query_data_recipients(trail: &ProvDocument) -> Vec<DataFlowRow> {
    let index = Index::new(trail);
    let user_data = ids::user_data_type();
    let api_response = ids::api_response_type();
    let typed = |id: &QualifiedName, ty: &QualifiedName| {
        trail
            .node(id)
            .is_some_and(|n| n.kind == NodeKind::Entity && n.has_type(ty))
    };
    let mut rows = BTreeSet::new();
    for activity in trail.nodes_of_kind(NodeKind::Activity) {
        let a = &activity.id;
        let generated = index.generated.get(a).map(Vec::as_slice).unwrap_or_default();
        if !generated.iter().any(|r| typed(r, &api_response)) {
            continue;
        }
        let Some(skill) = index.associated.get(a).and_then(|agents| agents.first()) else {
            continue;
        };
        let services: BTreeSet<&QualifiedName> = generated
            .iter()
            .flat_map(|q| index.attributed.get(q).into_iter().flatten())
            .copied()
            .collect();
        for datapoint in index.used.get(a).into_iter().flatten() {
            if !typed(datapoint, &user_data) {
                continue;
            }
            let node = trail.node(datapoint).expect("typed check found it");
            let data_type = node
                .attr(&ids::data_type_key())
                .map(|l| l.display_value())
                .unwrap_or_else(|| datapoint.local().rsplit('/').next().unwrap_or_default().to_string());
            let data_value = node.attr(&ids::data_value_key()).map(|l| l.display_value());
            for service in &services {
                rows.insert(DataFlowRow {
                    time: activity.start_time,
                    service_id: (*service).clone(),
                    datapoint_id: (*datapoint).clone(),
                    activity_id: a.clone(),
                    data_type: data_type.clone(),
                    data_value: data_value.clone(),
                    skill_id: (*skill).clone(),
                });
            }
        }
    }
    rows.into_iter().collect()
}

/// Skill-response activities associated with `skill` whose start lies in
/// `[from, to]`. Unbounded ends match everything, including untimed
/// activities.
pub fn query_usage_count(
    trail: &ProvDocument,
    skill: &QualifiedName,
    from: Option<Timestamp>,
    to: Option<Timestamp>,
) -> usize {
    let index = Index::new(trail);
    let response_type = ids::skill_response_type();
    trail
        .nodes_of_kind(NodeKind::Activity)
        .filter(|a| a.has_type(&response_type))
        .filter(|a| {
            index
                .associated
                .get(&a.id)
                .is_some_and(|agents| agents.contains(&skill))
        })
        .filter(|a| match (a.start_time, from, to) {
            (_, None, None) => true,
            (None, _, _) => false,
            (Some(t), from, to) => from.is_none_or(|f| t >= f) && to.is_none_or(|e| t <= e),
        })
        .count()
}
