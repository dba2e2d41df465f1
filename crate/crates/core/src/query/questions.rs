//! Audit questions, registered by id and answerable from a trail.

use thiserror::Error;

use super::generalize::generalize_time;
use super::names::DisplayNames;
use super::narrate::{narrate_recipients, shown_value};
use super::{query_data_recipients, query_usage_count};
use crate::ids;
use crate::messages;
use crate::prov::{ProvDocument, QualifiedName};
use crate::sim::IntentRule;
use crate::time::Timestamp;

pub const AUDITOR_SKILL: &str = "prov-auditor-skill";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuestionError {
    #[error("{}", messages::unknown_question(.id, &.supported.iter().map(String::as_str).collect::<Vec<_>>()))]
    UnknownQuestion { id: String, supported: Vec<String> },
    #[error("{}", messages::WHICH_SKILL)]
    MissingSkill,
    #[error("{}", messages::unknown_skill(.0))]
    UnknownSkill(String),
}

pub struct QuestionContext<'a> {
    pub names: &'a DisplayNames,
    pub generalize: bool,
    /// Skill id or loose name, for questions about one skill.
    pub skill: Option<String>,
    pub from: Option<Timestamp>,
    pub to: Option<Timestamp>,
}

impl QuestionContext<'_> {
    fn resolve_skill(&self) -> Result<QualifiedName, QuestionError> {
        let text = self.skill.as_deref().ok_or(QuestionError::MissingSkill)?;
        if let Some(id) = self.names.find(text) {
            return Ok(id.clone());
        }
        ids::parse_skill_id(text).ok_or_else(|| QuestionError::UnknownSkill(text.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Answer {
    pub text: String,
    /// Tab-separated structured rows, shown on request.
    pub rows: Vec<String>,
}

pub trait AuditQuestion {
    fn id(&self) -> &'static str;
    fn intent_rules(&self) -> Vec<IntentRule>;
    fn answer(&self, trail: &ProvDocument, ctx: &QuestionContext<'_>) -> Result<Answer, QuestionError>;
}

pub fn auditor_skill_id() -> QualifiedName {
    ids::skill(AUDITOR_SKILL)
}

pub struct DataRecipients;

impl AuditQuestion for DataRecipients {
    fn id(&self) -> &'static str {
        "data-recipients"
    }

    fn intent_rules(&self) -> Vec<IntentRule> {
        vec![IntentRule::new(
            auditor_skill_id(),
            self.id(),
            &["services", "data"],
            &["which", "what", "got", "have", "my", "personal", "received"],
        )
        .expect("static rule")]
    }

    fn answer(&self, trail: &ProvDocument, ctx: &QuestionContext<'_>) -> Result<Answer, QuestionError> {
        let rows = query_data_recipients(trail);
        let text = narrate_recipients(&rows, ctx.names, ctx.generalize);
        let rows = rows
            .iter()
            .map(|r| {
                let value = r
                    .data_value
                    .as_deref()
                    .map(|v| shown_value(&r.data_type, v, ctx.generalize))
                    .unwrap_or_else(|| "-".into());
                let time = r
                    .time
                    .map(|t| if ctx.generalize { generalize_time(t) } else { t }.to_string())
                    .unwrap_or_else(|| "-".into());
                [
                    r.datapoint_id.to_string(),
                    r.data_type.clone(),
                    value,
                    r.service_id.to_string(),
                    r.skill_id.to_string(),
                    r.activity_id.to_string(),
                    time,
                ]
                .join("\t")
            })
            .collect();
        Ok(Answer { text, rows })
    }
}

pub struct UsageCount;

impl AuditQuestion for UsageCount {
    fn id(&self) -> &'static str {
        "usage-count"
    }

    fn intent_rules(&self) -> Vec<IntentRule> {
        vec![IntentRule::new(
            auditor_skill_id(),
            self.id(),
            &["how", "often"],
            &["did", "i", "use", "skill"],
        )
        .expect("static rule")
        .with_slot("skill", "use")]
    }

    fn answer(&self, trail: &ProvDocument, ctx: &QuestionContext<'_>) -> Result<Answer, QuestionError> {
        let skill = ctx.resolve_skill()?;
        let count = query_usage_count(trail, &skill, ctx.from, ctx.to);
        Ok(Answer {
            text: messages::usage_count(&ctx.names.name(&skill), count),
            rows: vec![count.to_string()],
        })
    }
}

/// Questions in registration order.
pub struct QuestionRegistry {
    questions: Vec<Box<dyn AuditQuestion>>,
}

impl Default for QuestionRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

impl QuestionRegistry {
    pub fn empty() -> Self {
        Self { questions: Vec::new() }
    }

    pub fn builtin() -> Self {
        let mut registry = Self::empty();
        registry.register(Box::new(DataRecipients));
        registry.register(Box::new(UsageCount));
        registry
    }

    /// Adds a question; a question with the same id is replaced.
    pub fn register(&mut self, question: Box<dyn AuditQuestion>) {
        self.questions.retain(|q| q.id() != question.id());
        self.questions.push(question);
    }

    pub fn ids(&self) -> Vec<&'static str> {
        self.questions.iter().map(|q| q.id()).collect()
    }

    pub fn get(&self, id: &str) -> Result<&dyn AuditQuestion, QuestionError> {
        self.questions
            .iter()
            .find(|q| q.id() == id)
            .map(|q| q.as_ref())
            .ok_or_else(|| QuestionError::UnknownQuestion {
                id: id.to_string(),
                supported: self.ids().into_iter().map(String::from).collect(),
            })
    }

    pub fn intent_rules(&self) -> Vec<IntentRule> {
        self.questions.iter().flat_map(|q| q.intent_rules()).collect()
    }
}
