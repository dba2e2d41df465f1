//! Skill plug-in interface and registry.

use thiserror::Error;

use super::bus::{Bus, BusMessage, Topic};
use super::intent::{Intent, IntentRule};
use super::profile::UserProfiles;
use super::service::{Params, Reply, ServiceError, ServiceRegistry};
use crate::ids;
use crate::prov::QualifiedName;
use crate::time::Timestamp;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SkillError {
    #[error("skill {0} is already registered")]
    DuplicateSkill(QualifiedName),
    #[error("unknown skill `{0}`")]
    UnknownSkill(String),
    #[error(transparent)]
    Service(#[from] ServiceError),
    #[error("{0}")]
    Failed(String),
}

/// What a skill tells the user and which real-world action it took.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkillOutcome {
    pub speech: String,
    pub action: Option<String>,
}

impl SkillOutcome {
    pub fn say(speech: impl Into<String>) -> Self {
        Self {
            speech: speech.into(),
            action: None,
        }
    }

    pub fn with_action(mut self, action: &str) -> Self {
        self.action = Some(action.to_string());
        self
    }
}

pub trait Skill {
    fn id(&self) -> QualifiedName;
    fn display_name(&self) -> &str;
    fn intents(&self) -> Vec<IntentRule>;
    fn handle(&self, intent: &Intent, ctx: &mut SkillContext<'_>) -> Result<SkillOutcome, SkillError>;
}

/// Everything a skill may touch while handling one turn. Service calls go
/// through here so each one is announced on the bus.
pub struct SkillContext<'a> {
    pub(crate) trace_id: &'a str,
    pub(crate) time: Timestamp,
    pub(crate) user_id: &'a str,
    pub(crate) skill: QualifiedName,
    pub(crate) intent: QualifiedName,
    pub(crate) profiles: &'a UserProfiles,
    pub(crate) services: &'a mut ServiceRegistry,
    pub(crate) bus: &'a mut Bus,
    pub(crate) calls: usize,
    pub(crate) last_response: Option<QualifiedName>,
}

impl SkillContext<'_> {
    pub fn user_id(&self) -> &str {
        self.user_id
    }

    pub fn time(&self) -> Timestamp {
        self.time
    }

    pub fn datapoint(&self, data_type: &str) -> Option<&str> {
        self.profiles.value(self.user_id, data_type)
    }

    fn role(&self, base: &str) -> QualifiedName {
        match self.calls {
            0 => ids::trace_node(self.trace_id, base),
            n => ids::trace_node(self.trace_id, &format!("{base}-{}", n + 1)),
        }
    }

    /// Calls an external service, sending the user's `data_type` datapoint.
    pub fn call_service(
        &mut self,
        service: &QualifiedName,
        endpoint: &str,
        params: &Params,
        data_type: &str,
    ) -> Result<Reply, SkillError> {
        let reply = self.services.call(self.trace_id, service, endpoint, params)?;
        let response = self.role("response");
        let msg = BusMessage::new(Topic::ProvSkillInvocation, self.trace_id, self.time)
            .with("invocation", self.role("invocation"))
            .with("skill", self.skill.clone())
            .with("service", service.clone())
            .with("intent", self.intent.clone())
            .with("request", self.role("request"))
            .with("user_datapoint", ids::user_datapoint(self.user_id, data_type))
            .with("response", response.clone())
            .with("status", reply.status)
            .with("endpoint", endpoint);
        self.bus.publish(msg);
        self.calls += 1;
        self.last_response = Some(response);
        Ok(reply)
    }
}

/// Skills in registration order; earlier skills win intent ties.
#[derive(Default)]
pub struct SkillRegistry {
    skills: Vec<Box<dyn Skill>>,
}

impl SkillRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, skill: Box<dyn Skill>) -> Result<(), SkillError> {
        let id = skill.id();
        if self.get(&id).is_some() {
            return Err(SkillError::DuplicateSkill(id));
        }
        self.skills.push(skill);
        Ok(())
    }

    pub fn get(&self, id: &QualifiedName) -> Option<&dyn Skill> {
        self.skills.iter().find(|s| &s.id() == id).map(|s| s.as_ref())
    }

    pub fn ids(&self) -> Vec<QualifiedName> {
        self.skills.iter().map(|s| s.id()).collect()
    }

    pub fn rules(&self) -> Vec<IntentRule> {
        self.skills.iter().flat_map(|s| s.intents()).collect()
    }

    pub fn len(&self) -> usize {
        self.skills.len()
    }

    pub fn is_empty(&self) -> bool {
        self.skills.is_empty()
    }
}
