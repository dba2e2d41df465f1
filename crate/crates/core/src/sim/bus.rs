//! Synchronous in-process message bus.
//!
//! Delivery is per-subscriber FIFO: every matching subscriber's mailbox gets
//! the message at publish time, in publish order. The bus also keeps a
//! journal of everything published, which becomes the simulation log.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prov::Literal;
use crate::time::Timestamp;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BusError {
    #[error("unknown topic `{0}`")]
    UnknownTopic(String),
    #[error("no such subscription")]
    UnknownSubscription,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Topic {
    #[serde(rename = "utterance")]
    Utterance,
    #[serde(rename = "intent.matched")]
    IntentMatched,
    #[serde(rename = "prov.intent_matching")]
    ProvIntentMatching,
    #[serde(rename = "prov.skill_invocation")]
    ProvSkillInvocation,
    #[serde(rename = "prov.sa_response")]
    ProvSaResponse,
    #[serde(rename = "skill.response")]
    SkillResponse,
}

impl Topic {
    pub const ALL: [Topic; 6] = [
        Topic::Utterance,
        Topic::IntentMatched,
        Topic::ProvIntentMatching,
        Topic::ProvSkillInvocation,
        Topic::ProvSaResponse,
        Topic::SkillResponse,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Topic::Utterance => "utterance",
            Topic::IntentMatched => "intent.matched",
            Topic::ProvIntentMatching => "prov.intent_matching",
            Topic::ProvSkillInvocation => "prov.skill_invocation",
            Topic::ProvSaResponse => "prov.sa_response",
            Topic::SkillResponse => "skill.response",
        }
    }

    pub fn is_prov(self) -> bool {
        self.as_str().starts_with("prov.")
    }
}

impl fmt::Display for Topic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Topic {
    type Err = BusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Topic::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| BusError::UnknownTopic(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BusMessage {
    pub topic: Topic,
    pub trace_id: String,
    pub sim_time: Timestamp,
    pub payload: BTreeMap<String, Literal>,
}

impl BusMessage {
    pub fn new(topic: Topic, trace_id: impl Into<String>, sim_time: Timestamp) -> Self {
        Self {
            topic,
            trace_id: trace_id.into(),
            sim_time,
            payload: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<Literal>) -> Self {
        self.payload.insert(key.to_string(), value.into());
        self
    }

    pub fn field(&self, key: &str) -> Option<&Literal> {
        self.payload.get(key)
    }
}

/// `utterance`, `prov.*` or `*`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TopicFilter {
    Exact(Topic),
    Prefix(String),
    All,
}

impl TopicFilter {
    pub fn matches(&self, topic: Topic) -> bool {
        match self {
            TopicFilter::Exact(t) => *t == topic,
            TopicFilter::Prefix(p) => topic.as_str().starts_with(p.as_str()),
            TopicFilter::All => true,
        }
    }
}

impl FromStr for TopicFilter {
    type Err = BusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "*" {
            return Ok(TopicFilter::All);
        }
        if let Some(stem) = s.strip_suffix('*') {
            let filter = TopicFilter::Prefix(stem.to_string());
            if Topic::ALL.into_iter().any(|t| filter.matches(t)) {
                return Ok(filter);
            }
            return Err(BusError::UnknownTopic(s.to_string()));
        }
        s.parse().map(TopicFilter::Exact)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubscriptionId(usize);

#[derive(Debug, Default)]
pub struct Bus {
    subscribers: Vec<(TopicFilter, VecDeque<BusMessage>)>,
    journal: Vec<BusMessage>,
}

impl Bus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn subscribe(&mut self, filter: &str) -> Result<SubscriptionId, BusError> {
        let filter = filter.parse()?;
        self.subscribers.push((filter, VecDeque::new()));
        Ok(SubscriptionId(self.subscribers.len() - 1))
    }

    pub fn publish(&mut self, msg: BusMessage) {
        for (filter, mailbox) in &mut self.subscribers {
            if filter.matches(msg.topic) {
                mailbox.push_back(msg.clone());
            }
        }
        self.journal.push(msg);
    }

    /// Publishes to a topic given by name.
    pub fn publish_named(
        &mut self,
        topic: &str,
        trace_id: &str,
        sim_time: Timestamp,
        payload: BTreeMap<String, Literal>,
    ) -> Result<(), BusError> {
        let mut msg = BusMessage::new(topic.parse()?, trace_id, sim_time);
        msg.payload = payload;
        self.publish(msg);
        Ok(())
    }

    pub fn drain(&mut self, id: SubscriptionId) -> Result<Vec<BusMessage>, BusError> {
        let (_, mailbox) = self.subscribers.get_mut(id.0).ok_or(BusError::UnknownSubscription)?;
        Ok(mailbox.drain(..).collect())
    }

    pub fn journal(&self) -> &[BusMessage] {
        &self.journal
    }

    pub fn take_journal(&mut self) -> Vec<BusMessage> {
        std::mem::take(&mut self.journal)
    }
}
