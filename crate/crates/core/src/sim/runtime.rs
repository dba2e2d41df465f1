//! The assistant runtime: matches utterances, runs skills and announces each
//! step on the bus.

use serde::Serialize;

use super::bus::{Bus, BusMessage, Topic};
use super::intent::{match_intent, IntentRule};
use super::profile::UserProfiles;
use super::scenario::Scenario;
use super::service::{ServiceCall, ServiceRegistry};
use super::skill::{SkillContext, SkillError, SkillRegistry};
use super::skills::skill_registry;
use crate::ids;
use crate::messages;
use crate::prov::QualifiedName;
use crate::time::Timestamp;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TurnOutcome {
    Answered {
        skill: QualifiedName,
        skill_name: String,
        speech: String,
        action: Option<String>,
    },
    NotUnderstood,
    Failed {
        skill: QualifiedName,
        error: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TurnReport {
    pub trace_id: String,
    pub time: Timestamp,
    pub user_id: String,
    pub text: String,
    pub outcome: TurnOutcome,
}

impl TurnReport {
    pub fn reply(&self) -> String {
        match &self.outcome {
            TurnOutcome::Answered { speech, .. } => speech.clone(),
            TurnOutcome::NotUnderstood => messages::NOT_UNDERSTOOD.to_string(),
            TurnOutcome::Failed { .. } => messages::SKILL_FAILED.to_string(),
        }
    }

    /// Two transcript lines: the user's utterance and the reply.
    pub fn transcript(&self) -> [String; 2] {
        let speaker = match &self.outcome {
            TurnOutcome::Answered { skill_name, .. } => Some(skill_name.as_str()),
            _ => None,
        };
        [
            messages::transcript_user(self.time, &self.user_id, &self.text),
            messages::transcript_assistant(self.time, speaker, &self.reply()),
        ]
    }
}

/// Everything published during a run, in publish order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SimulationLog {
    pub messages: Vec<BusMessage>,
}

impl SimulationLog {
    pub fn to_json_lines(&self) -> String {
        self.messages
            .iter()
            .map(|m| serde_json::to_string(m).expect("bus messages serialize") + "\n")
            .collect()
    }
}

pub struct Assistant {
    skills: SkillRegistry,
    services: ServiceRegistry,
    profiles: UserProfiles,
    bus: Bus,
    next_trace: u64,
}

impl Assistant {
    pub fn new(skills: SkillRegistry, services: ServiceRegistry, profiles: UserProfiles) -> Self {
        Self {
            skills,
            services,
            profiles,
            bus: Bus::new(),
            next_trace: 1,
        }
    }

    /// Assistant with the scenario's skills and profiles.
    pub fn for_scenario(scenario: &Scenario, services: ServiceRegistry) -> Result<Self, SkillError> {
        Ok(Self::new(
            skill_registry(&scenario.skills)?,
            services,
            scenario.profiles.clone(),
        ))
    }

    pub fn bus_mut(&mut self) -> &mut Bus {
        &mut self.bus
    }

    pub fn bus(&self) -> &Bus {
        &self.bus
    }

    pub fn services(&self) -> &ServiceRegistry {
        &self.services
    }

    pub fn services_mut(&mut self) -> &mut ServiceRegistry {
        &mut self.services
    }

    pub fn profiles(&self) -> &UserProfiles {
        &self.profiles
    }

    pub fn profiles_mut(&mut self) -> &mut UserProfiles {
        &mut self.profiles
    }

    pub fn skills(&self) -> &SkillRegistry {
        &self.skills
    }

    pub fn rules(&self) -> Vec<IntentRule> {
        self.skills.rules()
    }

    pub fn set_next_trace(&mut self, n: u64) {
        self.next_trace = n;
    }

    pub fn service_calls(&self) -> &[ServiceCall] {
        self.services.calls()
    }

    pub fn log(&self) -> SimulationLog {
        SimulationLog {
            messages: self.bus.journal().to_vec(),
        }
    }

    pub fn handle_utterance(&mut self, time: Timestamp, user_id: &str, text: &str) -> TurnReport {
        let trace_id = format!("t{:04}", self.next_trace);
        self.next_trace += 1;
        let node = |role: &str| ids::trace_node(&trace_id, role);
        let report = |outcome| TurnReport {
            trace_id: trace_id.clone(),
            time,
            user_id: user_id.to_string(),
            text: text.to_string(),
            outcome,
        };

        self.bus.publish(
            BusMessage::new(Topic::Utterance, &trace_id, time)
                .with("user", user_id)
                .with("text", text),
        );
        let Ok(intent) = match_intent(&self.skills.rules(), text) else {
            tracing::debug!(trace = %trace_id, "no intent matched");
            return report(TurnOutcome::NotUnderstood);
        };
        self.bus.publish(
            BusMessage::new(Topic::ProvIntentMatching, &trace_id, time)
                .with("matching", node("matching"))
                .with("utterance", node("utterance"))
                .with("intent", node("intent"))
                .with("user", ids::user_agent(user_id))
                .with("text", text)
                .with("intent_name", intent.name.as_str()),
        );

        let skill = self
            .skills
            .get(&intent.skill_id)
            .expect("rules come from registered skills");
        let skill_name = skill.display_name().to_string();
        let mut ctx = SkillContext {
            trace_id: &trace_id,
            time,
            user_id,
            skill: intent.skill_id.clone(),
            intent: node("intent"),
            profiles: &self.profiles,
            services: &mut self.services,
            bus: &mut self.bus,
            calls: 0,
            last_response: None,
        };
        let result = skill.handle(&intent, &mut ctx);
        let response = ctx.last_response.take().unwrap_or_else(|| node("result"));
        let outcome = match result {
            Ok(outcome) => outcome,
            Err(err) => {
                tracing::warn!(trace = %trace_id, skill = %intent.skill_id, "skill failed: {err}");
                return report(TurnOutcome::Failed {
                    skill: intent.skill_id,
                    error: err.to_string(),
                });
            }
        };
        self.bus.publish(
            BusMessage::new(Topic::ProvSaResponse, &trace_id, time)
                .with("handling", node("handling"))
                .with("skill", intent.skill_id.clone())
                .with("intent", node("intent"))
                .with("response", response)
                .with("voice_response", node("voice_response"))
                .with("action", outcome.action.as_deref().unwrap_or("none"))
                .with("text", outcome.speech.as_str()),
        );
        self.bus.publish(
            BusMessage::new(Topic::SkillResponse, &trace_id, time)
                .with("skill", intent.skill_id.clone())
                .with("text", outcome.speech.as_str()),
        );
        report(TurnOutcome::Answered {
            skill: intent.skill_id,
            skill_name,
            speech: outcome.speech,
            action: outcome.action,
        })
    }

    /// Plays every turn of the scenario in time order.
    pub fn run(&mut self, scenario: &Scenario) -> Vec<TurnReport> {
        scenario
            .turns
            .iter()
            .map(|turn| self.handle_utterance(turn.time, &turn.user_id, &turn.text))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::skills::demo_services;

    fn weather() -> Scenario {
        Scenario::parse(
            "@datapoint alice geo-location 51.5128,-0.1168\n\
             2024-03-12T08:00:00Z | alice | What is the weather today?\n\
             2024-03-12T08:01:00Z | alice | Sing me a song\n\
             2024-03-12T08:02:00Z | alice | Open the garage door\n",
        )
        .unwrap()
    }

    #[test]
    fn message_sequence_for_a_service_turn() {
        let mut a = Assistant::for_scenario(&weather(), demo_services()).unwrap();
        let reports = a.run(&weather());
        let topics: Vec<_> = a
            .bus()
            .journal()
            .iter()
            .filter(|m| m.trace_id == "t0001")
            .map(|m| m.topic.as_str())
            .collect();
        assert_eq!(
            topics,
            vec![
                "utterance",
                "prov.intent_matching",
                "prov.skill_invocation",
                "prov.sa_response",
                "skill.response"
            ]
        );
        assert!(matches!(reports[0].outcome, TurnOutcome::Answered { .. }));
        assert_eq!(reports[1].outcome, TurnOutcome::NotUnderstood);
        assert_eq!(reports[1].reply(), messages::NOT_UNDERSTOOD);
        assert_eq!(a.service_calls().len(), 1);
    }

    #[test]
    fn unmatched_turn_only_publishes_the_utterance() {
        let mut a = Assistant::for_scenario(&weather(), demo_services()).unwrap();
        a.run(&weather());
        let count = a.bus().journal().iter().filter(|m| m.trace_id == "t0002").count();
        assert_eq!(count, 1);
    }

    #[test]
    fn action_without_service_call_uses_a_result_entity() {
        let mut a = Assistant::for_scenario(&weather(), demo_services()).unwrap();
        a.run(&weather());
        let sa = a
            .bus()
            .journal()
            .iter()
            .find(|m| m.trace_id == "t0003" && m.topic == Topic::ProvSaResponse)
            .unwrap();
        assert_eq!(sa.field("response").unwrap().display_value(), "trace:t0003/result");
        assert_eq!(sa.field("action").unwrap().display_value(), "door_opened");
    }

    #[test]
    fn down_service_still_logs_the_call() {
        let mut services = demo_services();
        services
            .get_mut(&ids::service("openweather"))
            .unwrap()
            .set_available(false);
        let mut a = Assistant::for_scenario(&weather(), services).unwrap();
        let reports = a.run(&weather());
        let inv = a
            .bus()
            .journal()
            .iter()
            .find(|m| m.topic == Topic::ProvSkillInvocation)
            .unwrap();
        assert_eq!(inv.field("status"), Some(&crate::prov::Literal::Int(503)));
        assert!(reports[0].reply().contains("503"));
    }
}
