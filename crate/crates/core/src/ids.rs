//! Namespaces, vocabulary terms and runtime identifier minting.
//!
//! Runtime ids follow `trace:<trace_id>/<role>` so rows from different
//! templates join on the same node when they describe the same thing.

use crate::prov::QualifiedName;

pub const VAR: (&str, &str) = ("var", "http://openprovenance.org/var#");
pub const SAIS: (&str, &str) = ("sais", "urn:provaud:sais#");
pub const TRACE: (&str, &str) = ("trace", "urn:provaud:trace:");
pub const USER: (&str, &str) = ("user", "urn:provaud:user:");
pub const SERVICE: (&str, &str) = ("svc", "urn:provaud:service:");
pub const SKILL: (&str, &str) = ("mycroft", "urn:provaud:skill:");
pub const CORE: (&str, &str) = ("core", "urn:provaud:core:");

/// Namespaces the canonical templates declare.
pub const RUNTIME_NAMESPACES: [(&str, &str); 6] = [SAIS, TRACE, USER, SERVICE, SKILL, CORE];

fn name(prefix: &str, local: &str) -> QualifiedName {
    QualifiedName::new(prefix, local).expect("vocabulary names are valid")
}

pub fn sais(local: &str) -> QualifiedName {
    name(SAIS.0, local)
}

pub fn user_data_type() -> QualifiedName {
    sais("UserData")
}

pub fn api_response_type() -> QualifiedName {
    sais("APIResponse")
}

pub fn skill_invocation_type() -> QualifiedName {
    sais("SkillInvocation")
}

pub fn skill_response_type() -> QualifiedName {
    sais("SkillResponse")
}

pub fn data_type_key() -> QualifiedName {
    sais("data_type")
}

pub fn data_value_key() -> QualifiedName {
    sais("data_value")
}

pub fn action_key() -> QualifiedName {
    sais("action")
}

pub fn status_key() -> QualifiedName {
    sais("status")
}

pub fn intent_service() -> QualifiedName {
    name(CORE.0, "intent-service")
}

/// User ids, data types and trace ids are plain tokens so that minted
/// names stay valid: `[A-Za-z0-9_.-]+`.
pub fn is_token(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

/// `trace:<trace_id>/<role>`
pub fn trace_node(trace_id: &str, role: &str) -> QualifiedName {
    name(TRACE.0, &format!("{trace_id}/{role}"))
}

pub fn user_agent(user_id: &str) -> QualifiedName {
    name(USER.0, user_id)
}

pub fn user_datapoint(user_id: &str, data_type: &str) -> QualifiedName {
    name(USER.0, &format!("{user_id}/{data_type}"))
}

pub fn service(local: &str) -> QualifiedName {
    name(SERVICE.0, local)
}

pub fn skill(local: &str) -> QualifiedName {
    name(SKILL.0, local)
}

/// Accepts `mycroft:weather-skill` or the bare `weather-skill`.
pub fn parse_skill_id(text: &str) -> Option<QualifiedName> {
    if text.contains(':') {
        text.parse().ok()
    } else {
        QualifiedName::new(SKILL.0, text).ok()
    }
}
