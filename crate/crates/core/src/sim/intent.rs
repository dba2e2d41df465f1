//! Keyword intent matching.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::prov::QualifiedName;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IntentError {
    #[error("empty utterance")]
    EmptyUtterance,
    #[error("no intent matched")]
    NoIntentMatched,
    #[error("intent rule `{0}` has no required keywords")]
    NoRequiredKeywords(String),
    #[error("intent rule `{0}` lists a keyword as both required and optional")]
    OverlappingKeywords(String),
}

/// Words skipped when reading a slot value.
const FILLER: [&str; 4] = ["the", "a", "an", "my"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntentRule {
    pub skill_id: QualifiedName,
    pub intent_name: String,
    pub required: BTreeSet<String>,
    pub optional: BTreeSet<String>,
    /// `(slot, keyword)`: the slot takes the first non-filler token after the keyword.
    pub slots: Vec<(String, String)>,
}

impl IntentRule {
    pub fn new(
        skill_id: QualifiedName,
        intent_name: &str,
        required: &[&str],
        optional: &[&str],
    ) -> Result<Self, IntentError> {
        let required: BTreeSet<String> = required.iter().map(|w| w.to_lowercase()).collect();
        let optional: BTreeSet<String> = optional.iter().map(|w| w.to_lowercase()).collect();
        if required.is_empty() {
            return Err(IntentError::NoRequiredKeywords(intent_name.to_string()));
        }
        if !required.is_disjoint(&optional) {
            return Err(IntentError::OverlappingKeywords(intent_name.to_string()));
        }
        Ok(Self {
            skill_id,
            intent_name: intent_name.to_string(),
            required,
            optional,
            slots: Vec::new(),
        })
    }

    pub fn with_slot(mut self, slot: &str, after: &str) -> Self {
        self.slots.push((slot.to_string(), after.to_lowercase()));
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Intent {
    pub skill_id: QualifiedName,
    pub name: String,
    pub slots: BTreeMap<String, String>,
}

/// Lowercases, drops punctuation other than `-` and `'`, splits on whitespace.
pub fn normalize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .chars()
        .map(|c| {
            if c.is_alphanumeric() || c == '-' || c == '\'' {
                c
            } else {
                ' '
            }
        })
        .collect::<String>()
        .split_whitespace()
        .map(str::to_string)
        .collect()
}

/// Picks the rule with the most required keywords, then the most optional
/// matches, then the one registered first.
pub fn match_intent(rules: &[IntentRule], text: &str) -> Result<Intent, IntentError> {
    let tokens = normalize(text);
    if tokens.is_empty() {
        return Err(IntentError::EmptyUtterance);
    }
    let words: BTreeSet<&str> = tokens.iter().map(String::as_str).collect();
    let mut best: Option<((usize, usize), &IntentRule)> = None;
    for rule in rules {
        if !rule.required.iter().all(|w| words.contains(w.as_str())) {
            continue;
        }
        let optional = rule.optional.iter().filter(|w| words.contains(w.as_str())).count();
        let score = (rule.required.len(), optional);
        if best.is_none_or(|(b, _)| score > b) {
            best = Some((score, rule));
        }
    }
    let (_, rule) = best.ok_or(IntentError::NoIntentMatched)?;
    let mut slots = BTreeMap::new();
    for (slot, keyword) in &rule.slots {
        let value = tokens
            .iter()
            .position(|t| t == keyword)
            .and_then(|i| tokens[i + 1..].iter().find(|t| !FILLER.contains(&t.as_str())));
        if let Some(value) = value {
            slots.insert(slot.clone(), value.clone());
        }
    }
    Ok(Intent {
        skill_id: rule.skill_id.clone(),
        name: rule.intent_name.clone(),
        slots,
    })
}
