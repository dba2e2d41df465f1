//! Per-user personal data known to the assistant.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::ids;
use crate::prov::QualifiedName;

/// Registered personal data types.
pub const DATA_TYPES: [&str; 6] = ["geo-location", "name", "email", "phone", "address", "birthday"];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProfileError {
    #[error("unknown data type `{0}`")]
    UnknownDataType(String),
    #[error("invalid user id `{0}`")]
    InvalidUserId(String),
    #[error("empty value for {0}")]
    EmptyValue(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UserProfile {
    pub user_id: String,
    pub datapoints: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UserProfiles {
    users: BTreeMap<String, UserProfile>,
}

/// A datapoint resolved from its minted id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Datapoint<'a> {
    pub user_id: &'a str,
    pub data_type: &'a str,
    pub value: &'a str,
}

impl UserProfiles {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, user_id: &str, data_type: &str, value: &str) -> Result<(), ProfileError> {
        if !ids::is_token(user_id) {
            return Err(ProfileError::InvalidUserId(user_id.to_string()));
        }
        if !DATA_TYPES.contains(&data_type) {
            return Err(ProfileError::UnknownDataType(data_type.to_string()));
        }
        let value = value.trim();
        if value.is_empty() {
            return Err(ProfileError::EmptyValue(data_type.to_string()));
        }
        self.users
            .entry(user_id.to_string())
            .or_insert_with(|| UserProfile {
                user_id: user_id.to_string(),
                datapoints: BTreeMap::new(),
            })
            .datapoints
            .insert(data_type.to_string(), value.to_string());
        Ok(())
    }

    pub fn get(&self, user_id: &str) -> Option<&UserProfile> {
        self.users.get(user_id)
    }

    pub fn value(&self, user_id: &str, data_type: &str) -> Option<&str> {
        self.get(user_id)?.datapoints.get(data_type).map(String::as_str)
    }

    pub fn users(&self) -> impl Iterator<Item = &UserProfile> {
        self.users.values()
    }

    /// Looks up `user:<uid>/<type>`.
    pub fn resolve(&self, id: &QualifiedName) -> Option<Datapoint<'_>> {
        if id.prefix() != ids::USER.0 {
            return None;
        }
        let (user_id, data_type) = id.local().split_once('/')?;
        let profile = self.users.get(user_id)?;
        let (data_type, value) = profile.datapoints.get_key_value(data_type)?;
        Some(Datapoint {
            user_id: &profile.user_id,
            data_type,
            value,
        })
    }
}
