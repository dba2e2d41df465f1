//! Human names for services and skills.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use crate::prov::QualifiedName;
use crate::sim::{ServiceRegistry, SkillRegistry};

pub const NAMES_FILE: &str = "names.toml";

/// Qualified name to display name. Unknown names fall back to the local part.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DisplayNames {
    names: BTreeMap<QualifiedName, String>,
}

impl DisplayNames {
    pub fn new() -> Self {
        Self::default()
    }

    /// Names of everything registered with the assistant.
    pub fn from_registries(skills: &SkillRegistry, services: &ServiceRegistry) -> Self {
        let mut names = Self::new();
        for id in skills.ids() {
            let skill = skills.get(&id).expect("listed ids resolve");
            names.insert(id, skill.display_name());
        }
        for stub in services.stubs() {
            names.insert(stub.id().clone(), stub.display_name());
        }
        names
    }

    /// Names of the built-in skills and demo services.
    pub fn builtin() -> Self {
        let skills = crate::sim::skill_registry(&[]).expect("built-ins register");
        Self::from_registries(&skills, &crate::sim::demo_services())
    }

    pub fn insert(&mut self, id: QualifiedName, name: &str) {
        self.names.insert(id, name.to_string());
    }

    pub fn name(&self, id: &QualifiedName) -> String {
        self.names.get(id).cloned().unwrap_or_else(|| id.local().to_string())
    }

    /// Finds an id whose display name or local part matches `text`,
    /// ignoring case and a trailing `-skill`. Falls back to a prefix match.
    pub fn find(&self, text: &str) -> Option<&QualifiedName> {
        let want = text.to_lowercase();
        let strip = |s: &str| {
            s.strip_suffix("-skill")
                .map(str::to_string)
                .unwrap_or_else(|| s.to_string())
        };
        let exact = self.names.iter().find_map(|(id, name)| {
            let local = id.local().to_lowercase();
            let hit =
                name.to_lowercase() == want || local == want || strip(&local) == strip(&want) || id.to_string() == text;
            hit.then_some(id)
        });
        exact.or_else(|| {
            self.names.iter().find_map(|(id, name)| {
                let hit = name.to_lowercase().starts_with(&want) || id.local().to_lowercase().starts_with(&want);
                hit.then_some(id)
            })
        })
    }

    pub fn to_toml(&self) -> String {
        let table: BTreeMap<String, &String> = self.names.iter().map(|(k, v)| (k.to_string(), v)).collect();
        toml::to_string(&table).expect("string tables serialize")
    }

    pub fn from_toml(text: &str) -> Result<Self, String> {
        let table: BTreeMap<String, String> = toml::from_str(text).map_err(|e| e.to_string())?;
        let mut names = Self::new();
        for (k, v) in table {
            let id: QualifiedName = k.parse().map_err(|e| format!("{k}: {e}"))?;
            names.insert(id, &v);
        }
        Ok(names)
    }

    /// Built-in names overlaid with `<out_dir>/names.toml` when present.
    pub fn load(out_dir: &Path) -> io::Result<Self> {
        let mut names = Self::builtin();
        match fs::read_to_string(out_dir.join(NAMES_FILE)) {
            Ok(text) => {
                let extra = Self::from_toml(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
                names.names.extend(extra.names);
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => {}
            Err(e) => return Err(e),
        }
        Ok(names)
    }
}
