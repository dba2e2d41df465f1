use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use super::{Template, TemplateError, INTENT_MATCHING, SA_RESPONSE, SKILL_INVOCATION, USER_DATAPOINT};
use crate::prov::serialize_provn;

pub const CANONICAL_TEMPLATE_IDS: [&str; 4] = [SKILL_INVOCATION, SA_RESPONSE, INTENT_MATCHING, USER_DATAPOINT];

const CANONICAL_SOURCES: [(&str, &str); 4] = [
    (SKILL_INVOCATION, include_str!("../../templates/skill_invocation.provn")),
    (SA_RESPONSE, include_str!("../../templates/sa_response.provn")),
    (INTENT_MATCHING, include_str!("../../templates/intent_matching.provn")),
    (USER_DATAPOINT, include_str!("../../templates/user_datapoint.provn")),
];

/// Templates by id: the four canonical ones plus registered extras.
#[derive(Debug, Clone)]
pub struct TemplateCatalogue {
    templates: BTreeMap<String, Template>,
}

impl Default for TemplateCatalogue {
    fn default() -> Self {
        Self::canonical()
    }
}

impl TemplateCatalogue {
    pub fn canonical() -> Self {
        let templates = CANONICAL_SOURCES
            .iter()
            .map(|(id, text)| {
                let template = Template::load(*id, text).expect("bundled templates parse");
                (id.to_string(), template)
            })
            .collect();
        Self { templates }
    }

    pub fn canonical_source(id: &str) -> Option<&'static str> {
        CANONICAL_SOURCES
            .iter()
            .find(|(tid, _)| *tid == id)
            .map(|(_, text)| *text)
    }

    pub fn register(&mut self, template: Template) -> Result<(), TemplateError> {
        if self.templates.contains_key(template.id()) {
            return Err(TemplateError::DuplicateTemplate(template.id().to_string()));
        }
        self.templates.insert(template.id().to_string(), template);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&Template> {
        self.templates.get(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.templates.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    /// Registers every `<id>.provn` under `dir`. Files for canonical ids are
    /// accepted only when they describe the same body as the bundled template.
    pub fn load_dir(&mut self, dir: &Path) -> Result<usize, TemplateError> {
        let io = |message: String| TemplateError::Io {
            path: dir.display().to_string(),
            message,
        };
        let mut paths: Vec<_> = fs::read_dir(dir)
            .map_err(|e| io(e.to_string()))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|ext| ext == "provn"))
            .collect();
        paths.sort();
        let mut added = 0;
        for path in paths {
            let Some(id) = path.file_stem().and_then(|s| s.to_str()) else {
                continue;
            };
            let text = fs::read_to_string(&path).map_err(|e| TemplateError::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            let template = Template::load(id, &text)?;
            match self.templates.get(id) {
                Some(existing) if CANONICAL_TEMPLATE_IDS.contains(&id) => {
                    if existing.body() != template.body() {
                        return Err(TemplateError::DuplicateTemplate(id.to_string()));
                    }
                }
                _ => {
                    self.register(template)?;
                    added += 1;
                }
            }
        }
        Ok(added)
    }

    /// Writes every template as `<dir>/<id>.provn`.
    pub fn write_dir(&self, dir: &Path) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        for (id, template) in &self.templates {
            let text = match Self::canonical_source(id) {
                Some(source) => source.to_string(),
                None => serialize_provn(template.body())
                    .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?,
            };
            fs::write(dir.join(format!("{id}.provn")), text)?;
        }
        Ok(())
    }
}
