//! Scenario replay: assistant and auditor wired together over the bus.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::auditor::{AuditError, Auditor, IngestStats, TEMPLATES_DIR};
use crate::query::{DisplayNames, NAMES_FILE};
use crate::sim::{Assistant, Scenario, ServiceCall, ServiceRegistry, SimulationLog, SkillError, TurnReport};
use crate::template::TemplateCatalogue;

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error(transparent)]
    Skill(#[from] SkillError),
    #[error(transparent)]
    Audit(Box<AuditError>),
    #[error("storage error on {path}: {source}")]
    Storage {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl From<AuditError> for ReplayError {
    fn from(e: AuditError) -> Self {
        ReplayError::Audit(Box::new(e))
    }
}

#[derive(Debug, Clone)]
pub struct Replay {
    pub reports: Vec<TurnReport>,
    pub log: SimulationLog,
    pub calls: Vec<ServiceCall>,
    pub stats: IngestStats,
}

/// Plays a scenario and stores its bindings under `out_dir`, replacing any
/// previous log. Also writes the template catalogue and display names so the
/// directory is self-contained.
pub fn replay(scenario: &Scenario, services: ServiceRegistry, out_dir: &Path) -> Result<Replay, ReplayError> {
    let storage = |path: &Path| {
        let path = path.to_path_buf();
        move |source| ReplayError::Storage { path, source }
    };
    fs::create_dir_all(out_dir).map_err(storage(out_dir))?;
    let mut assistant = Assistant::for_scenario(scenario, services)?;
    let catalogue = TemplateCatalogue::canonical();
    let templates = out_dir.join(TEMPLATES_DIR);
    catalogue.write_dir(&templates).map_err(storage(&templates))?;
    let names_path = out_dir.join(NAMES_FILE);
    let names = DisplayNames::from_registries(assistant.skills(), assistant.services());
    fs::write(&names_path, names.to_toml()).map_err(storage(&names_path))?;

    let mut auditor = Auditor::create(out_dir, catalogue)?;
    let sub = assistant.bus_mut().subscribe("prov.*").expect("valid filter");
    let mut reports = Vec::new();
    for turn in &scenario.turns {
        reports.push(assistant.handle_utterance(turn.time, &turn.user_id, &turn.text));
        let pending = assistant.bus_mut().drain(sub).expect("own subscription");
        for msg in &pending {
            auditor.handle(msg, assistant.profiles())?;
        }
    }
    Ok(Replay {
        reports,
        log: assistant.log(),
        calls: assistant.service_calls().to_vec(),
        stats: auditor.stats(),
    })
}
