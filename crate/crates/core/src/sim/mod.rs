//! A small simulated voice assistant that announces what it does on a bus.

pub mod bus;
pub mod intent;
pub mod profile;
pub mod runtime;
pub mod scenario;
pub mod service;
pub mod skill;
pub mod skills;

pub use bus::{Bus, BusError, BusMessage, SubscriptionId, Topic, TopicFilter};
pub use intent::{match_intent, normalize, Intent, IntentError, IntentRule};
pub use profile::{ProfileError, UserProfile, UserProfiles, DATA_TYPES};
pub use runtime::{Assistant, SimulationLog, TurnOutcome, TurnReport};
pub use scenario::{Scenario, ScenarioError, Turn};
pub use service::{Params, Reply, ServiceCall, ServiceError, ServiceRegistry, ServiceStub};
pub use skill::{Skill, SkillContext, SkillError, SkillOutcome, SkillRegistry};
pub use skills::{builtin_skill, demo_services, skill_registry};
