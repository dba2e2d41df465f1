//! Provenance audit engine for conversational assistants.
//!
//! A simulated assistant emits instrumentation messages while it matches
//! intents and runs skills. The [`auditor`] turns those messages into binding
//! rows for a small set of provenance templates, and audit trails are rebuilt
//! on demand by expanding the templates ([`template`]). Trails can be queried
//! and narrated ([`query`]) or mined for behavioural norms ([`norms`]).

pub mod auditor;
pub mod demo;
pub mod ids;
pub mod messages;
pub mod norms;
pub mod pipeline;
pub mod prov;
pub mod query;
pub mod sim;
pub mod template;
pub mod time;

pub use time::Timestamp;
