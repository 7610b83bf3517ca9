//! Experiment runner for the dyadic commutator library: configuration,
//! seeded corpora, scenarios and report emission.

pub mod cli;
pub mod config;
pub mod corpus;
pub mod error;
pub mod funcio;
pub mod report;
pub mod scenarios;

pub use config::{Scenario, ScenarioConfig};
pub use error::RunError;
pub use report::{Cell, ReportRecord, Status};
