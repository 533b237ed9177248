//! Scenario-driven front end for emhuygens: configuration, orchestration
//! and CSV output.

pub mod commands;
pub mod error;
pub mod scenario;
