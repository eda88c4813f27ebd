//! HTTP session API and command implementations for the counterpoint engine.

pub mod api;
pub mod commands;

pub use api::{router, AppState};
