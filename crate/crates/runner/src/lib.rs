//! Model access, run orchestration and file formats around `consensus-core`.

pub mod config;
pub mod dataset;
pub mod error;
pub mod formats;
pub mod gateway;
pub mod orchestrator;
pub mod pipeline;
pub mod prompts;

pub use config::{RunConfig, Task};
pub use error::{Result, RunError};
