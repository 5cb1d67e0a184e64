//! Scenario files and the batch runner behind the `finsler-lab` binary.

pub mod run;
pub mod scenario;

pub use run::{run, RunReport, TaskStatus, EXIT_HYPOTHESIS, EXIT_OK, EXIT_PARSE, EXIT_VERIFICATION_FAILED};
pub use scenario::{parse, resolve, Resolved, Scenario, ScenarioError, TASKS};
