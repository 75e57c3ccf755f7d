//! Deterministic multi-party simulation of the data-sharing protocol.
//!
//! A key curator registers users and publishes each state digest, a data
//! owner encrypts and publishes tags, a user posts a decryption task, a
//! server answers it (honestly or not) and a public verifier arbitrates
//! disputes. Every party draws randomness from one seeded generator.

mod engine;
mod fuzz;
mod scenario;
mod store;

pub use engine::{
    audit_state_log, run_dispute_case, run_happy_case, run_scenario, Outcome, ScenarioError,
    ScenarioReport, Step,
};
pub use fuzz::{fuzz_traces, random_scenario, FuzzSummary};
pub use scenario::{Backend, DcsStrategy, DuStrategy, Scenario, UserSpec};
pub use store::ContentStore;
