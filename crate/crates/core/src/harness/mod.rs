//! Checking and measuring schedules, and generating workloads to feed them.
//!
//! Nothing in here calls into the scheduling code paths; the validator is
//! written against the data model alone so it can act as an oracle.

mod corpus;
mod generate;
mod metrics;
mod validate;

pub use corpus::{corpus_instance, Instance};
pub use generate::{generate_platform, generate_workload, PlatformParams, WorkloadParams};
pub use metrics::{compute_metrics, Metrics};
pub use validate::{
    validate_schedule, DeadlineMiss, EligibilityViolation, Overlap, PrecedenceViolation, ViolationReport,
};
