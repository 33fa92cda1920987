//! Co-allocation scheduling of dependent tasks over agent-managed
//! resource pools.
//!
//! A broker splits a task DAG into clusters no larger than
//! `tasks / agents + 1`, hands each cluster to the least-loaded agent, lets
//! every agent place its clusters on local resources with an
//! earliest-start list scheduler, then walks the cluster DAG level by level
//! telling agents when their external inputs become available so they can
//! delay their schedules. The assembled schedule is finally repaired so no
//! resource runs two tasks at once.
//!
//! ```no_run
//! use coalloc::{broker, model};
//!
//! # fn main() -> coalloc::Result<()> {
//! let tasks = model::parse_task_file(&std::fs::read_to_string("tasks.xml")?)?;
//! let resources = model::parse_resource_file(&std::fs::read_to_string("resources.xml")?)?;
//! let agents = model::parse_agent_map(&std::fs::read_to_string("agents.map")?)?;
//! let outcome = broker::orchestrate(&tasks, &resources, &agents)?;
//! println!("makespan {}", outcome.schedule.makespan);
//! # Ok(())
//! # }
//! ```
//!
//! The `examples/` directory has one runnable program per capability.

pub mod agent;
pub mod broker;
pub mod cli;
pub mod clustering;
pub mod error;
pub mod graph;
pub mod harness;
pub mod model;
pub mod protocol;
pub mod report;
pub mod time;

pub use error::{Error, Result};
pub use time::Seconds;
