//! Broker/agent messages and the ordered message log.

use std::fmt::{self, Write};

use crate::agent::PartialSchedule;
use crate::clustering::Cluster;
use crate::error::Error;
use crate::model::TaskSpec;
use crate::time::Seconds;

pub const USER: &str = "user";
pub const BROKER: &str = "broker";

/// Earliest start allowed for a task: producer end plus commTime.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Readiness {
    pub task_id: String,
    pub ready_time: Seconds,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AgentFault {
    Infeasible { task: String, agent: String },
    Protocol(String),
}

impl From<Error> for AgentFault {
    fn from(err: Error) -> Self {
        match err {
            Error::Infeasible { task, agent } => AgentFault::Infeasible { task, agent },
            other => AgentFault::Protocol(other.to_string()),
        }
    }
}

impl From<AgentFault> for Error {
    fn from(fault: AgentFault) -> Self {
        match fault {
            AgentFault::Infeasible { task, agent } => Error::Infeasible { task, agent },
            AgentFault::Protocol(message) => Error::Protocol(message),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MessageKind {
    SubmitTasks,
    AssignCluster,
    ClusterScheduled,
    DependencyInfo,
    AdjustedSchedule,
    ScheduleResult,
    Rejected,
}

impl fmt::Display for MessageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Payload {
    /// User to broker.
    SubmitTasks {
        task_count: usize,
    },
    /// Broker to agent: a cluster and its tasks, with only intra-cluster
    /// dependencies kept.
    AssignCluster {
        cluster: Cluster,
        fragment: Vec<TaskSpec>,
    },
    ClusterScheduled {
        cluster_id: String,
        result: Result<PartialSchedule, AgentFault>,
    },
    /// One entry per task edge entering the cluster.
    DependencyInfo {
        cluster_id: String,
        readiness: Vec<Readiness>,
    },
    AdjustedSchedule {
        cluster_id: String,
        result: Result<PartialSchedule, AgentFault>,
    },
    /// Broker to user: (taskId, resourceId) mappings.
    ScheduleResult {
        mappings: Vec<(String, String)>,
    },
    Rejected {
        reason: String,
    },
}

impl Payload {
    pub fn kind(&self) -> MessageKind {
        match self {
            Payload::SubmitTasks { .. } => MessageKind::SubmitTasks,
            Payload::AssignCluster { .. } => MessageKind::AssignCluster,
            Payload::ClusterScheduled { .. } => MessageKind::ClusterScheduled,
            Payload::DependencyInfo { .. } => MessageKind::DependencyInfo,
            Payload::AdjustedSchedule { .. } => MessageKind::AdjustedSchedule,
            Payload::ScheduleResult { .. } => MessageKind::ScheduleResult,
            Payload::Rejected { .. } => MessageKind::Rejected,
        }
    }

    pub fn cluster_id(&self) -> Option<&str> {
        match self {
            Payload::AssignCluster { cluster, .. } => Some(&cluster.cluster_id),
            Payload::ClusterScheduled { cluster_id, .. }
            | Payload::DependencyInfo { cluster_id, .. }
            | Payload::AdjustedSchedule { cluster_id, .. } => Some(cluster_id),
            _ => None,
        }
    }

    pub fn summary(&self) -> String {
        let schedule = |cluster_id: &str, result: &Result<PartialSchedule, AgentFault>| match result {
            Ok(partial) => {
                let mut s = format!("cluster={cluster_id} placements=");
                for (i, p) in partial.placements.iter().enumerate() {
                    let sep = if i == 0 { "" } else { ";" };
                    let _ = write!(s, "{sep}{}@{}[{},{})", p.task_id, p.resource_id, p.start, p.end);
                }
                s
            }
            Err(AgentFault::Infeasible { task, .. }) => format!("cluster={cluster_id} infeasible={task}"),
            Err(AgentFault::Protocol(m)) => format!("cluster={cluster_id} error={m}"),
        };
        match self {
            Payload::SubmitTasks { task_count } => format!("tasks={task_count}"),
            Payload::AssignCluster { cluster, .. } => {
                format!("cluster={} tasks={}", cluster.cluster_id, cluster.tasks.join(","))
            }
            Payload::ClusterScheduled { cluster_id, result } | Payload::AdjustedSchedule { cluster_id, result } => {
                schedule(cluster_id, result)
            }
            Payload::DependencyInfo { cluster_id, readiness } => {
                let entries: Vec<String> = readiness
                    .iter()
                    .map(|r| format!("{}:{}", r.task_id, r.ready_time))
                    .collect();
                format!("cluster={cluster_id} ready={}", entries.join(";"))
            }
            Payload::ScheduleResult { mappings } => format!("mappings={}", mappings.len()),
            Payload::Rejected { reason } => format!("reason={reason}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Message {
    pub sender: String,
    pub receiver: String,
    pub payload: Payload,
}

impl Message {
    pub fn new(sender: impl Into<String>, receiver: impl Into<String>, payload: Payload) -> Self {
        Message {
            sender: sender.into(),
            receiver: receiver.into(),
            payload,
        }
    }

    pub fn kind(&self) -> MessageKind {
        self.payload.kind()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogEntry {
    pub seq: u64,
    pub message: Message,
}

/// Messages in broker order, numbered from 1.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MessageLog {
    entries: Vec<LogEntry>,
}

impl MessageLog {
    pub fn record(&mut self, message: Message) {
        let seq = self.entries.len() as u64 + 1;
        self.entries.push(LogEntry { seq, message });
    }

    pub fn entries(&self) -> &[LogEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Kinds of the messages about one cluster, in log order.
    pub fn cluster_sequence(&self, cluster_id: &str) -> Vec<MessageKind> {
        self.entries
            .iter()
            .filter(|e| e.message.payload.cluster_id() == Some(cluster_id))
            .map(|e| e.message.kind())
            .collect()
    }

    /// Tab-separated `seq sender receiver kind summary` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let m = &e.message;
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}",
                e.seq,
                m.sender,
                m.receiver,
                m.kind(),
                m.payload.summary()
            );
        }
        out
    }
}
