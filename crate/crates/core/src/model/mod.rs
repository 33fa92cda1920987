//! Domain types: tasks, resources, agents and schedules.

mod agents;
mod schedule_io;
mod xml;

use std::collections::HashSet;

pub use agents::{parse_agent_map, write_agent_map};
pub use schedule_io::{read_schedule_csv, write_schedule_csv};
pub use xml::{parse_resource_file, parse_task_file, write_resource_file, write_task_file};

use crate::error::{Error, Result};
use crate::time::Seconds;

/// An incoming data dependency on another task.
#[derive(Clone, Debug, PartialEq)]
pub struct Dependency {
    pub task_id: String,
    /// Transfer cost, paid only when producer and consumer sit on different resources.
    pub comm_time: Seconds,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TaskSpec {
    pub task_id: String,
    pub processing_time: Seconds,
    pub memory: f64,
    pub cpu_power: f64,
    /// Absolute finish-by instant, measured from schedule origin 0.
    pub deadline: Option<Seconds>,
    pub dependencies: Vec<Dependency>,
}

impl TaskSpec {
    pub fn new(task_id: impl Into<String>, processing_time: Seconds) -> Self {
        TaskSpec {
            task_id: task_id.into(),
            processing_time,
            memory: 0.0,
            cpu_power: 0.0,
            deadline: None,
            dependencies: Vec::new(),
        }
    }

    pub fn with_requirements(mut self, memory: f64, cpu_power: f64) -> Self {
        self.memory = memory;
        self.cpu_power = cpu_power;
        self
    }

    pub fn with_deadline(mut self, deadline: Seconds) -> Self {
        self.deadline = Some(deadline);
        self
    }

    pub fn depends_on(mut self, task_id: impl Into<String>, comm_time: Seconds) -> Self {
        self.dependencies.push(Dependency {
            task_id: task_id.into(),
            comm_time,
        });
        self
    }

    fn check(&self) -> std::result::Result<(), String> {
        if self.task_id.is_empty() {
            return Err("empty taskId".into());
        }
        if self.processing_time.is_negative() {
            return Err(format!("task `{}`: negative processingTime", self.task_id));
        }
        check_amount(self.memory).map_err(|m| format!("task `{}`: memory {m}", self.task_id))?;
        check_amount(self.cpu_power).map_err(|m| format!("task `{}`: cpuPower {m}", self.task_id))?;
        if self.deadline.is_some_and(Seconds::is_negative) {
            return Err(format!("task `{}`: negative deadlineTime", self.task_id));
        }
        for dep in &self.dependencies {
            if dep.task_id == self.task_id {
                return Err(format!("task `{}` depends on itself", self.task_id));
            }
            if dep.comm_time.is_negative() {
                return Err(format!(
                    "task `{}`: negative commTime on dependency `{}`",
                    self.task_id, dep.task_id
                ));
            }
        }
        Ok(())
    }
}

fn check_amount(value: f64) -> std::result::Result<(), &'static str> {
    if !value.is_finite() {
        Err("is not a finite number")
    } else if value < 0.0 {
        Err("is negative")
    } else {
        Ok(())
    }
}

/// Tasks in input order, with unique ids.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TaskSet {
    tasks: Vec<TaskSpec>,
}

impl TaskSet {
    pub fn new(tasks: Vec<TaskSpec>) -> Result<Self> {
        let mut seen = HashSet::new();
        for task in &tasks {
            task.check().map_err(|message| Error::Invalid {
                element: "task".into(),
                line: 0,
                message,
            })?;
            if !seen.insert(task.task_id.as_str()) {
                return Err(Error::Duplicate {
                    kind: "task",
                    id: task.task_id.clone(),
                });
            }
        }
        Ok(TaskSet { tasks })
    }

    pub fn tasks(&self) -> &[TaskSpec] {
        &self.tasks
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn get(&self, task_id: &str) -> Option<&TaskSpec> {
        self.tasks.iter().find(|t| t.task_id == task_id)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, TaskSpec> {
        self.tasks.iter()
    }
}

impl<'a> IntoIterator for &'a TaskSet {
    type Item = &'a TaskSpec;
    type IntoIter = std::slice::Iter<'a, TaskSpec>;
    fn into_iter(self) -> Self::IntoIter {
        self.tasks.iter()
    }
}

/// A compute node. Holds one task at a time.
#[derive(Clone, Debug, PartialEq)]
pub struct ResourceSpec {
    pub id: String,
    pub node_name: String,
    pub cluster_name: String,
    pub farm_name: String,
    pub cpu_power: f64,
    pub memory: f64,
    /// Reported by the node; not consulted when scheduling.
    pub cpu_idle: f64,
}

impl ResourceSpec {
    pub fn new(id: impl Into<String>, cpu_power: f64, memory: f64) -> Self {
        let id = id.into();
        ResourceSpec {
            node_name: id.clone(),
            id,
            cluster_name: String::new(),
            farm_name: String::new(),
            cpu_power,
            memory,
            cpu_idle: 0.0,
        }
    }

    /// Whether this node satisfies the task's memory and CPU requirements.
    pub fn satisfies(&self, task: &TaskSpec) -> bool {
        self.memory >= task.memory && self.cpu_power >= task.cpu_power
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ResourceSet {
    resources: Vec<ResourceSpec>,
}

impl ResourceSet {
    pub fn new(resources: Vec<ResourceSpec>) -> Result<Self> {
        let mut seen = HashSet::new();
        for r in &resources {
            let invalid = |message: String| Error::Invalid {
                element: "Node".into(),
                line: 0,
                message,
            };
            if r.id.is_empty() {
                return Err(invalid("empty Id".into()));
            }
            for (name, value) in [
                ("CPUPower", r.cpu_power),
                ("Memory", r.memory),
                ("CPU_idle", r.cpu_idle),
            ] {
                check_amount(value).map_err(|m| invalid(format!("node `{}`: {name} {m}", r.id)))?;
            }
            if !seen.insert(r.id.as_str()) {
                return Err(Error::Duplicate {
                    kind: "resource",
                    id: r.id.clone(),
                });
            }
        }
        Ok(ResourceSet { resources })
    }

    pub fn resources(&self) -> &[ResourceSpec] {
        &self.resources
    }

    pub fn get(&self, id: &str) -> Option<&ResourceSpec> {
        self.resources.iter().find(|r| r.id == id)
    }

    pub fn len(&self) -> usize {
        self.resources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.resources.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ResourceSpec> {
        self.resources.iter()
    }
}

impl<'a> IntoIterator for &'a ResourceSet {
    type Item = &'a ResourceSpec;
    type IntoIter = std::slice::Iter<'a, ResourceSpec>;
    fn into_iter(self) -> Self::IntoIter {
        self.resources.iter()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AgentSpec {
    pub agent_id: String,
    pub resources: Vec<String>,
}

/// Which agent manages which resources. Each resource belongs to exactly
/// one agent once [`AgentMap::check_covers`] has passed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AgentMap {
    agents: Vec<AgentSpec>,
}

impl AgentMap {
    pub fn new(agents: Vec<AgentSpec>) -> Result<Self> {
        let mut ids = HashSet::new();
        let mut owned = HashSet::new();
        for (i, agent) in agents.iter().enumerate() {
            let fail = |message: String| Error::AgentMap { line: i + 1, message };
            if agent.agent_id.is_empty() {
                return Err(fail("empty agent id".into()));
            }
            if !ids.insert(agent.agent_id.as_str()) {
                return Err(fail(format!("duplicate agent `{}`", agent.agent_id)));
            }
            if agent.resources.is_empty() {
                return Err(fail(format!("agent `{}` manages no resources", agent.agent_id)));
            }
            for r in &agent.resources {
                if !owned.insert(r.as_str()) {
                    return Err(fail(format!("resource `{r}` is managed by more than one agent")));
                }
            }
        }
        Ok(AgentMap { agents })
    }

    /// Every resource in `resources` is managed, and nothing else is.
    pub fn check_covers(&self, resources: &ResourceSet) -> Result<()> {
        for (i, agent) in self.agents.iter().enumerate() {
            for r in &agent.resources {
                if resources.get(r).is_none() {
                    return Err(Error::AgentMap {
                        line: i + 1,
                        message: format!("agent `{}` names unknown resource `{r}`", agent.agent_id),
                    });
                }
            }
        }
        for r in resources {
            if self.agent_of(&r.id).is_none() {
                return Err(Error::AgentMap {
                    line: 0,
                    message: format!("resource `{}` is not managed by any agent", r.id),
                });
            }
        }
        Ok(())
    }

    pub fn agents(&self) -> &[AgentSpec] {
        &self.agents
    }

    pub fn agent_of(&self, resource_id: &str) -> Option<&str> {
        self.agents
            .iter()
            .find(|a| a.resources.iter().any(|r| r == resource_id))
            .map(|a| a.agent_id.as_str())
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Placement {
    #[serde(rename = "taskId")]
    pub task_id: String,
    #[serde(rename = "resourceId")]
    pub resource_id: String,
    #[serde(rename = "agentId")]
    pub agent_id: String,
    pub start: Seconds,
    pub end: Seconds,
}

impl Placement {
    pub fn duration(&self) -> Seconds {
        self.end - self.start
    }

    pub fn shifted(&self, delta: Seconds) -> Placement {
        Placement {
            start: self.start + delta,
            end: self.end + delta,
            ..self.clone()
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FinalSchedule {
    /// Sorted by (start, taskId).
    pub placements: Vec<Placement>,
    pub makespan: Seconds,
    pub deadline_violations: Vec<String>,
}

impl FinalSchedule {
    /// Sorts placements and derives the makespan and deadline misses.
    pub fn from_placements(mut placements: Vec<Placement>, tasks: &[TaskSpec]) -> Self {
        let deadlines: std::collections::HashMap<&str, Seconds> = tasks
            .iter()
            .filter_map(|t| t.deadline.map(|d| (t.task_id.as_str(), d)))
            .collect();
        placements.sort_by(|a, b| (a.start, &a.task_id).cmp(&(b.start, &b.task_id)));
        let makespan = placements.iter().map(|p| p.end).max().unwrap_or(Seconds::ZERO);
        let mut deadline_violations: Vec<String> = placements
            .iter()
            .filter(|p| deadlines.get(p.task_id.as_str()).is_some_and(|&d| p.end > d))
            .map(|p| p.task_id.clone())
            .collect();
        deadline_violations.sort();
        FinalSchedule {
            placements,
            makespan,
            deadline_violations,
        }
    }

    pub fn placement(&self, task_id: &str) -> Option<&Placement> {
        self.placements.iter().find(|p| p.task_id == task_id)
    }
}
