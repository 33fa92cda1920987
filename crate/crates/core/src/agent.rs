//! Agent side: local scheduling of assigned clusters and rigid delays.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::clustering::Cluster;
use crate::error::{Error, Result};
use crate::graph::{build_dag, level_decompose, TaskDag};
use crate::model::{Placement, ResourceSpec, TaskSet, TaskSpec};
use crate::protocol::{AgentFault, Message, Payload, Readiness};
use crate::time::Seconds;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reservation {
    pub task_id: String,
    pub start: Seconds,
    pub end: Seconds,
}

impl Reservation {
    /// Closed-open intervals; zero-length reservations only clash when
    /// strictly inside another interval.
    pub fn overlaps(&self, start: Seconds, end: Seconds) -> bool {
        start < self.end && self.start < end
    }
}

/// Reservations on one resource, non-overlapping and sorted by start.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResourceTimeline {
    resource_id: String,
    reservations: Vec<Reservation>,
}

impl ResourceTimeline {
    pub fn new(resource_id: impl Into<String>) -> Self {
        ResourceTimeline {
            resource_id: resource_id.into(),
            reservations: Vec::new(),
        }
    }

    pub fn resource_id(&self) -> &str {
        &self.resource_id
    }

    pub fn reservations(&self) -> &[Reservation] {
        &self.reservations
    }

    /// Earliest `t >= ready` such that `[t, t + duration)` is free. Holes
    /// between reservations are used when large enough.
    pub fn earliest_fit(&self, ready: Seconds, duration: Seconds) -> Seconds {
        let mut t = ready;
        for r in &self.reservations {
            if r.end <= t {
                continue;
            }
            if !r.overlaps(t, t + duration) {
                // Everything after `r` starts no earlier than `r`.
                return t;
            }
            t = r.end;
        }
        t
    }

    pub fn reserve(&mut self, task_id: impl Into<String>, start: Seconds, end: Seconds) -> Result<()> {
        let task_id = task_id.into();
        if let Some(clash) = self.reservations.iter().find(|r| r.overlaps(start, end)) {
            return Err(Error::Protocol(format!(
                "reservation of `{task_id}` on `{}` overlaps `{}`",
                self.resource_id, clash.task_id
            )));
        }
        let at = self.reservations.partition_point(|r| (r.start, r.end) <= (start, end));
        self.reservations.insert(at, Reservation { task_id, start, end });
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialSchedule {
    pub cluster_id: String,
    /// In decision order (block by block, ascending taskId within a block).
    pub placements: Vec<Placement>,
}

impl PartialSchedule {
    pub fn placement(&self, task_id: &str) -> Option<&Placement> {
        self.placements.iter().find(|p| p.task_id == task_id)
    }
}

/// Resources meeting the task's memory and CPU requirements, ascending by id.
pub fn eligible_resources<'a>(task: &TaskSpec, resources: &'a [ResourceSpec]) -> Vec<&'a str> {
    let mut ids: Vec<&str> = resources
        .iter()
        .filter(|r| r.satisfies(task))
        .map(|r| r.id.as_str())
        .collect();
    ids.sort_unstable();
    ids
}

/// Schedules one cluster onto the given timelines.
///
/// Tasks are visited block by block using only intra-cluster edges. Each
/// task goes to the eligible resource offering the earliest start; a
/// predecessor on the same resource is ready at its end, one elsewhere at
/// its end plus the edge's commTime. Ties go to the earlier finish, then
/// the smaller resource id. Chosen slots are reserved on `timelines`.
pub fn schedule_cluster(
    agent_id: &str,
    cluster: &Cluster,
    dag: &TaskDag,
    resources: &[ResourceSpec],
    timelines: &mut BTreeMap<String, ResourceTimeline>,
) -> Result<PartialSchedule> {
    let mut subset = BTreeSet::new();
    for id in &cluster.tasks {
        let node = dag
            .index_of(id)
            .ok_or_else(|| Error::Protocol(format!("cluster `{}` names unknown task `{id}`", cluster.cluster_id)))?;
        subset.insert(node);
    }
    let mut pool: Vec<&ResourceSpec> = resources.iter().collect();
    pool.sort_by(|a, b| a.id.cmp(&b.id));

    let blocks = level_decompose(dag, &subset);
    let mut placed: HashMap<usize, Placement> = HashMap::new();
    let mut placements = Vec::with_capacity(subset.len());
    for task_node in blocks.flatten() {
        let task = dag.task(task_node);
        let mut best: Option<(Seconds, Seconds, &str)> = None;
        for resource in pool.iter().filter(|r| r.satisfies(task)) {
            let ready = dag
                .predecessors(task_node)
                .iter()
                .filter_map(|e| placed.get(&e.node).map(|p| (p, e.cost)))
                .map(|(p, cost)| {
                    if p.resource_id == resource.id {
                        p.end
                    } else {
                        p.end + cost
                    }
                })
                .max()
                .unwrap_or(Seconds::ZERO);
            let timeline = timelines
                .get(&resource.id)
                .ok_or_else(|| Error::Protocol(format!("no timeline for resource `{}`", resource.id)))?;
            let start = timeline.earliest_fit(ready, task.processing_time);
            let candidate = (start, start + task.processing_time, resource.id.as_str());
            if best.is_none_or(|b| candidate < b) {
                best = Some(candidate);
            }
        }
        let (start, end, resource_id) = best.ok_or_else(|| Error::Infeasible {
            task: task.task_id.clone(),
            agent: agent_id.to_string(),
        })?;
        timelines
            .get_mut(resource_id)
            .expect("timeline checked above")
            .reserve(task.task_id.clone(), start, end)?;
        let placement = Placement {
            task_id: task.task_id.clone(),
            resource_id: resource_id.to_string(),
            agent_id: agent_id.to_string(),
            start,
            end,
        };
        placed.insert(task_node, placement.clone());
        placements.push(placement);
    }
    Ok(PartialSchedule {
        cluster_id: cluster.cluster_id.clone(),
        placements,
    })
}

/// Translates the whole partial schedule by the smallest shift that meets
/// every readiness entry.
pub fn apply_dependency_delays(partial: &PartialSchedule, readiness: &[Readiness]) -> Result<PartialSchedule> {
    let mut delta = Seconds::ZERO;
    for entry in readiness {
        let placement = partial.placement(&entry.task_id).ok_or_else(|| {
            Error::Protocol(format!(
                "readiness for `{}` which is not in cluster `{}`",
                entry.task_id, partial.cluster_id
            ))
        })?;
        delta = delta.max(entry.ready_time.saturating_sub(placement.start));
    }
    Ok(PartialSchedule {
        cluster_id: partial.cluster_id.clone(),
        placements: partial.placements.iter().map(|p| p.shifted(delta)).collect(),
    })
}

/// An agent actor: owns its resources' timelines and the schedules it has
/// produced, and answers broker messages one at a time.
#[derive(Debug)]
pub struct Agent {
    id: String,
    resources: Vec<ResourceSpec>,
    timelines: BTreeMap<String, ResourceTimeline>,
    schedules: BTreeMap<String, PartialSchedule>,
}

impl Agent {
    pub fn new(id: impl Into<String>, mut resources: Vec<ResourceSpec>) -> Self {
        resources.sort_by(|a, b| a.id.cmp(&b.id));
        let timelines = resources
            .iter()
            .map(|r| (r.id.clone(), ResourceTimeline::new(r.id.clone())))
            .collect();
        Agent {
            id: id.into(),
            resources,
            timelines,
            schedules: BTreeMap::new(),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn timelines(&self) -> impl Iterator<Item = &ResourceTimeline> {
        self.timelines.values()
    }

    /// Schedules a cluster given the tasks it contains (intra-cluster
    /// dependencies only).
    pub fn schedule_cluster(&mut self, cluster: &Cluster, fragment: &[TaskSpec]) -> Result<PartialSchedule> {
        let dag = build_dag(&TaskSet::new(fragment.to_vec())?)?;
        let partial = schedule_cluster(&self.id, cluster, &dag, &self.resources, &mut self.timelines)?;
        self.schedules.insert(cluster.cluster_id.clone(), partial.clone());
        Ok(partial)
    }

    pub fn apply_dependency_delays(&mut self, cluster_id: &str, readiness: &[Readiness]) -> Result<PartialSchedule> {
        let partial = self
            .schedules
            .get(cluster_id)
            .ok_or_else(|| Error::Protocol(format!("agent `{}` never scheduled `{cluster_id}`", self.id)))?;
        let adjusted = apply_dependency_delays(partial, readiness)?;
        self.schedules.insert(cluster_id.to_string(), adjusted.clone());
        Ok(adjusted)
    }

    /// Handles one broker message; every request gets exactly one reply.
    pub fn handle(&mut self, message: Message) -> Message {
        let payload = match message.payload {
            Payload::AssignCluster { cluster, fragment } => Payload::ClusterScheduled {
                cluster_id: cluster.cluster_id.clone(),
                result: self.schedule_cluster(&cluster, &fragment).map_err(AgentFault::from),
            },
            Payload::DependencyInfo { cluster_id, readiness } => Payload::AdjustedSchedule {
                result: self
                    .apply_dependency_delays(&cluster_id, &readiness)
                    .map_err(AgentFault::from),
                cluster_id,
            },
            other => Payload::Rejected {
                reason: format!("agent cannot handle {}", other.kind()),
            },
        };
        Message {
            sender: self.id.clone(),
            receiver: message.sender,
            payload,
        }
    }
}
