//! Broker side: clustering, distribution, the three message protocols and
//! final schedule assembly.
//!
//! The broker never holds resource timelines; everything it knows about
//! resource occupancy arrives in agent replies.

use std::collections::{BTreeMap, HashMap};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::thread;
use std::time::Duration;

use crate::agent::{Agent, PartialSchedule};
use crate::clustering::{cluster_tasks, ClusterDag};
use crate::error::{Error, Result};
use crate::graph::{build_dag, TaskDag};
use crate::model::{AgentMap, AgentSpec, FinalSchedule, Placement, ResourceSet, TaskSet, TaskSpec};
use crate::protocol::{AgentFault, Message, MessageLog, Payload, Readiness, BROKER, USER};
use crate::time::Seconds;

/// Which agent received which cluster.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment {
    /// `(cluster index, agentId)` in distribution order.
    pub order: Vec<(usize, String)>,
    pub cluster_agent: BTreeMap<String, String>,
    /// Tasks handed to each agent; agents that got nothing appear with 0.
    pub task_counts: BTreeMap<String, usize>,
}

impl Assignment {
    pub fn agent_of(&self, cluster_id: &str) -> Option<&str> {
        self.cluster_agent.get(cluster_id).map(String::as_str)
    }
}

/// Hands clusters out in topological order, each to the agent that has
/// received the fewest tasks so far (ties to the smaller agentId).
pub fn distribute(clusters: &ClusterDag, agents: &[AgentSpec]) -> Assignment {
    let mut counts: BTreeMap<String, usize> = agents.iter().map(|a| (a.agent_id.clone(), 0)).collect();
    let mut assignment = Assignment::default();
    if counts.is_empty() {
        return assignment;
    }
    for c in clusters.topological_order() {
        let (agent, count) = counts
            .iter_mut()
            .min_by(|a, b| (*a.1).cmp(&*b.1).then_with(|| a.0.cmp(b.0)))
            .expect("at least one agent");
        *count += clusters.cluster(c).len();
        assignment.order.push((c, agent.clone()));
        assignment
            .cluster_agent
            .insert(clusters.cluster(c).cluster_id.clone(), agent.clone());
    }
    assignment.task_counts = counts;
    assignment
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    /// Agents work concurrently between level barriers.
    #[default]
    Parallel,
    /// One outstanding request at a time.
    Sequential,
}

#[derive(Clone, Debug)]
pub struct BrokerConfig {
    pub execution: Execution,
    pub reply_timeout: Duration,
}

impl Default for BrokerConfig {
    fn default() -> Self {
        BrokerConfig {
            execution: Execution::Parallel,
            reply_timeout: Duration::from_secs(30),
        }
    }
}

/// Everything a scheduling run produced.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub dag: TaskDag,
    pub clusters: ClusterDag,
    pub assignment: Assignment,
    pub schedule: FinalSchedule,
    pub log: MessageLog,
}

#[derive(Clone, Debug, Default)]
pub struct Broker {
    config: BrokerConfig,
}

/// Runs the full pipeline with the default (parallel) broker.
pub fn orchestrate(tasks: &TaskSet, resources: &ResourceSet, agents: &AgentMap) -> Result<Outcome> {
    Broker::default().orchestrate(tasks, resources, agents)
}

impl Broker {
    pub fn new(config: BrokerConfig) -> Self {
        Broker { config }
    }

    pub fn orchestrate(&self, tasks: &TaskSet, resources: &ResourceSet, agents: &AgentMap) -> Result<Outcome> {
        if agents.is_empty() {
            return Err(Error::AgentMap {
                line: 0,
                message: "no agents configured".into(),
            });
        }
        agents.check_covers(resources)?;

        let mut log = MessageLog::default();
        log.record(Message::new(
            USER,
            BROKER,
            Payload::SubmitTasks {
                task_count: tasks.len(),
            },
        ));

        let dag = build_dag(tasks)?;
        let clusters = cluster_tasks(&dag, agents.len());
        let assignment = distribute(&clusters, agents.agents());

        let (reply_tx, reply_rx) = mpsc::channel();
        let partials = thread::scope(|scope| {
            let mut inboxes = HashMap::new();
            for spec in agents.agents() {
                let owned = spec
                    .resources
                    .iter()
                    .filter_map(|id| resources.get(id).cloned())
                    .collect();
                let mut agent = Agent::new(spec.agent_id.clone(), owned);
                let (tx, rx) = mpsc::channel::<Message>();
                let replies = reply_tx.clone();
                scope.spawn(move || {
                    while let Ok(message) = rx.recv() {
                        if replies.send(agent.handle(message)).is_err() {
                            break;
                        }
                    }
                });
                inboxes.insert(spec.agent_id.clone(), tx);
            }
            let mut transport = Transport {
                inboxes,
                replies: reply_rx,
                config: &self.config,
                log: &mut log,
            };
            // Dropping the transport closes the inboxes so agents exit.
            run_protocol(&mut transport, &dag, &clusters, &assignment)
        })?;

        let schedule = assemble_and_repair(&partials, &dag)?;
        let mappings = schedule
            .placements
            .iter()
            .map(|p| (p.task_id.clone(), p.resource_id.clone()))
            .collect();
        log.record(Message::new(BROKER, USER, Payload::ScheduleResult { mappings }));

        Ok(Outcome {
            dag,
            clusters,
            assignment,
            schedule,
            log,
        })
    }
}

struct Transport<'a> {
    inboxes: HashMap<String, Sender<Message>>,
    replies: Receiver<Message>,
    config: &'a BrokerConfig,
    log: &'a mut MessageLog,
}

impl Transport<'_> {
    /// Sends every request and returns the replies in request order.
    /// Requests are logged first, then replies, so the log does not depend
    /// on how agents interleave.
    fn exchange(&mut self, requests: Vec<Message>) -> Result<Vec<Message>> {
        for request in &requests {
            self.log.record(request.clone());
        }
        let keys: Vec<(String, Option<String>)> = requests
            .iter()
            .map(|m| (m.receiver.clone(), m.payload.cluster_id().map(str::to_string)))
            .collect();
        let mut slots: Vec<Option<Message>> = vec![None; requests.len()];
        match self.config.execution {
            Execution::Parallel => {
                for request in requests {
                    self.send(request)?;
                }
                for _ in 0..keys.len() {
                    let reply = self.receive()?;
                    self.file_reply(&keys, &mut slots, reply)?;
                }
            }
            Execution::Sequential => {
                for request in requests {
                    self.send(request)?;
                    let reply = self.receive()?;
                    self.file_reply(&keys, &mut slots, reply)?;
                }
            }
        }
        let replies: Vec<Message> = slots.into_iter().map(|s| s.expect("every slot filled")).collect();
        for reply in &replies {
            self.log.record(reply.clone());
        }
        Ok(replies)
    }

    fn send(&self, message: Message) -> Result<()> {
        let inbox = self
            .inboxes
            .get(&message.receiver)
            .ok_or_else(|| Error::Protocol(format!("unknown agent `{}`", message.receiver)))?;
        let receiver = message.receiver.clone();
        inbox
            .send(message)
            .map_err(|_| Error::Protocol(format!("agent `{receiver}` is gone")))
    }

    fn receive(&self) -> Result<Message> {
        self.replies
            .recv_timeout(self.config.reply_timeout)
            .map_err(|e| match e {
                RecvTimeoutError::Timeout => {
                    Error::Timeout(format!("agent reply after {:?}", self.config.reply_timeout))
                }
                RecvTimeoutError::Disconnected => Error::Protocol("all agents disconnected".into()),
            })
    }

    fn file_reply(
        &self,
        keys: &[(String, Option<String>)],
        slots: &mut [Option<Message>],
        reply: Message,
    ) -> Result<()> {
        if let Payload::Rejected { reason } = &reply.payload {
            return Err(Error::Protocol(format!(
                "agent `{}` rejected a request: {reason}",
                reply.sender
            )));
        }
        let key = (reply.sender.clone(), reply.payload.cluster_id().map(str::to_string));
        let slot = keys
            .iter()
            .zip(slots.iter())
            .position(|(k, s)| *k == key && s.is_none())
            .ok_or_else(|| Error::Protocol(format!("unexpected {} from `{}`", reply.kind(), reply.sender)))?;
        slots[slot] = Some(reply);
        Ok(())
    }
}

fn run_protocol(
    transport: &mut Transport<'_>,
    dag: &TaskDag,
    clusters: &ClusterDag,
    assignment: &Assignment,
) -> Result<Vec<PartialSchedule>> {
    let agent_of: HashMap<usize, &str> = assignment.order.iter().map(|(c, a)| (*c, a.as_str())).collect();

    // Phase 2: every cluster goes to its agent, all levels at once.
    let requests = assignment
        .order
        .iter()
        .map(|(c, agent)| {
            let cluster = clusters.cluster(*c).clone();
            let fragment = fragment_of(dag, clusters, *c);
            Message::new(BROKER, agent.clone(), Payload::AssignCluster { cluster, fragment })
        })
        .collect();
    let mut partials: BTreeMap<usize, PartialSchedule> = BTreeMap::new();
    for (reply, (c, _)) in transport.exchange(requests)?.into_iter().zip(&assignment.order) {
        match reply.payload {
            Payload::ClusterScheduled { result, .. } => {
                partials.insert(*c, result.map_err(Error::from)?);
            }
            other => {
                return Err(Error::Protocol(format!(
                    "expected ClusterScheduled, got {}",
                    other.kind()
                )))
            }
        }
    }

    // Phase 3: level 1 stands as scheduled; deeper levels are delayed
    // behind their producers, one level at a time.
    let mut accepted: HashMap<String, Placement> = HashMap::new();
    let accept = |accepted: &mut HashMap<String, Placement>, partial: &PartialSchedule| {
        for p in &partial.placements {
            accepted.insert(p.task_id.clone(), p.clone());
        }
    };
    for (depth, level) in clusters.levels().into_iter().enumerate() {
        if depth == 0 {
            for c in &level {
                accept(&mut accepted, &partials[c]);
            }
            continue;
        }
        let mut requests = Vec::with_capacity(level.len());
        for &c in &level {
            let readiness = readiness_for(dag, clusters, c, &accepted)?;
            let cluster_id = clusters.cluster(c).cluster_id.clone();
            requests.push(Message::new(
                BROKER,
                agent_of[&c],
                Payload::DependencyInfo { cluster_id, readiness },
            ));
        }
        for (reply, &c) in transport.exchange(requests)?.into_iter().zip(&level) {
            match reply.payload {
                Payload::AdjustedSchedule { result, .. } => {
                    let adjusted = result.map_err(|f: AgentFault| Error::from(f))?;
                    accept(&mut accepted, &adjusted);
                    partials.insert(c, adjusted);
                }
                other => {
                    return Err(Error::Protocol(format!(
                        "expected AdjustedSchedule, got {}",
                        other.kind()
                    )))
                }
            }
        }
    }
    Ok(partials.into_values().collect())
}

/// The cluster's tasks with dependencies restricted to the cluster.
fn fragment_of(dag: &TaskDag, clusters: &ClusterDag, c: usize) -> Vec<TaskSpec> {
    clusters
        .members(c)
        .iter()
        .map(|&t| {
            let mut task = dag.task(t).clone();
            task.dependencies
                .retain(|d| dag.index_of(&d.task_id).is_some_and(|p| clusters.cluster_of(p) == c));
            task
        })
        .collect()
}

/// `end(producer) + commTime` for every task edge entering cluster `c`.
fn readiness_for(
    dag: &TaskDag,
    clusters: &ClusterDag,
    c: usize,
    accepted: &HashMap<String, Placement>,
) -> Result<Vec<Readiness>> {
    let mut readiness = Vec::new();
    for &t in clusters.members(c) {
        for e in dag.predecessors(t) {
            if clusters.cluster_of(e.node) == c {
                continue;
            }
            let producer = accepted
                .get(dag.id(e.node))
                .ok_or_else(|| Error::Protocol(format!("no accepted schedule for producer `{}`", dag.id(e.node))))?;
            readiness.push(Readiness {
                task_id: dag.id(t).to_string(),
                ready_time: producer.end + e.cost,
            });
        }
    }
    Ok(readiness)
}

/// Merges per-cluster schedules and pushes starts later until every
/// resource runs one task at a time and every dependency is met.
///
/// Task-to-resource mappings and the order of tasks on each resource
/// (adjusted start, then end, then taskId) are kept; only starts move.
pub fn assemble_and_repair(partials: &[PartialSchedule], dag: &TaskDag) -> Result<FinalSchedule> {
    let n = dag.len();
    let mut placed: Vec<Option<Placement>> = vec![None; n];
    for p in partials.iter().flat_map(|s| &s.placements) {
        let node = dag
            .index_of(&p.task_id)
            .ok_or_else(|| Error::Protocol(format!("placement for unknown task `{}`", p.task_id)))?;
        if placed[node].replace(p.clone()).is_some() {
            return Err(Error::Protocol(format!("task `{}` placed twice", p.task_id)));
        }
    }
    let placed: Vec<Placement> = placed
        .into_iter()
        .enumerate()
        .map(|(v, p)| p.ok_or_else(|| Error::Protocol(format!("task `{}` was never placed", dag.id(v)))))
        .collect::<Result<_>>()?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (placed[v].start, placed[v].end, v));
    let mut previous_on_resource: Vec<Option<usize>> = vec![None; n];
    let mut last: HashMap<&str, usize> = HashMap::new();
    for &v in &order {
        previous_on_resource[v] = last.insert(placed[v].resource_id.as_str(), v);
    }

    let duration: Vec<Seconds> = (0..n).map(|v| dag.processing_time(v)).collect();
    let mut start: Vec<Seconds> = placed.iter().map(|p| p.start).collect();
    // Only zero-weight cycles can arise in the combined precedence graph,
    // so relaxation settles within n + 1 passes.
    let mut passes = 0;
    loop {
        let mut changed = false;
        for &v in &order {
            let mut earliest = start[v];
            for e in dag.predecessors(v) {
                let end = start[e.node] + duration[e.node];
                let ready = if placed[e.node].resource_id == placed[v].resource_id {
                    end
                } else {
                    end + e.cost
                };
                earliest = earliest.max(ready);
            }
            if let Some(u) = previous_on_resource[v] {
                earliest = earliest.max(start[u] + duration[u]);
            }
            if earliest != start[v] {
                start[v] = earliest;
                changed = true;
            }
        }
        passes += 1;
        if !changed {
            break;
        }
        if passes > n + 1 {
            return Err(Error::Protocol("schedule repair did not converge".into()));
        }
    }

    let placements = placed
        .into_iter()
        .enumerate()
        .map(|(v, p)| Placement {
            start: start[v],
            end: start[v] + duration[v],
            ..p
        })
        .collect();
    Ok(FinalSchedule::from_placements(placements, dag.tasks()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::quotient;
    use crate::model::ResourceSpec;
    use crate::protocol::MessageKind;

    fn secs(s: i64) -> Seconds {
        Seconds::from_secs(s)
    }

    fn agents(ids: &[&str]) -> Vec<AgentSpec> {
        ids.iter()
            .map(|id| AgentSpec {
                agent_id: id.to_string(),
                resources: vec![format!("R{id}")],
            })
            .collect()
    }

    fn independent(n: usize) -> TaskDag {
        let tasks = (1..=n).map(|i| TaskSpec::new(format!("{i}"), secs(1))).collect();
        build_dag(&TaskSet::new(tasks).unwrap()).unwrap()
    }

    #[test]
    fn single_cluster_goes_to_smallest_agent() {
        let dag = independent(1);
        let q = quotient(&dag, &[vec![0]]).unwrap();
        let a = distribute(&q, &agents(&["b", "a", "c"]));
        assert_eq!(a.agent_of("C1"), Some("a"));
        assert_eq!(a.task_counts.values().copied().collect::<Vec<_>>(), vec![1, 0, 0]);
    }

    #[test]
    fn greedy_balances_by_task_count() {
        // Clusters of sizes 2, 2, 1, 1 visited in that order.
        let dag = independent(6);
        let q = quotient(&dag, &[vec![0, 1], vec![2, 3], vec![4], vec![5]]).unwrap();
        let a = distribute(&q, &agents(&["A1", "A2"]));
        let got: Vec<(&str, &str)> = a
            .order
            .iter()
            .map(|(c, agent)| (q.cluster(*c).cluster_id.as_str(), agent.as_str()))
            .collect();
        assert_eq!(got, vec![("C1", "A1"), ("C2", "A2"), ("C3", "A1"), ("C4", "A2")]);
        assert_eq!(a.task_counts["A1"], 3);
        assert_eq!(a.task_counts["A2"], 3);
    }

    fn place(id: &str, r: &str, s: i64, e: i64) -> Placement {
        Placement {
            task_id: id.into(),
            resource_id: r.into(),
            agent_id: "a".into(),
            start: secs(s),
            end: secs(e),
        }
    }

    #[test]
    fn consistent_partials_are_unchanged() {
        let tasks = TaskSet::new(vec![
            TaskSpec::new("x", secs(2)),
            TaskSpec::new("y", secs(3)).depends_on("x", secs(1)),
        ])
        .unwrap();
        let dag = build_dag(&tasks).unwrap();
        let partials = vec![
            PartialSchedule {
                cluster_id: "C1".into(),
                placements: vec![place("x", "r1", 0, 2)],
            },
            PartialSchedule {
                cluster_id: "C2".into(),
                placements: vec![place("y", "r2", 3, 6)],
            },
        ];
        let s = assemble_and_repair(&partials, &dag).unwrap();
        assert_eq!(s.placements, vec![place("x", "r1", 0, 2), place("y", "r2", 3, 6)]);
        assert_eq!(s.makespan, secs(6));
    }

    #[test]
    fn overlap_from_rigid_delay_is_pushed_back() {
        // Two clusters on one agent share r; a delay made them collide.
        let tasks = TaskSet::new(vec![
            TaskSpec::new("a", secs(4)),
            TaskSpec::new("b", secs(2)),
            TaskSpec::new("c", secs(1)).depends_on("b", secs(5)),
        ])
        .unwrap();
        let dag = build_dag(&tasks).unwrap();
        let partials = vec![
            PartialSchedule {
                cluster_id: "C1".into(),
                placements: vec![place("a", "r", 0, 4)],
            },
            PartialSchedule {
                cluster_id: "C2".into(),
                placements: vec![place("b", "r", 2, 4), place("c", "q", 9, 10)],
            },
        ];
        let s = assemble_and_repair(&partials, &dag).unwrap();
        assert_eq!(s.placement("a").unwrap(), &place("a", "r", 0, 4));
        assert_eq!(s.placement("b").unwrap(), &place("b", "r", 4, 6));
        // c must now wait for b's new end plus commTime.
        assert_eq!(s.placement("c").unwrap(), &place("c", "q", 11, 12));
    }

    #[test]
    fn zero_length_ties_do_not_loop() {
        let tasks = TaskSet::new(vec![
            TaskSpec::new("a", secs(3)).depends_on("b", secs(0)),
            TaskSpec::new("b", secs(0)),
        ])
        .unwrap();
        let dag = build_dag(&tasks).unwrap();
        let partials = vec![PartialSchedule {
            cluster_id: "C1".into(),
            placements: vec![place("b", "r", 5, 5), place("a", "r", 5, 8)],
        }];
        let s = assemble_and_repair(&partials, &dag).unwrap();
        assert_eq!(s.placement("a").unwrap().start, secs(5));
    }

    #[test]
    fn deadline_misses_are_reported() {
        let tasks = TaskSet::new(vec![TaskSpec::new("t", secs(12)).with_deadline(secs(10))]).unwrap();
        let dag = build_dag(&tasks).unwrap();
        let partials = vec![PartialSchedule {
            cluster_id: "C1".into(),
            placements: vec![place("t", "r", 0, 12)],
        }];
        assert_eq!(
            assemble_and_repair(&partials, &dag).unwrap().deadline_violations,
            vec!["t"]
        );
    }

    fn platform(agent_ids: &[&str]) -> (ResourceSet, AgentMap) {
        let resources = agent_ids
            .iter()
            .map(|a| ResourceSpec::new(format!("R{a}"), 1.0, 1.0))
            .collect();
        (
            ResourceSet::new(resources).unwrap(),
            AgentMap::new(agents(agent_ids)).unwrap(),
        )
    }

    #[test]
    fn one_cluster_run_uses_two_messages() {
        let tasks = TaskSet::new(vec![
            TaskSpec::new("1", secs(1)),
            TaskSpec::new("2", secs(1)).depends_on("1", secs(1)),
        ])
        .unwrap();
        let (resources, map) = platform(&["A"]);
        let out = orchestrate(&tasks, &resources, &map).unwrap();
        assert_eq!(out.clusters.len(), 1);
        assert_eq!(
            out.log.cluster_sequence("C1"),
            vec![MessageKind::AssignCluster, MessageKind::ClusterScheduled]
        );
        let kinds: Vec<_> = out.log.entries().iter().map(|e| e.message.kind()).collect();
        assert!(!kinds.contains(&MessageKind::DependencyInfo));
        assert_eq!(
            out.schedule.placements,
            vec![
                Placement {
                    agent_id: "A".into(),
                    ..place("1", "RA", 0, 1)
                },
                Placement {
                    agent_id: "A".into(),
                    ..place("2", "RA", 1, 2)
                },
            ]
        );
    }

    #[test]
    fn chained_clusters_receive_dependency_info() {
        // Quota 2 with two agents: clusters {a, b} and {c}, c depends on b.
        let tasks = TaskSet::new(vec![
            TaskSpec::new("a", secs(1)),
            TaskSpec::new("b", secs(2)).depends_on("a", secs(1)),
            TaskSpec::new("c", secs(1)).depends_on("b", secs(3)),
        ])
        .unwrap();
        let (resources, map) = platform(&["A", "B"]);
        let out = orchestrate(&tasks, &resources, &map).unwrap();
        assert_eq!(out.clusters.len(), 2);
        assert_eq!(
            out.log.cluster_sequence("C2"),
            vec![
                MessageKind::AssignCluster,
                MessageKind::ClusterScheduled,
                MessageKind::DependencyInfo,
                MessageKind::AdjustedSchedule
            ]
        );
        let b_end = out.schedule.placement("b").unwrap().end;
        let info = out
            .log
            .entries()
            .iter()
            .find_map(|e| match &e.message.payload {
                Payload::DependencyInfo { readiness, .. } => Some(readiness.clone()),
                _ => None,
            })
            .unwrap();
        assert_eq!(
            info,
            vec![Readiness {
                task_id: "c".into(),
                ready_time: b_end + secs(3)
            }]
        );
        assert!(out.schedule.placement("c").unwrap().start >= b_end + secs(3));
    }

    #[test]
    fn infeasible_task_aborts_orchestration() {
        let tasks = TaskSet::new(vec![TaskSpec::new("big", secs(1)).with_requirements(8.0, 0.0)]).unwrap();
        let (resources, map) = platform(&["A"]);
        match orchestrate(&tasks, &resources, &map) {
            Err(Error::Infeasible { task, .. }) => assert_eq!(task, "big"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn broker_holds_no_timelines() {
        let source = include_str!("broker.rs");
        let head = source.split("#[cfg(test)]").next().unwrap();
        assert!(!head.contains(concat!("Resource", "Timeline")));
    }
}
