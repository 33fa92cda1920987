use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::graph::TaskDag;
use crate::model::{AgentMap, FinalSchedule, Placement, ResourceSet};
use crate::time::Seconds;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Overlap {
    pub resource_id: String,
    pub task_a: String,
    pub task_b: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrecedenceViolation {
    pub pred: String,
    pub succ: String,
    pub required_start: Seconds,
    pub actual_start: Seconds,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EligibilityViolation {
    pub task_id: String,
    pub resource_id: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeadlineMiss {
    pub task_id: String,
    pub end: Seconds,
    pub deadline: Seconds,
}

/// Everything wrong with a schedule. Empty means valid.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ViolationReport {
    pub overlaps: Vec<Overlap>,
    pub precedence_violations: Vec<PrecedenceViolation>,
    pub eligibility_violations: Vec<EligibilityViolation>,
    pub deadline_misses: Vec<DeadlineMiss>,
    /// Missing, duplicated or unknown tasks and wrong durations.
    pub coverage: Vec<String>,
}

impl ViolationReport {
    pub fn is_empty(&self) -> bool {
        self.overlaps.is_empty()
            && self.precedence_violations.is_empty()
            && self.eligibility_violations.is_empty()
            && self.deadline_misses.is_empty()
            && self.coverage.is_empty()
    }

    /// Valid apart from deadline misses.
    pub fn is_feasible(&self) -> bool {
        self.overlaps.is_empty()
            && self.precedence_violations.is_empty()
            && self.eligibility_violations.is_empty()
            && self.coverage.is_empty()
    }
}

impl fmt::Display for ViolationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "overlaps={} precedence={} eligibility={} deadlines={} coverage={}",
            self.overlaps.len(),
            self.precedence_violations.len(),
            self.eligibility_violations.len(),
            self.deadline_misses.len(),
            self.coverage.len()
        )?;
        for o in &self.overlaps {
            writeln!(f, "overlap\t{}\t{}\t{}", o.resource_id, o.task_a, o.task_b)?;
        }
        for p in &self.precedence_violations {
            writeln!(
                f,
                "precedence\t{}\t{}\trequired={}\tactual={}",
                p.pred, p.succ, p.required_start, p.actual_start
            )?;
        }
        for e in &self.eligibility_violations {
            writeln!(f, "eligibility\t{}\t{}\t{}", e.task_id, e.resource_id, e.reason)?;
        }
        for d in &self.deadline_misses {
            writeln!(f, "deadline\t{}\tend={}\tdeadline={}", d.task_id, d.end, d.deadline)?;
        }
        for c in &self.coverage {
            writeln!(f, "coverage\t{c}")?;
        }
        Ok(())
    }
}

/// Checks a schedule exhaustively: resource overlaps (closed-open
/// intervals), every dependency edge with commTime charged across
/// resources, requirement and ownership eligibility, and deadlines.
pub fn validate_schedule(
    schedule: &FinalSchedule,
    dag: &TaskDag,
    resources: &ResourceSet,
    agents: &AgentMap,
) -> ViolationReport {
    let mut report = ViolationReport::default();

    let mut by_task: HashMap<&str, &Placement> = HashMap::new();
    for p in &schedule.placements {
        if dag.index_of(&p.task_id).is_none() {
            report.coverage.push(format!("unknown task `{}`", p.task_id));
        } else if by_task.insert(p.task_id.as_str(), p).is_some() {
            report
                .coverage
                .push(format!("task `{}` placed more than once", p.task_id));
        }
    }
    for v in 0..dag.len() {
        let task = dag.task(v);
        match by_task.get(task.task_id.as_str()) {
            None => report.coverage.push(format!("task `{}` not placed", task.task_id)),
            Some(p) => {
                if p.start < Seconds::ZERO {
                    report.coverage.push(format!("task `{}` starts before 0", task.task_id));
                }
                if p.end - p.start != task.processing_time {
                    report.coverage.push(format!(
                        "task `{}` runs {} but needs {}",
                        task.task_id,
                        p.end - p.start,
                        task.processing_time
                    ));
                }
            }
        }
    }

    let mut per_resource: BTreeMap<&str, Vec<&Placement>> = BTreeMap::new();
    for p in &schedule.placements {
        per_resource.entry(p.resource_id.as_str()).or_default().push(p);
    }
    for (resource_id, list) in &per_resource {
        for (i, a) in list.iter().enumerate() {
            for b in &list[i + 1..] {
                if a.start < b.end && b.start < a.end {
                    let (x, y) = if a.task_id <= b.task_id { (a, b) } else { (b, a) };
                    report.overlaps.push(Overlap {
                        resource_id: resource_id.to_string(),
                        task_a: x.task_id.clone(),
                        task_b: y.task_id.clone(),
                    });
                }
            }
        }
    }

    for (p, s, comm) in dag.edges() {
        let (Some(pp), Some(sp)) = (by_task.get(dag.id(p)), by_task.get(dag.id(s))) else {
            continue;
        };
        let required = if pp.resource_id == sp.resource_id {
            pp.end
        } else {
            pp.end + comm
        };
        if sp.start < required {
            report.precedence_violations.push(PrecedenceViolation {
                pred: pp.task_id.clone(),
                succ: sp.task_id.clone(),
                required_start: required,
                actual_start: sp.start,
            });
        }
    }

    for p in &schedule.placements {
        let Some(v) = dag.index_of(&p.task_id) else { continue };
        let task = dag.task(v);
        let mut reasons = Vec::new();
        match resources.get(&p.resource_id) {
            None => reasons.push("unknown resource".to_string()),
            Some(r) => {
                if r.memory < task.memory {
                    reasons.push(format!("memory {} < {}", r.memory, task.memory));
                }
                if r.cpu_power < task.cpu_power {
                    reasons.push(format!("cpuPower {} < {}", r.cpu_power, task.cpu_power));
                }
            }
        }
        let owner = agents
            .agents()
            .iter()
            .find(|a| a.resources.contains(&p.resource_id))
            .map(|a| a.agent_id.as_str());
        if owner != Some(p.agent_id.as_str()) {
            reasons.push(format!("resource not managed by agent `{}`", p.agent_id));
        }
        if !reasons.is_empty() {
            report.eligibility_violations.push(EligibilityViolation {
                task_id: p.task_id.clone(),
                resource_id: p.resource_id.clone(),
                reason: reasons.join("; "),
            });
        }
        if let Some(deadline) = task.deadline {
            if p.end > deadline {
                report.deadline_misses.push(DeadlineMiss {
                    task_id: p.task_id.clone(),
                    end: p.end,
                    deadline,
                });
            }
        }
    }

    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_dag;
    use crate::model::{AgentSpec, ResourceSpec, TaskSet, TaskSpec};

    fn secs(s: i64) -> Seconds {
        Seconds::from_secs(s)
    }

    fn place(id: &str, r: &str, s: i64, e: i64) -> Placement {
        Placement {
            task_id: id.into(),
            resource_id: r.into(),
            agent_id: "A".into(),
            start: secs(s),
            end: secs(e),
        }
    }

    fn setup(tasks: Vec<TaskSpec>) -> (TaskDag, ResourceSet, AgentMap) {
        let dag = build_dag(&TaskSet::new(tasks).unwrap()).unwrap();
        let resources = ResourceSet::new(vec![
            ResourceSpec::new("r1", 2.0, 2.0),
            ResourceSpec::new("r2", 2.0, 2.0),
        ])
        .unwrap();
        let agents = AgentMap::new(vec![AgentSpec {
            agent_id: "A".into(),
            resources: vec!["r1".into(), "r2".into()],
        }])
        .unwrap();
        (dag, resources, agents)
    }

    fn schedule(placements: Vec<Placement>) -> FinalSchedule {
        FinalSchedule {
            placements,
            ..Default::default()
        }
    }

    #[test]
    fn detects_single_overlap() {
        let (dag, res, ag) = setup(vec![TaskSpec::new("a", secs(2)), TaskSpec::new("b", secs(2))]);
        let report = validate_schedule(
            &schedule(vec![place("a", "r1", 0, 2), place("b", "r1", 1, 3)]),
            &dag,
            &res,
            &ag,
        );
        assert_eq!(
            report.overlaps,
            vec![Overlap {
                resource_id: "r1".into(),
                task_a: "a".into(),
                task_b: "b".into()
            }]
        );
        assert!(report.precedence_violations.is_empty());
    }

    #[test]
    fn detects_precedence_violation_with_comm_time() {
        let (dag, res, ag) = setup(vec![
            TaskSpec::new("p", secs(2)),
            TaskSpec::new("s", secs(1)).depends_on("p", secs(1)),
        ]);
        let report = validate_schedule(
            &schedule(vec![place("p", "r1", 0, 2), place("s", "r2", 1, 2)]),
            &dag,
            &res,
            &ag,
        );
        assert_eq!(
            report.precedence_violations,
            vec![PrecedenceViolation {
                pred: "p".into(),
                succ: "s".into(),
                required_start: secs(3),
                actual_start: secs(1)
            }]
        );
        // Same resource waives the transfer.
        let ok = validate_schedule(
            &schedule(vec![place("p", "r1", 0, 2), place("s", "r1", 2, 3)]),
            &dag,
            &res,
            &ag,
        );
        assert!(ok.is_empty(), "{ok}");
    }

    #[test]
    fn detects_eligibility_deadline_and_coverage() {
        let (dag, res, ag) = setup(vec![
            TaskSpec::new("big", secs(1)).with_requirements(4.0, 0.0),
            TaskSpec::new("late", secs(12)).with_deadline(secs(10)),
            TaskSpec::new("lost", secs(1)),
        ]);
        let mut foreign = place("late", "r2", 0, 12);
        foreign.agent_id = "B".into();
        let report = validate_schedule(
            &schedule(vec![place("big", "r1", 0, 1), foreign, place("ghost", "r1", 5, 6)]),
            &dag,
            &res,
            &ag,
        );
        assert_eq!(report.eligibility_violations.len(), 2);
        assert_eq!(
            report.deadline_misses,
            vec![DeadlineMiss {
                task_id: "late".into(),
                end: secs(12),
                deadline: secs(10)
            }]
        );
        assert_eq!(report.coverage.len(), 2);
        assert!(!report.is_empty());
    }

    #[test]
    fn wrong_duration_is_flagged() {
        let (dag, res, ag) = setup(vec![TaskSpec::new("a", secs(2))]);
        let report = validate_schedule(&schedule(vec![place("a", "r1", 0, 3)]), &dag, &res, &ag);
        assert_eq!(report.coverage.len(), 1);
    }
}
