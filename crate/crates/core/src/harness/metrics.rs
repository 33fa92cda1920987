use std::collections::BTreeMap;
use std::fmt::Write;

use crate::model::{AgentMap, FinalSchedule};
use crate::time::Seconds;

/// Load-balance figures for one schedule.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Metrics {
    pub tasks_per_agent: BTreeMap<String, usize>,
    pub makespan: Seconds,
    pub per_resource_busy: BTreeMap<String, Seconds>,
    /// max - min of `tasks_per_agent`.
    pub balance_spread: usize,
}

/// Agents and resources from `agents` are listed even when idle.
pub fn compute_metrics(schedule: &FinalSchedule, agents: &AgentMap) -> Metrics {
    let mut tasks_per_agent: BTreeMap<String, usize> =
        agents.agents().iter().map(|a| (a.agent_id.clone(), 0)).collect();
    let mut per_resource_busy: BTreeMap<String, Seconds> = agents
        .agents()
        .iter()
        .flat_map(|a| a.resources.iter().map(|r| (r.clone(), Seconds::ZERO)))
        .collect();
    for p in &schedule.placements {
        *tasks_per_agent.entry(p.agent_id.clone()).or_default() += 1;
        *per_resource_busy.entry(p.resource_id.clone()).or_default() += p.end - p.start;
    }
    let makespan = schedule.placements.iter().map(|p| p.end).max().unwrap_or(Seconds::ZERO);
    let balance_spread = match (tasks_per_agent.values().max(), tasks_per_agent.values().min()) {
        (Some(max), Some(min)) => max - min,
        _ => 0,
    };
    Metrics {
        tasks_per_agent,
        makespan,
        per_resource_busy,
        balance_spread,
    }
}

impl Metrics {
    /// `metric,key,value` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,key,value\n");
        let _ = writeln!(out, "makespan,,{}", self.makespan);
        let _ = writeln!(out, "balance_spread,,{}", self.balance_spread);
        for (agent, count) in &self.tasks_per_agent {
            let _ = writeln!(out, "tasks_per_agent,{agent},{count}");
        }
        for (resource, busy) in &self.per_resource_busy {
            let _ = writeln!(out, "resource_busy,{resource},{busy}");
        }
        out
    }

    /// `agent<TAB>tasks` series for plotting.
    pub fn tasks_per_agent_series(&self) -> String {
        let mut out = String::from("agent\ttasks\n");
        for (agent, count) in &self.tasks_per_agent {
            let _ = writeln!(out, "{agent}\t{count}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AgentSpec, Placement};

    fn place(id: &str, agent: &str, r: &str, s: i64, e: i64) -> Placement {
        Placement {
            task_id: id.into(),
            resource_id: r.into(),
            agent_id: agent.into(),
            start: Seconds::from_secs(s),
            end: Seconds::from_secs(e),
        }
    }

    fn map(spec: &[(&str, &[&str])]) -> AgentMap {
        AgentMap::new(
            spec.iter()
                .map(|(a, rs)| AgentSpec {
                    agent_id: a.to_string(),
                    resources: rs.iter().map(|r| r.to_string()).collect(),
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn three_three_two_split() {
        let agents = map(&[
            ("agent1", &["P01", "P02"]),
            ("agent2", &["P03", "P04"]),
            ("agent3", &["P05"]),
        ]);
        let placements = [
            ("1", "agent1", "P01"),
            ("3", "agent1", "P01"),
            ("4", "agent1", "P02"),
            ("2", "agent2", "P03"),
            ("6", "agent2", "P03"),
            ("7", "agent2", "P04"),
            ("5", "agent3", "P05"),
            ("8", "agent3", "P05"),
        ]
        .iter()
        .enumerate()
        .map(|(i, (t, a, r))| place(t, a, r, i as i64, i as i64 + 1))
        .collect();
        let m = compute_metrics(
            &FinalSchedule {
                placements,
                ..Default::default()
            },
            &agents,
        );
        assert_eq!(m.tasks_per_agent.values().copied().collect::<Vec<_>>(), vec![3, 3, 2]);
        assert_eq!(m.balance_spread, 1);
        assert_eq!(m.tasks_per_agent.values().sum::<usize>(), 8);
    }

    #[test]
    fn single_task() {
        let agents = map(&[("a", &["r"])]);
        let m = compute_metrics(
            &FinalSchedule {
                placements: vec![place("t", "a", "r", 0, 5)],
                ..Default::default()
            },
            &agents,
        );
        assert_eq!(m.makespan, Seconds::from_secs(5));
        assert_eq!(m.per_resource_busy["r"], Seconds::from_secs(5));
    }

    #[test]
    fn busy_time_sums_durations() {
        let agents = map(&[("a", &["r", "idle"])]);
        let s = FinalSchedule {
            placements: vec![place("x", "a", "r", 0, 2), place("y", "a", "r", 2, 5)],
            ..Default::default()
        };
        let m = compute_metrics(&s, &agents);
        assert_eq!(m.per_resource_busy["r"], Seconds::from_secs(5));
        assert_eq!(m.per_resource_busy["idle"], Seconds::ZERO);
        assert_eq!(m.makespan, Seconds::from_secs(5));
        assert!(m.to_csv().contains("resource_busy,r,5\n"));
        assert_eq!(m.tasks_per_agent_series(), "agent\ttasks\na\t2\n");
    }
}
