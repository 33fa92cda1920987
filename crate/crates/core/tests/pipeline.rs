//! End-to-end properties of orchestrated schedules on generated inputs.

use coalloc::broker::orchestrate;
use coalloc::graph::build_dag;
use coalloc::harness::{
    compute_metrics, generate_platform, generate_workload, validate_schedule, PlatformParams, WorkloadParams,
};
use coalloc::Seconds;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn orchestrated_schedules_validate(
        seed in any::<u64>(),
        num_tasks in 0usize..50,
        layers in 1usize..6,
        density in 0.0f64..0.8,
        agents in 1usize..5,
        extra in 0usize..5,
        deadlines in 0.0f64..1.0,
    ) {
        let workload = WorkloadParams {
            num_tasks,
            num_layers: layers.min(num_tasks.max(1)),
            edge_density: density,
            deadline_fraction: deadlines,
            ..WorkloadParams::default()
        };
        let platform = PlatformParams { num_agents: agents, num_resources: agents + extra, ..PlatformParams::default() };
        let tasks = generate_workload(seed, &workload).unwrap();
        let (resources, agent_map) = generate_platform(seed, &platform).unwrap();
        let outcome = orchestrate(&tasks, &resources, &agent_map).unwrap();
        let dag = build_dag(&tasks).unwrap();
        let report = validate_schedule(&outcome.schedule, &dag, &resources, &agent_map);
        prop_assert!(report.is_feasible(), "{}", report);

        // Deadline misses are reported, never hidden.
        let mut missed: Vec<String> = report.deadline_misses.iter().map(|m| m.task_id.clone()).collect();
        missed.sort();
        let mut flagged = outcome.schedule.deadline_violations.clone();
        flagged.sort();
        prop_assert_eq!(missed, flagged);

        let latest = outcome.schedule.placements.iter().map(|p| p.end).max().unwrap_or(Seconds::ZERO);
        prop_assert_eq!(outcome.schedule.makespan, latest);
        let metrics = compute_metrics(&outcome.schedule, &agent_map);
        prop_assert_eq!(metrics.tasks_per_agent.values().sum::<usize>(), num_tasks);
    }
}

#[test]
fn no_resource_fits_is_an_error() {
    let workload = WorkloadParams {
        num_tasks: 5,
        num_layers: 2,
        memory: (100.0, 200.0),
        ..WorkloadParams::default()
    };
    let tasks = generate_workload(1, &workload).unwrap();
    let (resources, agents) = generate_platform(1, &PlatformParams::default()).unwrap();
    let err = orchestrate(&tasks, &resources, &agents).unwrap_err();
    assert!(matches!(err, coalloc::Error::Infeasible { .. }), "{err}");
}
