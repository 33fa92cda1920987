//! Eight tasks over three agents: cluster, distribute, and report the
//! per-agent task counts.

use std::path::Path;

use coalloc::broker::orchestrate;
use coalloc::harness::compute_metrics;
use coalloc::model::{parse_agent_map, parse_resource_file, parse_task_file};

fn main() -> coalloc::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/three_agents");
    let read = |name: &str| std::fs::read_to_string(dir.join(name)).expect("bundled data file");
    let tasks = parse_task_file(&read("tasks.xml"))?;
    let resources = parse_resource_file(&read("resources.xml"))?;
    let agents = parse_agent_map(&read("agents.map"))?;

    let outcome = orchestrate(&tasks, &resources, &agents)?;
    print!("{}", outcome.clusters.assignment_listing(&outcome.dag));
    for (cluster, agent) in &outcome.assignment.cluster_agent {
        println!("{cluster} -> {agent}");
    }
    let metrics = compute_metrics(&outcome.schedule, &agents);
    print!("{}", metrics.tasks_per_agent_series());
    println!("spread {}  makespan {}", metrics.balance_spread, metrics.makespan);
    Ok(())
}
