//! Cluster a generated workload and show the cluster DAG.

use coalloc::clustering::{cluster_tasks, max_cluster_size};
use coalloc::graph::build_dag;
use coalloc::harness::{generate_workload, WorkloadParams};

fn main() -> coalloc::Result<()> {
    let agents = 3;
    let params = WorkloadParams {
        num_tasks: 16,
        num_layers: 4,
        edge_density: 0.35,
        ..WorkloadParams::default()
    };
    let tasks = generate_workload(7, &params)?;
    let dag = build_dag(&tasks)?;
    let clusters = cluster_tasks(&dag, agents);

    println!(
        "{} tasks, {} agents, quota {}",
        dag.len(),
        agents,
        max_cluster_size(dag.len(), agents)
    );
    for c in clusters.clusters() {
        println!("{:>3}: {}", c.cluster_id, c.tasks.join(" "));
    }
    for (from, to, cost) in clusters.edges() {
        println!(
            "{} -> {}  comm {}",
            clusters.cluster(from).cluster_id,
            clusters.cluster(to).cluster_id,
            cost
        );
    }
    for (k, level) in clusters.levels().iter().enumerate() {
        let ids: Vec<&str> = level.iter().map(|&c| clusters.cluster(c).cluster_id.as_str()).collect();
        println!("level {}: {}", k + 1, ids.join(" "));
    }
    Ok(())
}
