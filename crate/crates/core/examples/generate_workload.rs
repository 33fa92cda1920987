//! Generate a seeded workload and platform and print them in file form.

use coalloc::harness::{generate_platform, generate_workload, PlatformParams, WorkloadParams};
use coalloc::model::{write_agent_map, write_resource_file, write_task_file};

fn main() -> coalloc::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let workload = WorkloadParams {
        num_tasks: 6,
        num_layers: 3,
        edge_density: 0.5,
        deadline_fraction: 0.5,
        ..WorkloadParams::default()
    };
    let platform = PlatformParams {
        num_agents: 2,
        num_resources: 3,
        ..PlatformParams::default()
    };
    let tasks = generate_workload(seed, &workload)?;
    let (resources, agents) = generate_platform(seed, &platform)?;
    print!("{}", write_task_file(&tasks));
    print!("{}", write_resource_file(&resources));
    print!("{}", write_agent_map(&agents));
    Ok(())
}
