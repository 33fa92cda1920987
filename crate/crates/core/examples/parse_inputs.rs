//! Load the three input files and print what was read.

use std::path::Path;

use coalloc::model::{parse_agent_map, parse_resource_file, parse_task_file};

fn main() -> coalloc::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/three_agents");
    let read = |name: &str| std::fs::read_to_string(dir.join(name)).expect("bundled data file");

    let tasks = parse_task_file(&read("tasks.xml"))?;
    let resources = parse_resource_file(&read("resources.xml"))?;
    let agents = parse_agent_map(&read("agents.map"))?;
    agents.check_covers(&resources)?;

    for t in &tasks {
        let deps: Vec<String> = t
            .dependencies
            .iter()
            .map(|d| format!("{}(+{})", d.task_id, d.comm_time))
            .collect();
        println!(
            "task {:>2}  p={:<3} mem={} cpu={}  after [{}]",
            t.task_id,
            t.processing_time,
            t.memory,
            t.cpu_power,
            deps.join(", ")
        );
    }
    for r in &resources {
        println!(
            "node {}  cpu={} mem={}  agent {}",
            r.id,
            r.cpu_power,
            r.memory,
            agents.agent_of(&r.id).unwrap()
        );
    }
    Ok(())
}
