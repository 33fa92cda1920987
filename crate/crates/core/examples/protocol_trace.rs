//! Run the broker on the bundled data and print the message log.

use std::path::Path;

use coalloc::broker::{Broker, BrokerConfig, Execution};
use coalloc::model::{parse_agent_map, parse_resource_file, parse_task_file};

fn main() -> coalloc::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/three_agents");
    let read = |name: &str| std::fs::read_to_string(dir.join(name)).expect("bundled data file");
    let tasks = parse_task_file(&read("tasks.xml"))?;
    let resources = parse_resource_file(&read("resources.xml"))?;
    let agents = parse_agent_map(&read("agents.map"))?;

    // Sequential mode yields the same log; it just runs agents inline.
    let broker = Broker::new(BrokerConfig {
        execution: Execution::Sequential,
        ..BrokerConfig::default()
    });
    let outcome = broker.orchestrate(&tasks, &resources, &agents)?;
    print!("{}", outcome.log.to_text());
    for c in outcome.clusters.clusters() {
        let kinds: Vec<String> = outcome
            .log
            .cluster_sequence(&c.cluster_id)
            .iter()
            .map(|k| k.to_string())
            .collect();
        println!("{}: {}", c.cluster_id, kinds.join(" -> "));
    }
    Ok(())
}
