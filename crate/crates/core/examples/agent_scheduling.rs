//! One agent schedules two clusters on shared timelines, then shifts one
//! after receiving readiness times.

use coalloc::agent::Agent;
use coalloc::clustering::Cluster;
use coalloc::model::{ResourceSpec, TaskSpec};
use coalloc::protocol::Readiness;
use coalloc::Seconds;

fn main() -> coalloc::Result<()> {
    let s = Seconds::from_secs;
    let mut agent = Agent::new(
        "agent1",
        vec![ResourceSpec::new("P01", 2.0, 4.0), ResourceSpec::new("P02", 1.0, 1.0)],
    );

    let first = Cluster {
        cluster_id: "C1".into(),
        tasks: vec!["1".into(), "2".into(), "3".into()],
    };
    let fragment = vec![
        TaskSpec::new("1", s(4)).with_requirements(2.0, 1.0),
        TaskSpec::new("2", s(2)).depends_on("1", s(3)),
        TaskSpec::new("3", s(1)).depends_on("1", s(0)),
    ];
    let second = Cluster {
        cluster_id: "C2".into(),
        tasks: vec!["4".into()],
    };

    for partial in [
        agent.schedule_cluster(&first, &fragment)?,
        agent.schedule_cluster(&second, &[TaskSpec::new("4", s(3))])?,
    ] {
        for p in &partial.placements {
            println!(
                "{} task {} on {} [{}, {})",
                partial.cluster_id, p.task_id, p.resource_id, p.start, p.end
            );
        }
    }

    let adjusted = agent.apply_dependency_delays(
        "C2",
        &[Readiness {
            task_id: "4".into(),
            ready_time: s(10),
        }],
    )?;
    let p = &adjusted.placements[0];
    println!(
        "after readiness: task {} on {} [{}, {})",
        p.task_id, p.resource_id, p.start, p.end
    );
    Ok(())
}
