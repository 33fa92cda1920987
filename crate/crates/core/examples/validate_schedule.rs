//! Schedule a workload, check it, then break it and check again.

use coalloc::broker::orchestrate;
use coalloc::graph::build_dag;
use coalloc::harness::{generate_platform, generate_workload, validate_schedule, PlatformParams, WorkloadParams};
use coalloc::model::FinalSchedule;

fn main() -> coalloc::Result<()> {
    let tasks = generate_workload(21, &WorkloadParams::default())?;
    let (resources, agents) = generate_platform(21, &PlatformParams::default())?;
    let dag = build_dag(&tasks)?;

    let outcome = orchestrate(&tasks, &resources, &agents)?;
    let report = validate_schedule(&outcome.schedule, &dag, &resources, &agents);
    println!("orchestrated schedule:\n{report}");

    // Pull every task back to time zero.
    let squashed = outcome
        .schedule
        .placements
        .iter()
        .map(|p| p.shifted(coalloc::Seconds::ZERO - p.start))
        .collect();
    let broken = FinalSchedule::from_placements(squashed, tasks.tasks());
    let report = validate_schedule(&broken, &dag, &resources, &agents);
    println!(
        "squashed schedule: {} overlaps, {} precedence violations",
        report.overlaps.len(),
        report.precedence_violations.len()
    );
    Ok(())
}
