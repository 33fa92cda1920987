//! Text and SVG Gantt charts for a generated run. The SVG goes to the path
//! given as the first argument, if any.

use coalloc::broker::orchestrate;
use coalloc::harness::{generate_platform, generate_workload, PlatformParams, WorkloadParams};
use coalloc::report::{gantt_svg, gantt_text};

fn main() -> coalloc::Result<()> {
    let workload = WorkloadParams {
        num_tasks: 12,
        num_layers: 4,
        ..WorkloadParams::default()
    };
    let tasks = generate_workload(5, &workload)?;
    let (resources, agents) = generate_platform(5, &PlatformParams::default())?;
    let outcome = orchestrate(&tasks, &resources, &agents)?;

    print!("{}", gantt_text(&outcome.schedule, 72));
    if let Some(path) = std::env::args().nth(1) {
        std::fs::write(&path, gantt_svg(&outcome.schedule))?;
        println!("wrote {path}");
    }
    Ok(())
}
