//! The `coalloc` command line: `schedule`, `generate`, `validate`, `metrics`.
//!
//! Exit codes: 0 success, 1 input error, 2 infeasible task, 3 deadline
//! violation under `--strict-deadlines`, 4 schedule failed validation.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use crate::broker::{Broker, BrokerConfig, Execution};
use crate::error::{Error, Result};
use crate::graph::build_dag;
use crate::harness::{
    compute_metrics, generate_platform, generate_workload, validate_schedule, PlatformParams, WorkloadParams,
};
use crate::model::{
    parse_agent_map, parse_resource_file, parse_task_file, read_schedule_csv, write_agent_map, write_resource_file,
    write_schedule_csv, write_task_file, AgentMap, FinalSchedule, ResourceSet, TaskSet,
};
use crate::report::{gantt_svg, gantt_text, tasks_per_agent_svg};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_DEADLINE: i32 = 3;
pub const EXIT_INVALID: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "coalloc", version, about = "Co-allocation scheduler for dependent tasks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Schedule a task file on the given resources and agents.
    Schedule(ScheduleArgs),
    /// Write a seeded random workload (and optionally a platform).
    Generate(GenerateArgs),
    /// Check a schedule file against its inputs.
    Validate(ValidateArgs),
    /// Recompute load-balance metrics from a schedule file.
    Metrics(MetricsArgs),
}

#[derive(Args, Debug)]
pub struct InputArgs {
    /// Task XML file.
    #[arg(long)]
    pub tasks: PathBuf,
    /// Resource XML file.
    #[arg(long)]
    pub resources: PathBuf,
    /// Agent map (`agentId: resourceId, ...` per line).
    #[arg(long)]
    pub agents: PathBuf,
}

#[derive(Args, Debug)]
pub struct ScheduleArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Exit with status 3 when any task misses its deadline.
    #[arg(long)]
    pub strict_deadlines: bool,
    /// Also write gantt.svg and gantt.txt.
    #[arg(long)]
    pub emit_gantt: bool,
    /// Also write the protocol message log.
    #[arg(long)]
    pub emit_log: bool,
    /// Run agents one request at a time instead of concurrently.
    #[arg(long)]
    pub sequential: bool,
    /// Seconds to wait for an agent reply.
    #[arg(long, default_value_t = 30)]
    pub timeout: u64,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 20)]
    pub num_tasks: usize,
    #[arg(long, default_value_t = 4)]
    pub layers: usize,
    #[arg(long, default_value_t = 0.3)]
    pub density: f64,
    /// Share of tasks given a deadline.
    #[arg(long, default_value_t = 0.0)]
    pub deadline_fraction: f64,
    /// Also write resources.xml and agents.map for this many agents.
    #[arg(long)]
    pub num_agents: Option<usize>,
    /// Resources for the generated platform (default: two per agent).
    #[arg(long)]
    pub num_resources: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Schedule CSV to check.
    #[arg(long)]
    pub schedule: PathBuf,
}

#[derive(Args, Debug)]
pub struct MetricsArgs {
    /// Schedule CSV.
    #[arg(long)]
    pub schedule: PathBuf,
    /// Agent map, so idle agents and resources are listed.
    #[arg(long)]
    pub agents: PathBuf,
    /// Also write metrics.csv and the tasks-per-agent series here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Schedule(args) => cmd_schedule(&args, stdout, stderr),
        Command::Generate(args) => cmd_generate(&args, stdout),
        Command::Validate(args) => cmd_validate(&args, stdout),
        Command::Metrics(args) => cmd_metrics(&args, stdout),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            match e.root() {
                Error::Infeasible { .. } => EXIT_INFEASIBLE,
                _ => EXIT_INPUT,
            }
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::from(e).in_file(path))
}

fn load(input: &InputArgs) -> Result<(TaskSet, ResourceSet, AgentMap)> {
    let tasks = parse_task_file(&read(&input.tasks)?).map_err(|e| e.in_file(&input.tasks))?;
    let resources = parse_resource_file(&read(&input.resources)?).map_err(|e| e.in_file(&input.resources))?;
    let agents = parse_agent_map(&read(&input.agents)?).map_err(|e| e.in_file(&input.agents))?;
    agents.check_covers(&resources).map_err(|e| e.in_file(&input.agents))?;
    Ok((tasks, resources, agents))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::from(e).in_file(dir))
}

pub fn cmd_schedule(args: &ScheduleArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let (tasks, resources, agents) = load(&args.input)?;
    let broker = Broker::new(BrokerConfig {
        execution: if args.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        },
        reply_timeout: Duration::from_secs(args.timeout),
    });
    let outcome = broker.orchestrate(&tasks, &resources, &agents).map_err(|e| match e {
        Error::UnknownReference { .. } | Error::Cycle(_) | Error::Invalid { .. } => e.in_file(&args.input.tasks),
        other => other,
    })?;
    let metrics = compute_metrics(&outcome.schedule, &agents);

    ensure_dir(&args.out)?;
    let mut csv = Vec::new();
    write_schedule_csv(&outcome.schedule, &mut csv)?;
    write(&args.out.join("schedule.csv"), &String::from_utf8_lossy(&csv))?;
    write(&args.out.join("metrics.csv"), &metrics.to_csv())?;
    write(&args.out.join("tasks_per_agent.tsv"), &metrics.tasks_per_agent_series())?;
    write(&args.out.join("tasks_per_agent.svg"), &tasks_per_agent_svg(&metrics))?;
    write(
        &args.out.join("clusters.txt"),
        &outcome.clusters.assignment_listing(&outcome.dag),
    )?;
    if args.emit_gantt {
        write(&args.out.join("gantt.svg"), &gantt_svg(&outcome.schedule))?;
        write(&args.out.join("gantt.txt"), &gantt_text(&outcome.schedule, 60))?;
    }
    if args.emit_log {
        write(&args.out.join("messages.log"), &outcome.log.to_text())?;
    }

    let counts: Vec<String> = metrics
        .tasks_per_agent
        .iter()
        .map(|(a, n)| format!("{a}={n}"))
        .collect();
    let _ = writeln!(
        stdout,
        "scheduled {} tasks in {} clusters; makespan {}; tasks per agent: {}",
        tasks.len(),
        outcome.clusters.len(),
        metrics.makespan,
        counts.join(" ")
    );
    if !outcome.schedule.deadline_violations.is_empty() {
        let _ = writeln!(
            stderr,
            "deadline missed by: {}",
            outcome.schedule.deadline_violations.join(", ")
        );
        if args.strict_deadlines {
            return Ok(EXIT_DEADLINE);
        }
    }
    Ok(EXIT_OK)
}

pub fn cmd_generate(args: &GenerateArgs, stdout: &mut dyn Write) -> Result<i32> {
    let params = WorkloadParams {
        num_tasks: args.num_tasks,
        num_layers: args.layers,
        edge_density: args.density,
        deadline_fraction: args.deadline_fraction,
        ..WorkloadParams::default()
    };
    let tasks = generate_workload(args.seed, &params)?;
    ensure_dir(&args.out)?;
    let task_path = args.out.join("tasks.xml");
    write(&task_path, &write_task_file(&tasks))?;
    let _ = writeln!(stdout, "wrote {} tasks to {}", tasks.len(), task_path.display());

    if let Some(num_agents) = args.num_agents {
        let platform = PlatformParams {
            num_agents,
            num_resources: args.num_resources.unwrap_or(2 * num_agents),
            ..PlatformParams::default()
        };
        let (resources, agents) = generate_platform(args.seed, &platform)?;
        write(&args.out.join("resources.xml"), &write_resource_file(&resources))?;
        write(&args.out.join("agents.map"), &write_agent_map(&agents))?;
        let _ = writeln!(
            stdout,
            "wrote {} resources over {} agents",
            resources.len(),
            agents.len()
        );
    }
    Ok(EXIT_OK)
}

fn load_schedule(path: &Path, tasks: &TaskSet) -> Result<FinalSchedule> {
    let text = read(path)?;
    let placements = read_schedule_csv(text.as_bytes()).map_err(|e| e.in_file(path))?;
    Ok(FinalSchedule::from_placements(placements, tasks.tasks()))
}

pub fn cmd_validate(args: &ValidateArgs, stdout: &mut dyn Write) -> Result<i32> {
    let (tasks, resources, agents) = load(&args.input)?;
    let dag = build_dag(&tasks).map_err(|e| e.in_file(&args.input.tasks))?;
    let schedule = load_schedule(&args.schedule, &tasks)?;
    let report = validate_schedule(&schedule, &dag, &resources, &agents);
    let _ = write!(stdout, "{report}");
    Ok(if report.is_empty() { EXIT_OK } else { EXIT_INVALID })
}

pub fn cmd_metrics(args: &MetricsArgs, stdout: &mut dyn Write) -> Result<i32> {
    let agents = parse_agent_map(&read(&args.agents)?).map_err(|e| e.in_file(&args.agents))?;
    let schedule = load_schedule(&args.schedule, &TaskSet::default())?;
    let metrics = compute_metrics(&schedule, &agents);
    let _ = write!(stdout, "{}", metrics.to_csv());
    if let Some(out) = &args.out {
        ensure_dir(out)?;
        write(&out.join("metrics.csv"), &metrics.to_csv())?;
        write(&out.join("tasks_per_agent.tsv"), &metrics.tasks_per_agent_series())?;
        write(&out.join("tasks_per_agent.svg"), &tasks_per_agent_svg(&metrics))?;
    }
    Ok(EXIT_OK)
}
