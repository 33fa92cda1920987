//! Seeded layered-DAG workloads and matching agent platforms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{AgentMap, AgentSpec, Dependency, ResourceSet, ResourceSpec, TaskSet, TaskSpec};
use crate::time::Seconds;

#[derive(Clone, Debug, PartialEq)]
pub struct WorkloadParams {
    pub num_tasks: usize,
    pub num_layers: usize,
    /// Probability of an edge from each task in the previous layer; halved
    /// for every further layer back.
    pub edge_density: f64,
    pub processing_time: (Seconds, Seconds),
    pub comm_time: (Seconds, Seconds),
    pub memory: (f64, f64),
    pub cpu_power: (f64, f64),
    /// Share of tasks that get a deadline.
    pub deadline_fraction: f64,
    /// Deadline = slack x longest path (processing + comm) ending at the task.
    pub deadline_slack: f64,
}

impl Default for WorkloadParams {
    fn default() -> Self {
        WorkloadParams {
            num_tasks: 20,
            num_layers: 4,
            edge_density: 0.3,
            processing_time: (Seconds::from_secs(1), Seconds::from_secs(10)),
            comm_time: (Seconds::ZERO, Seconds::from_secs(3)),
            memory: (0.5, 4.0),
            cpu_power: (0.5, 2.0),
            deadline_fraction: 0.0,
            deadline_slack: 3.0,
        }
    }
}

impl WorkloadParams {
    fn check(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Generator(m.to_string()));
        if self.num_tasks > 0 && (self.num_layers == 0 || self.num_layers > self.num_tasks) {
            return fail("layers must be between 1 and the number of tasks");
        }
        if !(0.0..=1.0).contains(&self.edge_density) {
            return fail("density must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.deadline_fraction) {
            return fail("deadline fraction must lie in [0, 1]");
        }
        if !(self.deadline_slack.is_finite() && self.deadline_slack >= 1.0) {
            return fail("deadline slack must be at least 1");
        }
        for (lo, hi) in [self.processing_time, self.comm_time] {
            if lo.is_negative() || lo > hi {
                return fail("time ranges must satisfy 0 <= lo <= hi");
            }
        }
        for (lo, hi) in [self.memory, self.cpu_power] {
            if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) {
                return fail("requirement ranges must satisfy 0 <= lo <= hi");
            }
        }
        Ok(())
    }
}

fn draw_time(rng: &mut ChaCha8Rng, (lo, hi): (Seconds, Seconds)) -> Seconds {
    // Millisecond granularity keeps generated files readable.
    let lo_ms = (lo.as_micros() + 999) / 1000;
    let hi_ms = hi.as_micros() / 1000;
    if lo_ms >= hi_ms {
        return lo;
    }
    Seconds::from_millis(rng.gen_range(lo_ms..=hi_ms))
}

fn draw_amount(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    let tenths = ((lo * 10.0).ceil() as i64, (hi * 10.0).floor() as i64);
    if tenths.0 >= tenths.1 {
        return lo;
    }
    rng.gen_range(tenths.0..=tenths.1) as f64 / 10.0
}

/// Random layered DAG. Tasks are numbered `1..=n` in layer order and edges
/// only run from earlier layers to later ones, so the result is acyclic.
pub fn generate_workload(seed: u64, params: &WorkloadParams) -> Result<TaskSet> {
    params.check()?;
    let n = params.num_tasks;
    if n == 0 {
        return Ok(TaskSet::default());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut layer_sizes = vec![1usize; params.num_layers];
    for _ in params.num_layers..n {
        layer_sizes[rng.gen_range(0..params.num_layers)] += 1;
    }
    let mut layer_of = Vec::with_capacity(n);
    for (layer, &size) in layer_sizes.iter().enumerate() {
        layer_of.extend(std::iter::repeat_n(layer, size));
    }

    let mut tasks: Vec<TaskSpec> = Vec::with_capacity(n);
    for s in 0..n {
        let processing_time = draw_time(&mut rng, params.processing_time);
        let memory = draw_amount(&mut rng, params.memory);
        let cpu_power = draw_amount(&mut rng, params.cpu_power);
        let mut dependencies = Vec::new();
        for p in 0..s {
            let gap = layer_of[s] - layer_of[p];
            if gap == 0 {
                continue;
            }
            let probability = params.edge_density / f64::from(1u32 << (gap - 1).min(30));
            if rng.gen_bool(probability) {
                dependencies.push(Dependency {
                    task_id: (p + 1).to_string(),
                    comm_time: draw_time(&mut rng, params.comm_time),
                });
            }
        }
        tasks.push(TaskSpec {
            task_id: (s + 1).to_string(),
            processing_time,
            memory,
            cpu_power,
            deadline: None,
            dependencies,
        });
    }

    if params.deadline_fraction > 0.0 {
        // Tasks are already in topological order.
        let mut finish = vec![Seconds::ZERO; n];
        for s in 0..n {
            let ready = tasks[s]
                .dependencies
                .iter()
                .map(|d| finish[d.task_id.parse::<usize>().expect("generated id") - 1] + d.comm_time)
                .max()
                .unwrap_or(Seconds::ZERO);
            finish[s] = ready + tasks[s].processing_time;
        }
        for (task, earliest) in tasks.iter_mut().zip(finish) {
            if rng.gen_bool(params.deadline_fraction) {
                let micros = (earliest.as_micros() as f64 * params.deadline_slack).ceil() as i64;
                task.deadline = Some(Seconds::from_micros(micros));
            }
        }
    }

    TaskSet::new(tasks)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlatformParams {
    pub num_agents: usize,
    pub num_resources: usize,
    pub memory: (f64, f64),
    pub cpu_power: (f64, f64),
}

impl Default for PlatformParams {
    fn default() -> Self {
        PlatformParams {
            num_agents: 3,
            num_resources: 6,
            memory: (1.0, 4.0),
            cpu_power: (1.0, 2.0),
        }
    }
}

/// Resources `P01..` split over agents `agent1..`. Every agent gets at
/// least one resource, and each agent's first resource has the top of both
/// capacity ranges so any task drawn from the same ranges fits somewhere.
pub fn generate_platform(seed: u64, params: &PlatformParams) -> Result<(ResourceSet, AgentMap)> {
    if params.num_agents == 0 || params.num_resources < params.num_agents {
        return Err(Error::Generator(
            "need at least one agent and one resource per agent".into(),
        ));
    }
    for (lo, hi) in [params.memory, params.cpu_power] {
        if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) {
            return Err(Error::Generator("capacity ranges must satisfy 0 <= lo <= hi".into()));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = params.num_resources.to_string().len().max(2);
    let mut agents: Vec<AgentSpec> = (1..=params.num_agents)
        .map(|a| AgentSpec {
            agent_id: format!("agent{a}"),
            resources: Vec::new(),
        })
        .collect();
    let mut resources = Vec::with_capacity(params.num_resources);
    for i in 0..params.num_resources {
        let id = format!("P{:0width$}", i + 1);
        let (owner, full) = if i < params.num_agents {
            (i, true)
        } else {
            (rng.gen_range(0..params.num_agents), false)
        };
        let (memory, cpu_power) = if full {
            (params.memory.1, params.cpu_power.1)
        } else {
            (
                draw_amount(&mut rng, params.memory),
                draw_amount(&mut rng, params.cpu_power),
            )
        };
        resources.push(ResourceSpec {
            node_name: format!("node{:0width$}", i + 1),
            cluster_name: "GeneratedCluster".into(),
            farm_name: "GeneratedFarm".into(),
            cpu_idle: rng.gen_range(0..=100) as f64,
            id: id.clone(),
            cpu_power,
            memory,
        });
        agents[owner].resources.push(id);
    }
    Ok((ResourceSet::new(resources)?, AgentMap::new(agents)?))
}
