use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::generate::{generate_platform, generate_workload, PlatformParams, WorkloadParams};
use crate::model::{AgentMap, ResourceSet, TaskSet};

/// A complete scheduling input.
#[derive(Clone, Debug)]
pub struct Instance {
    pub seed: u64,
    pub tasks: TaskSet,
    pub resources: ResourceSet,
    pub agents: AgentMap,
}

/// Seeded test instance: 1 to 60 tasks, 2 to 5 agents with one to three
/// resources each, no deadlines.
pub fn corpus_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_c0a1);
    let num_tasks = rng.gen_range(1..=60);
    let num_agents = rng.gen_range(2..=5);
    let num_resources = num_agents + rng.gen_range(0..=2 * num_agents);
    let workload = WorkloadParams {
        num_tasks,
        num_layers: rng.gen_range(1..=num_tasks.min(8)),
        edge_density: rng.gen_range(0.1..0.6),
        ..WorkloadParams::default()
    };
    let platform = PlatformParams {
        num_agents,
        num_resources,
        memory: (0.5, 4.0),
        cpu_power: (0.5, 2.0),
    };
    let tasks = generate_workload(seed, &workload).expect("corpus parameters are valid");
    let (resources, agents) = generate_platform(seed, &platform).expect("corpus parameters are valid");
    Instance {
        seed,
        tasks,
        resources,
        agents,
    }
}
