//! Task DAG construction, cycle detection and level decomposition.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write;

use crate::error::{Error, Result};
use crate::model::{TaskSet, TaskSpec};
use crate::time::Seconds;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub node: usize,
    pub cost: Seconds,
}

/// Dependency DAG over a task set. Nodes are indexed in ascending taskId
/// order, so index order and id order agree everywhere.
#[derive(Clone, Debug)]
pub struct TaskDag {
    tasks: Vec<TaskSpec>,
    index: HashMap<String, usize>,
    succs: Vec<Vec<Edge>>,
    preds: Vec<Vec<Edge>>,
}

impl TaskDag {
    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn task(&self, node: usize) -> &TaskSpec {
        &self.tasks[node]
    }

    pub fn tasks(&self) -> &[TaskSpec] {
        &self.tasks
    }

    pub fn id(&self, node: usize) -> &str {
        &self.tasks[node].task_id
    }

    pub fn index_of(&self, task_id: &str) -> Option<usize> {
        self.index.get(task_id).copied()
    }

    pub fn processing_time(&self, node: usize) -> Seconds {
        self.tasks[node].processing_time
    }

    /// Outgoing edges, ascending by target.
    pub fn successors(&self, node: usize) -> &[Edge] {
        &self.succs[node]
    }

    /// Incoming edges, ascending by source.
    pub fn predecessors(&self, node: usize) -> &[Edge] {
        &self.preds[node]
    }

    /// All edges as `(pred, succ, commTime)`, ordered by `(pred, succ)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, Seconds)> + '_ {
        self.succs
            .iter()
            .enumerate()
            .flat_map(|(p, out)| out.iter().map(move |e| (p, e.node, e.cost)))
    }

    pub fn edge_count(&self) -> usize {
        self.succs.iter().map(Vec::len).sum()
    }

    pub fn edge_cost(&self, pred: usize, succ: usize) -> Option<Seconds> {
        self.succs[pred].iter().find(|e| e.node == succ).map(|e| e.cost)
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        self.succs
            .iter()
            .map(|out| out.iter().map(|e| e.node).collect())
            .collect()
    }

    pub fn all_nodes(&self) -> BTreeSet<usize> {
        (0..self.len()).collect()
    }
}

pub fn build_dag(tasks: &TaskSet) -> Result<TaskDag> {
    let mut sorted: Vec<TaskSpec> = tasks.tasks().to_vec();
    sorted.sort_by(|a, b| a.task_id.cmp(&b.task_id));
    let index: HashMap<String, usize> = sorted.iter().enumerate().map(|(i, t)| (t.task_id.clone(), i)).collect();

    let n = sorted.len();
    let mut succs = vec![Vec::new(); n];
    let mut preds = vec![Vec::new(); n];
    for (s, task) in sorted.iter().enumerate() {
        for dep in &task.dependencies {
            let p = *index.get(&dep.task_id).ok_or_else(|| Error::UnknownReference {
                task: task.task_id.clone(),
                missing: dep.task_id.clone(),
            })?;
            if preds[s].iter().any(|e: &Edge| e.node == p) {
                return Err(Error::Invalid {
                    element: "depends".into(),
                    line: 0,
                    message: format!("task `{}` lists `{}` more than once", task.task_id, dep.task_id),
                });
            }
            succs[p].push(Edge {
                node: s,
                cost: dep.comm_time,
            });
            preds[s].push(Edge {
                node: p,
                cost: dep.comm_time,
            });
        }
    }
    for list in succs.iter_mut().chain(preds.iter_mut()) {
        list.sort_by_key(|e| e.node);
    }

    let dag = TaskDag {
        tasks: sorted,
        index,
        succs,
        preds,
    };
    if let Some(cycle) = find_cycle(&dag.adjacency()) {
        return Err(Error::Cycle(cycle.into_iter().map(|i| dag.id(i).to_string()).collect()));
    }
    Ok(dag)
}

/// Returns one directed cycle, listed in edge order and starting from its
/// smallest node, or `None` when the graph is acyclic.
pub fn find_cycle(adjacency: &[Vec<usize>]) -> Option<Vec<usize>> {
    let n = adjacency.len();
    let mut indegree = vec![0usize; n];
    let mut preds = vec![Vec::new(); n];
    for (u, out) in adjacency.iter().enumerate() {
        for &v in out {
            indegree[v] += 1;
            preds[v].push(u);
        }
    }
    let mut stack: Vec<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
    let mut removed = vec![false; n];
    while let Some(u) = stack.pop() {
        removed[u] = true;
        for &v in &adjacency[u] {
            indegree[v] -= 1;
            if indegree[v] == 0 {
                stack.push(v);
            }
        }
    }

    // Every node left over has a predecessor that is also left over, so
    // walking predecessors must revisit a node.
    let start = (0..n).find(|&v| !removed[v])?;
    let mut position = vec![usize::MAX; n];
    let mut walk = Vec::new();
    let mut v = start;
    while position[v] == usize::MAX {
        position[v] = walk.len();
        walk.push(v);
        v = preds[v]
            .iter()
            .copied()
            .filter(|&p| !removed[p])
            .min()
            .expect("remaining node has a remaining predecessor");
    }
    let mut cycle: Vec<usize> = walk[position[v]..].to_vec();
    cycle.reverse();
    let min_at = cycle
        .iter()
        .enumerate()
        .min_by_key(|(_, &node)| node)
        .map(|(i, _)| i)
        .unwrap_or(0);
    cycle.rotate_left(min_at);
    Some(cycle)
}

/// `Ok(())` when acyclic, otherwise a witness cycle.
pub fn is_acyclic(adjacency: &[Vec<usize>]) -> std::result::Result<(), Vec<usize>> {
    match find_cycle(adjacency) {
        None => Ok(()),
        Some(cycle) => Err(cycle),
    }
}

/// Ordered blocks of node indices; each block only depends on earlier ones.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Blocks {
    pub blocks: Vec<Vec<usize>>,
}

impl Blocks {
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.blocks.iter()
    }

    /// Nodes in block order.
    pub fn flatten(&self) -> Vec<usize> {
        self.blocks.iter().flatten().copied().collect()
    }

    pub fn ids<'a>(&self, dag: &'a TaskDag) -> Vec<Vec<&'a str>> {
        self.blocks
            .iter()
            .map(|b| b.iter().map(|&i| dag.id(i)).collect())
            .collect()
    }
}

/// Level decomposition of `subset`, counting only edges with both ends
/// inside it. Blocks are sorted ascending by taskId.
pub fn level_decompose(dag: &TaskDag, subset: &BTreeSet<usize>) -> Blocks {
    let mut remaining: HashMap<usize, usize> = subset
        .iter()
        .map(|&v| {
            let inside = dag.predecessors(v).iter().filter(|e| subset.contains(&e.node)).count();
            (v, inside)
        })
        .collect();
    let mut current: Vec<usize> = subset.iter().copied().filter(|v| remaining[v] == 0).collect();
    let mut blocks = Vec::new();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &u in &current {
            for e in dag.successors(u) {
                if let Some(count) = remaining.get_mut(&e.node) {
                    *count -= 1;
                    if *count == 0 {
                        next.push(e.node);
                    }
                }
            }
        }
        next.sort_unstable();
        blocks.push(std::mem::replace(&mut current, next));
    }
    Blocks { blocks }
}

/// Level decomposition of an arbitrary acyclic adjacency list.
pub fn levels(adjacency: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adjacency.len();
    let mut indegree = vec![0usize; n];
    for out in adjacency {
        for &v in out {
            indegree[v] += 1;
        }
    }
    let mut current: Vec<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
    let mut result = Vec::new();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &u in &current {
            for &v in &adjacency[u] {
                indegree[v] -= 1;
                if indegree[v] == 0 {
                    next.push(v);
                }
            }
        }
        next.sort_unstable();
        result.push(std::mem::replace(&mut current, next));
    }
    result
}

/// Graphviz rendering of the DAG, with block indices when given.
pub fn to_dot(dag: &TaskDag, blocks: Option<&Blocks>) -> String {
    let mut block_of = HashMap::new();
    if let Some(blocks) = blocks {
        for (k, block) in blocks.iter().enumerate() {
            for &v in block {
                block_of.insert(v, k + 1);
            }
        }
    }
    let mut out = String::from("digraph tasks {\n");
    for v in 0..dag.len() {
        let _ = write!(out, "  \"{}\" [cost=\"{}\"", dag.id(v), dag.processing_time(v));
        if let Some(k) = block_of.get(&v) {
            let _ = write!(out, ", block={k}");
        }
        out.push_str("];\n");
    }
    for (p, s, cost) in dag.edges() {
        let _ = writeln!(out, "  \"{}\" -> \"{}\" [cost=\"{}\"];", dag.id(p), dag.id(s), cost);
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn secs(s: i64) -> Seconds {
        Seconds::from_secs(s)
    }

    fn chain(ids: &[&str]) -> TaskSet {
        let tasks = ids
            .iter()
            .enumerate()
            .map(|(i, id)| {
                let t = TaskSpec::new(*id, secs(1));
                if i == 0 {
                    t
                } else {
                    t.depends_on(ids[i - 1], secs(1))
                }
            })
            .collect();
        TaskSet::new(tasks).unwrap()
    }

    fn diamond() -> TaskDag {
        let tasks = TaskSet::new(vec![
            TaskSpec::new("1", secs(1)),
            TaskSpec::new("2", secs(1)).depends_on("1", secs(1)),
            TaskSpec::new("3", secs(1)).depends_on("1", secs(1)),
            TaskSpec::new("4", secs(1))
                .depends_on("2", secs(1))
                .depends_on("3", secs(1)),
        ])
        .unwrap();
        build_dag(&tasks).unwrap()
    }

    #[test]
    fn builds_edges_with_costs() {
        let tasks = TaskSet::new(vec![
            TaskSpec::new("2", secs(4)).depends_on("1", secs(3)),
            TaskSpec::new("1", secs(2)),
        ])
        .unwrap();
        let dag = build_dag(&tasks).unwrap();
        assert_eq!(dag.len(), 2);
        assert_eq!(dag.id(0), "1");
        assert_eq!(dag.processing_time(0), secs(2));
        assert_eq!(dag.processing_time(1), secs(4));
        assert_eq!(dag.edges().collect::<Vec<_>>(), vec![(0, 1, secs(3))]);
    }

    #[test]
    fn two_cycle_is_reported_with_witness() {
        let tasks = TaskSet::new(vec![
            TaskSpec::new("1", secs(1)).depends_on("2", secs(1)),
            TaskSpec::new("2", secs(1)).depends_on("1", secs(1)),
        ])
        .unwrap();
        match build_dag(&tasks) {
            Err(Error::Cycle(witness)) => assert_eq!(witness, vec!["1", "2"]),
            other => panic!("expected cycle, got {other:?}"),
        }
    }

    #[test]
    fn dangling_reference_names_both_ids() {
        let tasks = TaskSet::new(vec![TaskSpec::new("1", secs(1)).depends_on("0", secs(2))]).unwrap();
        match build_dag(&tasks) {
            Err(Error::UnknownReference { task, missing }) => assert_eq!((task.as_str(), missing.as_str()), ("1", "0")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_dependency_is_rejected() {
        let tasks = TaskSet::new(vec![
            TaskSpec::new("1", secs(1)),
            TaskSpec::new("2", secs(1))
                .depends_on("1", secs(1))
                .depends_on("1", secs(2)),
        ])
        .unwrap();
        assert!(build_dag(&tasks).is_err());
    }

    /// Reachability by repeated squaring of the reflexive adjacency matrix.
    fn transitive_closure(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
        let mut m = vec![vec![false; n]; n];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = true;
        }
        for &(a, b) in edges {
            m[a][b] = true;
        }
        let mut steps = 1;
        while steps < n {
            let prev = m.clone();
            for i in 0..n {
                for j in 0..n {
                    m[i][j] = (0..n).any(|k| prev[i][k] && prev[k][j]);
                }
            }
            steps *= 2;
        }
        m
    }

    #[test]
    fn eight_task_dag_agrees_with_closure_oracle() {
        let deps: &[(&str, &[&str])] = &[
            ("1", &[]),
            ("2", &["1"]),
            ("3", &["1"]),
            ("4", &["2", "3"]),
            ("5", &["2"]),
            ("6", &["4", "5"]),
            ("7", &["3"]),
            ("8", &["6", "7"]),
        ];
        let tasks = TaskSet::new(
            deps.iter()
                .map(|(id, ps)| {
                    ps.iter()
                        .fold(TaskSpec::new(*id, secs(1)), |t, p| t.depends_on(*p, secs(1)))
                })
                .collect(),
        )
        .unwrap();
        let dag = build_dag(&tasks).unwrap();
        assert_eq!(dag.len(), 8);
        let edges: Vec<_> = dag.edges().map(|(p, s, _)| (p, s)).collect();
        let closure = transitive_closure(8, &edges);
        // Acyclic iff no pair reaches each other.
        for (i, j) in (0..8).flat_map(|i| (0..8).map(move |j| (i, j))) {
            assert!(i == j || !(closure[i][j] && closure[j][i]));
        }
        // Every listed dependency is an edge and vice versa.
        for (id, ps) in deps {
            let s = dag.index_of(id).unwrap();
            let mut got: Vec<&str> = dag.predecessors(s).iter().map(|e| dag.id(e.node)).collect();
            got.sort();
            assert_eq!(got, ps.to_vec());
        }
        assert!(closure[0][7]);
    }

    #[test]
    fn cycle_detection_edge_cases() {
        assert_eq!(is_acyclic(&[]), Ok(()));
        assert_eq!(is_acyclic(&[vec![0]]), Err(vec![0]));
        assert_eq!(is_acyclic(&[vec![1], vec![2], vec![1]]), Err(vec![1, 2]));
    }

    /// Three-colour DFS, kept separate from the Kahn-based implementation.
    fn dfs_has_cycle(adj: &[Vec<usize>]) -> bool {
        fn visit(v: usize, adj: &[Vec<usize>], colour: &mut [u8]) -> bool {
            colour[v] = 1;
            for &w in &adj[v] {
                if colour[w] == 1 || (colour[w] == 0 && visit(w, adj, colour)) {
                    return true;
                }
            }
            colour[v] = 2;
            false
        }
        let mut colour = vec![0u8; adj.len()];
        (0..adj.len()).any(|v| colour[v] == 0 && visit(v, adj, &mut colour))
    }

    #[test]
    fn agrees_with_dfs_oracle_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC0A1);
        for _ in 0..1000 {
            let n = 50;
            let p = rng.gen_range(0.005..0.05);
            let adj: Vec<Vec<usize>> = (0..n).map(|_| (0..n).filter(|_| rng.gen_bool(p)).collect()).collect();
            let result = find_cycle(&adj);
            assert_eq!(result.is_some(), dfs_has_cycle(&adj));
            if let Some(cycle) = result {
                for (k, &u) in cycle.iter().enumerate() {
                    let v = cycle[(k + 1) % cycle.len()];
                    assert!(adj[u].contains(&v), "witness edge {u}->{v} missing");
                }
            }
        }
    }

    #[test]
    fn level_decompose_examples() {
        let c = build_dag(&chain(&["a", "b", "c"])).unwrap();
        assert_eq!(
            level_decompose(&c, &c.all_nodes()).ids(&c),
            vec![vec!["a"], vec!["b"], vec!["c"]]
        );
        let d = diamond();
        assert_eq!(
            level_decompose(&d, &d.all_nodes()).ids(&d),
            vec![vec!["1"], vec!["2", "3"], vec!["4"]]
        );
        let subset: BTreeSet<usize> = [0, 2].into();
        assert_eq!(level_decompose(&c, &subset).ids(&c), vec![vec!["a", "c"]]);
        assert!(level_decompose(&c, &BTreeSet::new()).is_empty());
    }

    #[test]
    fn dot_export_mentions_nodes_and_blocks() {
        let d = diamond();
        let blocks = level_decompose(&d, &d.all_nodes());
        let dot = to_dot(&d, Some(&blocks));
        assert!(dot.contains("\"4\" [cost=\"1\", block=3]"));
        assert!(dot.contains("\"1\" -> \"2\""));
    }

    fn arb_dag() -> impl Strategy<Value = (TaskDag, BTreeSet<usize>)> {
        (1usize..25).prop_flat_map(|n| {
            (
                proptest::collection::vec(proptest::collection::vec(any::<bool>(), n), n),
                proptest::collection::vec(any::<bool>(), n),
            )
                .prop_map(move |(m, keep)| {
                    let ids: Vec<String> = (0..n).map(|i| format!("t{i:02}")).collect();
                    let tasks = (0..n)
                        .map(|s| {
                            (0..s)
                                .filter(|&p| m[p][s] && (p + s) % 3 == 0)
                                .fold(TaskSpec::new(ids[s].clone(), secs(1)), |t, p| {
                                    t.depends_on(ids[p].clone(), secs(1))
                                })
                        })
                        .collect();
                    let dag = build_dag(&TaskSet::new(tasks).unwrap()).unwrap();
                    let subset = (0..n).filter(|&i| keep[i]).collect();
                    (dag, subset)
                })
        })
    }

    proptest! {
        #[test]
        fn blocks_partition_subset_and_respect_levels((dag, subset) in arb_dag()) {
            let blocks = level_decompose(&dag, &subset);
            let flat = blocks.flatten();
            prop_assert_eq!(flat.len(), subset.len());
            prop_assert_eq!(flat.iter().copied().collect::<BTreeSet<_>>(), subset.clone());
            let mut level = HashMap::new();
            for (k, block) in blocks.iter().enumerate() {
                prop_assert!(block.windows(2).all(|w| w[0] < w[1]));
                for &v in block {
                    level.insert(v, k + 1);
                }
            }
            for &v in &subset {
                let expected = 1 + dag
                    .predecessors(v)
                    .iter()
                    .filter(|e| subset.contains(&e.node))
                    .map(|e| level[&e.node])
                    .max()
                    .unwrap_or(0);
                prop_assert_eq!(level[&v], expected);
            }
        }
    }
}
