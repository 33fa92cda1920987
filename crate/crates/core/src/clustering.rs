//! Phase 1: grow clusters along dependencies up to the per-agent quota,
//! keeping the cluster graph acyclic.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use crate::error::{Error, Result};
use crate::graph::{self, TaskDag};
use crate::time::Seconds;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cluster {
    pub cluster_id: String,
    /// Ascending taskId.
    pub tasks: Vec<String>,
}

impl Cluster {
    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }
}

/// Quotient of a [`TaskDag`] by a task partition.
///
/// Clusters are ordered by their smallest taskId, so a cluster's index
/// doubles as its tie-break rank. Edge costs are the sum of the crossing
/// task edge costs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterDag {
    clusters: Vec<Cluster>,
    members: Vec<Vec<usize>>,
    cluster_of: Vec<usize>,
    succs: Vec<Vec<(usize, Seconds)>>,
    preds: Vec<Vec<(usize, Seconds)>>,
}

impl ClusterDag {
    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn cluster(&self, c: usize) -> &Cluster {
        &self.clusters[c]
    }

    /// Task node indices of cluster `c`, ascending.
    pub fn members(&self, c: usize) -> &[usize] {
        &self.members[c]
    }

    pub fn cluster_of(&self, task: usize) -> usize {
        self.cluster_of[task]
    }

    pub fn index_of(&self, cluster_id: &str) -> Option<usize> {
        self.clusters.iter().position(|c| c.cluster_id == cluster_id)
    }

    pub fn successors(&self, c: usize) -> &[(usize, Seconds)] {
        &self.succs[c]
    }

    pub fn predecessors(&self, c: usize) -> &[(usize, Seconds)] {
        &self.preds[c]
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, Seconds)> + '_ {
        self.succs
            .iter()
            .enumerate()
            .flat_map(|(a, out)| out.iter().map(move |&(b, cost)| (a, b, cost)))
    }

    pub fn edge_cost(&self, from: usize, to: usize) -> Option<Seconds> {
        self.succs[from].iter().find(|(b, _)| *b == to).map(|&(_, c)| c)
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        self.succs
            .iter()
            .map(|out| out.iter().map(|&(b, _)| b).collect())
            .collect()
    }

    /// Cluster levels: level 1 has no predecessor clusters.
    pub fn levels(&self) -> Vec<Vec<usize>> {
        graph::levels(&self.adjacency())
    }

    /// Topological order, breaking ties by smallest contained taskId.
    pub fn topological_order(&self) -> Vec<usize> {
        let mut indegree: Vec<usize> = self.preds.iter().map(Vec::len).collect();
        let mut ready: BinaryHeap<Reverse<usize>> =
            (0..self.len()).filter(|&c| indegree[c] == 0).map(Reverse).collect();
        let mut order = Vec::with_capacity(self.len());
        while let Some(Reverse(c)) = ready.pop() {
            order.push(c);
            for &(d, _) in &self.succs[c] {
                indegree[d] -= 1;
                if indegree[d] == 0 {
                    ready.push(Reverse(d));
                }
            }
        }
        order
    }

    /// `taskId clusterId` lines in taskId order.
    pub fn assignment_listing(&self, dag: &TaskDag) -> String {
        (0..dag.len())
            .map(|t| format!("{} {}\n", dag.id(t), self.clusters[self.cluster_of[t]].cluster_id))
            .collect()
    }
}

/// Largest cluster the merge loop may build: `n / agents + 1`.
pub fn max_cluster_size(num_tasks: usize, num_agents: usize) -> usize {
    num_tasks / num_agents + 1
}

/// Builds the cluster DAG from a partition given as task node indices.
pub fn quotient(dag: &TaskDag, partition: &[Vec<usize>]) -> Result<ClusterDag> {
    let n = dag.len();
    let mut owner = vec![usize::MAX; n];
    for (k, part) in partition.iter().enumerate() {
        if part.is_empty() {
            return Err(Error::Partition(format!("part {k} is empty")));
        }
        for &t in part {
            if t >= n {
                return Err(Error::Partition(format!("node {t} is not a task")));
            }
            if owner[t] != usize::MAX {
                return Err(Error::Partition(format!("task `{}` appears twice", dag.id(t))));
            }
            owner[t] = k;
        }
    }
    if let Some(t) = owner.iter().position(|&o| o == usize::MAX) {
        return Err(Error::Partition(format!("task `{}` is not covered", dag.id(t))));
    }

    let mut members: Vec<Vec<usize>> = partition
        .iter()
        .map(|p| {
            let mut m = p.clone();
            m.sort_unstable();
            m
        })
        .collect();
    members.sort_by_key(|m| m[0]);
    let mut cluster_of = vec![0; n];
    for (c, m) in members.iter().enumerate() {
        for &t in m {
            cluster_of[t] = c;
        }
    }

    let mut costs: BTreeMap<(usize, usize), Seconds> = BTreeMap::new();
    for (p, s, cost) in dag.edges() {
        let (a, b) = (cluster_of[p], cluster_of[s]);
        if a != b {
            *costs.entry((a, b)).or_default() += cost;
        }
    }
    let k = members.len();
    let mut succs = vec![Vec::new(); k];
    let mut preds = vec![Vec::new(); k];
    for (&(a, b), &cost) in &costs {
        succs[a].push((b, cost));
        preds[b].push((a, cost));
    }
    for list in preds.iter_mut() {
        list.sort_by_key(|&(a, _)| a);
    }

    if let Some(cycle) = graph::find_cycle(
        &succs
            .iter()
            .map(|o| o.iter().map(|&(b, _)| b).collect())
            .collect::<Vec<_>>(),
    ) {
        return Err(Error::Cycle(cycle.into_iter().map(|c| format!("C{}", c + 1)).collect()));
    }

    let clusters = members
        .iter()
        .enumerate()
        .map(|(c, m)| Cluster {
            cluster_id: format!("C{}", c + 1),
            tasks: m.iter().map(|&t| dag.id(t).to_string()).collect(),
        })
        .collect();
    Ok(ClusterDag {
        clusters,
        members,
        cluster_of,
        succs,
        preds,
    })
}

/// Partitions the DAG into clusters of at most `n / num_agents + 1` tasks.
///
/// Starting from singletons, the unfinished cluster holding the smallest
/// taskId absorbs clusters that depend on it, smallest first, as long as
/// the size quota holds and the cluster graph stays acyclic. A cluster
/// with nothing left to absorb is finished.
pub fn cluster_tasks(dag: &TaskDag, num_agents: usize) -> ClusterDag {
    assert!(num_agents > 0, "at least one agent is required");
    let n = dag.len();
    let quota = max_cluster_size(n, num_agents);

    let mut members: Vec<Vec<usize>> = (0..n).map(|t| vec![t]).collect();
    let mut cluster_of: Vec<usize> = (0..n).collect();
    let mut finished = vec![false; n];
    // Search scratch, stamped to avoid clearing.
    let mut reached = vec![0usize; n];
    let mut expanded = vec![0usize; n];
    let mut stamp = 0usize;

    for t in 0..n {
        let current = cluster_of[t];
        if finished[current] {
            continue;
        }
        loop {
            let successors = successor_clusters(dag, &members[current], &cluster_of, current);
            stamp += 1;
            mark_reachable(
                dag,
                &members,
                &cluster_of,
                &successors,
                &mut reached,
                &mut expanded,
                stamp,
            );
            let pick = successors
                .iter()
                .copied()
                .filter(|&d| members[current].len() + members[d].len() <= quota)
                .filter(|&d| reached[d] != stamp)
                .min_by_key(|&d| members[d][0]);
            let Some(absorbed) = pick else {
                finished[current] = true;
                break;
            };
            let moved = std::mem::take(&mut members[absorbed]);
            for &task in &moved {
                cluster_of[task] = current;
            }
            members[current].extend(moved);
            members[current].sort_unstable();
        }
    }

    let partition: Vec<Vec<usize>> = members.into_iter().filter(|m| !m.is_empty()).collect();
    quotient(dag, &partition).expect("merge loop keeps the cluster graph a partition and acyclic")
}

/// Clusters (other than `current`) holding a direct successor of a member.
fn successor_clusters(dag: &TaskDag, members: &[usize], cluster_of: &[usize], current: usize) -> Vec<usize> {
    let mut out: Vec<usize> = members
        .iter()
        .flat_map(|&p| dag.successors(p).iter().map(|e| cluster_of[e.node]))
        .filter(|&c| c != current)
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Stamps every cluster reachable in one or more steps from any of
/// `starts` into `reached`. Merging the current cluster with a stamped
/// successor would close a cycle through the intermediate cluster.
fn mark_reachable(
    dag: &TaskDag,
    members: &[Vec<usize>],
    cluster_of: &[usize],
    starts: &[usize],
    reached: &mut [usize],
    expanded: &mut [usize],
    stamp: usize,
) {
    let mut frontier = starts.to_vec();
    for &s in starts {
        expanded[s] = stamp;
    }
    while let Some(c) = frontier.pop() {
        for &p in &members[c] {
            for e in dag.successors(p) {
                let d = cluster_of[e.node];
                if d == c {
                    continue;
                }
                reached[d] = stamp;
                if expanded[d] != stamp {
                    expanded[d] = stamp;
                    frontier.push(d);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_dag;
    use crate::model::{TaskSet, TaskSpec};

    fn secs(s: i64) -> Seconds {
        Seconds::from_secs(s)
    }

    fn dag_of(spec: &[(&str, &[(&str, i64)])]) -> TaskDag {
        let tasks = spec
            .iter()
            .map(|(id, deps)| {
                deps.iter()
                    .fold(TaskSpec::new(*id, secs(1)), |t, (p, c)| t.depends_on(*p, secs(*c)))
            })
            .collect();
        build_dag(&TaskSet::new(tasks).unwrap()).unwrap()
    }

    fn ids(cdag: &ClusterDag) -> Vec<Vec<&str>> {
        cdag.clusters()
            .iter()
            .map(|c| c.tasks.iter().map(String::as_str).collect())
            .collect()
    }

    #[test]
    fn quota_uses_integer_division() {
        assert_eq!(max_cluster_size(8, 3), 3);
        assert_eq!(max_cluster_size(3, 5), 1);
        assert_eq!(max_cluster_size(0, 2), 1);
    }

    #[test]
    fn independent_tasks_stay_singletons() {
        let dag = dag_of(&[("1", &[]), ("2", &[]), ("3", &[]), ("4", &[])]);
        let cdag = cluster_tasks(&dag, 2);
        assert_eq!(cdag.len(), 4);
        assert_eq!(cdag.edges().count(), 0);
    }

    #[test]
    fn chain_of_eight_splits_three_three_two() {
        let dag = dag_of(&[
            ("1", &[]),
            ("2", &[("1", 1)]),
            ("3", &[("2", 1)]),
            ("4", &[("3", 1)]),
            ("5", &[("4", 1)]),
            ("6", &[("5", 1)]),
            ("7", &[("6", 1)]),
            ("8", &[("7", 1)]),
        ]);
        let cdag = cluster_tasks(&dag, 3);
        assert_eq!(
            ids(&cdag),
            vec![vec!["1", "2", "3"], vec!["4", "5", "6"], vec!["7", "8"]]
        );
        assert_eq!(cdag.edges().collect::<Vec<_>>(), vec![(0, 1, secs(1)), (1, 2, secs(1))]);
    }

    #[test]
    fn merge_that_would_close_a_cycle_is_skipped() {
        // 1 -> 2 -> 3 and 1 -> 3. With quota 2, {1,3} would leave 2 both
        // after and before the merged cluster.
        let dag = dag_of(&[("1", &[]), ("2", &[("1", 1)]), ("3", &[("1", 1), ("2", 1)]), ("4", &[])]);
        let cdag = cluster_tasks(&dag, 3);
        assert_eq!(max_cluster_size(4, 3), 2);
        assert_eq!(ids(&cdag), vec![vec!["1", "2"], vec!["3"], vec!["4"]]);

        // 1 -> 2, 1 -> 3, 3 -> 2: the smallest candidate {2} is reachable
        // through {3}, so {3} is absorbed instead.
        let dag = dag_of(&[("1", &[]), ("2", &[("1", 1), ("3", 1)]), ("3", &[("1", 1)])]);
        let cdag = cluster_tasks(&dag, 2);
        assert_eq!(ids(&cdag), vec![vec!["1", "3"], vec!["2"]]);
    }

    #[test]
    fn quotient_identity_and_total() {
        let dag = dag_of(&[("a", &[]), ("b", &[("a", 2)]), ("c", &[("a", 3), ("b", 4)])]);
        let singletons: Vec<Vec<usize>> = (0..3).map(|t| vec![t]).collect();
        let q = quotient(&dag, &singletons).unwrap();
        let task_edges: Vec<_> = dag.edges().collect();
        assert_eq!(q.edges().collect::<Vec<_>>(), task_edges);

        let all = quotient(&dag, &[vec![0, 1, 2]]).unwrap();
        assert_eq!(all.len(), 1);
        assert_eq!(all.edges().count(), 0);
    }

    #[test]
    fn crossing_costs_are_summed() {
        // {a, b} -> {c}: a->c costs 1, b->c costs 2.
        let dag = dag_of(&[("a", &[]), ("b", &[]), ("c", &[("a", 1), ("b", 2)])]);
        let q = quotient(&dag, &[vec![0, 1], vec![2]]).unwrap();
        let brute: Seconds = dag
            .edges()
            .filter(|&(p, s, _)| q.cluster_of(p) == 0 && q.cluster_of(s) == 1)
            .map(|(_, _, c)| c)
            .sum();
        assert_eq!(brute, secs(3));
        assert_eq!(q.edges().collect::<Vec<_>>(), vec![(0, 1, secs(3))]);
    }

    #[test]
    fn quotient_rejects_non_partitions() {
        let dag = dag_of(&[("a", &[]), ("b", &[])]);
        assert!(matches!(quotient(&dag, &[vec![0]]), Err(Error::Partition(_))));
        assert!(matches!(
            quotient(&dag, &[vec![0, 1], vec![1]]),
            Err(Error::Partition(_))
        ));
        assert!(matches!(
            quotient(&dag, &[vec![0, 1], vec![]]),
            Err(Error::Partition(_))
        ));
    }

    #[test]
    fn listing_and_levels() {
        let dag = dag_of(&[("1", &[]), ("2", &[("1", 1)]), ("3", &[("2", 1)])]);
        let q = quotient(&dag, &[vec![0], vec![1, 2]]).unwrap();
        assert_eq!(q.assignment_listing(&dag), "1 C1\n2 C2\n3 C2\n");
        assert_eq!(q.levels(), vec![vec![0], vec![1]]);
        assert_eq!(q.topological_order(), vec![0, 1]);
    }

    #[test]
    fn empty_dag_gives_empty_cluster_dag() {
        let dag = dag_of(&[]);
        assert!(cluster_tasks(&dag, 3).is_empty());
    }
}
