//! Split a DAG into blocks of mutually independent tasks and print it as DOT.

use coalloc::graph::{build_dag, level_decompose, to_dot};
use coalloc::model::{TaskSet, TaskSpec};
use coalloc::Seconds;

fn main() -> coalloc::Result<()> {
    let s = Seconds::from_secs;
    let tasks = TaskSet::new(vec![
        TaskSpec::new("a", s(2)),
        TaskSpec::new("b", s(3)),
        TaskSpec::new("c", s(1)).depends_on("a", s(1)),
        TaskSpec::new("d", s(4)).depends_on("a", s(2)).depends_on("b", s(1)),
        TaskSpec::new("e", s(2)).depends_on("c", s(1)).depends_on("d", s(1)),
    ])?;
    let dag = build_dag(&tasks)?;
    let blocks = level_decompose(&dag, &dag.all_nodes());
    for (k, ids) in blocks.ids(&dag).iter().enumerate() {
        println!("block {}: {}", k + 1, ids.join(" "));
    }
    println!();
    print!("{}", to_dot(&dag, Some(&blocks)));
    Ok(())
}
