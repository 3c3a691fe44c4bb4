use crate::graph::{build_execution_graph, Allocation, ExecutionGraph, Task};

/// Four tasks on two processors: P1 runs T1 then T2, P2 runs T3 then T4,
/// with T1 -> T3 and deadline 1.5.
pub(crate) fn two_processor_example() -> ExecutionGraph {
    let tasks = vec![
        Task::new("T1", 3.0),
        Task::new("T2", 2.0),
        Task::new("T3", 1.0),
        Task::new("T4", 2.0),
    ];
    let alloc = Allocation::new(vec![
        vec!["T1".into(), "T2".into()],
        vec!["T3".into(), "T4".into()],
    ]);
    build_execution_graph(tasks, &[("T1".into(), "T3".into())], &alloc, 1.5).unwrap()
}
