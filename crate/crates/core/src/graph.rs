//! Execution graphs: the task precedence DAG augmented with one edge per pair
//! of consecutive tasks on each processor.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub id: String,
    /// Work units to execute.
    pub cost: f64,
}

impl Task {
    pub fn new(id: impl Into<String>, cost: f64) -> Self {
        Self {
            id: id.into(),
            cost,
        }
    }
}

/// Ordered list of task ids per processor.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Allocation {
    pub processors: Vec<Vec<String>>,
}

impl Allocation {
    pub fn new(processors: Vec<Vec<String>>) -> Self {
        Self { processors }
    }

    /// Every task on its own processor.
    pub fn one_per_task(tasks: &[Task]) -> Self {
        Self {
            processors: tasks.iter().map(|t| vec![t.id.clone()]).collect(),
        }
    }
}

/// Immutable, validated, acyclic execution graph with a deadline.
#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionGraph {
    tasks: Vec<Task>,
    index: HashMap<String, usize>,
    edges: Vec<(usize, usize)>,
    preds: Vec<Vec<usize>>,
    succs: Vec<Vec<usize>>,
    order: Vec<usize>,
    deadline: f64,
}

/// Builds the execution graph for `tasks` under `allocation`: precedence
/// edges plus serialization edges between consecutive tasks on a processor.
pub fn build_execution_graph(
    tasks: Vec<Task>,
    precedence: &[(String, String)],
    allocation: &Allocation,
    deadline: f64,
) -> Result<ExecutionGraph> {
    let index = index_tasks(&tasks)?;
    let lookup = |id: &str| {
        index
            .get(id)
            .copied()
            .ok_or_else(|| Error::Coverage(format!("unknown task {id:?}")))
    };

    let mut seen = vec![false; tasks.len()];
    for list in &allocation.processors {
        for id in list {
            let i = lookup(id)?;
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::Coverage(format!("task {id:?} allocated twice")));
            }
        }
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(Error::Coverage(format!(
            "task {:?} is not allocated",
            tasks[i].id
        )));
    }

    let mut edges = Vec::with_capacity(precedence.len() + tasks.len());
    for (a, b) in precedence {
        edges.push((lookup(a)?, lookup(b)?));
    }
    for list in &allocation.processors {
        for pair in list.windows(2) {
            edges.push((index[&pair[0]], index[&pair[1]]));
        }
    }
    ExecutionGraph::assemble(tasks, index, edges, deadline)
}

fn index_tasks(tasks: &[Task]) -> Result<HashMap<String, usize>> {
    let mut index = HashMap::with_capacity(tasks.len());
    for (i, t) in tasks.iter().enumerate() {
        if !(t.cost > 0.0 && t.cost.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "task {:?} has non-positive cost {}",
                t.id, t.cost
            )));
        }
        if index.insert(t.id.clone(), i).is_some() {
            return Err(Error::InvalidInput(format!("duplicate task id {:?}", t.id)));
        }
    }
    Ok(index)
}

impl ExecutionGraph {
    /// Builds a graph directly from index-based edges, without an allocation.
    pub fn from_edges(
        tasks: Vec<Task>,
        edges: impl IntoIterator<Item = (usize, usize)>,
        deadline: f64,
    ) -> Result<Self> {
        let index = index_tasks(&tasks)?;
        let edges: Vec<_> = edges.into_iter().collect();
        if let Some(&(a, b)) = edges.iter().find(|&&(a, b)| a >= tasks.len() || b >= tasks.len()) {
            return Err(Error::InvalidInput(format!("edge ({a}, {b}) out of range")));
        }
        Self::assemble(tasks, index, edges, deadline)
    }

    fn assemble(
        tasks: Vec<Task>,
        index: HashMap<String, usize>,
        mut edges: Vec<(usize, usize)>,
        deadline: f64,
    ) -> Result<Self> {
        if !(deadline > 0.0 && deadline.is_finite()) {
            return Err(Error::InvalidInput(format!("deadline must be positive, got {deadline}")));
        }
        if let Some(&(a, _)) = edges.iter().find(|(a, b)| a == b) {
            return Err(Error::Cycle(tasks[a].id.clone()));
        }
        edges.sort_unstable();
        edges.dedup();

        let n = tasks.len();
        let mut preds = vec![Vec::new(); n];
        let mut succs = vec![Vec::new(); n];
        for &(a, b) in &edges {
            succs[a].push(b);
            preds[b].push(a);
        }

        // Kahn's algorithm, ties broken by id.
        let mut indegree: Vec<usize> = preds.iter().map(Vec::len).collect();
        let mut ready: BinaryHeap<_> = (0..n)
            .filter(|&i| indegree[i] == 0)
            .map(|i| Reverse((tasks[i].id.as_str(), i)))
            .collect();
        let mut order = Vec::with_capacity(n);
        while let Some(Reverse((_, i))) = ready.pop() {
            order.push(i);
            for &j in &succs[i] {
                indegree[j] -= 1;
                if indegree[j] == 0 {
                    ready.push(Reverse((tasks[j].id.as_str(), j)));
                }
            }
        }
        if order.len() < n {
            let culprit = (0..n)
                .filter(|&i| indegree[i] > 0)
                .min_by(|&a, &b| tasks[a].id.cmp(&tasks[b].id))
                .unwrap();
            return Err(Error::Cycle(tasks[culprit].id.clone()));
        }

        Ok(Self {
            tasks,
            index,
            edges,
            preds,
            succs,
            order,
            deadline,
        })
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn task(&self, i: usize) -> &Task {
        &self.tasks[i]
    }

    pub fn cost(&self, i: usize) -> f64 {
        self.tasks[i].cost
    }

    pub fn costs(&self) -> Vec<f64> {
        self.tasks.iter().map(|t| t.cost).collect()
    }

    pub fn total_cost(&self) -> f64 {
        self.tasks.iter().map(|t| t.cost).sum()
    }

    pub fn id(&self, i: usize) -> &str {
        &self.tasks[i].id
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Deduplicated edges, sorted by (source, target) index.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn preds(&self, i: usize) -> &[usize] {
        &self.preds[i]
    }

    pub fn succs(&self, i: usize) -> &[usize] {
        &self.succs[i]
    }

    pub fn deadline(&self) -> f64 {
        self.deadline
    }

    /// Same graph under a different deadline.
    pub fn with_deadline(&self, deadline: f64) -> Result<Self> {
        if !(deadline > 0.0 && deadline.is_finite()) {
            return Err(Error::InvalidInput(format!("deadline must be positive, got {deadline}")));
        }
        Ok(Self {
            deadline,
            ..self.clone()
        })
    }

    /// Deterministic topological order; ready tasks are taken by ascending id.
    pub fn topological_order(&self) -> &[usize] {
        &self.order
    }

    pub fn topological_ids(&self) -> Vec<&str> {
        self.order.iter().map(|&i| self.id(i)).collect()
    }

    pub fn sources(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&i| self.preds[i].is_empty())
    }

    pub fn sinks(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&i| self.succs[i].is_empty())
    }

    /// ASAP completion times for the given per-task durations.
    pub fn completion_times(&self, durations: &[f64]) -> Vec<f64> {
        assert_eq!(durations.len(), self.len());
        let mut done = vec![0.0; self.len()];
        for &j in &self.order {
            let start = self.preds[j].iter().map(|&i| done[i]).fold(0.0, f64::max);
            done[j] = start + durations[j];
        }
        done
    }

    /// Length of the longest path when every task runs with the given durations.
    pub fn makespan(&self, durations: &[f64]) -> f64 {
        self.completion_times(durations).into_iter().fold(0.0, f64::max)
    }

    /// Makespan with every task at `speed`.
    pub fn makespan_at(&self, speed: f64) -> f64 {
        let d: Vec<f64> = self.tasks.iter().map(|t| t.cost / speed).collect();
        self.makespan(&d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::two_processor_example;

    fn ids(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn example_edges() {
        let g = two_processor_example();
        let named: Vec<_> = g.edges().iter().map(|&(a, b)| (g.id(a), g.id(b))).collect();
        assert_eq!(named, vec![("T1", "T2"), ("T1", "T3"), ("T3", "T4")]);
        assert_eq!(g.topological_ids(), vec!["T1", "T2", "T3", "T4"]);
    }

    #[test]
    fn single_task_has_no_edges() {
        let tasks = vec![Task::new("A", 1.0)];
        let alloc = Allocation::one_per_task(&tasks);
        let g = build_execution_graph(tasks, &[], &alloc, 1.0).unwrap();
        assert!(g.edges().is_empty());
        assert_eq!(g.topological_ids(), vec!["A"]);
    }

    #[test]
    fn precedence_against_processor_order_is_a_cycle() {
        let tasks = vec![Task::new("T1", 1.0), Task::new("T2", 1.0)];
        let alloc = Allocation::new(vec![ids(&["T1", "T2"])]);
        let err = build_execution_graph(tasks, &[("T2".into(), "T1".into())], &alloc, 1.0);
        assert!(matches!(err, Err(Error::Cycle(_))));
    }

    #[test]
    fn coverage_errors() {
        let tasks = vec![Task::new("T1", 1.0), Task::new("T2", 1.0)];
        let missing = Allocation::new(vec![ids(&["T1"])]);
        assert!(matches!(
            build_execution_graph(tasks.clone(), &[], &missing, 1.0),
            Err(Error::Coverage(_))
        ));
        let twice = Allocation::new(vec![ids(&["T1", "T2"]), ids(&["T2"])]);
        assert!(matches!(
            build_execution_graph(tasks.clone(), &[], &twice, 1.0),
            Err(Error::Coverage(_))
        ));
        let unknown = Allocation::new(vec![ids(&["T1", "T2", "T9"])]);
        assert!(matches!(
            build_execution_graph(tasks, &[], &unknown, 1.0),
            Err(Error::Coverage(_))
        ));
    }

    #[test]
    fn duplicate_edges_merge() {
        let tasks = vec![Task::new("A", 1.0), Task::new("B", 1.0)];
        let alloc = Allocation::new(vec![ids(&["A", "B"])]);
        let g = build_execution_graph(tasks, &[("A".into(), "B".into())], &alloc, 1.0).unwrap();
        assert_eq!(g.edges(), &[(0, 1)]);
    }

    #[test]
    fn rejects_bad_costs_and_deadlines() {
        let bad = vec![Task::new("A", 0.0)];
        assert!(ExecutionGraph::from_edges(bad, [], 1.0).is_err());
        let ok = vec![Task::new("A", 1.0)];
        assert!(ExecutionGraph::from_edges(ok.clone(), [], 0.0).is_err());
        assert!(ExecutionGraph::from_edges(ok, [], f64::INFINITY).is_err());
        let dup = vec![Task::new("A", 1.0), Task::new("A", 2.0)];
        assert!(ExecutionGraph::from_edges(dup, [], 1.0).is_err());
    }

    #[test]
    fn chain_order_and_ties() {
        let tasks = vec![Task::new("c", 1.0), Task::new("b", 1.0), Task::new("a", 1.0)];
        let g = ExecutionGraph::from_edges(tasks.clone(), [], 1.0).unwrap();
        assert_eq!(g.topological_ids(), vec!["a", "b", "c"]);
        let g = ExecutionGraph::from_edges(tasks, [(0, 1), (1, 2)], 1.0).unwrap();
        assert_eq!(g.topological_ids(), vec!["c", "b", "a"]);
    }
}
