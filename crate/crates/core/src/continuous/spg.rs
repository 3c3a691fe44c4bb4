//! Two-terminal series-parallel graphs: decomposition trees, recognition,
//! and the closed-form solution for unbounded `s_max`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::graph::{ExecutionGraph, Task};

use super::closed_form::cube_root_sum_cubes;

/// A node of the decomposition tree. Children are indices into [`Spg::nodes`];
/// elementary nodes reference tasks by index into [`Spg::tasks`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpgNode {
    /// A single edge from `source` to `sink`.
    Elementary { source: usize, sink: usize },
    /// `left`'s sink is merged with `right`'s source.
    Series { left: usize, right: usize },
    /// Sources are merged, and sinks are merged.
    Parallel { left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spg {
    tasks: Vec<Task>,
    nodes: Vec<SpgNode>,
    root: usize,
    /// (source, sink) of every node.
    ends: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpgSolution {
    pub energy: f64,
    /// Indexed like [`Spg::tasks`].
    pub speeds: Vec<f64>,
}

impl Spg {
    /// Validates composition rules: series operands share the merged task,
    /// parallel operands share both terminals, and every task is introduced
    /// exactly once (as a root terminal or as a series junction).
    pub fn new(tasks: Vec<Task>, nodes: Vec<SpgNode>, root: usize) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        if root >= nodes.len() {
            return bad(format!("root {root} out of range"));
        }
        if let Some(t) = tasks.iter().find(|t| !(t.cost > 0.0 && t.cost.is_finite())) {
            return bad(format!("task {:?} has non-positive cost {}", t.id, t.cost));
        }
        let order = postorder(&nodes, root)?;
        let mut ends = vec![(usize::MAX, usize::MAX); nodes.len()];
        let mut introduced = vec![0usize; tasks.len()];
        for &v in &order {
            ends[v] = match nodes[v] {
                SpgNode::Elementary { source, sink } => {
                    if source >= tasks.len() || sink >= tasks.len() || source == sink {
                        return bad(format!("invalid elementary edge ({source}, {sink})"));
                    }
                    (source, sink)
                }
                SpgNode::Series { left, right } => {
                    let (a, b) = ends[left];
                    let (c, d) = ends[right];
                    if b != c {
                        return bad(format!("series operands do not share a task at node {v}"));
                    }
                    introduced[b] += 1;
                    (a, d)
                }
                SpgNode::Parallel { left, right } => {
                    if ends[left] != ends[right] {
                        return bad(format!("parallel operands have different terminals at node {v}"));
                    }
                    ends[left]
                }
            };
        }
        let (s, t) = ends[root];
        introduced[s] += 1;
        introduced[t] += 1;
        if let Some(i) = introduced.iter().position(|&k| k != 1) {
            return bad(format!(
                "task {:?} is merged {} times in the decomposition",
                tasks[i].id, introduced[i]
            ));
        }
        Ok(Self {
            tasks,
            nodes,
            root,
            ends,
        })
    }

    /// Recognizes a two-terminal series-parallel execution graph by repeated
    /// series and parallel reductions. Task indices match the graph's.
    pub fn from_graph(graph: &ExecutionGraph) -> Option<Self> {
        let n = graph.len();
        if n < 2 {
            return None;
        }
        let mut sources = graph.sources();
        let (source, None) = (sources.next()?, sources.next()) else {
            return None;
        };
        let mut sinks = graph.sinks();
        let (sink, None) = (sinks.next()?, sinks.next()) else {
            return None;
        };

        let mut nodes = Vec::new();
        let mut out: Vec<BTreeMap<usize, usize>> = vec![BTreeMap::new(); n];
        let mut inc: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for &(u, v) in graph.edges() {
            nodes.push(SpgNode::Elementary { source: u, sink: v });
            let e = nodes.len() - 1;
            add_edge(&mut nodes, &mut out, &mut inc, (u, v), e);
        }

        let mut queue: VecDeque<usize> = (0..n).collect();
        while let Some(v) = queue.pop_front() {
            if v == source || v == sink || inc[v].len() != 1 || out[v].len() != 1 {
                continue;
            }
            let u = *inc[v].iter().next().unwrap();
            let (&w, &right) = out[v].iter().next().unwrap();
            let left = out[u].remove(&v).unwrap();
            out[v].clear();
            inc[v].clear();
            inc[w].remove(&v);
            nodes.push(SpgNode::Series { left, right });
            let s = nodes.len() - 1;
            add_edge(&mut nodes, &mut out, &mut inc, (u, w), s);
            queue.push_back(u);
            queue.push_back(w);
        }

        let remaining: usize = out.iter().map(BTreeMap::len).sum();
        if remaining != 1 {
            return None;
        }
        let root = *out[source].get(&sink)?;
        Self::new(graph.tasks().to_vec(), nodes, root).ok()
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn nodes(&self) -> &[SpgNode] {
        &self.nodes
    }

    pub fn root(&self) -> usize {
        self.root
    }

    /// (source, sink) task indices of a node.
    pub fn terminals(&self, node: usize) -> (usize, usize) {
        self.ends[node]
    }

    /// Edges of the execution graph, one per elementary node.
    pub fn to_graph(&self, deadline: f64) -> Result<ExecutionGraph> {
        let edges = self.nodes.iter().filter_map(|n| match *n {
            SpgNode::Elementary { source, sink } => Some((source, sink)),
            _ => None,
        });
        ExecutionGraph::from_edges(self.tasks.clone(), edges, deadline)
    }

    /// Equivalent cost of each node with its own source and sink zeroed.
    fn inner_costs(&self) -> Vec<f64> {
        let mut inner = vec![0.0; self.nodes.len()];
        // Postorder is infallible once validated.
        for v in postorder(&self.nodes, self.root).unwrap() {
            inner[v] = match self.nodes[v] {
                SpgNode::Elementary { .. } => 0.0,
                SpgNode::Series { left, right } => {
                    let junction = self.ends[left].1;
                    inner[left] + self.tasks[junction].cost + inner[right]
                }
                SpgNode::Parallel { left, right } => cube_root_sum_cubes([inner[left], inner[right]]),
            };
        }
        inner
    }
}

/// Inserts edge `(u, v)` carrying decomposition `node`, merging it in
/// parallel with an existing `(u, v)` edge.
fn add_edge(
    nodes: &mut Vec<SpgNode>,
    out: &mut [BTreeMap<usize, usize>],
    inc: &mut [BTreeSet<usize>],
    (u, v): (usize, usize),
    node: usize,
) {
    let merged = match out[u].get(&v) {
        Some(&existing) => {
            nodes.push(SpgNode::Parallel {
                left: existing,
                right: node,
            });
            nodes.len() - 1
        }
        None => node,
    };
    out[u].insert(v, merged);
    inc[v].insert(u);
}

fn postorder(nodes: &[SpgNode], root: usize) -> Result<Vec<usize>> {
    let mut order = Vec::with_capacity(nodes.len());
    let mut visited = vec![false; nodes.len()];
    let mut stack = vec![(root, false)];
    while let Some((v, expanded)) = stack.pop() {
        if expanded {
            order.push(v);
            continue;
        }
        if v >= nodes.len() || std::mem::replace(&mut visited[v], true) {
            return Err(Error::InvalidInput(format!("node {v} is out of range or shared")));
        }
        stack.push((v, true));
        if let SpgNode::Series { left, right } | SpgNode::Parallel { left, right } = nodes[v] {
            stack.push((right, false));
            stack.push((left, false));
        }
    }
    Ok(order)
}

/// Equivalent cost of the whole graph: a single task with this cost has the
/// same minimum energy under any deadline.
pub fn spg_cost(spg: &Spg) -> f64 {
    let (s, t) = spg.ends[spg.root];
    spg.tasks[s].cost + spg.inner_costs()[spg.root] + spg.tasks[t].cost
}

/// Minimum energy for an SPG with unbounded maximum speed, plus the speeds
/// that realize it.
pub fn solve_spg(spg: &Spg, deadline: f64, s_max: f64) -> Result<SpgSolution> {
    if s_max.is_finite() {
        return Err(Error::Unsupported(
            "no closed form for series-parallel graphs with a finite s_max".into(),
        ));
    }
    if !(deadline > 0.0 && deadline.is_finite()) {
        return Err(Error::InvalidInput(format!("deadline must be positive, got {deadline}")));
    }
    let inner = spg.inner_costs();
    let cost = spg_cost(spg);
    let speed = cost / deadline;
    let mut speeds = vec![0.0; spg.tasks.len()];
    let (s, t) = spg.ends[spg.root];
    speeds[s] = speed;
    speeds[t] = speed;

    // (node, time window for the tasks strictly inside it)
    let mut stack = vec![(spg.root, deadline * inner[spg.root] / cost)];
    while let Some((v, window)) = stack.pop() {
        match spg.nodes[v] {
            SpgNode::Elementary { .. } => {}
            SpgNode::Series { left, right } => {
                let speed = inner[v] / window;
                speeds[spg.ends[left].1] = speed;
                stack.push((left, inner[left] / speed));
                stack.push((right, inner[right] / speed));
            }
            SpgNode::Parallel { left, right } => {
                stack.push((left, window));
                stack.push((right, window));
            }
        }
    }
    Ok(SpgSolution {
        energy: cost.powi(3) / (deadline * deadline),
        speeds,
    })
}
