//! Closed-form solution for out-trees (and, by symmetry, in-trees).
//!
//! Every subtree collapses into an equivalent task whose cost is the cube
//! root of the sum of its children's cubed equivalent costs, plus its own
//! cost. A root whose equivalent speed exceeds `s_max` runs at `s_max` and
//! its subtrees are solved independently on the remaining time.

use crate::error::{Error, Result};
use crate::graph::{ExecutionGraph, Task};

use super::closed_form::cube_root_sum_cubes;

#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    pub id: String,
    pub cost: f64,
    /// Indices into [`Tree::nodes`].
    pub children: Vec<usize>,
}

/// Rooted tree stored as an arena.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    nodes: Vec<TreeNode>,
    root: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeSolution {
    pub energy: f64,
    /// Indexed like [`Tree::nodes`].
    pub speeds: Vec<f64>,
}

impl Tree {
    pub fn new(nodes: Vec<TreeNode>, root: usize) -> Result<Self> {
        let n = nodes.len();
        if root >= n {
            return Err(Error::InvalidInput(format!("root {root} out of range")));
        }
        let mut parent_seen = vec![false; n];
        parent_seen[root] = true;
        for node in &nodes {
            if !(node.cost > 0.0 && node.cost.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "task {:?} has non-positive cost {}",
                    node.id, node.cost
                )));
            }
            for &c in &node.children {
                if c >= n || std::mem::replace(&mut parent_seen[c], true) {
                    return Err(Error::InvalidInput(format!(
                        "node {c} is out of range, the root, or has two parents"
                    )));
                }
            }
        }
        let tree = Self { nodes, root };
        // Every node has at most one parent; reachability from the root rules out cycles.
        if tree.preorder().len() != n {
            return Err(Error::InvalidInput("tree is not connected".into()));
        }
        Ok(tree)
    }

    /// Recognizes an out-tree (one source, in-degree ≤ 1) or an in-tree
    /// (one sink, out-degree ≤ 1). Node indices match the graph's task indices.
    pub fn from_graph(graph: &ExecutionGraph) -> Option<Self> {
        let n = graph.len();
        if n == 0 {
            return None;
        }
        let out_tree = (0..n).all(|i| graph.preds(i).len() <= 1) && graph.sources().count() == 1;
        let in_tree = (0..n).all(|i| graph.succs(i).len() <= 1) && graph.sinks().count() == 1;
        let (root, reversed) = if out_tree {
            (graph.sources().next()?, false)
        } else if in_tree {
            (graph.sinks().next()?, true)
        } else {
            return None;
        };
        let nodes = graph
            .tasks()
            .iter()
            .enumerate()
            .map(|(i, t)| TreeNode {
                id: t.id.clone(),
                cost: t.cost,
                children: if reversed { graph.preds(i) } else { graph.succs(i) }.to_vec(),
            })
            .collect();
        Self::new(nodes, root).ok()
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn preorder(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            order.push(v);
            if order.len() > self.nodes.len() {
                break;
            }
            stack.extend(self.nodes[v].children.iter().rev());
        }
        order
    }

    /// Equivalent cost of every subtree, indexed by node.
    pub fn eq_costs(&self) -> Vec<f64> {
        let mut eq = vec![0.0; self.nodes.len()];
        for &v in self.preorder().iter().rev() {
            let node = &self.nodes[v];
            eq[v] = if node.children.is_empty() {
                node.cost
            } else {
                cube_root_sum_cubes(node.children.iter().map(|&c| eq[c])) + node.cost
            };
        }
        eq
    }

    /// Out-tree execution graph: one edge from each node to each child.
    pub fn to_graph(&self, deadline: f64) -> Result<ExecutionGraph> {
        let tasks = self
            .nodes
            .iter()
            .map(|n| Task::new(n.id.clone(), n.cost))
            .collect();
        let edges = self
            .nodes
            .iter()
            .enumerate()
            .flat_map(|(p, n)| n.children.iter().map(move |&c| (p, c)));
        ExecutionGraph::from_edges(tasks, edges, deadline)
    }
}

/// Equivalent cost of the subtree rooted at `node`.
pub fn tree_eq_cost(tree: &Tree, node: usize) -> f64 {
    tree.eq_costs()[node]
}

/// Minimum energy and per-task speeds for a tree under deadline `deadline`.
pub fn solve_tree(tree: &Tree, deadline: f64, s_max: f64) -> Result<TreeSolution> {
    if !(deadline > 0.0) {
        return Err(Error::InvalidInput(format!("deadline must be positive, got {deadline}")));
    }
    let eq = tree.eq_costs();
    let mut speeds = vec![0.0; tree.len()];
    let mut energy = 0.0;

    // (node, deadline for its subtree, whether an ancestor already accounted
    // for this subtree's energy)
    let mut stack = vec![(tree.root, deadline, false)];
    while let Some((v, window, counted)) = stack.pop() {
        let node = &tree.nodes[v];
        let (speed, settled) = if counted {
            (eq[v] / window, true)
        } else if eq[v] / window <= s_max {
            energy += eq[v].powi(3) / (window * window);
            (eq[v] / window, true)
        } else {
            if node.cost / s_max > window {
                return Err(Error::Infeasible(format!(
                    "task {:?} cannot finish within {window} at s_max {s_max}",
                    node.id
                )));
            }
            energy += node.cost * s_max * s_max;
            (s_max, false)
        };
        speeds[v] = speed;
        let rest = window - node.cost / speed;
        for &c in &node.children {
            stack.push((c, rest, settled));
        }
    }
    Ok(TreeSolution { energy, speeds })
}
