//! Random instances: general execution graphs, trees and series-parallel
//! graphs. Costs are drawn uniformly from `[0.5, 5)`.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::continuous::{Spg, SpgNode, Tree, TreeNode};
use crate::graph::Task;
use crate::instance::{Instance, ProcessorOrder};

fn cost<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.gen_range(0.5..5.0)
}

fn task_id(i: usize) -> String {
    format!("t{i}")
}

/// An instance with `n` tasks on `processors` processors. Precedence edges
/// follow a hidden random order (each pair with probability `edge_prob`),
/// and every processor runs its tasks in that order, so the result is
/// acyclic. The deadline is the makespan with every task at speed 1.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R, n: usize, processors: usize, edge_prob: f64) -> Instance {
    let processors = processors.max(1);
    let tasks: Vec<Task> = (0..n).map(|i| Task::new(task_id(i), cost(rng))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut precedence = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(edge_prob) {
                precedence.push((task_id(order[a]), task_id(order[b])));
            }
        }
    }
    let mut lists = vec![Vec::new(); processors];
    for &i in &order {
        lists[rng.gen_range(0..processors)].push(task_id(i));
    }
    let mut inst = Instance {
        tasks,
        precedence,
        allocation: lists
            .into_iter()
            .enumerate()
            .filter(|(_, l)| !l.is_empty())
            .map(|(p, order)| ProcessorOrder {
                processor: p.into(),
                order,
            })
            .collect(),
        deadline: 1.0,
    };
    let graph = inst.to_graph().expect("generated instances are acyclic");
    inst.deadline = graph.makespan_at(1.0).max(f64::MIN_POSITIVE);
    inst
}

/// Random recursive tree: node `i > 0` hangs below a uniformly chosen
/// earlier node.
pub fn random_tree<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Tree {
    assert!(n >= 1, "a tree needs at least one node");
    let mut nodes: Vec<TreeNode> = (0..n)
        .map(|i| TreeNode {
            id: task_id(i),
            cost: cost(rng),
            children: Vec::new(),
        })
        .collect();
    for i in 1..n {
        let parent = rng.gen_range(0..i);
        nodes[parent].children.push(i);
    }
    Tree::new(nodes, 0).expect("generated trees are valid")
}

/// Series-parallel graph with `n ≥ 2` tasks grown from one edge by
/// replacing random edges with a two-edge path (series) or with the edge
/// plus a parallel two-edge path.
pub fn random_spg<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Spg {
    assert!(n >= 2, "a series-parallel graph needs at least two tasks");
    let mut tasks: Vec<Task> = (0..2).map(|i| Task::new(task_id(i), cost(rng))).collect();
    let mut nodes = vec![SpgNode::Elementary { source: 0, sink: 1 }];
    let mut edges = vec![0usize];
    while tasks.len() < n {
        let pick = rng.gen_range(0..edges.len());
        let e = edges.swap_remove(pick);
        let SpgNode::Elementary { source, sink } = nodes[e] else {
            unreachable!("only elementary nodes are tracked");
        };
        let mid = tasks.len();
        tasks.push(Task::new(task_id(mid), cost(rng)));
        let first = nodes.len();
        nodes.push(SpgNode::Elementary { source, sink: mid });
        nodes.push(SpgNode::Elementary { source: mid, sink });
        edges.extend([first, first + 1]);
        if rng.gen_bool(0.5) {
            nodes[e] = SpgNode::Series {
                left: first,
                right: first + 1,
            };
        } else {
            nodes.push(SpgNode::Series {
                left: first,
                right: first + 1,
            });
            nodes.push(SpgNode::Elementary { source, sink });
            edges.push(first + 3);
            nodes[e] = SpgNode::Parallel {
                left: first + 3,
                right: first + 2,
            };
        }
    }
    Spg::new(tasks, nodes, 0).expect("generated graphs are series-parallel")
}
