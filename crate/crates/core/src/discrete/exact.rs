//! Branch-and-bound search for the best constant speed per task.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::SpeedGrid;
use crate::error::{Error, Result};
use crate::graph::ExecutionGraph;
use crate::schedule::{evaluate_speeds, Diagnostics, SolveReport, TIME_TOL};

pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;

/// Energies closer than this (relative) count as equal.
const ENERGY_TIE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactSolution {
    /// Indexed like the graph's tasks.
    pub speeds: Vec<f64>,
    pub energy: f64,
    pub makespan: f64,
    pub nodes: u64,
}

impl ExactSolution {
    pub fn report(&self, graph: &ExecutionGraph) -> Result<SolveReport> {
        let mut r = evaluate_speeds(graph, &self.speeds)?;
        r.diagnostics = Diagnostics {
            nodes: Some(self.nodes),
            ..Default::default()
        };
        Ok(r)
    }
}

pub fn solve_exact<M: SpeedGrid + ?Sized>(graph: &ExecutionGraph, model: &M) -> Result<ExactSolution> {
    solve_exact_with_budget(graph, model, DEFAULT_NODE_BUDGET)
}

/// Optimal assignment of one admissible speed per task. Among optimal
/// assignments the lexicographically smallest speed vector is returned.
pub fn solve_exact_with_budget<M: SpeedGrid + ?Sized>(
    graph: &ExecutionGraph,
    model: &M,
    budget: u64,
) -> Result<ExactSolution> {
    let mut speeds = model.speeds();
    let slowest = speeds[0];
    let fastest = *speeds.last().unwrap();
    let limit = graph.deadline() * (1.0 + TIME_TOL);
    if graph.makespan_at(fastest) > limit {
        return Err(Error::Infeasible(format!(
            "makespan {} at the top speed {fastest} exceeds the deadline {}",
            graph.makespan_at(fastest),
            graph.deadline()
        )));
    }
    speeds.reverse();

    let n = graph.len();
    let order = graph.topological_order().to_vec();
    // Longest run of successors at top speed after each task completes.
    let mut tail = vec![0.0; n];
    for &i in order.iter().rev() {
        tail[i] = graph
            .succs(i)
            .iter()
            .map(|&j| graph.cost(j) / fastest + tail[j])
            .fold(0.0, f64::max);
    }
    // Energy of the unassigned suffix at the slowest speed.
    let mut rest = vec![0.0; n + 1];
    for k in (0..n).rev() {
        rest[k] = rest[k + 1] + graph.cost(order[k]) * slowest * slowest;
    }

    let mut search = Search {
        graph,
        speeds,
        order,
        tail,
        rest,
        limit,
        budget,
        nodes: 0,
        current: vec![0.0; n],
        completion: vec![0.0; n],
        best: None,
    };
    let finished = search.visit(0, 0.0);
    let incumbent = search.best.take().map(|(energy, speeds)| {
        let durations: Vec<f64> = speeds.iter().enumerate().map(|(i, s)| graph.cost(i) / s).collect();
        ExactSolution {
            makespan: graph.makespan(&durations),
            speeds,
            energy,
            nodes: search.nodes,
        }
    });
    log::debug!("branch and bound: {} nodes", search.nodes);
    match (finished, incumbent) {
        (Ok(()), Some(sol)) => Ok(sol),
        (Ok(()), None) => Err(Error::Infeasible("no speed assignment meets the deadline".into())),
        (Err(()), incumbent) => Err(Error::BudgetExceeded {
            budget,
            incumbent: incumbent.map(Box::new),
        }),
    }
}

struct Search<'a> {
    graph: &'a ExecutionGraph,
    /// Descending.
    speeds: Vec<f64>,
    order: Vec<usize>,
    tail: Vec<f64>,
    rest: Vec<f64>,
    limit: f64,
    budget: u64,
    nodes: u64,
    current: Vec<f64>,
    completion: Vec<f64>,
    best: Option<(f64, Vec<f64>)>,
}

impl Search<'_> {
    /// Assigns the task at position `k` of the order; `Err` when the budget runs out.
    fn visit(&mut self, k: usize, energy: f64) -> std::result::Result<(), ()> {
        if k == self.order.len() {
            self.offer(energy);
            return Ok(());
        }
        let i = self.order[k];
        let w = self.graph.cost(i);
        let start = self
            .graph
            .preds(i)
            .iter()
            .map(|&p| self.completion[p])
            .fold(0.0, f64::max);
        for idx in 0..self.speeds.len() {
            let s = self.speeds[idx];
            self.nodes += 1;
            if self.nodes > self.budget {
                return Err(());
            }
            let t = start + w / s;
            if t + self.tail[i] > self.limit {
                // Slower speeds only finish later.
                break;
            }
            let e = energy + w * s * s;
            if let Some((best, _)) = &self.best {
                if e + self.rest[k + 1] > best * (1.0 + ENERGY_TIE) {
                    continue;
                }
            }
            self.current[i] = s;
            self.completion[i] = t;
            self.visit(k + 1, e)?;
        }
        Ok(())
    }

    fn offer(&mut self, energy: f64) {
        let better = match &self.best {
            None => true,
            Some((best, speeds)) => {
                if energy < best * (1.0 - ENERGY_TIE) {
                    true
                } else if energy <= best * (1.0 + ENERGY_TIE) {
                    lex_cmp(&self.current, speeds) == Ordering::Less
                } else {
                    false
                }
            }
        };
        if better {
            self.best = Some((energy, self.current.clone()));
        }
    }
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::{DiscreteModel, IncrementalModel};
    use crate::graph::Task;
    use crate::testutil::two_processor_example;

    #[test]
    fn worked_example_discrete() {
        let g = two_processor_example();
        let m = DiscreteModel::new(vec![2.0, 5.0, 6.0]).unwrap();
        let s = solve_exact(&g, &m).unwrap();
        assert_eq!(s.energy, 170.0);
        assert_eq!(s.speeds, vec![6.0, 2.0, 2.0, 5.0]);
        assert!((s.makespan - 1.5).abs() < 1e-12);
        let r = s.report(&g).unwrap();
        assert!(r.feasible);
        assert!((r.energy - 170.0).abs() < 1e-12);
    }

    #[test]
    fn worked_example_incremental() {
        let g = two_processor_example();
        let m = IncrementalModel::new(2.0, 6.0, 2.0).unwrap();
        let s = solve_exact(&g, &m).unwrap();
        assert_eq!(s.energy, 128.0);
        assert_eq!(s.speeds, vec![4.0; 4]);
    }

    #[test]
    fn single_task() {
        let g = ExecutionGraph::from_edges(vec![Task::new("a", 1.0)], [], 1.0).unwrap();
        let s = solve_exact(&g, &DiscreteModel::new(vec![1.0, 2.0]).unwrap()).unwrap();
        assert_eq!(s.speeds, vec![1.0]);
        assert_eq!(s.energy, 1.0);
    }

    #[test]
    fn infeasible() {
        let g = ExecutionGraph::from_edges(vec![Task::new("a", 3.0)], [], 1.0).unwrap();
        let e = solve_exact(&g, &DiscreteModel::new(vec![1.0, 2.0]).unwrap()).unwrap_err();
        assert!(e.is_infeasible());
    }

    #[test]
    fn ties_pick_smallest_vector() {
        // Chain of two unit tasks, deadline 1.5, modes {1, 2}: (1, 2) and
        // (2, 1) both take 1.5 and cost 5.
        let g = ExecutionGraph::from_edges(vec![Task::new("a", 1.0), Task::new("b", 1.0)], [(0, 1)], 1.5)
            .unwrap();
        let s = solve_exact(&g, &DiscreteModel::new(vec![1.0, 2.0]).unwrap()).unwrap();
        assert_eq!(s.energy, 5.0);
        assert_eq!(s.speeds, vec![1.0, 2.0]);
    }

    #[test]
    fn budget_reports_incumbent() {
        let g = two_processor_example();
        let m = DiscreteModel::new(vec![2.0, 5.0, 6.0]).unwrap();
        match solve_exact_with_budget(&g, &m, 5) {
            Err(Error::BudgetExceeded { budget, incumbent }) => {
                assert_eq!(budget, 5);
                let inc = incumbent.unwrap();
                assert!(inc.energy >= 170.0);
                assert!(inc.makespan <= 1.5 + 1e-9);
            }
            other => panic!("{other:?}"),
        }
        match solve_exact_with_budget(&g, &m, 1) {
            Err(Error::BudgetExceeded { incumbent, .. }) => assert!(incumbent.is_none()),
            other => panic!("{other:?}"),
        }
    }
}
