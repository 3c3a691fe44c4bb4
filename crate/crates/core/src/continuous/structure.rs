//! Graph-shape detection and dispatch to the matching continuous solver.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{solve_chain, solve_dag, solve_fork_join, solve_independent, solve_spg, solve_tree, Spg, Tree};
use crate::error::{Error, Result};
use crate::graph::ExecutionGraph;
use crate::schedule::{evaluate_speeds, SolveReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Structure {
    Independent,
    Chain,
    Fork,
    Join,
    Tree,
    Spg,
    Dag,
}

impl Structure {
    pub const ALL: [Structure; 7] = [
        Structure::Independent,
        Structure::Chain,
        Structure::Fork,
        Structure::Join,
        Structure::Tree,
        Structure::Spg,
        Structure::Dag,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Structure::Independent => "independent",
            Structure::Chain => "chain",
            Structure::Fork => "fork",
            Structure::Join => "join",
            Structure::Tree => "tree",
            Structure::Spg => "spg",
            Structure::Dag => "dag",
        }
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Structure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Structure::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown structure {s:?}")))
    }
}

fn is_chain(g: &ExecutionGraph) -> bool {
    g.len() >= 2
        && g.sources().count() == 1
        && (0..g.len()).all(|i| g.preds(i).len() <= 1 && g.succs(i).len() <= 1)
}

/// The single task adjacent to every other one, all of which are leaves.
fn hub(g: &ExecutionGraph, out: bool) -> Option<usize> {
    if g.len() < 2 || g.edges().len() != g.len() - 1 {
        return None;
    }
    let ends: Vec<usize> = if out { g.sources().collect() } else { g.sinks().collect() };
    let &[h] = ends.as_slice() else {
        return None;
    };
    let around = if out { g.succs(h) } else { g.preds(h) };
    (around.len() == g.len() - 1).then_some(h)
}

/// Whether `graph` has the shape `structure` requires.
pub fn matches_structure(graph: &ExecutionGraph, structure: Structure) -> bool {
    match structure {
        Structure::Independent => graph.edges().is_empty(),
        Structure::Chain => is_chain(graph),
        Structure::Fork => hub(graph, true).is_some(),
        Structure::Join => hub(graph, false).is_some(),
        Structure::Tree => Tree::from_graph(graph).is_some(),
        Structure::Spg => Spg::from_graph(graph).is_some(),
        Structure::Dag => true,
    }
}

/// Most specific shape of `graph`, checked in [`Structure::ALL`] order.
pub fn detect_structure(graph: &ExecutionGraph) -> Structure {
    Structure::ALL
        .into_iter()
        .find(|&s| matches_structure(graph, s))
        .unwrap_or(Structure::Dag)
}

/// How [`solve_continuous`] picks a solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Dispatch {
    /// Forced shape; detected when `None`.
    pub structure: Option<Structure>,
    /// Route SPGs with finite `s_max` to the numeric solver instead of failing.
    pub fallback_dag: bool,
}

/// Solves the continuous model with the closed form matching the graph's
/// shape, or numerically. Returns the solver actually used.
///
/// Detected SPGs go to the numeric solver when `s_max` is finite. An explicit
/// SPG request with finite `s_max` is rejected unless `fallback_dag` is set.
pub fn solve_continuous(graph: &ExecutionGraph, s_max: f64, dispatch: Dispatch) -> Result<(Structure, SolveReport)> {
    let structure = match dispatch.structure {
        Some(s) if !matches_structure(graph, s) => {
            return Err(Error::InvalidInput(format!("graph is not a {s}")));
        }
        Some(Structure::Spg) if s_max.is_finite() && !dispatch.fallback_dag => {
            return Err(Error::Unsupported(
                "no closed form for series-parallel graphs with finite s_max; use the dag fallback".into(),
            ));
        }
        Some(s) => s,
        None => detect_structure(graph),
    };
    let structure = match structure {
        Structure::Spg if s_max.is_finite() => Structure::Dag,
        s => s,
    };
    let d = graph.deadline();
    let speeds = match structure {
        Structure::Independent => solve_independent(&graph.costs(), d, s_max)?.speeds,
        Structure::Chain => {
            let r = solve_chain(&graph.costs(), d, s_max)?;
            vec![r.speeds[0]; graph.len()]
        }
        Structure::Fork | Structure::Join => {
            let h = hub(graph, structure == Structure::Fork).expect("shape checked");
            let others: Vec<usize> = (0..graph.len()).filter(|&i| i != h).collect();
            let costs: Vec<f64> = others.iter().map(|&i| graph.cost(i)).collect();
            let r = solve_fork_join(graph.cost(h), &costs, d, s_max)?;
            let mut speeds = vec![0.0; graph.len()];
            speeds[h] = r.speeds[0];
            for (k, &i) in others.iter().enumerate() {
                speeds[i] = r.speeds[k + 1];
            }
            speeds
        }
        Structure::Tree => solve_tree(&Tree::from_graph(graph).expect("shape checked"), d, s_max)?.speeds,
        Structure::Spg => solve_spg(&Spg::from_graph(graph).expect("shape checked"), d, s_max)?.speeds,
        Structure::Dag => return Ok((Structure::Dag, solve_dag(graph, s_max)?)),
    };
    Ok((structure, evaluate_speeds(graph, &speeds)?))
}
