//! Hard instances built from 2-Partition: a chain with modes {1, 2}.

use num_rational::Ratio;

use super::{DiscreteModel, ExactSolution};
use crate::error::{Error, Result};
use crate::graph::{ExecutionGraph, Task};
use crate::schedule::TIME_TOL;

#[derive(Debug, Clone)]
pub struct TwoPartition {
    pub graph: ExecutionGraph,
    pub model: DiscreteModel,
    /// Half the sum of the values.
    pub half: Ratio<u64>,
    pub deadline: Ratio<u64>,
    pub energy_bound: Ratio<u64>,
}

impl TwoPartition {
    pub fn energy_bound_f64(&self) -> f64 {
        ratio_f64(self.energy_bound)
    }

    /// Whether `solution` meets both the deadline and the energy bound, i.e.
    /// whether it witnesses an equal partition.
    pub fn accepts(&self, solution: &ExactSolution) -> bool {
        let bound = self.energy_bound_f64();
        let deadline = ratio_f64(self.deadline);
        solution.makespan <= deadline * (1.0 + TIME_TOL) && solution.energy <= bound * (1.0 + TIME_TOL)
    }
}

fn ratio_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Chain `a_1 → … → a_n` with cost `a_i`, modes {1, 2}, deadline `3T/2` and
/// energy bound `5T` where `T = Σa / 2`.
pub fn gen_2partition(values: &[u64]) -> Result<TwoPartition> {
    if values.is_empty() || values.contains(&0) {
        return Err(Error::InvalidInput("values must be a nonempty list of positive integers".into()));
    }
    let sum: u64 = values.iter().sum();
    let half = Ratio::new(sum, 2);
    let deadline = half * Ratio::new(3, 2);
    let energy_bound = half * 5;
    let tasks = values
        .iter()
        .enumerate()
        .map(|(i, &a)| Task::new(format!("a{}", i + 1), a as f64))
        .collect();
    let graph = ExecutionGraph::from_edges(tasks, (1..values.len()).map(|i| (i - 1, i)), ratio_f64(deadline))?;
    Ok(TwoPartition {
        graph,
        model: DiscreteModel::new(vec![1.0, 2.0])?,
        half,
        deadline,
        energy_bound,
    })
}

/// Brute-force subset sum: can `values` be split into two halves of equal sum?
pub fn has_equal_partition(values: &[u64]) -> bool {
    let sum: u64 = values.iter().sum();
    if sum % 2 == 1 {
        return false;
    }
    let target = (sum / 2) as usize;
    let mut reachable = vec![false; target + 1];
    reachable[0] = true;
    for &a in values {
        let a = a as usize;
        for s in (a..=target).rev() {
            reachable[s] |= reachable[s - a];
        }
    }
    reachable[target]
}
