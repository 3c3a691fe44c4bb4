//! The continuous speed model: any speed in `(0, s_max]`, constant per task.

mod closed_form;
mod convex;
mod power;
mod spg;
mod structure;
mod tree;

pub use closed_form::{cube_root_sum_cubes, solve_chain, solve_fork_join, solve_independent, ClosedForm};
pub use convex::{solve_dag, GAP_TOL};
pub use power::{check_constant_power, power_profile, PowerProfile, MERGE_TOL};
pub use spg::{solve_spg, spg_cost, Spg, SpgNode, SpgSolution};
pub use structure::{detect_structure, matches_structure, solve_continuous, Dispatch, Structure};
pub use tree::{solve_tree, tree_eq_cost, Tree, TreeNode, TreeSolution};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuousModel {
    /// Maximum speed; `f64::INFINITY` for an unbounded processor.
    pub s_max: f64,
}

impl ContinuousModel {
    pub fn new(s_max: f64) -> Result<Self> {
        if !(s_max > 0.0) {
            return Err(Error::InvalidInput(format!("s_max must be positive, got {s_max}")));
        }
        Ok(Self { s_max })
    }

    pub fn unbounded() -> Self {
        Self { s_max: f64::INFINITY }
    }
}
