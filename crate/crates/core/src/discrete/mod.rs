//! Discrete and incremental speed models: one admissible speed per task.

mod approx;
mod exact;
mod partition;

pub use approx::{approx_discrete, approx_incremental, geometric_modes, round_continuous, round_up, ApproxResult};
pub use exact::{solve_exact, solve_exact_with_budget, ExactSolution, DEFAULT_NODE_BUDGET};
pub use partition::{gen_2partition, has_equal_partition, TwoPartition};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite, ascending set of admissible speeds.
pub trait SpeedGrid {
    fn speeds(&self) -> Vec<f64>;
}

/// Ascending list of admissible speeds.
pub fn admissible_speeds<M: SpeedGrid + ?Sized>(model: &M) -> Vec<f64> {
    model.speeds()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteModel {
    modes: Vec<f64>,
}

impl DiscreteModel {
    pub fn new(mut modes: Vec<f64>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::InvalidInput("at least one mode is required".into()));
        }
        if let Some(s) = modes.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidInput(format!("mode must be positive, got {s}")));
        }
        modes.sort_by(f64::total_cmp);
        if let Some(w) = modes.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput(format!("duplicate mode {}", w[0])));
        }
        Ok(Self { modes })
    }

    pub fn modes(&self) -> &[f64] {
        &self.modes
    }

    /// Largest gap between consecutive modes; 0 with a single mode.
    pub fn alpha(&self) -> f64 {
        self.modes.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }
}

impl SpeedGrid for DiscreteModel {
    fn speeds(&self) -> Vec<f64> {
        self.modes.clone()
    }
}

/// Speeds `s_min + i·δ` not above `s_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncrementalModel {
    pub s_min: f64,
    pub s_max: f64,
    pub delta: f64,
}

impl IncrementalModel {
    pub fn new(s_min: f64, s_max: f64, delta: f64) -> Result<Self> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !ok(s_min) || !ok(s_max) || !ok(delta) {
            return Err(Error::InvalidInput(format!(
                "s_min, s_max and delta must be positive (got {s_min}, {s_max}, {delta})"
            )));
        }
        if s_min > s_max {
            return Err(Error::InvalidInput(format!("s_min {s_min} exceeds s_max {s_max}")));
        }
        Ok(Self { s_min, s_max, delta })
    }

    /// Number of grid steps above `s_min`.
    fn steps(&self) -> usize {
        ((self.s_max - self.s_min) / self.delta + 1e-9).floor() as usize
    }

    /// Largest admissible speed.
    pub fn top(&self) -> f64 {
        (self.s_min + self.steps() as f64 * self.delta).min(self.s_max)
    }
}

impl SpeedGrid for IncrementalModel {
    fn speeds(&self) -> Vec<f64> {
        (0..=self.steps())
            .map(|i| (self.s_min + i as f64 * self.delta).min(self.s_max))
            .collect()
    }
}
