//! Approximation schemes: solve a VDD-hopping relaxation on a geometric
//! mode set, then round each task's average speed up to the grid.

use super::{DiscreteModel, IncrementalModel, SpeedGrid};
use crate::error::{Error, Result};
use crate::graph::ExecutionGraph;
use crate::schedule::{evaluate_speeds, SolveReport};
use crate::vdd::{average_speeds, solve_vdd, VddModel};

/// Relative slack when snapping a speed onto a grid value just below it.
const SNAP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ApproxResult {
    /// Rounded speeds, indexed like the graph's tasks.
    pub speeds: Vec<f64>,
    /// ASAP evaluation of the rounded speeds.
    pub report: SolveReport,
    /// Modes given to the VDD relaxation.
    pub modes: Vec<f64>,
    pub vdd_energy: f64,
    /// A priori ratio guaranteed against the exact optimum.
    pub bound_factor: f64,
    /// Lower bound on the exact optimum derived from the relaxation.
    pub lower_bound: f64,
    /// `bound_factor × lower_bound`, an upper bound on the returned energy.
    pub certified_upper: f64,
}

impl ApproxResult {
    pub fn energy(&self) -> f64 {
        self.report.energy
    }
}

/// `low·(1 + 1/K)^i` for every `i` keeping the value at most `high`, followed
/// by `high` itself when it is not already the last value.
pub fn geometric_modes(low: f64, high: f64, k: u32) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::InvalidInput("K must be at least 1".into()));
    }
    if !(low > 0.0 && low <= high && high.is_finite()) {
        return Err(Error::InvalidInput(format!("bad speed range [{low}, {high}]")));
    }
    let ratio = 1.0 + 1.0 / k as f64;
    let steps = ((high / low).ln() / ratio.ln() + 1e-12).floor() as i32;
    let mut modes: Vec<f64> = (0..=steps).map(|i| low * ratio.powi(i)).filter(|&s| s <= high).collect();
    if *modes.last().unwrap() < high * (1.0 - SNAP) {
        modes.push(high);
    }
    Ok(modes)
}

/// Smallest value of the ascending `grid` at least `speed`, or `None` past the top.
pub fn round_up(speed: f64, grid: &[f64]) -> Option<f64> {
    grid.iter().copied().find(|&g| g >= speed * (1.0 - SNAP))
}

/// Rounds continuous speeds up to the incremental grid.
pub fn round_continuous(speeds: &[f64], model: &IncrementalModel) -> Result<Vec<f64>> {
    let grid = model.speeds();
    speeds
        .iter()
        .enumerate()
        .map(|(index, &s)| {
            round_up(s, &grid).ok_or(Error::Range {
                index,
                speed: s,
                top: model.top(),
            })
        })
        .collect()
}

fn pipeline(graph: &ExecutionGraph, grid: &[f64], k: u32, gap: f64) -> Result<ApproxResult> {
    let low = grid[0];
    let top = *grid.last().unwrap();
    let modes = geometric_modes(low, top, k)?;
    let vdd = VddModel::new(modes.clone())?;
    let (schedule, vdd_report) = solve_vdd(graph, &vdd)?;
    let averages = average_speeds(&schedule, graph)?;
    let speeds = averages
        .iter()
        .map(|&s| match round_up(s, grid) {
            Some(g) => Ok(g),
            None if s <= top * (1.0 + 1e-9) => Ok(top),
            None => Err(Error::Infeasible(format!("average speed {s} is above the top speed {top}"))),
        })
        .collect::<Result<Vec<f64>>>()?;
    let report = evaluate_speeds(graph, &speeds)?;
    let relax = (1.0 + 1.0 / k as f64).powi(2);
    let bound_factor = (1.0 + gap / low).powi(2) * relax;
    let lower_bound = vdd_report.energy / relax;
    Ok(ApproxResult {
        speeds,
        report,
        modes,
        vdd_energy: vdd_report.energy,
        bound_factor,
        lower_bound,
        certified_upper: bound_factor * lower_bound,
    })
}

/// Incremental-model approximation within `(1 + δ/s_min)²(1 + 1/K)²`.
pub fn approx_incremental(graph: &ExecutionGraph, model: &IncrementalModel, k: u32) -> Result<ApproxResult> {
    pipeline(graph, &model.speeds(), k, model.delta)
}

/// Discrete-model approximation within `(1 + α/s_1)²(1 + 1/K)²`.
pub fn approx_discrete(graph: &ExecutionGraph, model: &DiscreteModel, k: u32) -> Result<ApproxResult> {
    pipeline(graph, model.modes(), k, model.alpha())
}
