//! The VDD-hopping model: a task may switch between modes during its
//! execution. The optimum comes from a linear program over start times and
//! per-mode execution times.

mod lp;

pub use lp::{solve_lp, Constraint, LpProblem, LpSolution, PIVOT_TOL};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::ExecutionGraph;
use crate::schedule::{within_deadline, Diagnostics, Segment, SolveReport, SpeedProfile, TaskRun};

/// Segments shorter than this are dropped from emitted schedules.
pub const MIN_SEGMENT: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VddModel {
    modes: Vec<f64>,
}

impl VddModel {
    /// Modes are sorted; they must be distinct, positive and finite.
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

    pub fn top(&self) -> f64 {
        *self.modes.last().unwrap()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VddSegment {
    /// Index into the model's modes.
    pub mode: usize,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VddTask {
    pub start: f64,
    /// Slowest mode first.
    pub segments: Vec<VddSegment>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VddSchedule {
    pub tasks: Vec<VddTask>,
}

impl VddSchedule {
    pub fn profiles(&self, model: &VddModel) -> Vec<SpeedProfile> {
        self.tasks
            .iter()
            .map(|t| {
                SpeedProfile::Segments(
                    t.segments
                        .iter()
                        .map(|g| Segment {
                            speed: model.modes[g.mode],
                            duration: g.duration,
                        })
                        .collect(),
                )
            })
            .collect()
    }
}

/// Index of `b_i` in the program built by [`build_lp`].
pub fn start_var(task: usize) -> usize {
    task
}

/// Index of `α_(i,j)`, the time task `i` spends in mode `j`.
pub fn mode_var(n: usize, m: usize, task: usize, mode: usize) -> usize {
    n + task * m + mode
}

/// The linear program over start times `b_i` and mode times `α_(i,j)`.
/// Non-negativity of every variable (including `b_i ≥ 0`) is implicit.
pub fn build_lp(graph: &ExecutionGraph, model: &VddModel) -> LpProblem {
    let n = graph.len();
    let m = model.modes.len();
    let mut lp = LpProblem::default();
    for i in 0..n {
        lp.add_variable(format!("b_{}", graph.id(i)), 0.0);
    }
    for i in 0..n {
        for (j, s) in model.modes.iter().enumerate() {
            lp.add_variable(format!("a_{}_{}", graph.id(i), j + 1), s * s * s);
        }
    }
    let span = |i: usize| -> Vec<(usize, f64)> {
        std::iter::once((start_var(i), 1.0))
            .chain((0..m).map(|j| (mode_var(n, m, i, j), 1.0)))
            .collect()
    };
    for i in 0..n {
        lp.add_constraint(format!("deadline_{}", graph.id(i)), span(i), graph.deadline());
    }
    for &(i, k) in graph.edges() {
        let mut row = span(i);
        row.push((start_var(k), -1.0));
        lp.add_constraint(format!("prec_{}_{}", graph.id(i), graph.id(k)), row, 0.0);
    }
    for i in 0..n {
        let row = (0..m).map(|j| (mode_var(n, m, i, j), -model.modes[j])).collect();
        lp.add_constraint(format!("work_{}", graph.id(i)), row, -graph.cost(i));
    }
    lp
}

/// Optimal VDD-hopping schedule. Start times come straight from the program.
pub fn solve_vdd(graph: &ExecutionGraph, model: &VddModel) -> Result<(VddSchedule, SolveReport)> {
    let fastest = graph.makespan_at(model.top());
    if !within_deadline(fastest, graph.deadline()) {
        return Err(Error::Infeasible(format!(
            "makespan {fastest} at the top mode {} exceeds the deadline {}",
            model.top(),
            graph.deadline()
        )));
    }
    let lp = build_lp(graph, model);
    let sol = match solve_lp(&lp) {
        Ok(sol) => sol,
        Err(Error::LpInfeasible) => return Err(Error::Infeasible("mode program is infeasible".into())),
        Err(e) => return Err(e),
    };
    let n = graph.len();
    let m = model.modes.len();
    let tasks: Vec<VddTask> = (0..n)
        .map(|i| VddTask {
            start: sol.x[start_var(i)],
            segments: (0..m)
                .map(|j| VddSegment {
                    mode: j,
                    duration: sol.x[mode_var(n, m, i, j)],
                })
                .filter(|g| g.duration >= MIN_SEGMENT)
                .collect(),
        })
        .collect();
    let schedule = VddSchedule { tasks };
    let profiles = schedule.profiles(model);
    let mut runs = Vec::with_capacity(n);
    let mut energy = 0.0;
    for (i, (task, profile)) in schedule.tasks.iter().zip(profiles).enumerate() {
        let w = graph.cost(i);
        let done = profile.work(w);
        if done < w * (1.0 - crate::schedule::TIME_TOL) {
            return Err(Error::LpNumerical(format!(
                "task {:?} completes {done} of {w} work units",
                graph.id(i)
            )));
        }
        energy += profile.energy(w);
        let completion = task.start + profile.duration(w);
        runs.push(TaskRun {
            profile,
            start: task.start,
            completion,
        });
    }
    let makespan = runs.iter().map(|r| r.completion).fold(0.0, f64::max);
    log::debug!("vdd: {} pivots, objective {}", sol.pivots, sol.objective);
    let report = SolveReport {
        energy,
        makespan,
        feasible: within_deadline(makespan, graph.deadline()),
        runs,
        diagnostics: Diagnostics {
            iterations: Some(sol.pivots),
            ..Default::default()
        },
    };
    Ok((schedule, report))
}

/// Work divided by total execution time, per task.
pub fn average_speeds(schedule: &VddSchedule, graph: &ExecutionGraph) -> Result<Vec<f64>> {
    schedule
        .tasks
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let total: f64 = t.segments.iter().map(|g| g.duration).sum();
            if total > 0.0 {
                Ok(graph.cost(i) / total)
            } else {
                Err(Error::DegenerateDuration(graph.id(i).to_string()))
            }
        })
        .collect()
}
