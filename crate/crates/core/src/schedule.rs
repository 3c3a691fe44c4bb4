//! Speed profiles, solve reports, and the schedule evaluator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::ExecutionGraph;

/// Relative tolerance on deadlines and completed work.
pub const TIME_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub speed: f64,
    pub duration: f64,
}

/// How a task's speed evolves during its execution.
#[derive(Debug, Clone, PartialEq)]
pub enum SpeedProfile {
    Constant(f64),
    /// Consecutive constant-speed pieces.
    Segments(Vec<Segment>),
}

impl SpeedProfile {
    pub fn duration(&self, work: f64) -> f64 {
        match self {
            SpeedProfile::Constant(s) => work / s,
            SpeedProfile::Segments(segs) => segs.iter().map(|s| s.duration).sum(),
        }
    }

    /// Work completed, given the work required (a constant profile always completes it).
    pub fn work(&self, required: f64) -> f64 {
        match self {
            SpeedProfile::Constant(_) => required,
            SpeedProfile::Segments(segs) => segs.iter().map(|s| s.speed * s.duration).sum(),
        }
    }

    /// Energy as the sum of speed³ × duration over constant-speed pieces.
    pub fn energy(&self, work: f64) -> f64 {
        match self {
            SpeedProfile::Constant(s) => s * s * s * (work / s),
            SpeedProfile::Segments(segs) => segs.iter().map(|g| g.speed.powi(3) * g.duration).sum(),
        }
    }

    /// Work divided by time spent.
    pub fn average_speed(&self, work: f64) -> f64 {
        match self {
            SpeedProfile::Constant(s) => *s,
            SpeedProfile::Segments(_) => work / self.duration(work),
        }
    }

    fn validate(&self, id: &str) -> Result<()> {
        let bad = |what: String| Err(Error::InvalidInput(format!("task {id:?}: {what}")));
        match self {
            SpeedProfile::Constant(s) if !(*s > 0.0 && s.is_finite()) => {
                bad(format!("speed must be positive, got {s}"))
            }
            SpeedProfile::Segments(segs) => {
                for g in segs {
                    if !(g.speed > 0.0 && g.speed.is_finite()) {
                        return bad(format!("segment speed must be positive, got {}", g.speed));
                    }
                    if !(g.duration >= 0.0 && g.duration.is_finite()) {
                        return bad(format!("segment duration must be non-negative, got {}", g.duration));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Timed execution of one task.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskRun {
    pub profile: SpeedProfile,
    pub start: f64,
    pub completion: f64,
}

impl TaskRun {
    pub fn duration(&self) -> f64 {
        self.completion - self.start
    }
}

/// Solver diagnostics; absent fields do not apply to the solver that ran.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub energy: f64,
    pub makespan: f64,
    pub feasible: bool,
    /// Indexed like the graph's tasks.
    pub runs: Vec<TaskRun>,
    pub diagnostics: Diagnostics,
}

impl SolveReport {
    pub fn profiles(&self) -> Vec<SpeedProfile> {
        self.runs.iter().map(|r| r.profile.clone()).collect()
    }

    /// Constant speeds, or average speeds for segmented profiles.
    pub fn speeds(&self, graph: &ExecutionGraph) -> Vec<f64> {
        self.runs
            .iter()
            .enumerate()
            .map(|(i, r)| r.profile.average_speed(graph.cost(i)))
            .collect()
    }
}

/// Re-times `profiles` as soon as possible and reports makespan, energy and
/// deadline feasibility.
pub fn evaluate_schedule(graph: &ExecutionGraph, profiles: &[SpeedProfile]) -> Result<SolveReport> {
    if profiles.len() != graph.len() {
        return Err(Error::InvalidInput(format!(
            "schedule has {} profiles for {} tasks",
            profiles.len(),
            graph.len()
        )));
    }
    let mut durations = Vec::with_capacity(graph.len());
    let mut energy = 0.0;
    for (i, p) in profiles.iter().enumerate() {
        let w = graph.cost(i);
        p.validate(graph.id(i))?;
        let done = p.work(w);
        if done < w - TIME_TOL * w {
            return Err(Error::WorkDeficit {
                id: graph.id(i).to_string(),
                done,
                required: w,
            });
        }
        durations.push(p.duration(w));
        energy += p.energy(w);
    }
    let completion = graph.completion_times(&durations);
    let makespan = completion.iter().copied().fold(0.0, f64::max);
    let runs = profiles
        .iter()
        .zip(&durations)
        .zip(&completion)
        .map(|((p, d), &c)| TaskRun {
            profile: p.clone(),
            start: c - d,
            completion: c,
        })
        .collect();
    Ok(SolveReport {
        energy,
        makespan,
        feasible: within_deadline(makespan, graph.deadline()),
        runs,
        diagnostics: Diagnostics::default(),
    })
}

/// Constant-speed convenience wrapper around [`evaluate_schedule`].
pub fn evaluate_speeds(graph: &ExecutionGraph, speeds: &[f64]) -> Result<SolveReport> {
    let profiles: Vec<_> = speeds.iter().map(|&s| SpeedProfile::Constant(s)).collect();
    evaluate_schedule(graph, &profiles)
}

pub(crate) fn within_deadline(time: f64, deadline: f64) -> bool {
    time <= deadline + TIME_TOL * deadline
}
