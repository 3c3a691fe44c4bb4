//! Total dissipated power over time, and the constant-power check.

use crate::graph::ExecutionGraph;
use crate::schedule::{SpeedProfile, TaskRun};

/// Event times closer than this fraction of the horizon are merged.
pub const MERGE_TOL: f64 = 1e-9;

/// Piecewise-constant power: `levels[k]` holds on `[breakpoints[k], breakpoints[k+1]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerProfile {
    pub breakpoints: Vec<f64>,
    pub levels: Vec<f64>,
}

impl PowerProfile {
    /// ∫ P(t) dt over the whole profile.
    pub fn integral(&self) -> f64 {
        self.breakpoints
            .windows(2)
            .zip(&self.levels)
            .map(|(w, p)| (w[1] - w[0]) * p)
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// `t,power` rows, one per breakpoint; the last row repeats the final level.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,power\n");
        for (k, t) in self.breakpoints.iter().enumerate() {
            let p = self.levels.get(k).or(self.levels.last()).copied().unwrap_or(0.0);
            out.push_str(&format!("{t},{p}\n"));
        }
        out
    }
}

/// Power profile of a timed schedule: each constant-speed piece contributes
/// speed³ over its interval.
pub fn power_profile(graph: &ExecutionGraph, runs: &[TaskRun]) -> PowerProfile {
    let mut events: Vec<(f64, f64)> = Vec::new();
    for (i, run) in runs.iter().enumerate() {
        match &run.profile {
            SpeedProfile::Constant(s) => {
                let end = run.start + graph.cost(i) / s;
                events.push((run.start, s.powi(3)));
                events.push((end, -s.powi(3)));
            }
            SpeedProfile::Segments(segs) => {
                let mut at = run.start;
                for g in segs {
                    events.push((at, g.speed.powi(3)));
                    at += g.duration;
                    events.push((at, -g.speed.powi(3)));
                }
            }
        }
    }
    if events.is_empty() {
        return PowerProfile {
            breakpoints: Vec::new(),
            levels: Vec::new(),
        };
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0));
    let first = events[0].0;
    let horizon = events.last().unwrap().0 - first;
    let tol = MERGE_TOL * horizon.max(f64::MIN_POSITIVE);

    let mut breakpoints = vec![first];
    let mut levels = Vec::new();
    let mut level = 0.0;
    let mut k = 0;
    while k < events.len() {
        let anchor = events[k].0;
        while k < events.len() && events[k].0 - anchor <= tol {
            level += events[k].1;
            k += 1;
        }
        if anchor > *breakpoints.last().unwrap() {
            breakpoints.push(anchor);
        }
        if k < events.len() {
            levels.push(level.max(0.0));
        }
    }
    PowerProfile { breakpoints, levels }
}

/// True when every level is within `rel_tol` of the time-weighted mean.
pub fn check_constant_power(profile: &PowerProfile, rel_tol: f64) -> bool {
    let span = match (profile.breakpoints.first(), profile.breakpoints.last()) {
        (Some(a), Some(b)) if b > a => b - a,
        _ => return false,
    };
    let mean = profile.integral() / span;
    profile
        .levels
        .iter()
        .all(|p| (p - mean).abs() <= rel_tol * mean)
}
