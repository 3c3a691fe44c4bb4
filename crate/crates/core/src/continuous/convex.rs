//! Numeric solver for general execution graphs under the continuous model.
//!
//! Variables are per-task durations `d` and completion times `t`. The
//! objective `Σ w³/d²` is convex on `d > 0` and all constraints are linear:
//!
//! ```txt
//!   t_i + d_j - t_j <= 0     for every edge (i, j)
//!   d_j - t_j       <= 0     for every source j
//!   t_j             <= D     for every sink j
//!   w_j / s_max - d_j <= 0   for every task j (finite s_max only)
//! ```
//!
//! Solved with a log-barrier method and damped Newton centering steps, in
//! units where the deadline and the largest cost are both 1.

use log::{debug, trace};
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::ExecutionGraph;
use crate::schedule::{evaluate_speeds, within_deadline, SolveReport, TIME_TOL};

/// Stop once the duality measure `m / t` falls below this fraction of the objective.
pub const GAP_TOL: f64 = 1e-12;
const BARRIER_FACTOR: f64 = 10.0;
const NEWTON_TOL: f64 = 1e-14;
const MAX_NEWTON_STEPS: usize = 5_000;
const QUADRATIC_REGION: f64 = 0.1;

struct Constraint {
    coeffs: Vec<(usize, f64)>,
    rhs: f64,
}

impl Constraint {
    fn slack(&self, x: &[f64]) -> f64 {
        self.rhs - self.coeffs.iter().map(|&(k, a)| a * x[k]).sum::<f64>()
    }
}

struct Barrier<'a> {
    /// Normalized costs, cubed.
    weights: Vec<f64>,
    constraints: &'a [Constraint],
    n: usize,
}

impl Barrier<'_> {
    fn objective(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, d)| w / (d * d)).sum()
    }

    /// `t·f(x) - Σ log(slack)`, or `None` outside the domain.
    fn value(&self, x: &[f64], t: f64) -> Option<f64> {
        if x[..self.n].iter().any(|&d| d <= 0.0) {
            return None;
        }
        let mut v = t * self.objective(x);
        for c in self.constraints {
            let s = c.slack(x);
            if s <= 0.0 {
                return None;
            }
            v -= s.ln();
        }
        Some(v)
    }

    fn gradient_hessian(&self, x: &[f64], t: f64) -> (DVector<f64>, DMatrix<f64>) {
        let dim = 2 * self.n;
        let mut g = DVector::zeros(dim);
        let mut h = DMatrix::zeros(dim, dim);
        for (j, w) in self.weights.iter().enumerate() {
            let d = x[j];
            g[j] += -2.0 * t * w / d.powi(3);
            h[(j, j)] += 6.0 * t * w / d.powi(4);
        }
        for c in self.constraints {
            let s = c.slack(x);
            for &(k, a) in &c.coeffs {
                g[k] += a / s;
                for &(l, b) in &c.coeffs {
                    h[(k, l)] += a * b / (s * s);
                }
            }
        }
        (g, h)
    }

    /// Stationarity residual of the Lagrangian, relative to the objective
    /// gradient. Multipliers are fitted by least squares over the constraints
    /// whose barrier dual estimate `1 / (t · slack)` is not negligible; slacks
    /// of active constraints are too small to give the multipliers directly.
    fn stationarity(&self, x: &[f64], t: f64) -> f64 {
        let dim = 2 * self.n;
        let mut grad = DVector::zeros(dim);
        for (j, w) in self.weights.iter().enumerate() {
            grad[j] = -2.0 * w / x[j].powi(3);
        }
        let scale = grad.amax().max(f64::MIN_POSITIVE);
        let active: Vec<&Constraint> = self
            .constraints
            .iter()
            .filter(|c| 1.0 / (t * c.slack(x)) > 1e-9 * scale)
            .collect();
        if active.is_empty() {
            return grad.amax() / scale;
        }
        let a = DMatrix::from_fn(dim, active.len(), |k, col| {
            active[col]
                .coeffs
                .iter()
                .find(|&&(idx, _)| idx == k)
                .map_or(0.0, |&(_, v)| v)
        });
        let lambda = match a.clone().svd(true, true).solve(&(-&grad), 1e-12) {
            Ok(l) => l,
            Err(_) => return f64::INFINITY,
        };
        (grad + a * lambda).amax() / scale
    }
}

/// Minimum-energy constant speeds for an arbitrary execution graph.
///
/// The returned report is re-timed ASAP; its diagnostics carry the number of
/// Newton steps and the final KKT residual (the larger of the relative
/// stationarity residual and the relative duality measure).
pub fn solve_dag(graph: &ExecutionGraph, s_max: f64) -> Result<SolveReport> {
    if !(s_max > 0.0) {
        return Err(Error::InvalidInput(format!("s_max must be positive, got {s_max}")));
    }
    let n = graph.len();
    let deadline = graph.deadline();
    if n == 0 {
        return Err(Error::InvalidInput("empty graph".into()));
    }
    let fastest = graph.makespan_at(s_max);
    if !within_deadline(fastest, deadline) {
        return Err(Error::Infeasible(format!(
            "makespan at s_max is {fastest}, deadline is {deadline}"
        )));
    }
    if fastest >= deadline * (1.0 - TIME_TOL) {
        // No interior: the all-s_max schedule is the only candidate we can certify.
        debug!("deadline equals the all-s_max makespan; returning it");
        let mut report = evaluate_speeds(graph, &vec![s_max; n])?;
        report.diagnostics.iterations = Some(0);
        return Ok(report);
    }

    let w_top = graph.tasks().iter().map(|t| t.cost).fold(0.0, f64::max);
    let w_norm: Vec<f64> = graph.costs().iter().map(|w| w / w_top).collect();
    // s_max in normalized units (time / deadline, work / w_top).
    let s_cap = s_max * deadline / w_top;

    let constraints = build_constraints(graph, &w_norm, s_cap);
    let barrier = Barrier {
        weights: w_norm.iter().map(|w| w.powi(3)).collect(),
        constraints: &constraints,
        n,
    };
    let m = constraints.len() as f64;

    let mut x = initial_point(graph, &w_norm, s_cap);
    debug_assert!(barrier.value(&x, 1.0).is_some());
    let mut t = m / barrier.objective(&x);
    let mut steps = 0usize;
    loop {
        steps += center(&barrier, &mut x, t, MAX_NEWTON_STEPS.saturating_sub(steps))?;
        let f = barrier.objective(&x);
        trace!("barrier t={t:e} f={f} steps={steps}");
        if m / t < GAP_TOL * f {
            break;
        }
        if steps >= MAX_NEWTON_STEPS {
            return Err(Error::NoConvergence {
                iterations: steps,
                residual: m / t / f,
            });
        }
        t *= BARRIER_FACTOR;
    }
    let f = barrier.objective(&x);
    let residual = barrier.stationarity(&x, t).max(m / t / f);
    debug!("barrier converged: {steps} Newton steps, residual {residual:e}");

    let speeds: Vec<f64> = (0..n)
        .map(|j| (graph.cost(j) / (x[j] * deadline)).min(s_max))
        .collect();
    let mut report = evaluate_speeds(graph, &speeds)?;
    report.diagnostics.iterations = Some(steps);
    report.diagnostics.residual = Some(residual);
    Ok(report)
}

fn build_constraints(graph: &ExecutionGraph, w_norm: &[f64], s_cap: f64) -> Vec<Constraint> {
    let n = graph.len();
    let (d, t) = (|j: usize| j, |j: usize| n + j);
    let mut out = Vec::new();
    for &(i, j) in graph.edges() {
        out.push(Constraint {
            coeffs: vec![(t(i), 1.0), (d(j), 1.0), (t(j), -1.0)],
            rhs: 0.0,
        });
    }
    for j in graph.sources() {
        out.push(Constraint {
            coeffs: vec![(d(j), 1.0), (t(j), -1.0)],
            rhs: 0.0,
        });
    }
    for j in graph.sinks() {
        out.push(Constraint {
            coeffs: vec![(t(j), 1.0)],
            rhs: 1.0,
        });
    }
    if s_cap.is_finite() {
        for (j, w) in w_norm.iter().enumerate() {
            out.push(Constraint {
                coeffs: vec![(d(j), -1.0)],
                rhs: -w / s_cap,
            });
        }
    }
    out
}

/// Strictly feasible start: durations at a uniform slowdown of the fastest
/// schedule, completion times from an ASAP pass with slightly longer durations.
fn initial_point(graph: &ExecutionGraph, w_norm: &[f64], s_cap: f64) -> Vec<f64> {
    let n = graph.len();
    let base: Vec<f64> = if s_cap.is_finite() {
        w_norm.iter().map(|w| w / s_cap).collect()
    } else {
        let unit: Vec<f64> = w_norm.to_vec();
        let span = graph.makespan(&unit);
        unit.iter().map(|w| w / (2.0 * span)).collect()
    };
    let ratio = 1.0 / graph.makespan(&base);
    let durations: Vec<f64> = base.iter().map(|b| b * ratio.cbrt()).collect();
    let padded: Vec<f64> = base.iter().map(|b| b * ratio.cbrt().powi(2)).collect();
    let mut x = durations;
    x.extend(graph.completion_times(&padded));
    debug_assert_eq!(x.len(), 2 * n);
    x
}

/// Damped Newton minimization of the barrier at parameter `t`. Returns the
/// number of steps taken.
fn center(barrier: &Barrier, x: &mut [f64], t: f64, budget: usize) -> Result<usize> {
    let mut steps = 0;
    let mut previous = f64::INFINITY;
    let mut candidate = vec![0.0; x.len()];
    loop {
        let (g, h) = barrier.gradient_hessian(x, t);
        let Some(dx) = newton_direction(&g, h) else {
            return Err(Error::NoConvergence {
                iterations: steps,
                residual: g.amax(),
            });
        };
        let decrement = -g.dot(&dx);
        // Inside the quadratic region only rounding can keep the decrement from shrinking;
        // stop there.
        let stalled = decrement < QUADRATIC_REGION && decrement >= 0.5 * previous;
        if decrement / 2.0 <= NEWTON_TOL || stalled {
            return Ok(steps);
        }
        if steps >= budget {
            return Err(Error::NoConvergence {
                iterations: steps,
                residual: decrement,
            });
        }
        steps += 1;
        previous = decrement;

        // Near the center take the longest step that stays in the domain;
        // farther out, backtrack on the Armijo condition as well.
        let current = barrier.value(x, t).expect("iterate left the domain");
        let mut alpha = 1.0;
        loop {
            for (c, (xi, di)) in candidate.iter_mut().zip(x.iter().zip(dx.iter())) {
                *c = xi + alpha * di;
            }
            match barrier.value(&candidate, t) {
                Some(_) if decrement < QUADRATIC_REGION => break,
                Some(v) if v <= current - 0.25 * alpha * decrement => break,
                _ => alpha *= 0.5,
            }
            if alpha < 1e-20 {
                return Ok(steps);
            }
        }
        x.copy_from_slice(&candidate);
    }
}

fn newton_direction(g: &DVector<f64>, h: DMatrix<f64>) -> Option<DVector<f64>> {
    // Symmetric diagonal scaling keeps Cholesky accurate when barrier terms
    // span many orders of magnitude.
    let scale = DVector::from_iterator(h.nrows(), h.diagonal().iter().map(|v| 1.0 / v.sqrt()));
    if scale.iter().any(|s| !s.is_finite()) {
        return None;
    }
    let hs = DMatrix::from_fn(h.nrows(), h.ncols(), |i, j| h[(i, j)] * scale[i] * scale[j]);
    let gs = g.component_mul(&scale);
    let chol = hs.cholesky()?;
    let step = chol.solve(&(-gs));
    Some(step.component_mul(&scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuous::{solve_fork_join, solve_tree, Tree};
    use crate::graph::Task;
    use crate::testutil::two_processor_example;

    #[test]
    fn worked_example() {
        let g = two_processor_example();
        let r = solve_dag(&g, 6.0).unwrap();
        let c = 35f64.cbrt();
        let s1 = 2.0 / 3.0 * (3.0 + c);
        let expect = [s1, s1 * 2.0 / c, s1 * 3.0 / c, s1 * 3.0 / c];
        let speeds = r.speeds(&g);
        for (a, b) in speeds.iter().zip(expect) {
            assert!((a - b).abs() < 1e-6, "{speeds:?}");
        }
        let e = 3.0 * s1 * s1 + 2.0 * expect[1].powi(2) + 3.0 * expect[2].powi(2);
        assert!((r.energy - e).abs() < 1e-6);
        assert!((r.energy - 109.6).abs() < 0.05);
        assert!(r.feasible);
        eprintln!("{:?}", r.diagnostics);
        assert!(r.diagnostics.residual.unwrap() <= 1e-8, "{:?}", r.diagnostics);
    }

    #[test]
    fn single_task() {
        let g = ExecutionGraph::from_edges(vec![Task::new("a", 3.0)], [], 1.5).unwrap();
        let r = solve_dag(&g, f64::INFINITY).unwrap();
        assert!((r.speeds(&g)[0] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn fork_matches_closed_form() {
        let tasks = vec![
            Task::new("r", 1.0),
            Task::new("a", 2.0),
            Task::new("b", 0.5),
            Task::new("c", 1.5),
        ];
        let g = ExecutionGraph::from_edges(tasks, [(0, 1), (0, 2), (0, 3)], 1.7).unwrap();
        let f = solve_fork_join(1.0, &[2.0, 0.5, 1.5], 1.7, f64::INFINITY).unwrap();
        let r = solve_dag(&g, f64::INFINITY).unwrap();
        assert!((r.energy - f.energy).abs() <= 1e-5 * f.energy);
    }

    #[test]
    fn clamped_tree_matches_closed_form() {
        let tasks = vec![Task::new("r", 1.0), Task::new("a", 1.0), Task::new("b", 1.0)];
        let g = ExecutionGraph::from_edges(tasks, [(0, 1), (0, 2)], 1.0).unwrap();
        let tree = Tree::from_graph(&g).unwrap();
        let closed = solve_tree(&tree, 1.0, 2.2).unwrap();
        let r = solve_dag(&g, 2.2).unwrap();
        assert!((r.energy - closed.energy).abs() <= 1e-6 * closed.energy);
    }

    #[test]
    fn infeasible_and_tight() {
        let g = two_processor_example();
        assert!(matches!(solve_dag(&g, 2.0), Err(Error::Infeasible(_))));
        // Critical path T1 -> T3 -> T4 has cost 6: s_max = 4 is exactly tight.
        let r = solve_dag(&g, 4.0).unwrap();
        assert!(r.feasible);
        assert!((r.makespan - 1.5).abs() < 1e-12);
    }

    #[test]
    fn independent_tasks() {
        let tasks = vec![Task::new("a", 1.0), Task::new("b", 2.0)];
        let g = ExecutionGraph::from_edges(tasks, [], 1.0).unwrap();
        let r = solve_dag(&g, f64::INFINITY).unwrap();
        assert!((r.energy - 9.0).abs() < 1e-8);
    }
}
