use crate::error::{Error, Result};

/// Per-task speeds and total energy of a closed-form solution.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedForm {
    pub speeds: Vec<f64>,
    pub energy: f64,
}

fn check_positive(costs: &[f64], deadline: f64) -> Result<()> {
    if let Some(w) = costs.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
        return Err(Error::InvalidInput(format!("task cost must be positive, got {w}")));
    }
    if deadline.is_nan() || deadline.is_infinite() {
        return Err(Error::InvalidInput(format!("invalid deadline {deadline}")));
    }
    Ok(())
}

/// Independent tasks: each runs alone over the whole deadline.
pub fn solve_independent(costs: &[f64], deadline: f64, s_max: f64) -> Result<ClosedForm> {
    check_positive(costs, deadline)?;
    if deadline <= 0.0 {
        return Err(Error::Infeasible(format!("no time left (deadline {deadline})")));
    }
    let speeds: Vec<f64> = costs.iter().map(|w| w / deadline).collect();
    if let Some(s) = speeds.iter().find(|&&s| s > s_max) {
        return Err(Error::Infeasible(format!("required speed {s} exceeds s_max {s_max}")));
    }
    let energy = costs.iter().map(|w| w.powi(3)).sum::<f64>() / (deadline * deadline);
    Ok(ClosedForm { speeds, energy })
}

/// A chain behaves like one task carrying the total cost.
pub fn solve_chain(costs: &[f64], deadline: f64, s_max: f64) -> Result<ClosedForm> {
    if costs.is_empty() {
        return Err(Error::InvalidInput("empty chain".into()));
    }
    let total: f64 = costs.iter().sum();
    let single = solve_independent(&[total], deadline, s_max)?;
    Ok(ClosedForm {
        speeds: vec![single.speeds[0]; costs.len()],
        energy: single.energy,
    })
}

/// Fork (or join) of a task of cost `w0` with independent branches `costs`.
/// Speeds are returned as `[s_0, s_1, ..., s_n]`.
pub fn solve_fork_join(w0: f64, costs: &[f64], deadline: f64, s_max: f64) -> Result<ClosedForm> {
    check_positive(&[w0], deadline)?;
    check_positive(costs, deadline)?;
    if deadline <= 0.0 {
        return Err(Error::Infeasible(format!("no time left (deadline {deadline})")));
    }
    if costs.is_empty() {
        return solve_independent(&[w0], deadline, s_max);
    }
    let branches = cube_root_sum_cubes(costs.iter().copied());
    let s0 = (branches + w0) / deadline;
    if s0 <= s_max {
        let mut speeds = Vec::with_capacity(costs.len() + 1);
        speeds.push(s0);
        speeds.extend(costs.iter().map(|w| s0 * w / branches));
        return Ok(ClosedForm {
            speeds,
            energy: (branches + w0).powi(3) / (deadline * deadline),
        });
    }
    if w0 / s_max > deadline {
        return Err(Error::Infeasible(format!(
            "task of cost {w0} cannot finish by {deadline} at s_max {s_max}"
        )));
    }
    let rest = solve_independent(costs, deadline - w0 / s_max, s_max)?;
    let mut speeds = Vec::with_capacity(costs.len() + 1);
    speeds.push(s_max);
    speeds.extend(rest.speeds);
    Ok(ClosedForm {
        speeds,
        energy: w0 * s_max * s_max + rest.energy,
    })
}

/// `(Σ x³)^(1/3)`, the equivalent cost of parallel branches.
pub fn cube_root_sum_cubes(values: impl IntoIterator<Item = f64>) -> f64 {
    // Scale by the largest value so the cubes stay in range.
    let values: Vec<f64> = values.into_iter().collect();
    let top = values.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return 0.0;
    }
    top * values.iter().map(|v| (v / top).powi(3)).sum::<f64>().cbrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    const INF: f64 = f64::INFINITY;

    /// Grid search over the speed of one task in a two-task independent set
    /// with the other pinned to its closed-form value.
    fn grid_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
        let steps = 200_000;
        (0..=steps)
            .map(|k| lo + (hi - lo) * k as f64 / steps as f64)
            .map(|x| (x, f(x)))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap()
    }

    #[test]
    fn independent() {
        let r = solve_independent(&[3.0], 1.5, 6.0).unwrap();
        assert_eq!(r.speeds, vec![2.0]);
        assert!((r.energy - 12.0).abs() < 1e-12);

        let r = solve_independent(&[1.0, 2.0], 1.0, INF).unwrap();
        assert_eq!(r.speeds, vec![1.0, 2.0]);
        assert!((r.energy - 9.0).abs() < 1e-12);
        // Each task alone: minimize w s^2 with w/s <= 1, i.e. s >= w.
        let (s, _) = grid_min(|s| if 2.0 / s <= 1.0 { 2.0 * s * s } else { INF }, 0.5, 4.0);
        assert!((s - 2.0).abs() < 1e-4);

        assert!(matches!(solve_independent(&[7.0], 1.0, 6.0), Err(Error::Infeasible(_))));
    }

    #[test]
    fn chain() {
        let r = solve_chain(&[1.0, 1.0], 2.0, INF).unwrap();
        assert_eq!(r.speeds, vec![1.0, 1.0]);
        assert!((r.energy - 2.0).abs() < 1e-12);

        let r = solve_chain(&[3.0, 2.0], 1.5, INF).unwrap();
        assert!((r.speeds[0] - 10.0 / 3.0).abs() < 1e-12);
        assert!((r.energy - 500.0 / 9.0).abs() < 1e-10);
        // Split the deadline: task 1 gets x, task 2 gets 1.5 - x.
        let (x, e) = grid_min(|x| 27.0 / (x * x) + 8.0 / ((1.5 - x) * (1.5 - x)), 0.01, 1.49);
        assert!((3.0 / x - 10.0 / 3.0).abs() < 1e-3);
        assert!((e - 500.0 / 9.0).abs() < 1e-6);

        assert!(matches!(solve_chain(&[4.0], 1.0, 2.0), Err(Error::Infeasible(_))));
    }

    #[test]
    fn chain_collapses_to_single_task() {
        let w = [0.7, 2.5, 1.25, 3.0];
        let c = solve_chain(&w, 1.7, INF).unwrap();
        let s = solve_independent(&[w.iter().sum()], 1.7, INF).unwrap();
        assert_eq!(c.energy, s.energy);
    }

    #[test]
    fn fork_unclamped() {
        let r = solve_fork_join(1.0, &[1.0, 1.0], 1.0, INF).unwrap();
        let expect = 2f64.cbrt() + 1.0;
        assert!((r.speeds[0] - expect).abs() < 1e-12);
        assert!((r.energy - expect.powi(3)).abs() < 1e-10);
        // One-dimensional minimization over s0 of the fork objective
        // w0 s0^2 + sum w_i (w_i s0 / (s0 D - w0))^2.
        let f = |s0: f64| s0 * s0 + 2.0 * (s0 / (s0 - 1.0)).powi(2);
        let (s0, e) = grid_min(f, 1.01, 5.0);
        assert!((s0 - expect).abs() < 1e-3);
        assert!((e - r.energy).abs() < 1e-6);
    }

    #[test]
    fn fork_with_one_branch_is_a_chain() {
        let r = solve_fork_join(1.0, &[1.0], 2.0, INF).unwrap();
        assert!((r.speeds[0] - 1.0).abs() < 1e-12);
        assert!((r.speeds[1] - 1.0).abs() < 1e-12);
        assert!((r.energy - 2.0).abs() < 1e-12);
    }

    #[test]
    fn fork_clamped() {
        assert!(matches!(
            solve_fork_join(2.0, &[1.0], 1.0, 2.0),
            Err(Error::Infeasible(_))
        ));
        // Root pinned at s_max = 2.2 < 2^(1/3) + 1; branches share 1 - 1/2.2.
        let r = solve_fork_join(1.0, &[1.0, 1.0], 1.0, 2.2).unwrap();
        let rest = 1.0 - 1.0 / 2.2;
        assert_eq!(r.speeds[0], 2.2);
        assert!((r.speeds[1] - 1.0 / rest).abs() < 1e-12);
        assert!((r.energy - (2.2 * 2.2 + 2.0 / (rest * rest))).abs() < 1e-12);
        // Branches would need speed 3 > 1.5 on the remaining third.
        assert!(matches!(
            solve_fork_join(1.0, &[1.0, 1.0], 1.0, 1.5),
            Err(Error::Infeasible(_))
        ));
        assert!(matches!(
            solve_fork_join(3.0, &[1.0], 1.0, 2.0),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn fork_meets_deadline_exactly() {
        let w = [1.3, 0.4, 2.2];
        let r = solve_fork_join(0.9, &w, 2.0, INF).unwrap();
        let branch = w
            .iter()
            .zip(&r.speeds[1..])
            .map(|(w, s)| w / s)
            .fold(0.0, f64::max);
        let t = 0.9 / r.speeds[0] + branch;
        assert!((t - 2.0).abs() < 1e-9 * 2.0);
    }

    #[test]
    fn cube_root_sum() {
        assert_eq!(cube_root_sum_cubes([5.0]), 5.0);
        assert!((cube_root_sum_cubes([1.0, 1.0]) - 2f64.cbrt()).abs() < 1e-15);
        assert_eq!(cube_root_sum_cubes([0.0, 0.0]), 0.0);
        assert!(cube_root_sum_cubes([1e120, 1e120]).is_finite());
    }
}
