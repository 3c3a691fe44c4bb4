//! Linear programs in the form `min c·x  s.t.  A x ≤ b,  x ≥ 0`, solved by a
//! dense two-phase simplex with Bland's rule.

use std::fmt;

use crate::error::{Error, Result};

/// Entries below this magnitude are never used as pivots.
pub const PIVOT_TOL: f64 = 1e-10;

/// One row `Σ coeffs · x ≤ rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub label: String,
    /// Sparse `(variable, coefficient)` pairs.
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LpProblem {
    pub variables: Vec<String>,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

impl LpProblem {
    /// Adds a variable with objective coefficient `cost` and returns its index.
    pub fn add_variable(&mut self, name: impl Into<String>, cost: f64) -> usize {
        self.variables.push(name.into());
        self.objective.push(cost);
        self.variables.len() - 1
    }

    pub fn add_constraint(&mut self, label: impl Into<String>, coeffs: Vec<(usize, f64)>, rhs: f64) {
        self.constraints.push(Constraint {
            label: label.into(),
            coeffs,
            rhs,
        });
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    fn check(&self) -> Result<()> {
        if self.objective.len() != self.variables.len() {
            return Err(Error::InvalidInput("objective length differs from variable count".into()));
        }
        for c in &self.constraints {
            if !c.rhs.is_finite() {
                return Err(Error::InvalidInput(format!("constraint {:?} has rhs {}", c.label, c.rhs)));
            }
            for &(j, a) in &c.coeffs {
                if j >= self.variables.len() || !a.is_finite() {
                    return Err(Error::InvalidInput(format!("constraint {:?} has a bad term", c.label)));
                }
            }
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite objective coefficient".into()));
        }
        Ok(())
    }
}

impl fmt::Display for LpProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn terms(f: &mut fmt::Formatter<'_>, names: &[String], terms: &[(usize, f64)]) -> fmt::Result {
            if terms.is_empty() {
                return write!(f, "0");
            }
            for (k, &(j, a)) in terms.iter().enumerate() {
                match (k, a < 0.0) {
                    (0, true) => write!(f, "-{} {}", -a, names[j])?,
                    (0, false) => write!(f, "{} {}", a, names[j])?,
                    (_, true) => write!(f, " - {} {}", -a, names[j])?,
                    (_, false) => write!(f, " + {} {}", a, names[j])?,
                }
            }
            Ok(())
        }
        let obj: Vec<(usize, f64)> = self
            .objective
            .iter()
            .copied()
            .enumerate()
            .filter(|(_, c)| *c != 0.0)
            .collect();
        write!(f, "min ")?;
        terms(f, &self.variables, &obj)?;
        writeln!(f)?;
        writeln!(f, "s.t.")?;
        for c in &self.constraints {
            write!(f, "  {}: ", c.label)?;
            terms(f, &self.variables, &c.coeffs)?;
            writeln!(f, " <= {}", c.rhs)?;
        }
        writeln!(f, "  {} >= 0", self.variables.join(", "))
    }
}

struct Tableau {
    /// `m` rows of `cols + 1` entries, the last one being the right-hand side.
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
    pivots: usize,
    max_pivots: usize,
}

impl Tableau {
    fn pivot(&mut self, objective: &mut [f64], r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        self.rows[r][c] = 1.0;
        let pivot_row = self.rows[r].clone();
        let eliminate = |row: &mut [f64]| {
            let factor = row[c];
            if factor != 0.0 {
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= factor * p;
                }
                row[c] = 0.0;
            }
        };
        for (k, row) in self.rows.iter_mut().enumerate() {
            if k != r {
                eliminate(row);
                let rhs = row.last_mut().unwrap();
                if *rhs < 0.0 && *rhs > -PIVOT_TOL {
                    *rhs = 0.0;
                }
            }
        }
        eliminate(objective);
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Runs simplex iterations on the reduced-cost row `objective`, only
    /// letting columns for which `allowed` holds enter the basis.
    fn optimize(&mut self, objective: &mut [f64], allowed: impl Fn(usize) -> bool) -> Result<()> {
        let scale = objective[..self.cols].iter().fold(1.0f64, |m, c| m.max(c.abs()));
        let tol = PIVOT_TOL * scale;
        loop {
            // Bland: lowest-index improving column, lowest-index leaving row on ties.
            let Some(enter) = (0..self.cols).find(|&j| allowed(j) && objective[j] < -tol) else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for (r, row) in self.rows.iter().enumerate() {
                let a = row[enter];
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = row[self.cols] / a;
                leave = match leave {
                    None => Some((r, ratio)),
                    Some((best, q)) => {
                        let tie = (ratio - q).abs() <= 1e-12 * q.abs().max(1.0);
                        if ratio < q && !tie || tie && self.basis[r] < self.basis[best] {
                            Some((r, ratio))
                        } else {
                            Some((best, q))
                        }
                    }
                };
            }
            let Some((r, _)) = leave else {
                return Err(Error::LpNumerical("objective is unbounded below".into()));
            };
            if self.pivots >= self.max_pivots {
                return Err(Error::LpNumerical(format!("pivot limit {} reached", self.max_pivots)));
            }
            self.pivot(objective, r, enter);
        }
    }
}

/// Solves `problem` to optimality.
pub fn solve_lp(problem: &LpProblem) -> Result<LpSolution> {
    problem.check()?;
    let n = problem.num_variables();
    let m = problem.constraints.len();
    // Columns: originals, one slack per row, one artificial per row with a
    // negative right-hand side.
    let needs_art: Vec<bool> = problem.constraints.iter().map(|c| c.rhs < 0.0).collect();
    let n_art = needs_art.iter().filter(|&&a| a).count();
    let cols = n + m + n_art;
    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut next_art = n + m;
    for (i, c) in problem.constraints.iter().enumerate() {
        let mut row = vec![0.0; cols + 1];
        for &(j, a) in &c.coeffs {
            row[j] += a;
        }
        row[n + i] = 1.0;
        row[cols] = c.rhs;
        if needs_art[i] {
            for v in row.iter_mut() {
                *v = -*v;
            }
            row[next_art] = 1.0;
            basis.push(next_art);
            next_art += 1;
        } else {
            basis.push(n + i);
        }
        rows.push(row);
    }
    let mut t = Tableau {
        rows,
        basis,
        cols,
        pivots: 0,
        max_pivots: 1000 * (cols + m + 1),
    };

    if n_art > 0 {
        let mut phase1 = vec![0.0; cols + 1];
        for v in &mut phase1[n + m..cols] {
            *v = 1.0;
        }
        for (r, &b) in t.basis.iter().enumerate() {
            if b >= n + m {
                for (v, a) in phase1.iter_mut().zip(&t.rows[r]) {
                    *v -= a;
                }
            }
        }
        t.optimize(&mut phase1, |_| true)?;
        let infeasibility = -phase1[cols];
        let scale = problem.constraints.iter().fold(1.0f64, |s, c| s.max(c.rhs.abs()));
        if infeasibility > 1e-9 * scale {
            return Err(Error::LpInfeasible);
        }
        // Drive artificials still in the basis (at zero) out of it.
        let mut r = 0;
        while r < t.rows.len() {
            if t.basis[r] >= n + m {
                match (0..n + m).find(|&j| t.rows[r][j].abs() > PIVOT_TOL) {
                    Some(j) => t.pivot(&mut phase1, r, j),
                    None => {
                        // Redundant row.
                        t.rows.remove(r);
                        t.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
    }

    let mut phase2 = vec![0.0; cols + 1];
    phase2[..n].copy_from_slice(&problem.objective);
    for (r, &b) in t.basis.iter().enumerate() {
        let c = phase2[b];
        if c != 0.0 {
            for (v, a) in phase2.iter_mut().zip(&t.rows[r]) {
                *v -= c * a;
            }
        }
    }
    t.optimize(&mut phase2, |j| j < n + m)?;

    let mut x = vec![0.0; n];
    for (r, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] = t.rows[r][cols].max(0.0);
        }
    }
    let objective = x.iter().zip(&problem.objective).map(|(x, c)| x * c).sum();
    Ok(LpSolution {
        x,
        objective,
        pivots: t.pivots,
    })
}
