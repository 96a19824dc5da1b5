//! Small dense linear-program solver: two-phase tableau simplex with
//! Bland's rule. Sized for the stage games this crate produces (tens of
//! variables and constraints), not for general use.

use crate::{Error, Result};

/// maximize `c . x` subject to `a_ub x <= b_ub`, `a_eq x = b_eq`, `x >= 0`.
pub struct Lp<'a> {
    pub objective: &'a [f64],
    pub a_ub: &'a [Vec<f64>],
    pub b_ub: &'a [f64],
    pub a_eq: &'a [Vec<f64>],
    pub b_eq: &'a [f64],
}

pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

const PIVOT_EPS: f64 = 1e-11;
const FEAS_EPS: f64 = 1e-8;

struct Tableau {
    /// rows x (cols + 1); last column is the RHS
    rows: Vec<Vec<f64>>,
    /// basic variable per row
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let scale = self.rows[row][col];
        for v in self.rows[row].iter_mut() {
            *v /= scale;
        }
        let pivot_row = self.rows[row].clone();
        for (r, other) in self.rows.iter_mut().enumerate() {
            if r == row {
                continue;
            }
            let factor = other[col];
            if factor == 0.0 {
                continue;
            }
            for (v, p) in other.iter_mut().zip(&pivot_row) {
                *v -= factor * p;
            }
        }
        self.basis[row] = col;
    }

    /// One simplex phase: minimize `cost . x` starting from the current
    /// basis. Bland's rule keeps it from cycling.
    fn run_phase(&mut self, cost: &[f64]) -> Result<f64> {
        let m = self.rows.len();
        let mut z = vec![0.0; self.cols + 1];
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb == 0.0 {
                continue;
            }
            for (zv, rv) in z.iter_mut().zip(&self.rows[r]) {
                *zv += cb * rv;
            }
        }
        let mut reduced: Vec<f64> = (0..self.cols).map(|j| cost[j] - z[j]).collect();
        let max_iters = 200 * (self.cols + m);
        for _ in 0..max_iters {
            // entering: lowest index with negative reduced cost
            let Some(col) = reduced.iter().position(|&r| r < -PIVOT_EPS) else {
                return Ok(z[self.cols]);
            };
            // leaving: min ratio, ties to the lowest basis index
            let mut best: Option<(usize, f64)> = None;
            for r in 0..m {
                let a = self.rows[r][col];
                if a > PIVOT_EPS {
                    let ratio = self.rows[r][self.cols] / a;
                    match best {
                        Some((br, bratio)) => {
                            if ratio < bratio - PIVOT_EPS
                                || (ratio < bratio + PIVOT_EPS && self.basis[r] < self.basis[br])
                            {
                                best = Some((r, ratio));
                            }
                        }
                        None => best = Some((r, ratio)),
                    }
                }
            }
            let Some((row, _)) = best else {
                return Err(Error::Lp("objective unbounded".into()));
            };
            self.pivot(row, col);
            // refresh reduced costs from scratch: cheap at this size and
            // immune to drift
            z = vec![0.0; self.cols + 1];
            for (r, &b) in self.basis.iter().enumerate() {
                let cb = cost[b];
                if cb == 0.0 {
                    continue;
                }
                for (zv, rv) in z.iter_mut().zip(&self.rows[r]) {
                    *zv += cb * rv;
                }
            }
            for j in 0..self.cols {
                reduced[j] = cost[j] - z[j];
            }
        }
        Err(Error::Lp("simplex iteration cap hit".into()))
    }
}

pub fn solve(lp: &Lp) -> Result<LpSolution> {
    let n = lp.objective.len();
    let m_ub = lp.a_ub.len();
    let m_eq = lp.a_eq.len();
    let m = m_ub + m_eq;
    let cols = n + m_ub + m; // structural + slack + artificial
    let mut rows = Vec::with_capacity(m);
    let mut basis = vec![0usize; m];
    for (k, (a, &b)) in lp.a_ub.iter().zip(lp.b_ub).chain(lp.a_eq.iter().zip(lp.b_eq)).enumerate()
    {
        let mut row = vec![0.0; cols + 1];
        let flip = if b < 0.0 { -1.0 } else { 1.0 };
        for (j, &v) in a.iter().enumerate() {
            row[j] = flip * v;
        }
        if k < m_ub {
            row[n + k] = flip; // slack
        }
        row[n + m_ub + k] = 1.0; // artificial
        row[cols] = flip * b;
        basis[k] = n + m_ub + k;
        rows.push(row);
    }
    let mut t = Tableau { rows, basis, cols };

    // Phase 1: drive artificials to zero.
    let mut phase1 = vec![0.0; cols];
    for j in (n + m_ub)..cols {
        phase1[j] = 1.0;
    }
    let infeas = t.run_phase(&phase1)?;
    if infeas > FEAS_EPS {
        return Err(Error::Lp(format!("infeasible (phase-1 objective {infeas:.3e})")));
    }
    // pivot any artificial still in the basis out, or drop its row if empty
    for r in 0..t.rows.len() {
        if t.basis[r] >= n + m_ub {
            if let Some(col) = (0..n + m_ub).find(|&j| t.rows[r][j].abs() > 1e-7) {
                t.pivot(r, col);
            }
        }
    }

    // Phase 2 with artificials frozen at a prohibitive cost.
    let mut phase2 = vec![0.0; cols];
    for j in 0..n {
        phase2[j] = -lp.objective[j]; // maximize => minimize the negation
    }
    for j in (n + m_ub)..cols {
        phase2[j] = 1e12;
    }
    t.run_phase(&phase2)?;

    let mut x = vec![0.0; n];
    for (r, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] = t.rows[r][cols];
        }
    }
    let objective = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution { x, objective })
}
