//! Dense two-phase simplex for small equality-form linear programs
//!
//! ```text
//! minimize cᵀx  subject to  A x = b,  x ≥ 0
//! ```
//!
//! Problems here have at most a few hundred rows and columns, so a dense
//! tableau is adequate. Pivoting uses Dantzig's rule and falls back to
//! Bland's rule after a run of degenerate pivots. The final basic solution is
//! recomputed from the original data with an LU solve to remove tableau drift.

use nalgebra::{DMatrix, DVector};

const PIVOT_TOL: f64 = 1e-10;
const COST_TOL: f64 = 1e-11;
const DEGENERATE_RUN: usize = 30;
const MAX_ITERATIONS: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpError {
    /// Phase one ended with a positive sum of artificials. `x` is the phase
    /// one point, which minimizes the L1 constraint violation.
    Infeasible {
        infeasibility: f64,
        x: Vec<f64>,
    },
    Unbounded,
    IterationLimit,
}

struct Tableau {
    /// Rows of the constraint block; the last entry of each row is the rhs.
    rows: Vec<Vec<f64>>,
    /// Reduced costs; the last entry is minus the objective value.
    cost: Vec<f64>,
    basis: Vec<usize>,
    /// Original row index of each tableau row.
    origin: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.ncols]
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let pivot = self.rows[r][col];
        for v in self.rows[r].iter_mut() {
            *v /= pivot;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let factor = row[col];
            if factor != 0.0 {
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= factor * p;
                }
                row[col] = 0.0;
            }
        }
        let factor = self.cost[col];
        if factor != 0.0 {
            for (v, p) in self.cost.iter_mut().zip(&pivot_row) {
                *v -= factor * p;
            }
            self.cost[col] = 0.0;
        }
        self.basis[r] = col;
    }

    /// Runs simplex iterations over columns `0..allowed`.
    fn optimize(&mut self, allowed: usize) -> Result<(), LpError> {
        let mut degenerate = 0usize;
        for _ in 0..MAX_ITERATIONS {
            let bland = degenerate >= DEGENERATE_RUN;
            let entering = if bland {
                (0..allowed).find(|&j| self.cost[j] < -COST_TOL)
            } else {
                (0..allowed)
                    .filter(|&j| self.cost[j] < -COST_TOL)
                    .min_by(|&a, &b| self.cost[a].total_cmp(&self.cost[b]))
            };
            let Some(col) = entering else {
                return Ok(());
            };

            let mut leaving: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][col];
                if a > PIVOT_TOL {
                    let ratio = self.rhs(i).max(0.0) / a;
                    let better = match leaving {
                        None => true,
                        Some((r, best)) => {
                            ratio < best - 1e-14 || (ratio <= best + 1e-14 && self.basis[i] < self.basis[r])
                        }
                    };
                    if better {
                        leaving = Some((i, ratio));
                    }
                }
            }
            let Some((row, ratio)) = leaving else {
                return Err(LpError::Unbounded);
            };
            if ratio <= 1e-14 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(row, col);
        }
        Err(LpError::IterationLimit)
    }

    fn primal(&self, n: usize) -> Vec<f64> {
        let mut x = vec![0.0; n];
        for (i, &j) in self.basis.iter().enumerate() {
            if j < n {
                x[j] = self.rhs(i).max(0.0);
            }
        }
        x
    }
}

/// Solves `min cᵀx, Ax = b, x ≥ 0`. `feasibility_tol` bounds the phase one
/// optimum (the L1 norm of the residual) accepted as feasible.
pub fn solve(a: &DMatrix<f64>, b: &[f64], c: &[f64], feasibility_tol: f64) -> Result<LpSolution, LpError> {
    let (m, n) = a.shape();
    assert_eq!(b.len(), m, "rhs length");
    assert_eq!(c.len(), n, "cost length");

    let ncols = n + m;
    let mut rows = Vec::with_capacity(m);
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        let mut row = vec![0.0; ncols + 1];
        for j in 0..n {
            row[j] = sign * a[(i, j)];
        }
        row[n + i] = 1.0;
        row[ncols] = sign * b[i];
        rows.push(row);
    }
    // Phase one: minimize the sum of artificials.
    let mut cost = vec![0.0; ncols + 1];
    for row in &rows {
        for j in 0..n {
            cost[j] -= row[j];
        }
        cost[ncols] -= row[ncols];
    }
    let mut t = Tableau { rows, cost, basis: (n..n + m).collect(), origin: (0..m).collect(), ncols };
    t.optimize(ncols)?;

    let infeasibility = -t.cost[ncols];
    if infeasibility > feasibility_tol {
        return Err(LpError::Infeasible { infeasibility, x: t.primal(n) });
    }

    // Drive artificials out of the basis; rows where that is impossible are
    // linearly dependent on the others and are dropped.
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= n {
            let replacement = (0..n)
                .filter(|&j| t.rows[i][j].abs() > 1e-9)
                .max_by(|&x, &y| t.rows[i][x].abs().total_cmp(&t.rows[i][y].abs()));
            match replacement {
                Some(j) => t.pivot(i, j),
                None => {
                    t.rows.remove(i);
                    t.basis.remove(i);
                    t.origin.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }

    // Phase two with the true costs over the original columns.
    let mut cost = vec![0.0; ncols + 1];
    cost[..n].copy_from_slice(c);
    for (r, &j) in t.basis.iter().enumerate() {
        let cb = c[j];
        if cb != 0.0 {
            for (v, tv) in cost.iter_mut().zip(&t.rows[r]) {
                *v -= cb * tv;
            }
        }
    }
    t.cost = cost;
    t.optimize(n)?;

    let mut x = t.primal(n);
    refine(a, b, &t, &mut x);
    let objective = x.iter().zip(c).map(|(xi, ci)| xi * ci).sum();
    Ok(LpSolution { x, objective })
}

/// Recomputes basic variables as `B⁻¹ b` on the surviving rows.
fn refine(a: &DMatrix<f64>, b: &[f64], t: &Tableau, x: &mut [f64]) {
    let k = t.basis.len();
    if k == 0 {
        return;
    }
    let basis_matrix = DMatrix::from_fn(k, k, |r, col| a[(t.origin[r], t.basis[col])]);
    let rhs = DVector::from_fn(k, |r, _| b[t.origin[r]]);
    let Some(sol) = basis_matrix.lu().solve(&rhs) else {
        return;
    };
    if sol.iter().any(|v| !v.is_finite() || *v < -1e-9) {
        return;
    }
    let mut candidate = x.to_vec();
    for (r, &j) in t.basis.iter().enumerate() {
        candidate[j] = sol[r].max(0.0);
    }
    let residual = |x: &[f64]| -> f64 {
        (0..a.nrows()).map(|i| ((0..a.ncols()).map(|j| a[(i, j)] * x[j]).sum::<f64>() - b[i]).abs()).fold(0.0, f64::max)
    };
    if residual(&candidate) <= residual(x) {
        x.copy_from_slice(&candidate);
    }
}
