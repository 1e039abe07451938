//! One-norm optimal decompositions and convex-mixture tests, both posed as
//! linear programs over the real and imaginary parts of superoperator
//! entries.

use nalgebra::DMatrix;

use super::QuasiProbRep;
use crate::error::{Error, Result};
use crate::lp::{self, LpError};
use crate::noise::NoisyOperation;
use crate::superop::Superoperator;
use crate::tolerance::TOL;

const ZERO_ROW: f64 = 1e-14;
const DROP_COEFFICIENT: f64 = 1e-13;

/// Equality rows `Σⱼ xⱼ Re/Im(opⱼ[r, c]) = Re/Im(target[r, c])`, skipping
/// rows that are identically zero.
fn equality_rows(target: &Superoperator, basis: &[NoisyOperation]) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    if basis.is_empty() {
        return Err(Error::InvalidArgument("empty basis".into()));
    }
    if let Some(op) = basis.iter().find(|op| op.dim() != target.dim()) {
        return Err(Error::DimensionMismatch { expected: target.dim(), found: op.dim() });
    }
    let t = target.matrix();
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for col in 0..t.ncols() {
        for row in 0..t.nrows() {
            for part in [0, 1] {
                let value = |z: nalgebra::Complex<f64>| if part == 0 { z.re } else { z.im };
                let coeffs: Vec<f64> = basis.iter().map(|op| value(op.superop().matrix()[(row, col)])).collect();
                let b = value(t[(row, col)]);
                if coeffs.iter().all(|v| v.abs() < ZERO_ROW) && b.abs() < ZERO_ROW {
                    continue;
                }
                rows.push(coeffs);
                rhs.push(b);
            }
        }
    }
    Ok((rows, rhs))
}

fn residual_of(target: &Superoperator, basis: &[NoisyOperation], weights: &[f64]) -> f64 {
    match Superoperator::linear_combination(weights.iter().zip(basis).map(|(w, op)| (*w, op.superop()))) {
        Ok(sum) => sum.distance(target),
        Err(_) => f64::INFINITY,
    }
}

/// Minimum one-norm representation of `target` over `basis`:
/// `min Σ|η|` subject to `Σ η·𝒪 = target`, solved with `η = η⁺ − η⁻`.
///
/// An infeasible program means no exact representation exists over this
/// basis, which is reported as [`Error::InfeasibleRepresentation`].
pub fn optimal_representation(target: &Superoperator, basis: &[NoisyOperation]) -> Result<QuasiProbRep> {
    let (rows, rhs) = equality_rows(target, basis)?;
    let n = basis.len();
    let a = DMatrix::from_fn(rows.len(), 2 * n, |i, j| if j < n { rows[i][j] } else { -rows[i][j - n] });
    let cost = vec![1.0; 2 * n];
    let solution = lp::solve(&a, &rhs, &cost, TOL.lp_feasibility).map_err(|e| match e {
        LpError::Infeasible { infeasibility, .. } => Error::InfeasibleRepresentation { residual: infeasibility },
        LpError::Unbounded => Error::Unbounded,
        LpError::IterationLimit => Error::Numerical("simplex iteration limit reached".into()),
    })?;
    let eta: Vec<f64> = (0..n).map(|j| solution.x[j] - solution.x[j + n]).collect();

    let residual = residual_of(target, basis, &eta);
    if residual > TOL.lp_feasibility {
        return Err(Error::Numerical(format!("optimal representation residual {residual:.3e}")));
    }
    let terms: Vec<(f64, NoisyOperation)> =
        eta.iter().zip(basis).filter(|(e, _)| e.abs() > DROP_COEFFICIENT).map(|(e, op)| (*e, op.clone())).collect();
    if terms.is_empty() {
        return Err(Error::InfeasibleRepresentation { residual });
    }
    QuasiProbRep::new("target", terms)
}

/// Outcome of a convex-mixture test.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityReport {
    pub feasible: bool,
    /// Mixture weights over the basis (the closest point found when
    /// infeasible).
    pub mu: Vec<f64>,
    /// Largest entry-wise deviation of `Σ μ·𝒪` from the target.
    pub residual: f64,
}

/// Whether `scaled_op = Σ μ·𝒪` for a probability vector `μ` over `basis`.
pub fn convexity_test(scaled_op: &Superoperator, basis: &[NoisyOperation]) -> Result<ConvexityReport> {
    let (mut rows, mut rhs) = equality_rows(scaled_op, basis)?;
    rows.push(vec![1.0; basis.len()]);
    rhs.push(1.0);
    let a = DMatrix::from_fn(rows.len(), basis.len(), |i, j| rows[i][j]);
    let cost = vec![0.0; basis.len()];
    let (feasible, mu) = match lp::solve(&a, &rhs, &cost, TOL.lp_feasibility) {
        Ok(sol) => (true, sol.x),
        Err(LpError::Infeasible { x, .. }) => (false, x),
        Err(LpError::Unbounded) => return Err(Error::Unbounded),
        Err(LpError::IterationLimit) => return Err(Error::Numerical("simplex iteration limit reached".into())),
    };
    let residual = residual_of(scaled_op, basis, &mu);
    Ok(ConvexityReport { feasible, mu, residual })
}
