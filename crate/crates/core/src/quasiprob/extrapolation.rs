//! Extrapolation weights and gate-extrapolation representations.
//!
//! Polynomial extrapolation to `λ = 0` is a fixed linear functional of the
//! data, so the weights depend only on the scale factors. The same weights
//! turn a set of noise-scaled copies of one gate into a quasi-probability
//! representation of the ideal gate.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::QuasiProbRep;
use crate::error::{Error, Result};
use crate::gates::Gate;
use crate::noise::{NoiseModel, NoisyOperation, Scaling};

fn check_scale_factors(scale_factors: &[f64]) -> Result<()> {
    if scale_factors.is_empty() {
        return Err(Error::InvalidArgument("no scale factors".into()));
    }
    for (i, &l) in scale_factors.iter().enumerate() {
        if !l.is_finite() {
            return Err(Error::InvalidArgument(format!("scale factor {l} is not finite")));
        }
        if scale_factors[..i].contains(&l) {
            return Err(Error::InvalidArgument(format!("duplicate scale factor {l}")));
        }
    }
    Ok(())
}

/// Richardson weights `η_λ = Π_{λ′ ≠ λ} λ′/(λ′ − λ)`: the value at zero of
/// the interpolating polynomial of degree `|S| − 1`.
pub fn richardson_coefficients(scale_factors: &[f64]) -> Result<Vec<f64>> {
    check_scale_factors(scale_factors)?;
    if scale_factors.contains(&0.0) {
        return Err(Error::InvalidArgument("scale factor 0 is the target, not a data point".into()));
    }
    Ok(scale_factors
        .iter()
        .map(|&l| scale_factors.iter().filter(|&&other| other != l).map(|&other| other / (other - l)).product())
        .collect())
}

/// Weights `w` with `Σ wᵢ yᵢ` equal to the intercept of the least-squares
/// polynomial of the given degree through `(λᵢ, yᵢ)`.
///
/// With Vandermonde matrix `V`, the intercept is `e₀ᵀ(VᵀV)⁻¹Vᵀ y`, so
/// `w = V (VᵀV)⁻¹ e₀`.
pub fn polyfit_coefficients(scale_factors: &[f64], degree: usize) -> Result<Vec<f64>> {
    check_scale_factors(scale_factors)?;
    let n = scale_factors.len();
    if degree >= n {
        return Err(Error::InvalidArgument(format!("degree {degree} needs more than {n} scale factors")));
    }
    let vandermonde = DMatrix::from_fn(n, degree + 1, |i, j| scale_factors[i].powi(j as i32));
    // With V = QR the normal matrix is RᵀR, so w = Q R⁻ᵀ e₀.
    let qr = vandermonde.qr();
    let r = qr.r();
    let mut e0 = DVector::zeros(degree + 1);
    e0[0] = 1.0;
    let z = r
        .transpose()
        .solve_lower_triangular(&e0)
        .filter(|z| z.iter().all(|v| v.is_finite()))
        .ok_or_else(|| Error::Numerical("singular normal equations".into()))?;
    Ok((qr.q() * z).iter().copied().collect())
}

/// How the noise of a single gate is amplified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingMode {
    /// Scale the rate of the noise channel, `ℰ^{(λ)} ∘ G`.
    Parametric,
    /// Unitary folding; odd integer scale factors only.
    Folding,
}

/// `G ≈ Σ_{λ∈S} η_λ G^{(λ)}`: the same gate at several noise levels.
/// The residual bias is generally nonzero and is noted on the result.
pub fn gate_extrapolation_rep(
    gate: &Gate,
    model: &NoiseModel,
    scale_factors: &[f64],
    coefficients: &[f64],
    mode: ScalingMode,
) -> Result<QuasiProbRep> {
    check_scale_factors(scale_factors)?;
    if scale_factors.len() != coefficients.len() {
        return Err(Error::InvalidArgument(format!(
            "{} scale factors but {} coefficients",
            scale_factors.len(),
            coefficients.len()
        )));
    }
    if let Some(l) = scale_factors.iter().find(|&&l| l < 1.0) {
        return Err(Error::InvalidArgument(format!("scale factor {l} below the hardware level")));
    }
    let mut terms = Vec::with_capacity(scale_factors.len());
    for (&lambda, &eta) in scale_factors.iter().zip(coefficients) {
        let label = format!("{}^({lambda})", gate.label());
        let op = match mode {
            ScalingMode::Parametric => NoisyOperation::scaled(label, gate.superop(), model, lambda, Scaling::Rate)?,
            ScalingMode::Folding => NoisyOperation::folded(label, gate.superop(), model, lambda)?,
        };
        terms.push((eta, op));
    }
    let note = format!("extrapolation over S = {scale_factors:?}; the bias depends on the noise model");
    Ok(QuasiProbRep::new(gate.label(), terms)?.with_bias_note(note))
}

/// Optimal three-point exact extrapolation for amplitude damping, with scale
/// factors acting on `p′ = 1 − √(1 − p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmpDampExtrapolation {
    pub p: f64,
    pub p_prime: f64,
    pub scale_factors: Vec<f64>,
    pub coefficients: Vec<f64>,
    pub gamma: f64,
}

/// `γ = (1 + 6p′ + p′²)/(1 − p′)²`.
pub fn ampdamp_gamma_closed_form(p: f64) -> f64 {
    let q = 1.0 - (1.0 - p).sqrt();
    (1.0 + 6.0 * q + q * q) / ((1.0 - q) * (1.0 - q))
}

/// `S = {1, (1 + 1/p′)/2, 1/p′}` with Richardson weights. The damping map
/// is quadratic in `p′`, so three points extrapolate it exactly.
pub fn ampdamp_exact_extrapolation(p: f64) -> Result<AmpDampExtrapolation> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidArgument(format!("amplitude damping rate {p} must lie in (0, 1)")));
    }
    let p_prime = 1.0 - (1.0 - p).sqrt();
    let top = 1.0 / p_prime;
    let scale_factors = vec![1.0, 0.5 * (1.0 + top), top];
    let coefficients = richardson_coefficients(&scale_factors)?;
    let gamma = coefficients.iter().map(|e| e.abs()).sum();
    Ok(AmpDampExtrapolation { p, p_prime, scale_factors, coefficients, gamma })
}

/// The representation of `gate` induced by [`ampdamp_exact_extrapolation`].
pub fn ampdamp_extrapolation_rep(gate: &Gate, p: f64) -> Result<QuasiProbRep> {
    let plan = ampdamp_exact_extrapolation(p)?;
    let model = NoiseModel::amplitude_damping(p)?;
    let terms = plan
        .scale_factors
        .iter()
        .zip(&plan.coefficients)
        .map(|(&lambda, &eta)| {
            let op = NoisyOperation::scaled(
                format!("{}^(p'x{lambda})", gate.label()),
                gate.superop(),
                &model,
                lambda,
                Scaling::RatePrime,
            )?;
            Ok((eta, op))
        })
        .collect::<Result<Vec<_>>>()?;
    QuasiProbRep::new(gate.label(), terms)
}

fn richardson_norm(s: &[f64; 3]) -> f64 {
    if s[0] == s[1] || s[1] == s[2] || s[0] == s[2] {
        return f64::INFINITY;
    }
    richardson_coefficients(s).map(|c| c.iter().map(|e| e.abs()).sum()).unwrap_or(f64::INFINITY)
}

/// Numerically minimizes the Richardson one-norm over triples of `p′` scale
/// factors in `[1, 1/p′]`: a coarse grid followed by a shrinking pattern
/// search. Returns the sorted triple and its one-norm.
pub fn optimize_ampdamp_scale_factors(p: f64) -> Result<([f64; 3], f64)> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidArgument(format!("amplitude damping rate {p} must lie in (0, 1)")));
    }
    let top = 1.0 / (1.0 - (1.0 - p).sqrt());
    const GRID: usize = 40;
    let at = |i: usize| 1.0 + (top - 1.0) * i as f64 / GRID as f64;

    let mut best = [1.0, 0.5 * (1.0 + top), top];
    let mut best_norm = f64::INFINITY;
    for i in 0..=GRID {
        for j in i + 1..=GRID {
            for k in j + 1..=GRID {
                let s = [at(i), at(j), at(k)];
                let norm = richardson_norm(&s);
                if norm < best_norm {
                    best_norm = norm;
                    best = s;
                }
            }
        }
    }

    let mut step = (top - 1.0) / GRID as f64;
    while step > 1e-13 * top {
        let mut improved = false;
        for coord in 0..3 {
            for dir in [-1.0, 1.0] {
                let mut s = best;
                s[coord] = (s[coord] + dir * step).clamp(1.0, top);
                let norm = richardson_norm(&s);
                if norm < best_norm {
                    best_norm = norm;
                    best = s;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best.sort_by(f64::total_cmp);
    Ok((best, best_norm))
}
