//! Quasi-probability representations of ideal gates.
//!
//! A representation writes a target map as `Σ ηₐ 𝒪ₐ` over implementable
//! operations, with real (possibly negative) coefficients. Its one-norm
//! `γ = Σ |ηₐ|` sets the Monte Carlo sampling overhead.

mod extrapolation;
mod optimal;

pub use extrapolation::{
    ampdamp_exact_extrapolation, ampdamp_extrapolation_rep, ampdamp_gamma_closed_form, gate_extrapolation_rep,
    optimize_ampdamp_scale_factors, polyfit_coefficients, richardson_coefficients, AmpDampExtrapolation, ScalingMode,
};
pub use optimal::{convexity_test, optimal_representation, ConvexityReport};

use crate::error::{Error, Result};
use crate::gates::{pauli_labels, Gate};
use crate::noise::{NoiseModel, NoisyOperation, Scaling};
use crate::superop::Superoperator;
use crate::tolerance::TOL;

#[derive(Debug, Clone, PartialEq)]
pub struct QuasiProbRep {
    terms: Vec<(f64, NoisyOperation)>,
    target_label: String,
    bias_note: Option<String>,
}

impl QuasiProbRep {
    pub fn new(target_label: impl Into<String>, terms: Vec<(f64, NoisyOperation)>) -> Result<Self> {
        let first =
            terms.first().ok_or_else(|| Error::InvalidArgument("a representation needs at least one term".into()))?;
        let dim = first.1.dim();
        if let Some((_, op)) = terms.iter().find(|(_, op)| op.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: op.dim() });
        }
        if terms.iter().any(|(eta, _)| !eta.is_finite()) {
            return Err(Error::Numerical("non-finite quasi-probability coefficient".into()));
        }
        Ok(Self { terms, target_label: target_label.into(), bias_note: None })
    }

    /// Marks the representation as approximate.
    pub fn with_bias_note(mut self, note: impl Into<String>) -> Self {
        self.bias_note = Some(note.into());
        self
    }

    pub fn terms(&self) -> &[(f64, NoisyOperation)] {
        &self.terms
    }

    pub fn coefficients(&self) -> Vec<f64> {
        self.terms.iter().map(|(eta, _)| *eta).collect()
    }

    pub fn target_label(&self) -> &str {
        &self.target_label
    }

    pub fn bias_note(&self) -> Option<&str> {
        self.bias_note.as_deref()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.terms[0].1.dim()
    }

    pub fn coefficient_sum(&self) -> f64 {
        self.terms.iter().map(|(eta, _)| eta).sum()
    }

    pub fn one_norm(&self) -> f64 {
        self.terms.iter().map(|(eta, _)| eta.abs()).sum()
    }

    pub fn reconstruct(&self) -> Result<Superoperator> {
        Superoperator::linear_combination(self.terms.iter().map(|(eta, op)| (*eta, op.superop())))
    }
}

/// `γ = Σ |η|`.
pub fn one_norm(rep: &QuasiProbRep) -> f64 {
    rep.one_norm()
}

/// `Σ η · 𝒪` as a single map.
pub fn reconstruct(rep: &QuasiProbRep) -> Result<Superoperator> {
    rep.reconstruct()
}

/// Closed-form representation of `D_{λp} ∘ G` over the Pauli-twisted basis
/// `{D_p ∘ P ∘ G}`. At `λ = 0` this is the PEC representation of `G`, at
/// `λ = 1` the noisy gate itself.
///
/// With `ε = 4ᵏp/(4ᵏ − 1)` the identity branch carries
/// `1 + (4ᵏ − 1)·ε(1 − λ)/(4ᵏ(1 − ε))` and every other Pauli string
/// `−ε(1 − λ)/(4ᵏ(1 − ε))`; for one qubit these are `1 + ¾·ε(1−λ)/(1−ε)`
/// and `−¼·ε(1−λ)/(1−ε)`.
pub fn depolarizing_per_rep(gate: &Gate, p: f64, lambda: f64) -> Result<QuasiProbRep> {
    let k = gate.num_qubits();
    let model = NoiseModel::depolarizing(p, k)?;
    let strings = 4f64.powi(k as i32);
    let eps = p * strings / (strings - 1.0);
    if eps >= 1.0 {
        return Err(Error::InvalidArgument(format!("depolarizing rate {p} leaves no invertible noise (eps = {eps})")));
    }
    // The identity coefficient stays nonnegative up to (γ + 1)/(γ − 1).
    let gamma_minus_one = 2.0 * (strings - 1.0) * eps / (strings * (1.0 - eps));
    let lambda_max = if p > 0.0 { (2.0 + gamma_minus_one) / gamma_minus_one } else { f64::INFINITY };
    if !(0.0..=lambda_max).contains(&lambda) {
        return Err(Error::ScaleOutOfRange { lambda, max: lambda_max });
    }
    let other = -eps * (1.0 - lambda) / (strings * (1.0 - eps));
    let identity = 1.0 - (strings - 1.0) * other;

    let mut terms = Vec::with_capacity(strings as usize);
    for label in pauli_labels(k, true) {
        let twirled = if label.chars().all(|ch| ch == 'I') { gate.clone() } else { gate.twirled(&label)? };
        let eta = if terms.is_empty() { identity } else { other };
        let op =
            NoisyOperation::scaled(format!("D*{}", twirled.label()), twirled.superop(), &model, 1.0, Scaling::Rate)?;
        terms.push((eta, op));
    }
    QuasiProbRep::new(format!("{}^({lambda})", gate.label()), terms)
}

/// Sign split of a representation into two channels,
/// `G = γ⁺Φ⁺ − γ⁻Φ⁻`.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalSplit {
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    pub phi_plus: NoisyOperation,
    pub phi_minus: NoisyOperation,
    pub p_tilde: f64,
    target_label: String,
}

impl CanonicalSplit {
    /// `γ = γ⁺ + γ⁻`.
    pub fn gamma(&self) -> f64 {
        self.gamma_plus + self.gamma_minus
    }

    /// `γ⁺/γ⁻ = (γ + 1)/(γ − 1)`.
    pub fn lambda_max(&self) -> f64 {
        self.gamma_plus / self.gamma_minus
    }

    /// The represented map `γ⁺Φ⁺ − γ⁻Φ⁻`.
    pub fn target(&self) -> Result<Superoperator> {
        Superoperator::linear_combination([
            (self.gamma_plus, self.phi_plus.superop()),
            (-self.gamma_minus, self.phi_minus.superop()),
        ])
    }

    /// Canonical noise channel `Λ_p = (1 − p)G + pΦ⁻`.
    pub fn canonical_channel(&self, p: f64) -> Result<Superoperator> {
        let target = self.target()?;
        Superoperator::linear_combination([(1.0 - p, &target), (p, self.phi_minus.superop())])
    }
}

/// Splits a representation by coefficient sign.
pub fn canonical_split(rep: &QuasiProbRep) -> Result<CanonicalSplit> {
    let pick = |positive: bool| -> Vec<(f64, NoisyOperation)> {
        rep.terms()
            .iter()
            .filter(|(eta, _)| if positive { *eta > 0.0 } else { *eta < 0.0 })
            .map(|(eta, op)| (eta.abs(), op.clone()))
            .collect()
    };
    let pos = pick(true);
    let neg = pick(false);
    if neg.is_empty() {
        return Err(Error::DegenerateSplit);
    }
    let gamma_plus: f64 = pos.iter().map(|(w, _)| w).sum();
    let gamma_minus: f64 = neg.iter().map(|(w, _)| w).sum();
    if ((gamma_plus - gamma_minus) - 1.0).abs() > TOL.normalization {
        return Err(Error::Numerical(format!(
            "positive and negative volumes differ by {} instead of 1",
            gamma_plus - gamma_minus
        )));
    }
    let normalize = |terms: Vec<(f64, NoisyOperation)>, total: f64| -> Vec<(f64, NoisyOperation)> {
        let mut terms: Vec<_> = terms.into_iter().map(|(w, op)| (w / total, op)).collect();
        // Absorb rounding so the weights are an exact probability vector.
        let sum: f64 = terms.iter().map(|(w, _)| w).sum();
        terms[0].0 += 1.0 - sum;
        terms
    };
    let label = rep.target_label();
    let phi_plus = NoisyOperation::mixture(format!("Phi+[{label}]"), normalize(pos, gamma_plus))?;
    let phi_minus = NoisyOperation::mixture(format!("Phi-[{label}]"), normalize(neg, gamma_minus))?;
    Ok(CanonicalSplit {
        gamma_plus,
        gamma_minus,
        phi_plus,
        phi_minus,
        p_tilde: gamma_minus / gamma_plus,
        target_label: label.to_string(),
    })
}

/// Two-term representation of the canonically scaled gate
/// `Λ_{λp̃} = (γ⁺ − λγ⁻)Φ⁺ − (1 − λ)γ⁻Φ⁻`, for `λ ∈ [0, γ⁺/γ⁻]`.
pub fn canonical_scaled_rep(split: &CanonicalSplit, lambda: f64) -> Result<QuasiProbRep> {
    let max = split.lambda_max();
    if !(lambda >= 0.0 && lambda <= max * (1.0 + 1e-12)) {
        return Err(Error::ScaleOutOfRange { lambda, max });
    }
    let plus = split.gamma_plus - lambda * split.gamma_minus;
    let minus = -(1.0 - lambda) * split.gamma_minus;
    QuasiProbRep::new(
        format!("{}^({lambda})", split.target_label),
        vec![(plus, split.phi_plus.clone()), (minus, split.phi_minus.clone())],
    )
}
