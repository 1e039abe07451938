//! Parametric noise channels with a scale-by-λ action, and the noisy
//! implementable operations `ℰ^{(λ)} ∘ G` built from them.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::pauli_strings;
use crate::superop::{c, compose, kraus_to_superop, Superoperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    Depolarizing,
    AmplitudeDamping,
}

fn one() -> usize {
    1
}

/// A noise family with base rate `p` acting on `qubits` qubits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub p: f64,
    #[serde(default = "one")]
    pub qubits: usize,
}

/// How a scale factor acts on the rate of a noise family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scaling {
    /// `p → λp`.
    Rate,
    /// Amplitude damping only: `p′ → λp′` with `p′ = 1 − √(1 − p)`.
    RatePrime,
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::InvalidProbability(p));
    }
    Ok(())
}

// Slack on the λ upper bounds so that λ_max itself survives rounding.
const BOUND_SLACK: f64 = 1e-12;

impl NoiseModel {
    pub fn new(kind: NoiseKind, p: f64, qubits: usize) -> Result<Self> {
        let model = Self { kind, p, qubits };
        model.validate()?;
        Ok(model)
    }

    pub fn depolarizing(p: f64, qubits: usize) -> Result<Self> {
        Self::new(NoiseKind::Depolarizing, p, qubits)
    }

    pub fn amplitude_damping(p: f64) -> Result<Self> {
        Self::new(NoiseKind::AmplitudeDamping, p, 1)
    }

    pub fn validate(&self) -> Result<()> {
        check_probability(self.p)?;
        if self.qubits == 0 || self.qubits > crate::superop::MAX_QUBITS {
            return Err(Error::InvalidArgument(format!("noise on {} qubits", self.qubits)));
        }
        if self.kind == NoiseKind::AmplitudeDamping && self.qubits != 1 {
            return Err(Error::InvalidArgument("amplitude damping is a single-qubit channel".into()));
        }
        Ok(())
    }

    /// Same family and width with a different base rate.
    pub fn with_rate(&self, p: f64) -> Result<Self> {
        Self::new(self.kind, p, self.qubits)
    }

    /// `p′ = 1 − √(1 − p)`.
    pub fn p_prime(&self) -> f64 {
        1.0 - (1.0 - self.p).sqrt()
    }

    /// Largest admissible `λ` for rate scaling: `(1 − 4^{−k})/p` for
    /// depolarizing noise (completely mixed output), `1/p` for amplitude
    /// damping.
    pub fn lambda_max(&self) -> f64 {
        let ceiling = match self.kind {
            NoiseKind::Depolarizing => 1.0 - 4f64.powi(-(self.qubits as i32)),
            NoiseKind::AmplitudeDamping => 1.0,
        };
        ceiling / self.p
    }

    /// Largest admissible `λ` when scaling `p′` instead: `1/p′`.
    pub fn lambda_max_p_prime(&self) -> f64 {
        1.0 / self.p_prime()
    }

    pub fn base_channel(&self) -> Result<Superoperator> {
        scaled_noise(self, 1.0)
    }
}

/// `(1 − p) Id + p Σ_{P ≠ I} 𝒫 / (4^k − 1)` over non-identity Pauli strings.
pub fn depolarizing_superop(p: f64, k: usize) -> Result<Superoperator> {
    check_probability(p)?;
    if k == 0 || k > crate::superop::MAX_QUBITS {
        return Err(Error::InvalidArgument(format!("depolarizing noise on {k} qubits")));
    }
    let dim = 1usize << k;
    let paulis = pauli_strings(k, false);
    let weight = p / paulis.len() as f64;
    let mut matrix = DMatrix::identity(dim * dim, dim * dim) * c(1.0 - p, 0.0);
    for pm in &paulis {
        matrix += pm.conjugate().kronecker(pm) * c(weight, 0.0);
    }
    Superoperator::from_matrix(matrix)
}

/// Kraus pair `diag(1, √(1−p))`, `√p |0⟩⟨1|`.
pub fn amplitude_damping_superop(p: f64) -> Result<Superoperator> {
    check_probability(p)?;
    let k0 = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c((1.0 - p).sqrt(), 0.0)]);
    let k1 = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(p.sqrt(), 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    kraus_to_superop(&[k0, k1])
}

fn check_lambda(lambda: f64, max: f64) -> Result<()> {
    if lambda.is_nan() || lambda < 0.0 {
        return Err(Error::InvalidArgument(format!("negative scale factor {lambda}")));
    }
    if lambda > max * (1.0 + BOUND_SLACK) {
        return Err(Error::ScaleOutOfRange { lambda, max });
    }
    Ok(())
}

/// `ℰ^{(λ)}` with the rate scaled as `p → λp`.
pub fn scaled_noise(model: &NoiseModel, lambda: f64) -> Result<Superoperator> {
    model.validate()?;
    if model.p == 0.0 {
        check_lambda(lambda, f64::INFINITY)?;
    } else {
        check_lambda(lambda, model.lambda_max())?;
    }
    let rate = (lambda * model.p).min(1.0);
    match model.kind {
        NoiseKind::Depolarizing => depolarizing_superop(rate, model.qubits),
        NoiseKind::AmplitudeDamping => amplitude_damping_superop(rate),
    }
}

/// Amplitude damping with `p′ → λp′`, i.e. rate `1 − (1 − λp′)²`.
pub fn scaled_noise_p_prime(model: &NoiseModel, lambda: f64) -> Result<Superoperator> {
    model.validate()?;
    if model.kind != NoiseKind::AmplitudeDamping {
        return Err(Error::InvalidArgument("p-prime scaling is defined for amplitude damping only".into()));
    }
    let p_prime = model.p_prime();
    if p_prime == 0.0 {
        check_lambda(lambda, f64::INFINITY)?;
    } else {
        check_lambda(lambda, model.lambda_max_p_prime())?;
    }
    let scaled = (lambda * p_prime).min(1.0);
    let rate = 1.0 - (1.0 - scaled) * (1.0 - scaled);
    amplitude_damping_superop(rate.clamp(0.0, 1.0))
}

pub fn scaled_noise_with(model: &NoiseModel, lambda: f64, scaling: Scaling) -> Result<Superoperator> {
    match scaling {
        Scaling::Rate => scaled_noise(model, lambda),
        Scaling::RatePrime => scaled_noise_p_prime(model, lambda),
    }
}

/// What an operation is made of, independent of the noise level that
/// realizes it. Re-realizing under a different [`NoiseModel`] gives the
/// same recipe executed on different hardware.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseBinding {
    /// `ℰ^{(λ)} ∘ G`.
    Scaled { ideal: Superoperator, scaling: Scaling },
    /// `G^{(1)} ∘ [G†^{(1)} ∘ G^{(1)}]^{(λ−1)/2}` (unitary folding).
    Folded { ideal: Superoperator },
    /// A convex mixture of other operations.
    Mixture(Vec<(f64, NoisyOperation)>),
    /// A fixed map that does not depend on the noise model.
    Fixed,
}

/// An implementable operation `𝒪^{(λ)}` with its superoperator realized
/// under the model it was built with.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyOperation {
    pub label: String,
    pub lambda: f64,
    pub binding: NoiseBinding,
    superop: Superoperator,
}

impl NoisyOperation {
    pub fn fixed(label: impl Into<String>, superop: Superoperator) -> Self {
        Self { label: label.into(), lambda: 1.0, binding: NoiseBinding::Fixed, superop }
    }

    pub fn scaled(
        label: impl Into<String>,
        ideal: &Superoperator,
        model: &NoiseModel,
        lambda: f64,
        scaling: Scaling,
    ) -> Result<Self> {
        let binding = NoiseBinding::Scaled { ideal: ideal.clone(), scaling };
        Self::from_binding(label.into(), lambda, binding, model)
    }

    pub fn folded(label: impl Into<String>, ideal: &Superoperator, model: &NoiseModel, lambda: f64) -> Result<Self> {
        let binding = NoiseBinding::Folded { ideal: ideal.clone() };
        Self::from_binding(label.into(), lambda, binding, model)
    }

    /// Convex mixture; weights must be nonnegative and sum to one.
    pub fn mixture(label: impl Into<String>, terms: Vec<(f64, NoisyOperation)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidArgument("empty mixture".into()));
        }
        if terms.iter().any(|(w, _)| *w < 0.0) {
            return Err(Error::InvalidArgument("mixture weights must be nonnegative".into()));
        }
        let total: f64 = terms.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > crate::tolerance::TOL.normalization {
            return Err(Error::InvalidArgument(format!("mixture weights sum to {total}")));
        }
        let superop = Superoperator::linear_combination(terms.iter().map(|(w, op)| (*w, op.superop())))?;
        let lambda = terms.iter().map(|(w, op)| w * op.lambda).sum();
        Ok(Self { label: label.into(), lambda, binding: NoiseBinding::Mixture(terms), superop })
    }

    fn from_binding(label: String, lambda: f64, binding: NoiseBinding, model: &NoiseModel) -> Result<Self> {
        let superop = realize_binding(&binding, lambda, model)?;
        Ok(Self { label, lambda, binding, superop })
    }

    pub fn superop(&self) -> &Superoperator {
        &self.superop
    }

    pub fn dim(&self) -> usize {
        self.superop.dim()
    }

    /// The same recipe executed under `model`.
    pub fn realize(&self, model: &NoiseModel) -> Result<Superoperator> {
        match &self.binding {
            NoiseBinding::Fixed => Ok(self.superop.clone()),
            binding => realize_binding(binding, self.lambda, model),
        }
    }
}

fn realize_binding(binding: &NoiseBinding, lambda: f64, model: &NoiseModel) -> Result<Superoperator> {
    let check_width = |ideal: &Superoperator| {
        if ideal.num_qubits() != model.qubits {
            Err(Error::DimensionMismatch { expected: model.qubits, found: ideal.num_qubits() })
        } else {
            Ok(())
        }
    };
    match binding {
        NoiseBinding::Scaled { ideal, scaling } => {
            check_width(ideal)?;
            compose(&scaled_noise_with(model, lambda, *scaling)?, ideal)
        }
        NoiseBinding::Folded { ideal } => {
            check_width(ideal)?;
            let base = model.base_channel()?;
            let noisy = compose(&base, ideal)?;
            let dagger = compose(&base, &ideal.adjoint())?;
            crate::estimators::fold_gate(&noisy, lambda, &dagger)
        }
        NoiseBinding::Mixture(terms) => {
            let realized = terms.iter().map(|(w, op)| Ok((*w, op.realize(model)?))).collect::<Result<Vec<_>>>()?;
            Superoperator::linear_combination(realized.iter().map(|(w, s)| (*w, s)))
        }
        NoiseBinding::Fixed => Err(Error::InvalidArgument("fixed operations carry their own map".into())),
    }
}

/// `ℰ^{(λ)} ∘ G` for a unitary-induced `G`, labeled `label^(λ)`.
pub fn noisy_gate(g: &crate::gates::Gate, model: &NoiseModel, lambda: f64) -> Result<NoisyOperation> {
    NoisyOperation::scaled(format!("{}^({lambda})", g.label()), g.superop(), model, lambda, Scaling::Rate)
}
