//! Mitigated expectation values: exact evaluation of the full quasi-probability
//! sum, signed Monte Carlo sampling, unitary folding, extrapolation and batch
//! statistics.

mod monte_carlo;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::circuits::Circuit;
use crate::error::{Error, Result};
use crate::noise::{noisy_gate, NoiseModel};
use crate::quasiprob::{
    canonical_scaled_rep, canonical_split, depolarizing_per_rep, gate_extrapolation_rep, polyfit_coefficients,
    richardson_coefficients, QuasiProbRep, ScalingMode,
};
use crate::superop::{compose, DensityMatrix, Observable, Superoperator};

pub use monte_carlo::{monte_carlo_estimate, per_estimate, sample_instance, virtual_zne, SampledInstance};

/// Largest number of term combinations [`exact_mitigated_value`] enumerates.
pub const EXACT_TERM_LIMIT: f64 = 1e6;

/// Unitary folding `G^{(λ)} = G^{(1)} ∘ [G†^{(1)} ∘ G^{(1)}]^{(λ−1)/2}` for
/// odd integer `λ`, where both inputs already carry the base noise.
pub fn fold_gate(noisy: &Superoperator, lam: f64, dagger: &Superoperator) -> Result<Superoperator> {
    if !(lam >= 1.0 && lam.fract() == 0.0 && (lam as u64) % 2 == 1) {
        return Err(Error::InvalidArgument(format!("folding needs an odd integer scale factor, got {lam}")));
    }
    let mut folds = (lam as u64 - 1) / 2;
    let mut base = compose(dagger, noisy)?;
    let mut power = Superoperator::identity(noisy.dim());
    while folds > 0 {
        if folds & 1 == 1 {
            power = compose(&base, &power)?;
        }
        folds >>= 1;
        if folds > 0 {
            base = compose(&base, &base)?;
        }
    }
    compose(noisy, &power)
}

/// Linear extrapolation rule to zero noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extrapolation {
    /// Interpolating polynomial through every point.
    RichardsonFull,
    /// Least-squares polynomial of the given degree.
    PolyDegree(usize),
}

impl Extrapolation {
    pub fn coefficients(&self, scale_factors: &[f64]) -> Result<Vec<f64>> {
        match *self {
            Extrapolation::RichardsonFull => richardson_coefficients(scale_factors),
            Extrapolation::PolyDegree(k) => polyfit_coefficients(scale_factors, k),
        }
    }
}

/// `Σ η_λ·value` for the weights of `method`.
pub fn zne_extrapolate(points: &[(f64, f64)], method: Extrapolation) -> Result<f64> {
    let scales: Vec<f64> = points.iter().map(|p| p.0).collect();
    let eta = method.coefficients(&scales)?;
    Ok(eta.iter().zip(points).map(|(e, p)| e * p.1).sum())
}

/// Shots per sampled circuit instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shots {
    /// Use the exact expectation value of each instance.
    Exact,
    PerSample(u32),
}

impl fmt::Display for Shots {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shots::Exact => f.write_str("exact"),
            Shots::PerSample(n) => write!(f, "{n}"),
        }
    }
}

/// Sampling budget and RNG layout. Batch `b` draws from stream
/// `first_stream + b` of a generator seeded with `seed`, so results do not
/// depend on `workers`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub samples: usize,
    pub shots: Shots,
    pub batches: usize,
    pub seed: u64,
    #[serde(default)]
    pub first_stream: u64,
    /// Worker threads; 0 uses the global pool.
    #[serde(default)]
    pub workers: usize,
}

impl Budget {
    pub fn new(samples: usize, batches: usize, seed: u64) -> Self {
        Self { samples, shots: Shots::Exact, batches, seed, first_stream: 0, workers: 0 }
    }

    pub fn with_shots(mut self, shots: Shots) -> Self {
        self.shots = shots;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_first_stream(mut self, first_stream: u64) -> Self {
        self.first_stream = first_stream;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.batches == 0 {
            return Err(Error::InvalidArgument("at least one batch is required".into()));
        }
        if self.samples < self.batches {
            return Err(Error::InvalidArgument(format!(
                "{} samples cannot fill {} batches",
                self.samples, self.batches
            )));
        }
        if self.shots == Shots::PerSample(0) {
            return Err(Error::InvalidArgument("shot mode needs at least one shot per sample".into()));
        }
        Ok(())
    }

    /// Sizes of the batches: contiguous equal blocks, with the remainder
    /// dealt round-robin from the first batch.
    pub fn batch_sizes(&self) -> Vec<usize> {
        batch_layout(self.samples, self.batches)
    }
}

fn batch_layout(n: usize, batches: usize) -> Vec<usize> {
    let base = n / batches;
    let extra = n % batches;
    (0..batches).map(|b| base + usize::from(b < extra)).collect()
}

/// Output of a mitigated estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorResult {
    pub estimate: f64,
    pub std_error: f64,
    pub gamma: f64,
    pub n_samples: usize,
    pub shots: Shots,
    pub batch_means: Vec<f64>,
    pub batch_sizes: Vec<usize>,
    /// Unbiased variance of the individual samples.
    pub sample_variance: f64,
}

fn std_error_of(batch_means: &[f64], sample_variance: f64, n: usize) -> f64 {
    let b = batch_means.len();
    if b > 1 {
        let mean = batch_means.iter().sum::<f64>() / b as f64;
        let var = batch_means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (b - 1) as f64;
        (var / b as f64).sqrt()
    } else {
        (sample_variance / n as f64).sqrt()
    }
}

impl EstimatorResult {
    /// Builds a result from per-batch `(count, Σx, Σx²)`.
    pub(crate) fn from_moments(moments: &[(usize, f64, f64)], gamma: f64, shots: Shots) -> Self {
        let n: usize = moments.iter().map(|m| m.0).sum();
        let sum: f64 = moments.iter().map(|m| m.1).sum();
        let sum_sq: f64 = moments.iter().map(|m| m.2).sum();
        let estimate = sum / n as f64;
        let sample_variance = if n > 1 { ((sum_sq - sum * estimate) / (n - 1) as f64).max(0.0) } else { 0.0 };
        let batch_means: Vec<f64> = moments.iter().map(|m| m.1 / m.0 as f64).collect();
        let batch_sizes = moments.iter().map(|m| m.0).collect();
        let std_error = std_error_of(&batch_means, sample_variance, n);
        Self { estimate, std_error, gamma, n_samples: n, shots, batch_means, batch_sizes, sample_variance }
    }

    fn moments(&self) -> Vec<(usize, f64, f64)> {
        // Per-batch second moments are not kept; spread the pooled one evenly.
        let n = self.n_samples as f64;
        let pooled_sq = self.sample_variance * (n - 1.0).max(0.0) + n * self.estimate * self.estimate;
        self.batch_means
            .iter()
            .zip(&self.batch_sizes)
            .map(|(&m, &c)| (c, m * c as f64, pooled_sq * c as f64 / n))
            .collect()
    }

    /// Combines results from disjoint streams of the same configuration.
    pub fn merge(&self, other: &EstimatorResult) -> Result<EstimatorResult> {
        if (self.gamma - other.gamma).abs() > 1e-12 * self.gamma.max(1.0) || self.shots != other.shots {
            return Err(Error::InvalidArgument("cannot merge results of different configurations".into()));
        }
        let mut moments = self.moments();
        moments.extend(other.moments());
        Ok(Self::from_moments(&moments, self.gamma, self.shots))
    }
}

/// Grand mean, standard error and batch means of a sample list.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchStatistics {
    pub mean: f64,
    pub std_error: f64,
    pub batch_means: Vec<f64>,
}

/// Splits `values` into `n_batches` batches: contiguous blocks of
/// `len / n_batches`, with the trailing remainder dealt round-robin. The
/// standard error is the sample standard deviation of the batch means over
/// `√n_batches`.
pub fn batch_statistics(values: &[f64], n_batches: usize) -> Result<BatchStatistics> {
    if n_batches == 0 {
        return Err(Error::InvalidArgument("at least one batch is required".into()));
    }
    if values.len() < n_batches {
        return Err(Error::InvalidArgument(format!("{} values cannot fill {n_batches} batches", values.len())));
    }
    let base = values.len() / n_batches;
    let mut sums = vec![0.0; n_batches];
    let mut counts = vec![base; n_batches];
    for (b, sum) in sums.iter_mut().enumerate() {
        *sum = values[b * base..(b + 1) * base].iter().sum();
    }
    for (r, v) in values[n_batches * base..].iter().enumerate() {
        sums[r] += v;
        counts[r] += 1;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let batch_means: Vec<f64> = sums.iter().zip(&counts).map(|(s, &c)| s / c as f64).collect();
    let n = values.len();
    let sample_variance =
        if n > 1 { values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
    let std_error = std_error_of(&batch_means, sample_variance, n);
    Ok(BatchStatistics { mean, std_error, batch_means })
}

/// A circuit whose every gate is replaced by a quasi-probability
/// representation acting on the gate's targets.
#[derive(Debug, Clone, PartialEq)]
pub struct MitigatedCircuit {
    num_qubits: usize,
    gates: Vec<(QuasiProbRep, Vec<usize>)>,
}

impl MitigatedCircuit {
    pub fn new(num_qubits: usize, gates: Vec<(QuasiProbRep, Vec<usize>)>) -> Result<Self> {
        for (rep, targets) in &gates {
            if rep.dim() != 1 << targets.len() {
                return Err(Error::DimensionMismatch { expected: 1 << targets.len(), found: rep.dim() });
            }
            if let Some(&t) = targets.iter().find(|&&t| t >= num_qubits) {
                return Err(Error::InvalidTargets(format!("qubit {t} out of range for {num_qubits} qubits")));
            }
        }
        Ok(Self { num_qubits, gates })
    }

    /// One representation per gate, produced by `build`.
    pub fn from_circuit<F>(circuit: &Circuit, mut build: F) -> Result<Self>
    where
        F: FnMut(&crate::circuits::GateSpec) -> Result<QuasiProbRep>,
    {
        let gates = circuit.gates().iter().map(|g| Ok((build(g)?, g.targets.clone()))).collect::<Result<Vec<_>>>()?;
        Self::new(circuit.num_qubits(), gates)
    }

    /// Every gate at hardware noise, `γ = 1`.
    pub fn unmitigated(circuit: &Circuit, model: &NoiseModel) -> Result<Self> {
        Self::from_circuit(circuit, |g| {
            let op = noisy_gate(&g.gate, model, 1.0)?;
            QuasiProbRep::new(g.label(), vec![(1.0, op)])
        })
    }

    /// Depolarizing PER representations built for rate `p`; `λ = 0` is PEC.
    pub fn per(circuit: &Circuit, p: f64, lambda: f64) -> Result<Self> {
        Self::from_circuit(circuit, |g| depolarizing_per_rep(&g.gate, p, lambda))
    }

    pub fn pec(circuit: &Circuit, p: f64) -> Result<Self> {
        Self::per(circuit, p, 0.0)
    }

    /// The same extrapolation representation for every gate.
    pub fn gate_extrapolation(
        circuit: &Circuit,
        model: &NoiseModel,
        scale_factors: &[f64],
        coefficients: &[f64],
        mode: ScalingMode,
    ) -> Result<Self> {
        Self::from_circuit(circuit, |g| gate_extrapolation_rep(&g.gate, model, scale_factors, coefficients, mode))
    }

    /// Canonical noise scaling of every gate's representation.
    pub fn canonical_scaled(&self, lambda: f64) -> Result<Self> {
        let gates = self
            .gates
            .iter()
            .map(|(rep, targets)| Ok((canonical_scaled_rep(&canonical_split(rep)?, lambda)?, targets.clone())))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.num_qubits, gates)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[(QuasiProbRep, Vec<usize>)] {
        &self.gates
    }

    pub fn reps(&self) -> impl Iterator<Item = &QuasiProbRep> {
        self.gates.iter().map(|g| &g.0)
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// `γ = Π γᵢ`.
    pub fn gamma(&self) -> f64 {
        self.reps().map(QuasiProbRep::one_norm).product()
    }

    /// Number of term combinations in the full expansion.
    pub fn combinations(&self) -> f64 {
        self.reps().map(|r| r.len() as f64).product()
    }
}

/// The full sum `Σ η_α⃗ ⟨A⟩_noisy` over every term combination, with each
/// operation realized under `model`.
pub fn exact_mitigated_value(
    circuit: &MitigatedCircuit,
    model: &NoiseModel,
    obs: &Observable,
    rho0: &DensityMatrix,
) -> Result<f64> {
    let terms = circuit.combinations();
    if terms > EXACT_TERM_LIMIT {
        return Err(Error::TooManyTerms { terms, limit: EXACT_TERM_LIMIT });
    }
    let compiled = monte_carlo::Compiled::new(circuit, model, obs, rho0)?;
    Ok(compiled.exact_sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{rb_circuit, GateSpec};
    use crate::gates::Gate;
    use crate::noise::{depolarizing_superop, NoiseModel};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn folding_examples() {
        let g = Gate::h();
        let model = NoiseModel::depolarizing(0.02, 1).unwrap();
        let base = depolarizing_superop(0.02, 1).unwrap();
        let noisy = compose(&base, g.superop()).unwrap();
        let dagger = compose(&base, g.dagger().superop()).unwrap();
        assert_eq!(fold_gate(&noisy, 1.0, &dagger).unwrap(), noisy);

        let ideal = fold_gate(g.superop(), 7.0, g.dagger().superop()).unwrap();
        assert!(ideal.distance(g.superop()) < 1e-12);

        // Three noisy layers multiply the Pauli-transfer decay.
        let folded = fold_gate(&noisy, 3.0, &dagger).unwrap();
        let ptm = compose(&folded, &g.superop().adjoint()).unwrap().pauli_transfer_matrix();
        let decay = (1.0 - 4.0 * 0.02 / 3.0f64).powi(3);
        for i in 1..4 {
            assert!((ptm[(i, i)] - decay).abs() < 1e-12);
        }
        let q = 0.75 * (1.0 - decay);
        let parametric = compose(&depolarizing_superop(q, 1).unwrap(), g.superop()).unwrap();
        assert!(folded.distance(&parametric) < 1e-12);
        let _ = model;

        for bad in [2.0, 0.0, -1.0, 3.5] {
            assert!(fold_gate(&noisy, bad, &dagger).is_err());
        }
    }

    #[test]
    fn zne_examples() {
        let c = zne_extrapolate(&[(1.0, 0.7), (3.0, 0.7), (5.0, 0.7)], Extrapolation::RichardsonFull).unwrap();
        assert!((c - 0.7).abs() < 1e-14);
        let a = zne_extrapolate(&[(1.0, 0.9), (3.0, 0.7)], Extrapolation::RichardsonFull).unwrap();
        assert!((a - 1.0).abs() < 1e-14);
        assert!(zne_extrapolate(&[(1.0, 0.9), (1.0, 0.7)], Extrapolation::RichardsonFull).is_err());
        assert!(zne_extrapolate(&[(1.0, 0.9), (2.0, 0.7)], Extrapolation::PolyDegree(2)).is_err());
    }

    #[test]
    fn zne_bias_on_rb_decay_curve() {
        let p = 0.01;
        let curve = |l: f64| 0.5 + 0.5 * (1.0 - 4.0 * l * p / 3.0).powi(14);
        let value = zne_extrapolate(&[(1.0, curve(1.0)), (3.0, curve(3.0))], Extrapolation::RichardsonFull).unwrap();
        // Independent: the line through the two points evaluated at zero.
        let slope = (curve(3.0) - curve(1.0)) / 2.0;
        let intercept = curve(1.0) - slope;
        assert!((value - intercept).abs() < 1e-14);
        assert!((1.0 - value) > 1e-4);
    }

    #[test]
    fn batch_statistics_examples() {
        let s = batch_statistics(&[0.3; 40], 4).unwrap();
        assert!((s.mean - 0.3).abs() < 1e-15 && s.std_error < 1e-15);

        let values: Vec<f64> = (0..50_000).map(|i| (i % 7) as f64).collect();
        assert_eq!(batch_statistics(&values, 25).unwrap().batch_means.len(), 25);

        let alternating: Vec<f64> = (0..10).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert_eq!(batch_statistics(&alternating, 2).unwrap().mean, 0.0);

        let uneven = batch_statistics(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0], 3).unwrap();
        assert_eq!(uneven.batch_means, vec![(1.0 + 2.0 + 7.0) / 3.0, 3.5, 5.5]);
        assert!(batch_statistics(&[1.0], 0).is_err());
    }

    #[test]
    fn budget_validation() {
        assert!(Budget::new(10, 0, 1).validate().is_err());
        assert!(Budget::new(3, 4, 1).validate().is_err());
        assert!(Budget::new(10, 2, 1).with_shots(Shots::PerSample(0)).validate().is_err());
        assert_eq!(Budget::new(10, 4, 1).batch_sizes(), vec![3, 3, 2, 2]);
    }

    #[test]
    fn exact_value_single_gate() {
        let c = Circuit::new(1, vec![GateSpec::new(Gate::h(), vec![0])]).unwrap();
        let model = NoiseModel::depolarizing(0.05, 1).unwrap();
        let mitigated = MitigatedCircuit::pec(&c, 0.05).unwrap();
        let obs = Observable::projector(2, 0);
        let value = exact_mitigated_value(&mitigated, &model, &obs, &DensityMatrix::zero_state(1)).unwrap();
        assert!((value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn exact_value_guard() {
        let c = rb_circuit(11, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let mitigated = MitigatedCircuit::pec(&c, 0.01).unwrap();
        let model = NoiseModel::depolarizing(0.01, 1).unwrap();
        let err =
            exact_mitigated_value(&mitigated, &model, &Observable::projector(2, 0), &DensityMatrix::zero_state(1));
        assert!(matches!(err, Err(Error::TooManyTerms { .. })));
    }
}
