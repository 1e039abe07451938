use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{Budget, EstimatorResult, Extrapolation, MitigatedCircuit, Shots};
use crate::circuits::Circuit;
use crate::error::{Error, Result};
use crate::noise::{NoiseKind, NoiseModel};
use crate::quasiprob::QuasiProbRep;
use crate::superop::{embed, vectorize, DensityMatrix, Observable, C64};

/// One draw of the signed Monte Carlo estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledInstance {
    pub op_choices: Vec<usize>,
    pub lambda_choices: Vec<f64>,
    pub sign: f64,
    pub gamma: f64,
}

/// Inverse-CDF table over `|η|/γ` in term order.
#[derive(Debug, Clone)]
struct TermTable {
    cdf: Vec<f64>,
    signs: Vec<f64>,
}

impl TermTable {
    fn new(rep: &QuasiProbRep) -> Self {
        let gamma = rep.one_norm();
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = rep
            .coefficients()
            .iter()
            .map(|e| {
                acc += e.abs() / gamma;
                acc
            })
            .collect();
        if let Some(last) = cdf.last_mut() {
            *last = 1.0;
        }
        let signs = rep.coefficients().iter().map(|e| if *e < 0.0 { -1.0 } else { 1.0 }).collect();
        Self { cdf, signs }
    }

    fn pick(&self, u: f64) -> usize {
        self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1)
    }
}

/// Draws one term per gate with probability `|η|/γᵢ`, using one uniform
/// variate per gate.
pub fn sample_instance<R: Rng + ?Sized>(circuit: &MitigatedCircuit, rng: &mut R) -> SampledInstance {
    let mut instance = SampledInstance {
        op_choices: Vec::with_capacity(circuit.len()),
        lambda_choices: Vec::with_capacity(circuit.len()),
        sign: 1.0,
        gamma: circuit.gamma(),
    };
    for rep in circuit.reps() {
        let table = TermTable::new(rep);
        let k = table.pick(rng.random::<f64>());
        instance.op_choices.push(k);
        instance.lambda_choices.push(rep.terms()[k].1.lambda);
        instance.sign *= table.signs[k];
    }
    instance
}

struct CompiledGate {
    table: TermTable,
    coefficients: Vec<f64>,
    maps: Vec<DMatrix<C64>>,
}

/// A mitigated circuit with every operation realized under a noise model
/// and embedded in the full register.
pub(super) struct Compiled {
    gates: Vec<CompiledGate>,
    gamma: f64,
    initial: DVector<C64>,
    /// `vec(Aᵀ)`, so that `tr[Aρ] = readout · vec(ρ)`.
    readout: DVector<C64>,
    /// Eigenvalues and readout vectors of the spectral projectors.
    outcomes: Vec<(f64, DVector<C64>)>,
}

fn readout_vector(m: &DMatrix<C64>) -> DVector<C64> {
    vectorize(&m.transpose())
}

fn dot(a: &DVector<C64>, b: &DVector<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x * y).re).sum()
}

impl Compiled {
    pub(super) fn new(
        circuit: &MitigatedCircuit,
        model: &NoiseModel,
        obs: &Observable,
        rho0: &DensityMatrix,
    ) -> Result<Self> {
        let dim = 1usize << circuit.num_qubits();
        if obs.dim() != dim || rho0.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: if obs.dim() != dim { obs.dim() } else { rho0.dim() },
            });
        }
        let gates = circuit
            .gates()
            .iter()
            .map(|(rep, targets)| {
                let maps = rep
                    .terms()
                    .iter()
                    .map(|(_, op)| Ok(embed(&op.realize(model)?, targets, circuit.num_qubits())?.into_matrix()))
                    .collect::<Result<Vec<_>>>()?;
                Ok(CompiledGate { table: TermTable::new(rep), coefficients: rep.coefficients(), maps })
            })
            .collect::<Result<Vec<_>>>()?;
        let outcomes = obs.spectral_projectors().into_iter().map(|(v, p)| (v, readout_vector(&p))).collect();
        Ok(Self {
            gates,
            gamma: circuit.gamma(),
            initial: rho0.vectorize(),
            readout: readout_vector(obs.matrix()),
            outcomes,
        })
    }

    pub(super) fn exact_sum(&self) -> f64 {
        self.expand(0, &self.initial)
    }

    fn expand(&self, depth: usize, state: &DVector<C64>) -> f64 {
        let Some(gate) = self.gates.get(depth) else {
            return dot(&self.readout, state);
        };
        gate.maps.iter().zip(&gate.coefficients).map(|(map, eta)| eta * self.expand(depth + 1, &(map * state))).sum()
    }

    /// `γσ` times the exact or shot-averaged value of one sampled instance.
    fn sample<R: Rng>(&self, shots: Shots, rng: &mut R) -> f64 {
        let mut state = self.initial.clone();
        let mut sign = 1.0;
        for gate in &self.gates {
            let k = gate.table.pick(rng.random::<f64>());
            sign *= gate.table.signs[k];
            state = &gate.maps[k] * state;
        }
        let value = match shots {
            Shots::Exact => dot(&self.readout, &state),
            Shots::PerSample(n) => {
                let probs: Vec<f64> = self.outcomes.iter().map(|(_, r)| dot(r, &state).max(0.0)).collect();
                let total: f64 = probs.iter().sum();
                let mut acc = 0.0;
                for _ in 0..n {
                    let u = rng.random::<f64>() * total;
                    let mut cumulative = 0.0;
                    let mut outcome = self.outcomes.len() - 1;
                    for (i, p) in probs.iter().enumerate() {
                        cumulative += p;
                        if u < cumulative {
                            outcome = i;
                            break;
                        }
                    }
                    acc += self.outcomes[outcome].0;
                }
                acc / n as f64
            }
        };
        self.gamma * sign * value
    }

    fn run_batch(&self, count: usize, shots: Shots, seed: u64, stream: u64) -> (usize, f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for _ in 0..count {
            let x = self.sample(shots, &mut rng);
            sum += x;
            sum_sq += x * x;
        }
        (count, sum, sum_sq)
    }
}

/// Signed Monte Carlo estimate of the mitigated expectation value: the mean
/// of `γσ⟨A⟩` over sampled instances, each realized under `model`.
pub fn monte_carlo_estimate(
    circuit: &MitigatedCircuit,
    model: &NoiseModel,
    obs: &Observable,
    rho0: &DensityMatrix,
    budget: &Budget,
) -> Result<EstimatorResult> {
    budget.validate()?;
    let compiled = Compiled::new(circuit, model, obs, rho0)?;
    let sizes = budget.batch_sizes();
    let run = || -> Vec<(usize, f64, f64)> {
        sizes
            .par_iter()
            .enumerate()
            .map(|(b, &count)| compiled.run_batch(count, budget.shots, budget.seed, budget.first_stream + b as u64))
            .collect()
    };
    let moments = if budget.workers == 0 {
        run()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(budget.workers)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(run)
    };
    Ok(EstimatorResult::from_moments(&moments, compiled.gamma, budget.shots))
}

/// Probabilistic error reduction at virtual noise level `λ ∈ [0, 1]` with
/// representations built for `model`'s depolarizing rate. `λ = 0` is PEC and
/// `λ = 1` the unmitigated circuit.
pub fn per_estimate(
    circuit: &Circuit,
    model: &NoiseModel,
    obs: &Observable,
    rho0: &DensityMatrix,
    lambda: f64,
    budget: &Budget,
) -> Result<EstimatorResult> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::ScaleOutOfRange { lambda, max: 1.0 });
    }
    if model.kind != NoiseKind::Depolarizing {
        return Err(Error::InvalidArgument(
            "closed-form error reduction needs depolarizing noise; use MitigatedCircuit::canonical_scaled".into(),
        ));
    }
    let reps = MitigatedCircuit::per(circuit, model.p, lambda)?;
    monte_carlo_estimate(&reps, model, obs, rho0, budget)
}

/// Error reduction at each virtual level in `scale_factors` followed by
/// extrapolation to zero. Level `j` draws from the streams after those of
/// levels `0..j`, so the per-level estimates are independent and the
/// standard error is `√Σ η²·se²`.
pub fn virtual_zne(
    circuit: &Circuit,
    model: &NoiseModel,
    obs: &Observable,
    rho0: &DensityMatrix,
    scale_factors: &[f64],
    budget: &Budget,
    method: Extrapolation,
) -> Result<EstimatorResult> {
    if let Some(&l) = scale_factors.iter().find(|&&l| !(l > 0.0 && l <= 1.0)) {
        return Err(Error::ScaleOutOfRange { lambda: l, max: 1.0 });
    }
    let eta = method.coefficients(scale_factors)?;
    let results = scale_factors
        .iter()
        .enumerate()
        .map(|(j, &lambda)| {
            let level = budget.with_first_stream(budget.first_stream + (j * budget.batches) as u64);
            per_estimate(circuit, model, obs, rho0, lambda, &level)
        })
        .collect::<Result<Vec<_>>>()?;

    let estimate = eta.iter().zip(&results).map(|(e, r)| e * r.estimate).sum();
    let std_error = eta.iter().zip(&results).map(|(e, r)| (e * r.std_error).powi(2)).sum::<f64>().sqrt();
    let gamma = eta.iter().zip(&results).map(|(e, r)| e.abs() * r.gamma).sum();
    let sample_variance = eta.iter().zip(&results).map(|(e, r)| e * e * r.sample_variance).sum();
    let batch_means =
        (0..budget.batches).map(|b| eta.iter().zip(&results).map(|(e, r)| e * r.batch_means[b]).sum()).collect();
    Ok(EstimatorResult {
        estimate,
        std_error,
        gamma,
        n_samples: results.iter().map(|r| r.n_samples).sum(),
        shots: budget.shots,
        batch_means,
        batch_sizes: results[0].batch_sizes.clone(),
        sample_variance,
    })
}
