//! Quasi-probability error mitigation over noise-scaled operations.
//!
//! The crate covers the whole pipeline needed to study probabilistic error
//! cancellation (PEC), zero-noise extrapolation (ZNE) and their hybrids on
//! small registers:
//!
//! - [`superop`]: dense density matrices, observables and superoperators
//!   (column-stacking vectorization) for 1 to 4 qubits.
//! - [`noise`]: depolarizing and amplitude-damping channel families with a
//!   scale-by-λ action, and noisy implementable operations.
//! - [`quasiprob`]: quasi-probability representations, closed forms, LP-optimal
//!   decompositions, extrapolation-based representations and canonical noise
//!   scaling.
//! - [`circuits`]: circuits, ideal/noisy circuit superoperators and
//!   randomized-benchmarking circuit generation.
//! - [`estimators`]: exact and Monte Carlo mitigated estimators, unitary
//!   folding, extrapolation, error reduction and batch statistics.

pub mod circuits;
pub mod error;
pub mod estimators;
pub mod gates;
pub mod lp;
pub mod noise;
pub mod quasiprob;
pub mod superop;
pub mod tolerance;

pub use circuits::{ideal_superop, noisy_circuit_superop, rb_circuit, Circuit, GateSpec};
pub use error::{Error, Result};
pub use estimators::{
    batch_statistics, exact_mitigated_value, fold_gate, monte_carlo_estimate, per_estimate, sample_instance,
    virtual_zne, zne_extrapolate, BatchStatistics, Budget, EstimatorResult, Extrapolation, MitigatedCircuit,
    SampledInstance, Shots,
};
pub use gates::Gate;
pub use noise::{
    amplitude_damping_superop, depolarizing_superop, noisy_gate, scaled_noise, scaled_noise_p_prime, NoiseBinding,
    NoiseKind, NoiseModel, NoisyOperation, Scaling,
};
pub use quasiprob::{
    ampdamp_exact_extrapolation, ampdamp_extrapolation_rep, canonical_scaled_rep, canonical_split, convexity_test,
    depolarizing_per_rep, gate_extrapolation_rep, one_norm, optimal_representation, optimize_ampdamp_scale_factors,
    polyfit_coefficients, reconstruct, richardson_coefficients, AmpDampExtrapolation, CanonicalSplit, ConvexityReport,
    QuasiProbRep, ScalingMode,
};
pub use superop::{
    apply, compose, embed, expectation, kraus_to_superop, unitary_to_superop, DensityMatrix, Observable, Superoperator,
    C64,
};
pub use tolerance::{Tolerances, TOL};
