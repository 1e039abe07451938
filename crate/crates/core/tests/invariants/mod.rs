//! Randomized invariants shared by the core property tests and the
//! acceptance harness. Each check runs a deterministic proptest runner.

#![allow(dead_code)]

use nalgebra::DMatrix;
use nepec::circuits::CliffordGroup;
use nepec::superop::{devectorize, vectorize};
use nepec::*;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CASES: u32 = 200;

pub type Outcome = std::result::Result<(), String>;

pub struct Invariant {
    pub name: &'static str,
    pub run: fn(u32) -> Outcome,
}

pub const ALL: &[Invariant] = &[
    Invariant { name: "composition_is_associative", run: composition_is_associative },
    Invariant { name: "vectorization_matches_conjugation", run: vectorization_matches_conjugation },
    Invariant { name: "kraus_and_unitary_agree", run: kraus_and_unitary_agree },
    Invariant { name: "constructors_preserve_trace", run: constructors_preserve_trace },
    Invariant { name: "depolarizing_scaling_is_linear", run: depolarizing_scaling_is_linear },
    Invariant { name: "scaled_channels_are_cp", run: scaled_channels_are_cp },
    Invariant { name: "unit_scale_is_base_channel", run: unit_scale_is_base_channel },
    Invariant { name: "ampdamp_composes", run: ampdamp_composes },
    Invariant { name: "coefficients_sum_to_one", run: coefficients_sum_to_one },
    Invariant { name: "lp_beats_analytic_reps", run: lp_beats_analytic_reps },
    Invariant { name: "canonical_cost_is_affine", run: canonical_cost_is_affine },
    Invariant { name: "convex_scaling_keeps_cost", run: convex_scaling_keeps_cost },
    Invariant { name: "extended_basis_never_costs_more", run: extended_basis_never_costs_more },
    Invariant { name: "gate_extrapolation_bias", run: gate_extrapolation_bias },
    Invariant { name: "rb_is_deterministic", run: rb_is_deterministic },
    Invariant { name: "rb_composes_to_identity", run: rb_composes_to_identity },
    Invariant { name: "zero_noise_is_ideal", run: zero_noise_is_ideal },
    Invariant { name: "sample_variance_bounded", run: sample_variance_bounded },
    Invariant { name: "zne_is_linear", run: zne_is_linear },
    Invariant { name: "batch_means_average_to_mean", run: batch_means_average_to_mean },
    Invariant { name: "merge_equals_union", run: merge_equals_union },
];

pub fn check(name: &str) {
    let inv = ALL.iter().find(|i| i.name == name).unwrap_or_else(|| panic!("unknown invariant {name}"));
    if let Err(e) = (inv.run)(CASES) {
        panic!("{name}: {e}");
    }
}

fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn fail<E: std::fmt::Display>(e: E) -> TestCaseError {
    TestCaseError::fail(e.to_string())
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

fn random_unitary(rng: &mut ChaCha8Rng, dim: usize) -> DMatrix<C64> {
    random_matrix(rng, dim, dim).qr().q()
}

fn random_kraus(rng: &mut ChaCha8Rng, dim: usize, count: usize) -> Vec<DMatrix<C64>> {
    let v = random_matrix(rng, count * dim, dim).qr().q();
    (0..count).map(|k| v.rows(k * dim, dim).into_owned()).collect()
}

fn random_channel(rng: &mut ChaCha8Rng, dim: usize) -> Superoperator {
    let count = rng.random_range(1..=3);
    kraus_to_superop(&random_kraus(rng, dim, count)).expect("isometry blocks form a channel")
}

fn random_state(rng: &mut ChaCha8Rng, dim: usize) -> DensityMatrix {
    let a = random_matrix(rng, dim, dim);
    let m = &a * a.adjoint();
    let tr = m.trace();
    DensityMatrix::new(m / tr).expect("normalized Gram matrix is a state")
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn clifford(i: usize) -> Gate {
    let group = CliffordGroup::get();
    group.element(i % group.len()).clone()
}

fn pauli_basis(gate: &Gate, model: &NoiseModel, lambda: f64) -> Vec<NoisyOperation> {
    nepec::gates::pauli_labels(1, true)
        .iter()
        .map(|l| {
            let g = if l == "I" { gate.clone() } else { gate.twirled(l).unwrap() };
            NoisyOperation::scaled(g.label(), g.superop(), model, lambda, Scaling::Rate).unwrap()
        })
        .collect()
}

fn clifford_basis(model: &NoiseModel, lambda: f64) -> Vec<NoisyOperation> {
    CliffordGroup::get()
        .elements()
        .iter()
        .map(|g| NoisyOperation::scaled(g.label(), g.superop(), model, lambda, Scaling::Rate).unwrap())
        .collect()
}

fn dims() -> impl Strategy<Value = usize> {
    prop_oneof![Just(2usize), Just(4usize)]
}

fn composition_is_associative(cases: u32) -> Outcome {
    runner(cases)
        .run(&(any::<u64>(), dims()), |(seed, dim)| {
            let rng = &mut ChaCha8Rng::seed_from_u64(seed);
            let (a, b, c) = (random_channel(rng, dim), random_channel(rng, dim), random_channel(rng, dim));
            let left = compose(&a, &compose(&b, &c).map_err(fail)?).map_err(fail)?;
            let right = compose(&compose(&a, &b).map_err(fail)?, &c).map_err(fail)?;
            prop_assert!(left.distance(&right) < 1e-12, "deviation {}", left.distance(&right));
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn vectorization_matches_conjugation(cases: u32) -> Outcome {
    runner(cases)
        .run(&(any::<u64>(), dims()), |(seed, dim)| {
            let rng = &mut ChaCha8Rng::seed_from_u64(seed);
            let u = random_unitary(rng, dim);
            let rho = random_state(rng, dim);
            let out = apply(&unitary_to_superop(&u).map_err(fail)?, &rho).map_err(fail)?;
            let direct = &u * rho.matrix() * u.adjoint();
            let dev = max_abs(&(out.matrix() - direct));
            prop_assert!(dev < 1e-12, "deviation {dev}");
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn kraus_and_unitary_agree(cases: u32) -> Outcome {
    runner(cases)
        .run(&(any::<u64>(), dims()), |(seed, dim)| {
            let u = random_unitary(&mut ChaCha8Rng::seed_from_u64(seed), dim);
            let a = kraus_to_superop(std::slice::from_ref(&u)).map_err(fail)?;
            let b = unitary_to_superop(&u).map_err(fail)?;
            prop_assert!(a.distance(&b) < 1e-12, "deviation {}", a.distance(&b));
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// `tr S(|i⟩⟨j|) = δᵢⱼ` computed from scratch on every matrix unit.
fn trace_defect(s: &Superoperator) -> f64 {
    let d = s.dim();
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let mut unit = DMatrix::zeros(d, d);
            unit[(i, j)] = C64::new(1.0, 0.0);
            let image = devectorize(&(s.matrix() * vectorize(&unit)), d);
            let expected = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((image.trace() - C64::new(expected, 0.0)).norm());
        }
    }
    worst
}

fn constructors_preserve_trace(cases: u32) -> Outcome {
    runner(cases)
        .run(&(any::<u64>(), 0.0f64..=1.0, 1usize..=2), |(seed, p, k)| {
            let rng = &mut ChaCha8Rng::seed_from_u64(seed);
            let dim = 1 << k;
            let channels = [
                depolarizing_superop(p, k).map_err(fail)?,
                amplitude_damping_superop(p).map_err(fail)?,
                unitary_to_superop(&random_unitary(rng, dim)).map_err(fail)?,
                random_channel(rng, dim),
                compose(&depolarizing_superop(p, 1).map_err(fail)?, &amplitude_damping_superop(p).map_err(fail)?)
                    .map_err(fail)?,
            ];
            for (i, s) in channels.iter().enumerate() {
                let defect = trace_defect(s);
                prop_assert!(defect < 1e-12, "constructor {i}: defect {defect}");
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn depolarizing_scaling_is_linear(cases: u32) -> Outcome {
    runner(cases)
        .run(&(1e-4f64..0.5, 0.0f64..=1.0, 1usize..=2), |(p, frac, k)| {
            let model = NoiseModel::depolarizing(p, k).map_err(fail)?;
            let lambda = frac * model.lambda_max();
            let scaled = scaled_noise(&model, lambda).map_err(fail)?;
            let direct = depolarizing_superop(lambda * p, k).map_err(fail)?;
            prop_assert_eq!(scaled, direct);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn scaled_channels_are_cp(cases: u32) -> Outcome {
    runner(cases)
        .run(&(1e-4f64..0.9, 0.0f64..=1.0, any::<bool>()), |(p, frac, damping)| {
            let model = if damping {
                NoiseModel::amplitude_damping(p).map_err(fail)?
            } else {
                NoiseModel::depolarizing(p * 0.75, 1).map_err(fail)?
            };
            let lambda = frac * model.lambda_max();
            let s = scaled_noise(&model, lambda).map_err(fail)?;
            let low = s.min_choi_eigenvalue();
            prop_assert!(low >= -1e-9, "Choi eigenvalue {low} at lambda {lambda}");
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn unit_scale_is_base_channel(cases: u32) -> Outcome {
    runner(cases)
        .run(&(1e-4f64..0.7, any::<bool>()), |(p, damping)| {
            let (model, base) = if damping {
                (NoiseModel::amplitude_damping(p).map_err(fail)?, amplitude_damping_superop(p).map_err(fail)?)
            } else {
                (NoiseModel::depolarizing(p, 1).map_err(fail)?, depolarizing_superop(p, 1).map_err(fail)?)
            };
            prop_assert_eq!(scaled_noise(&model, 1.0).map_err(fail)?, base);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn ampdamp_composes(cases: u32) -> Outcome {
    runner(cases)
        .run(&(0.0f64..=1.0, 0.0f64..=1.0), |(p, q)| {
            let ab =
                compose(&amplitude_damping_superop(p).map_err(fail)?, &amplitude_damping_superop(q).map_err(fail)?)
                    .map_err(fail)?;
            let direct = amplitude_damping_superop(p + q - p * q).map_err(fail)?;
            prop_assert!(ab.distance(&direct) < 1e-12, "deviation {}", ab.distance(&direct));
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn coefficients_sum_to_one(cases: u32) -> Outcome {
    runner(cases)
        .run(&(0usize..24, 1e-3f64..0.2, 0.0f64..=1.0, 1.5f64..20.0), |(g, p, lambda, top)| {
            let gate = clifford(g);
            let model = NoiseModel::depolarizing(p, 1).map_err(fail)?;
            let per = depolarizing_per_rep(&gate, p, lambda).map_err(fail)?;
            let split = canonical_split(&depolarizing_per_rep(&gate, p, 0.0).map_err(fail)?).map_err(fail)?;
            let canonical = canonical_scaled_rep(&split, lambda).map_err(fail)?;
            let top = top.min(model.lambda_max());
            let s = [1.0, (1.0 + top) / 2.0, top];
            let extrapolated = gate_extrapolation_rep(
                &gate,
                &model,
                &s,
                &richardson_coefficients(&s).map_err(fail)?,
                ScalingMode::Parametric,
            )
            .map_err(fail)?;
            let damping = ampdamp_extrapolation_rep(&gate, p * 2.5).map_err(fail)?;
            let lp = optimal_representation(gate.superop(), &pauli_basis(&gate, &model, 1.0)).map_err(fail)?;
            for (name, rep) in [
                ("per", per),
                ("canonical", canonical),
                ("extrapolation", extrapolated),
                ("ampdamp", damping),
                ("lp", lp),
            ] {
                let dev = (rep.coefficient_sum() - 1.0).abs();
                prop_assert!(dev < 1e-8, "{name}: coefficients sum to 1 + {dev}");
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn lp_beats_analytic_reps(cases: u32) -> Outcome {
    runner(cases)
        .run(&(0usize..24, 1e-3f64..0.3, 0.0f64..=1.0), |(g, p, lambda)| {
            let gate = clifford(g);
            let model = NoiseModel::depolarizing(p, 1).map_err(fail)?;
            let basis = pauli_basis(&gate, &model, 1.0);
            let per = depolarizing_per_rep(&gate, p, lambda).map_err(fail)?;
            let target = per.reconstruct().map_err(fail)?;
            let lp = optimal_representation(&target, &basis).map_err(fail)?;
            prop_assert!(
                lp.one_norm() <= per.one_norm() + 1e-7,
                "LP {} vs closed form {}",
                lp.one_norm(),
                per.one_norm()
            );
            let split = canonical_split(&depolarizing_per_rep(&gate, p, 0.0).map_err(fail)?).map_err(fail)?;
            let canonical = canonical_scaled_rep(&split, lambda).map_err(fail)?;
            let lp = optimal_representation(&canonical.reconstruct().map_err(fail)?, &basis).map_err(fail)?;
            prop_assert!(lp.one_norm() <= canonical.one_norm() + 1e-7);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn canonical_cost_is_affine(cases: u32) -> Outcome {
    runner(cases)
        .run(&(0usize..24, 1e-3f64..0.3, 0.0f64..=1.0), |(g, p, t)| {
            let rep = depolarizing_per_rep(&clifford(g), p, 0.0).map_err(fail)?;
            let split = canonical_split(&rep).map_err(fail)?;
            let gamma = split.gamma();
            let below = canonical_scaled_rep(&split, t).map_err(fail)?.one_norm();
            prop_assert!((below - (gamma - t * (gamma - 1.0))).abs() < 1e-12, "lambda {t}: {below}");
            let lambda = 1.0 + t * (split.lambda_max() - 1.0);
            let above = canonical_scaled_rep(&split, lambda).map_err(fail)?.one_norm();
            prop_assert!((above - 1.0).abs() < 1e-12, "lambda {lambda}: {above}");
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn convex_scaling_keeps_cost(cases: u32) -> Outcome {
    let strategy = (0usize..24, 1e-3f64..0.2, proptest::collection::vec(0.0f64..=1.0, 1..4));
    runner(cases)
        .run(&strategy, |(g, p, fracs)| {
            let gate = clifford(g);
            let model = NoiseModel::depolarizing(p, 1).map_err(fail)?;
            let base = pauli_basis(&gate, &model, 1.0);
            let mut extended = base.clone();
            for f in fracs {
                let lambda = 1.0 + f * (model.lambda_max() - 1.0);
                let scaled = pauli_basis(&gate, &model, lambda);
                for op in &scaled {
                    let report = convexity_test(op.superop(), &base).map_err(fail)?;
                    prop_assert!(report.feasible, "lambda {lambda} not a mixture (residual {})", report.residual);
                }
                extended.extend(scaled);
            }
            let a = optimal_representation(gate.superop(), &base).map_err(fail)?.one_norm();
            let b = optimal_representation(gate.superop(), &extended).map_err(fail)?.one_norm();
            prop_assert!((a - b).abs() < 1e-6, "base {a} extended {b}");
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn extended_basis_never_costs_more(cases: u32) -> Outcome {
    runner(cases)
        .run(&(0usize..24, 1e-3f64..0.3, 0.0f64..=1.0, any::<bool>()), |(g, p, f, damping)| {
            let gate = clifford(g);
            let (base, extra) = if damping {
                let model = NoiseModel::amplitude_damping(p).map_err(fail)?;
                let reset = amplitude_damping_superop(1.0).map_err(fail)?;
                let mut base = clifford_basis(&model, 1.0);
                for c in CliffordGroup::get().elements() {
                    base.push(NoisyOperation::fixed("reset", compose(c.superop(), &reset).map_err(fail)?));
                }
                (base, clifford_basis(&model, 1.0 + f * (model.lambda_max() - 1.0)))
            } else {
                let model = NoiseModel::depolarizing(p, 1).map_err(fail)?;
                (pauli_basis(&gate, &model, 1.0), pauli_basis(&gate, &model, f * model.lambda_max()))
            };
            let extended: Vec<_> = base.iter().chain(&extra).cloned().collect();
            let a = optimal_representation(gate.superop(), &base).map_err(fail)?.one_norm();
            let b = optimal_representation(gate.superop(), &extended).map_err(fail)?.one_norm();
            prop_assert!(b <= a + 1e-7, "extended {b} above base {a}");
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn gate_extrapolation_bias(cases: u32) -> Outcome {
    runner(cases)
        .run(&(0usize..24, 1e-2f64..0.3, 0.0f64..=1.0), |(g, p, f)| {
            let gate = clifford(g);
            let depolarizing = NoiseModel::depolarizing(p, 1).map_err(fail)?;
            let top = 1.5 + f * (depolarizing.lambda_max() - 1.5);
            let s = [1.0, top];
            let eta = richardson_coefficients(&s).map_err(fail)?;
            let rep = gate_extrapolation_rep(&gate, &depolarizing, &s, &eta, ScalingMode::Parametric).map_err(fail)?;
            let residual = rep.reconstruct().map_err(fail)?.distance(gate.superop());
            prop_assert!(residual < 1e-9, "depolarizing residual {residual}");

            let damping = NoiseModel::amplitude_damping(p).map_err(fail)?;
            let top = 1.5 + f * (damping.lambda_max() - 1.5);
            let s = [1.0, top];
            let eta = richardson_coefficients(&s).map_err(fail)?;
            let rep = gate_extrapolation_rep(&gate, &damping, &s, &eta, ScalingMode::Parametric).map_err(fail)?;
            let residual = rep.reconstruct().map_err(fail)?.distance(gate.superop());
            prop_assert!(residual > 1e-9, "linear rate extrapolation unexpectedly exact ({residual})");
            let exact = ampdamp_extrapolation_rep(&gate, p).map_err(fail)?;
            let residual = exact.reconstruct().map_err(fail)?.distance(gate.superop());
            prop_assert!(residual < 1e-9, "three-point residual {residual}");
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn rb_is_deterministic(cases: u32) -> Outcome {
    runner(cases)
        .run(&(1usize..60, any::<u64>()), |(depth, seed)| {
            let a = rb_circuit(depth, &mut ChaCha8Rng::seed_from_u64(seed)).map_err(fail)?;
            let b = rb_circuit(depth, &mut ChaCha8Rng::seed_from_u64(seed)).map_err(fail)?;
            prop_assert_eq!(format!("{a:?}"), format!("{b:?}"));
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn rb_composes_to_identity(cases: u32) -> Outcome {
    runner(cases)
        .run(&(1usize..100, any::<u64>()), |(depth, seed)| {
            let c = rb_circuit(depth, &mut ChaCha8Rng::seed_from_u64(seed)).map_err(fail)?;
            prop_assert_eq!(c.len(), depth);
            let dev = ideal_superop(&c).distance(&Superoperator::identity(2));
            prop_assert!(dev < 1e-10, "deviation {dev}");
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn zero_noise_is_ideal(cases: u32) -> Outcome {
    runner(cases)
        .run(&(1usize..40, any::<u64>(), 1e-3f64..0.5, any::<bool>()), |(depth, seed, p, damping)| {
            let c = rb_circuit(depth, &mut ChaCha8Rng::seed_from_u64(seed)).map_err(fail)?;
            let model = if damping {
                NoiseModel::amplitude_damping(p).map_err(fail)?
            } else {
                NoiseModel::depolarizing(p, 1).map_err(fail)?
            };
            let noisy = noisy_circuit_superop(&c, &model, &vec![0.0; c.len()]).map_err(fail)?;
            prop_assert_eq!(noisy, ideal_superop(&c));
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn small_pec(depth: usize, seed: u64, p: f64) -> std::result::Result<(MitigatedCircuit, NoiseModel), TestCaseError> {
    let c = rb_circuit(depth, &mut ChaCha8Rng::seed_from_u64(seed)).map_err(fail)?;
    let model = NoiseModel::depolarizing(p, 1).map_err(fail)?;
    Ok((MitigatedCircuit::pec(&c, p).map_err(fail)?, model))
}

fn sample_variance_bounded(cases: u32) -> Outcome {
    runner(cases)
        .run(&(1usize..6, any::<u64>(), 1e-2f64..0.2, any::<bool>()), |(depth, seed, p, shots)| {
            let (reps, model) = small_pec(depth, seed, p)?;
            let shots = if shots { Shots::PerSample(1) } else { Shots::Exact };
            let budget = Budget::new(300, 3, seed).with_shots(shots);
            let r = monte_carlo_estimate(
                &reps,
                &model,
                &Observable::projector(2, 0),
                &DensityMatrix::zero_state(1),
                &budget,
            )
            .map_err(fail)?;
            let n = r.n_samples as f64;
            let population = r.sample_variance * (n - 1.0) / n;
            prop_assert!(
                population <= r.gamma * r.gamma * (1.0 + 1e-12),
                "variance {population} vs gamma² {}",
                r.gamma * r.gamma
            );
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn scale_set() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.5f64..3.0, 2..5).prop_map(|steps| {
        steps
            .iter()
            .scan(0.2, |acc, s| {
                *acc += s;
                Some(*acc)
            })
            .collect()
    })
}

fn zne_is_linear(cases: u32) -> Outcome {
    let strategy = (scale_set(), any::<u64>(), -3.0f64..3.0, -3.0f64..3.0, any::<bool>());
    runner(cases)
        .run(&strategy, |(s, seed, alpha, beta, full)| {
            let rng = &mut ChaCha8Rng::seed_from_u64(seed);
            let method = if full { Extrapolation::RichardsonFull } else { Extrapolation::PolyDegree(1) };
            let y: Vec<f64> = s.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
            let z: Vec<f64> = s.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
            let pts = |v: &[f64]| s.iter().copied().zip(v.iter().copied()).collect::<Vec<_>>();
            let mixed: Vec<f64> = y.iter().zip(&z).map(|(a, b)| alpha * a + beta * b).collect();
            let lhs = zne_extrapolate(&pts(&mixed), method).map_err(fail)?;
            let rhs = alpha * zne_extrapolate(&pts(&y), method).map_err(fail)?
                + beta * zne_extrapolate(&pts(&z), method).map_err(fail)?;
            let scale: f64 = method.coefficients(&s).map_err(fail)?.iter().map(|e| e.abs()).sum();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + 6.0 * scale), "{lhs} vs {rhs}");
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn batch_means_average_to_mean(cases: u32) -> Outcome {
    let strategy = (1usize..20, 1usize..50, any::<u64>());
    runner(cases)
        .run(&strategy, |(batches, per_batch, seed)| {
            let rng = &mut ChaCha8Rng::seed_from_u64(seed);
            let values: Vec<f64> = (0..batches * per_batch).map(|_| rng.random_range(-5.0..5.0)).collect();
            let stats = batch_statistics(&values, batches).map_err(fail)?;
            let avg = stats.batch_means.iter().sum::<f64>() / batches as f64;
            prop_assert!((avg - stats.mean).abs() < 1e-12, "{avg} vs {}", stats.mean);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn merge_equals_union(cases: u32) -> Outcome {
    runner(cases)
        .run(&(1usize..5, any::<u64>(), 1e-2f64..0.2, 1usize..5, 1usize..40), |(depth, seed, p, batches, per_batch)| {
            let (reps, model) = small_pec(depth, seed, p)?;
            let obs = Observable::projector(2, 0);
            let rho = DensityMatrix::zero_state(1);
            let half = Budget::new(batches * per_batch, batches, seed);
            let a = monte_carlo_estimate(&reps, &model, &obs, &rho, &half).map_err(fail)?;
            let b = monte_carlo_estimate(&reps, &model, &obs, &rho, &half.with_first_stream(batches as u64))
                .map_err(fail)?;
            let merged = a.merge(&b).map_err(fail)?;
            let whole = Budget::new(2 * batches * per_batch, 2 * batches, seed);
            let union = monte_carlo_estimate(&reps, &model, &obs, &rho, &whole).map_err(fail)?;
            prop_assert_eq!(merged.n_samples, union.n_samples);
            prop_assert!((merged.estimate - union.estimate).abs() < 1e-12, "{} vs {}", merged.estimate, union.estimate);
            prop_assert!((merged.std_error - union.std_error).abs() < 1e-12);
            Ok(())
        })
        .map_err(|e| e.to_string())
}
