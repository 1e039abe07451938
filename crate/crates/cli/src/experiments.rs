//! The experiments behind each subcommand.
//!
//! Sampled experiments emit one row per (x, technique) with the Monte Carlo
//! estimate. The analytic tables (`ampdamp`, `nogo`) reuse the same columns:
//! for LP and convexity rows `estimate` is 1 when the program is feasible and
//! 0 otherwise, `std_error` is the residual (or the phase-one infeasibility),
//! and `gamma` is the one-norm of the representation found (0 when
//! infeasible).

use std::path::{Path, PathBuf};

use nepec::circuits::CliffordGroup;
use nepec::quasiprob::ampdamp_gamma_closed_form;
use nepec::{
    ampdamp_exact_extrapolation, ampdamp_extrapolation_rep, compose, convexity_test, monte_carlo_estimate,
    optimal_representation, optimize_ampdamp_scale_factors, per_estimate, rb_circuit, richardson_coefficients,
    virtual_zne, Circuit, DensityMatrix, Extrapolation, Gate, MitigatedCircuit, NoiseKind, NoiseModel, NoisyOperation,
    Observable, QuasiProbRep, Scaling, ScalingMode, Superoperator,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::{CircuitSource, Settings};
use crate::formats::{circuit_from_json, circuit_to_json, read_json, read_superops, write_json};
use crate::table::{ResultTable, Row};
use crate::{CliError, Result};

pub fn load_circuit(settings: &Settings) -> Result<Circuit> {
    match &settings.circuit {
        CircuitSource::Rb { depth, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(settings.seed));
            Ok(rb_circuit(*depth, &mut rng)?)
        }
        CircuitSource::File { path } => circuit_from_json(&read_json(path)?),
    }
}

fn ground_state_projector(circuit: &Circuit) -> (Observable, DensityMatrix) {
    let n = circuit.num_qubits();
    (Observable::projector(1 << n, 0), DensityMatrix::zero_state(n))
}

fn depolarizing(p: f64) -> Result<NoiseModel> {
    Ok(NoiseModel::depolarizing(p, 1)?)
}

/// Miscalibration sweep: unmitigated, PEC built for `assumed_p`, and
/// noise-agnostic gate extrapolation by folding, at each actual noise level.
pub fn run_fig2(settings: &Settings) -> Result<ResultTable> {
    let circuit = load_circuit(settings)?;
    let (obs, rho) = ground_state_projector(&circuit);
    let budget = settings.budget();
    let assumed = depolarizing(settings.assumed_p)?;
    let pec = MitigatedCircuit::pec(&circuit, settings.assumed_p)?;
    let coefficients = richardson_coefficients(&settings.scale_factors)?;
    let nepec = MitigatedCircuit::gate_extrapolation(
        &circuit,
        &assumed,
        &settings.scale_factors,
        &coefficients,
        ScalingMode::Folding,
    )?;

    let mut table = ResultTable::default();
    for &p in &settings.p_grid {
        let actual = depolarizing(p)?;
        let unmitigated = MitigatedCircuit::unmitigated(&circuit, &actual)?;
        for (technique, reps) in [("unmitigated", &unmitigated), ("pec", &pec), ("nepec", &nepec)] {
            let r = monte_carlo_estimate(reps, &actual, &obs, &rho, &budget)?;
            table.push(Row::sampled(p, technique, &r, settings.seed));
        }
    }
    table.validate()?;
    Ok(table)
}

/// Per-level batch means of the error-reduction sweep.
pub type BatchMeans = Vec<(f64, Vec<f64>)>;

/// Error reduction over the virtual noise grid.
pub fn run_fig3a(settings: &Settings) -> Result<(ResultTable, BatchMeans)> {
    let circuit = load_circuit(settings)?;
    let (obs, rho) = ground_state_projector(&circuit);
    let budget = settings.budget();
    let mut table = ResultTable::default();
    let mut batches = Vec::new();
    for &lambda in &settings.lambdas {
        let r = per_estimate(&circuit, &settings.noise, &obs, &rho, lambda, &budget)?;
        table.push(Row::sampled(lambda, "per", &r, settings.seed));
        batches.push((lambda, r.batch_means));
    }
    table.validate()?;
    Ok((table, batches))
}

pub fn batch_means_csv(batches: &BatchMeans) -> String {
    let mut out = String::from("x,batch,mean\n");
    for (x, means) in batches {
        for (b, m) in means.iter().enumerate() {
            out.push_str(&format!("{},{b},{}\n", crate::table::format_float(*x), crate::table::format_float(*m)));
        }
    }
    out
}

/// Unmitigated, PEC, error reduction at `lambdas[0]` and virtual ZNE on one
/// budget and seed.
pub fn run_fig3b(settings: &Settings) -> Result<ResultTable> {
    let circuit = load_circuit(settings)?;
    let (obs, rho) = ground_state_projector(&circuit);
    let budget = settings.budget();
    let model = &settings.noise;
    let per_level = settings.lambdas.first().copied().unwrap_or(0.2);
    let mut table = ResultTable::default();
    for (x, technique) in [(1.0, "unmitigated"), (0.0, "pec"), (per_level, "per")] {
        let r = per_estimate(&circuit, model, &obs, &rho, x, &budget)?;
        table.push(Row::sampled(x, technique, &r, settings.seed));
    }
    let r = virtual_zne(
        &circuit,
        model,
        &obs,
        &rho,
        &settings.virtual_scale_factors,
        &budget,
        Extrapolation::RichardsonFull,
    )?;
    table.push(Row::sampled(0.0, "virtual_zne", &r, settings.seed));
    table.validate()?;
    Ok(table)
}

/// `RESET`: every state to `|0⟩⟨0|`.
pub fn reset_superop() -> Superoperator {
    nepec::amplitude_damping_superop(1.0).expect("p = 1 is a valid rate")
}

/// Cliffords composed with amplitude damping at each rate-scale factor.
pub fn clifford_ampdamp_basis(model: &NoiseModel, lambdas: &[f64]) -> Result<Vec<NoisyOperation>> {
    let mut basis = Vec::new();
    for &lambda in lambdas {
        for g in CliffordGroup::get().elements() {
            basis.push(NoisyOperation::scaled(
                format!("A^({lambda})*{}", g.label()),
                g.superop(),
                model,
                lambda,
                Scaling::Rate,
            )?);
        }
    }
    Ok(basis)
}

/// Cliffords applied after a reset, i.e. preparation of each stabilizer state.
pub fn reset_basis() -> Result<Vec<NoisyOperation>> {
    CliffordGroup::get()
        .elements()
        .iter()
        .map(|g| Ok(NoisyOperation::fixed(format!("{}*RESET", g.label()), compose(g.superop(), &reset_superop())?)))
        .collect()
}

/// Rate-scale factors for the extended amplitude-damping basis: five points
/// spread over `[1, 1/p]` plus the optimal extrapolation points.
pub fn ampdamp_scale_grid(p: f64) -> Result<Vec<f64>> {
    let top = 1.0 / p;
    let mut grid: Vec<f64> = (0..5).map(|i| 1.0 + (top - 1.0) * i as f64 / 4.0).collect();
    let plan = ampdamp_exact_extrapolation(p)?;
    for &s in &plan.scale_factors {
        // p′ scaling by s is rate scaling to 1 − (1 − s·p′)².
        let rate = 1.0 - (1.0 - s * plan.p_prime).powi(2);
        let lambda = (rate / p).min(top);
        if !grid.iter().any(|g| (g - lambda).abs() < 1e-12) {
            grid.push(lambda);
        }
    }
    Ok(grid)
}

/// LP outcome as a table row.
fn lp_row(x: f64, technique: &str, target: &Superoperator, basis: &[NoisyOperation]) -> Result<Row> {
    match optimal_representation(target, basis) {
        Ok(rep) => {
            let residual = rep.reconstruct()?.distance(target);
            Ok(Row::analytic(x, 1.0, residual, rep.one_norm(), technique))
        }
        Err(nepec::Error::InfeasibleRepresentation { residual }) => Ok(Row::analytic(x, 0.0, residual, 0.0, technique)),
        Err(e) => Err(e.into()),
    }
}

/// Amplitude-damping cost table, one block of rows per rate in `p_grid`.
pub fn run_ampdamp(settings: &Settings) -> Result<ResultTable> {
    let target = Gate::h();
    let mut table = ResultTable::default();
    for &p in &settings.p_grid {
        let model = NoiseModel::amplitude_damping(p)?;
        let unscaled = clifford_ampdamp_basis(&model, &[1.0])?;
        let scaled = clifford_ampdamp_basis(&model, &ampdamp_scale_grid(p)?)?;
        let resets = reset_basis()?;

        table.push(lp_row(p, "lp_unscaled", target.superop(), &unscaled)?);
        table.push(lp_row(p, "lp_scaled", target.superop(), &scaled)?);
        let with_reset: Vec<_> = unscaled.iter().chain(&resets).cloned().collect();
        table.push(lp_row(p, "lp_reset", target.superop(), &with_reset)?);
        let with_both: Vec<_> = scaled.iter().chain(&resets).cloned().collect();
        table.push(lp_row(p, "lp_reset_scaled", target.superop(), &with_both)?);

        let plan = ampdamp_exact_extrapolation(p)?;
        let rep = ampdamp_extrapolation_rep(&target, p)?;
        let residual = rep.reconstruct()?.distance(target.superop());
        table.push(Row::analytic(p, 1.0, residual, plan.gamma, "closed_form"));
        let (_, optimized) = optimize_ampdamp_scale_factors(p)?;
        let deviation = (optimized - ampdamp_gamma_closed_form(p)).abs();
        table.push(Row::analytic(p, 1.0, deviation, optimized, "optimized"));
    }
    table.validate()?;
    Ok(table)
}

/// Weights of `D_{λp}∘G` over `{D_p∘P∘G}` with `P = I, X, Y, Z`.
pub fn depolarizing_mixture_weights(p: f64, lambda: f64) -> [f64; 4] {
    let q = 0.75 * (1.0 - (1.0 - 4.0 * lambda * p / 3.0) / (1.0 - 4.0 * p / 3.0));
    [1.0 - q, q / 3.0, q / 3.0, q / 3.0]
}

pub fn pauli_twirled_basis(gate: &Gate, model: &NoiseModel, lambda: f64) -> Result<Vec<NoisyOperation>> {
    nepec::gates::pauli_labels(1, true)
        .iter()
        .map(|l| {
            let g = if l == "I" { gate.clone() } else { gate.twirled(l)? };
            Ok(NoisyOperation::scaled(
                format!("D^({lambda})*{}", g.label()),
                g.superop(),
                model,
                lambda,
                Scaling::Rate,
            )?)
        })
        .collect()
}

/// Convexity of scaled noise over the unscaled basis, and the LP cost over
/// base and extended bases.
pub fn run_nogo(settings: &Settings) -> Result<ResultTable> {
    if settings.noise.kind != NoiseKind::Depolarizing {
        return Err(CliError::Config("the convexity sweep uses depolarizing noise".into()));
    }
    let model = settings.noise;
    let p = model.p;
    let gate = Gate::h();
    let base = pauli_twirled_basis(&gate, &model, 1.0)?;
    let lambda_max = model.lambda_max();
    let mut lambdas = settings.lambdas.clone();
    if !lambdas.iter().any(|l| (l - lambda_max).abs() < 1e-9) {
        lambdas.push(lambda_max);
    }

    let mut table = ResultTable::default();
    let mut extended = base.clone();
    for &lambda in &lambdas {
        let scaled = compose(&nepec::scaled_noise(&model, lambda)?, gate.superop())?;
        let report = convexity_test(&scaled, &base)?;
        let mass: f64 = report.mu.iter().map(|m| m.abs()).sum();
        table.push(Row::analytic(lambda, f64::from(u8::from(report.feasible)), report.residual, mass, "convexity"));
        let deviation = report
            .mu
            .iter()
            .zip(depolarizing_mixture_weights(p, lambda))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        table.push(Row::analytic(lambda, deviation, 0.0, 1.0, "mixture_weight_deviation"));
        extended.extend(pauli_twirled_basis(&gate, &model, lambda)?);
    }

    table.push(lp_row(1.0, "lp_base", gate.superop(), &base)?);
    table.push(lp_row(lambda_max, "lp_extended", gate.superop(), &extended)?);
    let eps = 4.0 * p / 3.0;
    table.push(Row::analytic(0.0, 1.0, 0.0, 1.0 + 1.5 * eps / (1.0 - eps), "closed_form_pec"));
    table.push(Row::analytic(lambda_max, 1.0, 0.0, (1.0 + lambda_max) / (lambda_max - 1.0), "extrapolation_max"));

    let damping = NoiseModel::amplitude_damping(p)?;
    let ad_base = clifford_ampdamp_basis(&damping, &[1.0])?;
    let ad_scaled = compose(&nepec::scaled_noise(&damping, 2.0)?, gate.superop())?;
    let report = convexity_test(&ad_scaled, &ad_base)?;
    let mass: f64 = report.mu.iter().map(|m| m.abs()).sum();
    table.push(Row::analytic(2.0, f64::from(u8::from(report.feasible)), report.residual, mass, "ampdamp_convexity"));
    table.validate()?;
    Ok(table)
}

/// LP-optimal decomposition of a target superoperator over a basis read
/// from JSON files.
pub fn run_decompose(target_path: &Path, basis_paths: &[PathBuf], out: Option<&Path>) -> Result<Value> {
    let (target_label, target) =
        read_superops(target_path)?.into_iter().next().ok_or_else(|| CliError::Config("empty target file".into()))?;
    let mut basis = Vec::new();
    for path in basis_paths {
        for (label, s) in read_superops(path)? {
            basis.push(NoisyOperation::fixed(label, s));
        }
    }
    if basis.is_empty() {
        return Err(CliError::Config("no basis operations given".into()));
    }
    let rep = optimal_representation(&target, &basis)?;
    let doc = decomposition_json(&target_label, &rep, &target)?;
    if let Some(path) = out {
        write_json(path, &doc)?;
    }
    Ok(doc)
}

pub fn decomposition_json(label: &str, rep: &QuasiProbRep, target: &Superoperator) -> Result<Value> {
    let residual = rep.reconstruct()?.distance(target);
    let gamma_plus: f64 = rep.coefficients().iter().filter(|e| **e > 0.0).sum();
    let gamma_minus: f64 = -rep.coefficients().iter().filter(|e| **e < 0.0).sum::<f64>();
    let terms: Vec<Value> = rep.terms().iter().map(|(eta, op)| json!({ "label": op.label, "eta": eta })).collect();
    Ok(json!({
        "target": label,
        "gamma": rep.one_norm(),
        "gamma_plus": gamma_plus,
        "gamma_minus": gamma_minus,
        "residual": residual,
        "terms": terms,
    }))
}

/// A random RB circuit as circuit JSON.
pub fn run_rb_gen(depth: usize, seed: u64, out: Option<&Path>) -> Result<Value> {
    let circuit = rb_circuit(depth, &mut ChaCha8Rng::seed_from_u64(seed))?;
    let doc = circuit_to_json(&circuit);
    if let Some(path) = out {
        write_json(path, &doc)?;
    }
    Ok(doc)
}
