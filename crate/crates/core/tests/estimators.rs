use nepec::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn setup(depth: usize, seed: u64) -> (Circuit, Observable, DensityMatrix) {
    let c = rb_circuit(depth, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
    (c, Observable::projector(2, 0), DensityMatrix::zero_state(1))
}

#[test]
fn pec_mean_is_unbiased() {
    let (c, obs, rho) = setup(3, 11);
    let model = NoiseModel::depolarizing(0.05, 1).unwrap();
    let reps = MitigatedCircuit::pec(&c, 0.05).unwrap();
    let exact = exact_mitigated_value(&reps, &model, &obs, &rho).unwrap();
    assert!((exact - 1.0).abs() < 1e-9, "exact {exact}");
    let n = 100_000;
    let r = monte_carlo_estimate(&reps, &model, &obs, &rho, &Budget::new(n, 10, 5)).unwrap();
    assert!((r.estimate - exact).abs() <= 4.0 * r.gamma / (n as f64).sqrt(), "{} vs {exact}", r.estimate);
}

#[test]
fn exact_value_of_per_interpolates_noise() {
    // Error reduction at λ realizes the circuit under depolarizing λp.
    let (c, obs, rho) = setup(8, 2);
    let p = 0.03;
    for lambda in [0.0, 0.4, 1.0] {
        let reps = MitigatedCircuit::per(&c, p, lambda).unwrap();
        let model = NoiseModel::depolarizing(p, 1).unwrap();
        let exact = exact_mitigated_value(&reps, &model, &obs, &rho).unwrap();
        let decay = (1.0 - 4.0 * lambda * p / 3.0f64).powi(8);
        assert!((exact - (0.5 + 0.5 * decay)).abs() < 1e-12, "lambda {lambda}: {exact}");
    }
}

#[test]
fn variance_falls_with_virtual_noise() {
    let (c, obs, rho) = setup(12, 4);
    let model = NoiseModel::depolarizing(0.03, 1).unwrap();
    let diffs: Vec<f64> = (0..20)
        .map(|seed| {
            let budget = Budget::new(2000, 10, seed);
            let low = per_estimate(&c, &model, &obs, &rho, 0.0, &budget).unwrap();
            let high = per_estimate(&c, &model, &obs, &rho, 0.5, &budget).unwrap();
            assert!(low.sample_variance <= low.gamma * low.gamma * 1.001);
            high.sample_variance - low.sample_variance
        })
        .collect();
    let n = diffs.len() as f64;
    let mean = diffs.iter().sum::<f64>() / n;
    let sd = (diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!(mean <= 3.0 * sd / n.sqrt(), "variance at 0.5 exceeds variance at 0 by {mean} (se {})", sd / n.sqrt());
}

#[test]
fn sampled_terms_follow_quasi_probabilities() {
    let (c, _, _) = setup(2, 8);
    let reps = MitigatedCircuit::pec(&c, 0.1).unwrap();
    let eta = reps.gates()[0].0.coefficients();
    let gamma0: f64 = eta.iter().map(|e| e.abs()).sum();
    let draws = 100_000;
    let mut counts = vec![0usize; eta.len()];
    let rng = &mut ChaCha8Rng::seed_from_u64(17);
    for _ in 0..draws {
        let inst = sample_instance(&reps, rng);
        counts[inst.op_choices[0]] += 1;
        let expected_sign: f64 =
            inst.op_choices.iter().zip(reps.gates()).map(|(&k, (rep, _))| rep.coefficients()[k].signum()).product();
        assert_eq!(inst.sign, expected_sign);
        assert_eq!(inst.gamma, reps.gamma());
    }
    for (k, e) in eta.iter().enumerate() {
        let p = e.abs() / gamma0;
        let freq = counts[k] as f64 / draws as f64;
        let sigma = (p * (1.0 - p) / draws as f64).sqrt();
        assert!((freq - p).abs() <= 4.0 * sigma, "term {k}: {freq} vs {p}");
    }
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let (c, obs, rho) = setup(6, 1);
    let model = NoiseModel::depolarizing(0.02, 1).unwrap();
    let reps = MitigatedCircuit::pec(&c, 0.02).unwrap();
    let budget = Budget::new(3000, 7, 9).with_shots(Shots::PerSample(3));
    let a = monte_carlo_estimate(&reps, &model, &obs, &rho, &budget.with_workers(1)).unwrap();
    let b = monte_carlo_estimate(&reps, &model, &obs, &rho, &budget.with_workers(3)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn virtual_zne_combines_levels() {
    let (c, obs, rho) = setup(10, 3);
    let model = NoiseModel::depolarizing(0.02, 1).unwrap();
    let budget = Budget::new(4000, 8, 6);
    let s = [0.2, 1.0];
    let v = virtual_zne(&c, &model, &obs, &rho, &s, &budget, Extrapolation::RichardsonFull).unwrap();
    let low = per_estimate(&c, &model, &obs, &rho, 0.2, &budget).unwrap();
    let high = per_estimate(&c, &model, &obs, &rho, 1.0, &budget.with_first_stream(8)).unwrap();
    let expected = 1.25 * low.estimate - 0.25 * high.estimate;
    assert!((v.estimate - expected).abs() < 1e-12);
    let se = ((1.25 * low.std_error).powi(2) + (0.25 * high.std_error).powi(2)).sqrt();
    assert!((v.std_error - se).abs() < 1e-12);
    assert_eq!(v.n_samples, 8000);
}
