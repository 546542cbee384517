use pvnne::neural::{init_network, train_backprop, train_lm, Activation, LmConfig, Network, NetworkSpec, Termination};
use pvnne::pso::{pso_minimize, train_pso, PsoConfig};
use pvnne::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_batch(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect())
}

#[test]
fn gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let h = 1e-6;
    for case in 0..50 {
        let depth = rng.random_range(1..=3);
        let mut sizes = vec![rng.random_range(1..=6)];
        sizes.extend((0..depth).map(|_| rng.random_range(1..=8)));
        sizes.push(rng.random_range(1..=3));
        let mut spec = NetworkSpec::new(sizes.clone(), case);
        if case % 5 == 4 {
            spec.hidden_activation = Activation::Sigmoid;
        }
        let mut net = init_network(&spec).unwrap();
        // Non-zero biases so their gradients are exercised too.
        let params: Vec<f64> = net.parameters().iter().map(|p| p + rng.random_range(-0.3..0.3)).collect();
        net.set_parameters(&params).unwrap();
        let x = random_batch(&mut rng, 7, sizes[0]);
        let y = random_batch(&mut rng, 7, *sizes.last().unwrap());
        let grad = net.gradient(&x, &y).unwrap();
        for i in 0..params.len() {
            let mut plus = params.clone();
            plus[i] += h;
            let mut minus = params.clone();
            minus[i] -= h;
            let fp = Network::from_parameters(&spec, plus).unwrap().mse(&x, &y).unwrap();
            let fm = Network::from_parameters(&spec, minus).unwrap().mse(&x, &y).unwrap();
            let fd = (fp - fm) / (2.0 * h);
            assert!((grad[i] - fd).abs() <= 1e-6, "case {case} {sizes:?} param {i}: {} vs {fd}", grad[i]);
        }
    }
}

fn line_data() -> (Matrix, Matrix) {
    let xs: Vec<f64> = (0..21).map(|i| -1.0 + 0.1 * i as f64).collect();
    (Matrix::from_vec(21, 1, xs.clone()), Matrix::from_vec(21, 1, xs.iter().map(|x| 2.0 * x + 1.0).collect()))
}

#[test]
fn lm_fits_a_line_within_five_epochs() {
    let (x, y) = line_data();
    let spec = NetworkSpec { output_activation: Activation::Linear, ..NetworkSpec::new(vec![1, 1], 3) };
    let net = init_network(&spec).unwrap();
    let (trained, report) =
        train_lm(&net, &x, &y, &LmConfig { max_epochs: 5, tolerance: 1e-12, ..Default::default() }).unwrap();
    assert!(report.final_mse < 1e-12, "{report:?}");
    assert!(report.epochs_run <= 5);
    assert_eq!(report.terminated_by, Termination::Tolerance);
    let p = trained.parameters();
    assert!((p[0] - 2.0).abs() < 1e-6 && (p[1] - 1.0).abs() < 1e-6);
}

#[test]
fn lm_history_never_increases() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let x = random_batch(&mut rng, 40, 3);
    let y = Matrix::from_vec(40, 1, x.iter_rows().map(|r| (r[0] * 2.0).sin() + r[1] * r[2]).collect());
    let net = init_network(&NetworkSpec::new(vec![3, 8, 1], 1)).unwrap();
    let (_, report) = train_lm(&net, &x, &y, &LmConfig::default()).unwrap();
    assert!(report.mse_history.windows(2).all(|w| w[1] <= w[0]));
    assert!(report.final_mse < report.mse_history[0]);
}

#[test]
fn backprop_reduces_the_loss() {
    let (x, y) = line_data();
    let net = init_network(&NetworkSpec::new(vec![1, 4, 1], 2)).unwrap();
    let (_, report) = train_backprop(&net, &x, &y, 0.05, 2000, 1e-8).unwrap();
    assert!(report.final_mse < 0.01 * report.mse_history[0], "{}", report.final_mse);
}

#[test]
fn pso_defaults_solve_the_sphere() {
    let start = std::time::Instant::now();
    let mut best: Vec<f64> = (0..20)
        .map(|seed| {
            let cfg = PsoConfig { seed, ..Default::default() };
            pso_minimize(|p| p.iter().map(|v| v * v).sum(), 10, &cfg).unwrap().best_value
        })
        .collect();
    let elapsed = start.elapsed();
    best.sort_by(f64::total_cmp);
    let median = 0.5 * (best[9] + best[10]);
    assert!(median < 1e-3, "median {median}");
    assert!(elapsed.as_secs_f64() < 5.0, "{elapsed:?}");
}

#[test]
fn pso_trains_xor() {
    let x = Matrix::from_rows(&[vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]]);
    let y = Matrix::from_rows(&[vec![0.0], vec![1.0], vec![1.0], vec![0.0]]);
    let solved = (0..10u64)
        .filter(|&seed| {
            let net = init_network(&NetworkSpec::new(vec![2, 4, 1], seed)).unwrap();
            let (_, r) = train_pso(&net, &x, &y, &PsoConfig { seed, ..Default::default() }).unwrap();
            r.final_mse < 0.01
        })
        .count();
    assert!(solved >= 8, "{solved}/10");
}

#[test]
fn pso_history_is_monotone_and_seeded() {
    let f = |p: &[f64]| p.iter().map(|v| (v - 1.0).powi(2)).sum::<f64>();
    let cfg = PsoConfig { seed: 4, max_iterations: 50, ..Default::default() };
    let a = pso_minimize(f, 4, &cfg).unwrap();
    let b = pso_minimize(f, 4, &cfg).unwrap();
    assert_eq!(a, b);
    assert!(a.value_history.windows(2).all(|w| w[1] <= w[0]));
}
