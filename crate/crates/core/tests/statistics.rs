use ep_response::ensemble::{run_spectral_ensemble, EnsembleConfig, Study};
use ep_response::models::random_perturbation;
use num_complex::Complex64;

#[test]
fn perturbation_entries_have_expected_moments() {
    let n = 3;
    let draws = 100_000;
    let mut mean = Complex64::new(0.0, 0.0);
    let mut fro2 = 0.0;
    for seed in 0..draws {
        let h1 = random_perturbation(n, seed).unwrap();
        mean += h1[(0, 1)];
        fro2 += h1.frobenius_norm().powi(2);
    }
    mean /= draws as f64;
    fro2 /= draws as f64;
    // each part is uniform on [-1/2, 1/2], variance 1/12
    let sigma = (1.0f64 / 12.0 / draws as f64).sqrt();
    assert!(
        mean.re.abs() < 3.0 * sigma && mean.im.abs() < 3.0 * sigma,
        "{mean}"
    );
    let expected = (n * n) as f64 / 6.0;
    assert!((fro2 - expected).abs() < 0.02 * expected, "{fro2}");
}

#[test]
fn median_is_stable_under_more_realizations() {
    let run = |realizations| {
        let mut cfg = EnsembleConfig::new(Study::SpectralX);
        cfg.realizations = realizations;
        cfg.seed = 31;
        cfg.workers = 4;
        run_spectral_ensemble(&cfg).unwrap().summary.unwrap()
    };
    let small = run(20_000);
    let large = run(40_000);
    let se = 1.2533 * small.std_dev / (20_000f64).sqrt();
    assert!(
        (small.median - large.median).abs() < 3.0 * se,
        "{} vs {}",
        small.median,
        large.median
    );
}
