mod common;

use common::*;
use lowpass_gsp::filters::FilterSpec;
use lowpass_gsp::graph::*;
use lowpass_gsp::spectral::*;
use lowpass_gsp::temporal::*;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random GF-ARMA spec with small polynomial taps, redrawn until stable.
fn random_stable_spec(lambdas: &[f64], seed: u64) -> GfArmaSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lmax = lambdas[lambdas.len() - 1].max(1.0);
    loop {
        let q = rng.random_range(0..=2);
        let r = rng.random_range(0..=2);
        let tap = |rng: &mut ChaCha8Rng, scale: f64| FilterSpec::Polynomial {
            coeffs: vec![
                rng.random_range(-scale..scale),
                rng.random_range(-scale..scale) / lmax,
            ],
        };
        let ar: Vec<_> = (0..q).map(|_| tap(&mut rng, 0.45)).collect();
        let ma: Vec<_> = (0..=r).map(|_| tap(&mut rng, 1.0)).collect();
        if let Ok(spec) = GfArmaSpec::new(ar, ma, lambdas) {
            return spec;
        }
    }
}

#[test]
fn impulse_response_dft_matches_transfer_function() {
    let horizon = 2048;
    for seed in 0..4 {
        let g = random_graph(8, 0.5, seed);
        let b = eigendecompose(&g.laplacian()).unwrap();
        let spec = random_stable_spec(b.lambdas().as_slice(), seed + 10);
        for i in [0, 3, 7] {
            let mut x = DMatrix::zeros(8, horizon);
            x.set_column(0, &b.vectors().column(i));
            let y = simulate_gfarma(&b, &spec, &x).unwrap();
            let response: Vec<f64> = (0..horizon)
                .map(|t| b.vectors().column(i).dot(&y.column(t)))
                .collect();
            for m in (0..horizon).step_by(97) {
                let w = std::f64::consts::TAU * m as f64 / horizon as f64;
                let dft: Complex64 = response
                    .iter()
                    .enumerate()
                    .map(|(t, h)| Complex64::from_polar(*h, -w * t as f64))
                    .sum();
                let expected =
                    joint_transfer(&spec, b.lambdas()[i], Complex64::from_polar(1.0, w)).unwrap();
                assert!(
                    (dft - expected).norm() <= 1e-6,
                    "seed {seed} i {i} m {m}: {dft} vs {expected}"
                );
            }
        }
    }
}

#[test]
fn opinion_spec_reproduces_recursion() {
    let g = random_graph(12, 0.4, 5);
    let l = g.laplacian();
    let b = eigendecompose(&l).unwrap();
    let (alpha, beta) = (0.8 / b.lambda_max(), 0.3);
    let spec = GfArmaSpec::opinion(alpha, beta, b.lambdas().as_slice()).unwrap();
    let x0 = gaussian_vector(12, 6);
    let horizon = 25;
    let x = DMatrix::from_fn(12, horizon, |i, _| x0[i]);
    let y = simulate_gfarma(&b, &spec, &x).unwrap();
    for t in 0..horizon {
        let recursion = iterate_opinion(&l, alpha, beta, &x0, t + 1).unwrap();
        assert!((y.column(t) - recursion).amax() <= 1e-12);
    }
}

#[test]
fn moving_average_diffusion_matches_convolution() {
    let g = random_graph(10, 0.5, 8);
    let l = g.laplacian();
    let b = eigendecompose(&l).unwrap();
    let sigma = 0.4;
    let r = 3;
    let mut ma = vec![FilterSpec::identity()];
    ma.extend((1..=r).map(|s| FilterSpec::Diffusion {
        t_sigma: s as f64 * sigma,
    }));
    let spec = GfArmaSpec::new(vec![], ma, b.lambdas().as_slice()).unwrap();
    let x = gaussian_matrix(10, 12, 9);
    let y = simulate_gfarma(&b, &spec, &x).unwrap();
    for t in 0..12 {
        let mut expected = DVector::zeros(10);
        for s in 0..=r.min(t) {
            expected += expm_neg(l.matrix(), s as f64 * sigma) * x.column(t - s);
        }
        assert!((y.column(t) - expected).amax() <= 1e-10);
    }
}

#[test]
fn steady_state_is_long_horizon_limit() {
    let g = random_graph(15, 0.3, 12);
    let l = g.laplacian();
    let b = eigendecompose(&l).unwrap();
    let (alpha, beta) = (0.5 / b.lambda_max(), 0.2);
    let spec = GfArmaSpec::opinion(alpha, beta, b.lambdas().as_slice()).unwrap();
    // every pole has modulus at most 1 − β
    let horizon = ((1e-10f64).ln() / (1.0 - beta).ln()).ceil() as usize;
    let x0 = gaussian_vector(15, 13);
    let x = DMatrix::from_fn(15, horizon, |i, _| x0[i]);
    let y = simulate_gfarma(&b, &spec, &x).unwrap();
    let fixed = steady_state(&l, alpha, beta, &x0).unwrap();
    assert!((y.column(horizon - 1) - &fixed).amax() <= 1e-8);
    let resolvent = lowpass_gsp::filters::apply_spectral(
        &b,
        &FilterSpec::Resolvent {
            alpha: opinion_resolvent_alpha(alpha, beta),
        },
        &DMatrix::from_column_slice(15, 1, x0.as_slice()),
    )
    .unwrap();
    assert!((resolvent.column(0) - fixed).amax() <= 1e-10);
}

#[test]
fn opinion_spec_is_temporally_low_pass_on_sbm() {
    let g = sbm_ppm_sample(&BlockModel::new(40, 4, 0.45, 0.05).unwrap(), 2);
    let b = eigendecompose(&g.laplacian()).unwrap();
    let spec = GfArmaSpec::opinion(0.5 / b.lambda_max(), 0.5, b.lambdas().as_slice()).unwrap();
    // The high band (ω₀, 2π) reaches up to 2π ≡ 0, so only a narrow low band
    // can dominate it.
    let eta = temporal_lowpass_ratio(&spec, 4, 0.05, 256).unwrap();
    assert!(eta < 1.0, "eta = {eta}");
    assert!(temporal_lowpass_ratio(&spec, 4, 1.0, 256).unwrap() > 1.0);
}

#[test]
fn grid_refinement_converges() {
    for seed in 0..5 {
        let g = random_graph(10, 0.5, seed + 30);
        let b = eigendecompose(&g.laplacian()).unwrap();
        let spec = GfArmaSpec::opinion(0.5 / b.lambda_max(), 0.4, b.lambdas().as_slice()).unwrap();
        let coarse = temporal_lowpass_ratio(&spec, 3, 1.0, 64).unwrap();
        let fine = temporal_lowpass_ratio(&spec, 3, 1.0, 1024).unwrap();
        assert!((coarse - fine).abs() <= 0.05 * fine, "{coarse} vs {fine}");
    }
}

#[test]
fn marginal_pole_is_rejected() {
    let g = random_graph(6, 0.6, 1);
    let b = eigendecompose(&g.laplacian()).unwrap();
    let lam = b.lambdas().as_slice();
    let unit = GfArmaSpec::new(
        vec![FilterSpec::identity()],
        vec![FilterSpec::identity()],
        lam,
    );
    assert!(matches!(unit, Err(lowpass_gsp::GspError::Instability(_))));
}
