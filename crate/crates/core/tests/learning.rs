mod common;

use common::*;
use lowpass_gsp::filters::FilterSpec;
use lowpass_gsp::graph::*;
use lowpass_gsp::learning::*;
use lowpass_gsp::processes::sample_lowpass_signals;
use lowpass_gsp::spectral::*;
use lowpass_gsp::temporal::{simulate_gfarma, GfArmaSpec};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sbm() -> BlockModel {
    BlockModel::new(200, 4, 0.45, 0.05).unwrap()
}

#[test]
fn spectral_clustering_on_sampled_sbm() {
    let model = sbm();
    let truth = model.membership();
    for seed in 0..10 {
        let g = sbm_ppm_sample(&model, seed);
        let a = spectral_clustering(&g.laplacian(), 4, 10, seed).unwrap();
        let acc = accuracy(&truth, &a.labels).unwrap();
        assert!(acc >= 0.95, "seed {seed}: accuracy {acc}");
    }
}

#[test]
fn blind_cd_with_exact_covariance_matches_spectral_clustering() {
    let model = BlockModel::new(40, 4, 0.3, 0.1).unwrap();
    let l = expected_laplacian_sbm(&model);
    let b = eigendecompose(&l).unwrap();
    // columns of U·diag(h) have sample covariance U h² Uᵀ up to scale
    let h: Vec<f64> = (0..40).map(|i| if i < 4 { 1.0 } else { 0.0 }).collect();
    let mut y = b.vectors().clone();
    for (mut col, &v) in y.column_iter_mut().zip(&h) {
        col *= v;
    }
    let blind = blind_cd(&y, 4, 10, 1).unwrap();
    let sc = spectral_clustering(&l, 4, 10, 1).unwrap();
    assert_eq!(accuracy(&sc.labels, &blind.labels).unwrap(), 1.0);
    assert_eq!(accuracy(&model.membership(), &sc.labels).unwrap(), 1.0);
}

#[test]
fn blind_cd_recovers_blocks_with_mild_diffusion() {
    // With tσ = 0.1 the block eigenvectors keep response e^{−0.1·λ} ≈ 0.37,
    // well above the noise level σ = 0.1.
    let model = sbm();
    let truth = model.membership();
    let mut passed = 0;
    for seed in 0..10 {
        let g = sbm_ppm_sample(&model, seed);
        let b = eigendecompose(&g.laplacian()).unwrap();
        let y = sample_lowpass_signals(
            &b,
            &FilterSpec::Diffusion { t_sigma: 0.1 },
            2000,
            0.1,
            1000 + seed,
        )
        .unwrap();
        let a = blind_cd(&y, 4, 10, seed).unwrap();
        if accuracy(&truth, &a.labels).unwrap() >= 0.95 {
            passed += 1;
        }
    }
    assert!(passed >= 9, "{passed} of 10 seeds reached 0.95");
}

#[test]
fn more_restarts_never_hurt() {
    let rows = gaussian_matrix(60, 3, 4);
    let mut last = f64::INFINITY;
    for restarts in 1..=8 {
        let obj = kmeans(&rows, 5, restarts, 11).unwrap().objective;
        assert!(obj <= last + 1e-12, "restarts {restarts}: {obj} > {last}");
        last = obj;
    }
}

#[test]
fn kmeans_single_cluster_objective() {
    let rows = gaussian_matrix(25, 2, 7);
    let a = kmeans(&rows, 1, 3, 0).unwrap();
    let mean = rows.row_mean();
    let dispersion: f64 = rows
        .row_iter()
        .map(|r| (r - &mean).norm_squared())
        .sum::<f64>()
        .sqrt();
    assert!((a.objective - dispersion).abs() <= 1e-10);
}

fn connected_er(n: usize, p: f64, seed: u64) -> Graph {
    let mut s = seed;
    loop {
        let g = erdos_renyi_sample(n, p, s).unwrap();
        if g.is_connected() {
            return g;
        }
        s += 1000;
    }
}

#[test]
fn topology_iterates_are_feasible_and_objective_decreases() {
    let g = connected_er(12, 0.3, 2);
    let b = eigendecompose(&g.laplacian()).unwrap();
    let y = sample_lowpass_signals(&b, &FilterSpec::Resolvent { alpha: 1.0 }, 200, 0.1, 3).unwrap();
    let base = TopologyOptions {
        sigma: 0.1,
        beta_reg: 0.05,
        max_iter: 1,
        tol: 0.0,
        inner_iter: 500,
    };
    let mut previous_history: Vec<f64> = Vec::new();
    for iters in 1..=5 {
        let learned = learn_topology(
            &y,
            &TopologyOptions {
                max_iter: iters,
                ..base
            },
        )
        .unwrap();
        let l = learned.matrix();
        assert!((l.trace() - 12.0).abs() <= 1e-9);
        assert!((l - l.transpose()).amax() <= 1e-12);
        for i in 0..12 {
            assert!(l.row(i).sum().abs() <= 1e-9);
            for j in 0..12 {
                if i != j {
                    assert!(l[(i, j)] <= 1e-12);
                }
            }
        }
        for w in learned.history.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "{:?}", learned.history);
        }
        // the solver is deterministic, so shorter runs are prefixes
        assert_eq!(
            &learned.history[..previous_history.len()],
            &previous_history[..]
        );
        previous_history = learned.history.clone();
    }
}

#[test]
fn topology_finds_the_support_of_a_smooth_graph() {
    let g = connected_er(20, 0.25, 5);
    let b = eigendecompose(&g.laplacian()).unwrap();
    let y =
        sample_lowpass_signals(&b, &FilterSpec::Resolvent { alpha: 1.0 }, 1000, 0.1, 6).unwrap();
    let options = TopologyOptions {
        sigma: 0.1,
        beta_reg: 0.01,
        ..Default::default()
    };
    let learned = learn_topology(&y, &options).unwrap();
    let f1 = edge_support_f1(&learned.adjacency(), g.weights(), 0.1).unwrap();
    assert!(f1 >= 0.8, "F1 = {f1}");
}

fn random_mask(n: usize, t: usize, hidden: f64, seed: u64) -> Mask {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(n, t, |_, _| rng.random::<f64>() >= hidden)
}

#[test]
fn interpolation_is_never_worse_than_zero_fill() {
    for seed in 0..20 {
        let g = random_graph(8, 0.4, seed);
        let l = g.laplacian();
        let y = gaussian_matrix(8, 6, seed + 1);
        let mask = random_mask(8, 6, 0.4, seed + 2);
        let y_samp = y.zip_map(&mask, |v, m| if m { v } else { 0.0 });
        let gamma = 0.01 + seed as f64 * 0.2;
        let r = interpolate_time_vertex(&y_samp, &mask, &l, gamma, 1e-10).unwrap();
        let solved = interpolation_objective(&r.signals, &y_samp, &mask, &l, gamma);
        let trivial = interpolation_objective(&y_samp, &y_samp, &mask, &l, gamma);
        assert!(solved <= trivial + 1e-12);
        assert!(r.gradient_norm <= 1e-10);
    }
}

#[test]
fn constant_truth_is_recovered_exactly() {
    let g = random_graph(15, 0.3, 1);
    let l = g.laplacian();
    let truth = DMatrix::from_element(15, 20, 3.25);
    let mask = random_mask(15, 20, 0.5, 3);
    let y_samp = truth.zip_map(&mask, |v, m| if m { v } else { 0.0 });
    let r = interpolate_time_vertex(&y_samp, &mask, &l, 0.5, 1e-10).unwrap();
    assert!((r.signals - truth).amax() <= 1e-6);
}

#[test]
fn smooth_trajectory_interpolation() {
    let model = BlockModel::new(50, 5, 0.45, 0.05).unwrap();
    let g = sbm_ppm_sample(&model, 0);
    let l = g.laplacian();
    let b = eigendecompose(&l).unwrap();
    let a1 = FilterSpec::Polynomial {
        coeffs: vec![0.99, -0.99 * 0.5 / b.lambda_max()],
    };
    let spec = GfArmaSpec::new(
        vec![a1],
        vec![FilterSpec::Diffusion { t_sigma: 2.0 }],
        b.lambdas().as_slice(),
    )
    .unwrap();
    let x = sample_lowpass_signals(&b, &FilterSpec::identity(), 100, 0.0, 4).unwrap();
    let y = simulate_gfarma(&b, &spec, &x).unwrap();
    let mask = random_mask(50, 100, 0.3, 5);
    let y_samp = y.zip_map(&mask, |v, m| if m { v } else { 0.0 });
    let r = interpolate_time_vertex(&y_samp, &mask, &l, 0.01, 1e-8).unwrap();
    let (mut num, mut den) = (0.0, 0.0);
    for ((est, truth), observed) in r.signals.iter().zip(y.iter()).zip(mask.iter()) {
        if !observed {
            num += (est - truth).powi(2);
            den += truth.powi(2);
        }
    }
    let err = (num / den).sqrt();
    assert!(err <= 0.2, "masked relative error {err}");
}
