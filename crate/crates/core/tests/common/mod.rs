#![allow(dead_code)]

use lowpass_gsp::graph::Graph;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Weighted graph on `n` nodes; each pair is an edge with probability `p`
/// and weight uniform in `[0.1, 2]`.
pub fn random_graph(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                let v = rng.random_range(0.1..2.0);
                w[(i, j)] = v;
                w[(j, i)] = v;
            }
        }
    }
    Graph::new(w).unwrap()
}

pub fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

pub fn gaussian_vector(n: usize, seed: u64) -> DVector<f64> {
    gaussian_matrix(n, 1, seed).column(0).into_owned()
}

/// Strategy over small random weighted graphs.
pub fn arb_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (2..=max_n, 0.2f64..0.9, any::<u64>()).prop_map(|(n, p, seed)| random_graph(n, p, seed))
}

/// Strategy over (graph, signal) pairs of matching size.
pub fn arb_graph_signal(max_n: usize) -> impl Strategy<Value = (Graph, DVector<f64>)> {
    arb_graph(max_n).prop_flat_map(|g| {
        let n = g.n();
        (
            Just(g),
            prop::collection::vec(-10.0f64..10.0, n).prop_map(DVector::from_vec),
        )
    })
}

pub fn rel_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

/// Distance between the column spaces of two orthonormal bases.
pub fn subspace_distance(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let pa = a * a.transpose();
    let pb = b * b.transpose();
    (pa - pb).norm()
}

/// `exp(−t·L)` by scaling and squaring of a truncated Taylor series.
pub fn expm_neg(l: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    let a = l * (-t);
    let norm = a.abs().row_sum().max();
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = &a / 2f64.powi(squarings as i32);
    let n = l.nrows();
    let mut term = DMatrix::<f64>::identity(n, n);
    let mut sum = term.clone();
    for p in 1..30 {
        term = &term * &scaled / p as f64;
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}
