//! Shared fixtures for the acceptance suite: random weighted graphs, Gaussian
//! matrices, robust summaries and a locator for the CLI binary.

use std::path::PathBuf;

use lowpass_gsp::graph::Graph;
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Erdős–Rényi support with edge weights uniform in `[0.1, 2)`.
pub fn random_graph(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Graph {
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
    Graph::new(w).expect("symmetric nonnegative weights")
}

pub fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Path of the `lowpass-gsp` binary built alongside the running test
/// executable (`target/<profile>/deps/<test>` → `target/<profile>/lowpass-gsp`).
pub fn cli_binary() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    let profile_dir = exe.parent()?.parent()?;
    let candidate = profile_dir.join(format!("lowpass-gsp{}", std::env::consts::EXE_SUFFIX));
    candidate.is_file().then_some(candidate)
}
