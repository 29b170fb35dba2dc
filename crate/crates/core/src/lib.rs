//! Low-pass graph signal processing.
//!
//! Building blocks for working with graph signals generated by low-pass
//! graph filters:
//!
//! - [`graph`]: weighted undirected graphs, Laplacians, SBM and Erdős–Rényi
//!   generators.
//! - [`spectral`]: Laplacian eigendecomposition, graph Fourier transform,
//!   quadratic form.
//! - [`filters`]: polynomial and spectral graph filters, low-pass ratio `η_k`.
//! - [`temporal`]: GF-ARMA graph-temporal filters and their transfer functions.
//! - [`processes`]: synthetic low-pass signal generation and covariances.
//! - [`sampling`]: greedy sampling sets and bandlimited reconstruction.
//! - [`learning`]: spectral and blind community detection, Laplacian learning,
//!   time-vertex interpolation.
//! - [`anomaly`]: high-pass detectors and localization.
//! - [`io`]: CSV and JSON file formats.
//!
//! Matrices are dense [`nalgebra::DMatrix`] values. Every random routine takes
//! an explicit seed.

pub mod anomaly;
pub mod error;
pub mod filters;
pub mod graph;
pub mod io;
pub mod learning;
pub mod processes;
pub mod sampling;
pub mod spectral;
pub mod temporal;

pub use error::{GspError, Result};
pub use filters::FilterSpec;
pub use graph::{BlockModel, Graph, Laplacian};
pub use processes::{CovarianceModel, SignalMatrix};
pub use spectral::SpectralBasis;

pub use nalgebra;

/// Version of this library, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
