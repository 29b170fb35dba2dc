//! Inferring structure from graph signals: community detection with and
//! without the graph, Laplacian learning from smooth signals, and
//! interpolation of partially observed time-vertex data.

mod clustering;
mod interpolation;
mod topology;

pub use clustering::{
    accuracy, blind_cd, center_signals, kmeans, kmeans_objective, sample_covariance,
    spectral_clustering, CommunityAssignment,
};
pub use interpolation::{
    interpolate_time_vertex, interpolation_objective, InterpolationResult, Mask,
};
pub use topology::{edge_support_f1, learn_topology, LearnedLaplacian, TopologyOptions};
