//! Experiment configuration: a JSON document with one graph source, an
//! optional filter and optional per-task blocks.

use std::path::{Path, PathBuf};

use lowpass_gsp::FilterSpec;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSource {
    /// Adjacency CSV; relative paths resolve against the config file.
    File(PathBuf),
    Sbm {
        n: usize,
        k: usize,
        a: f64,
        b: f64,
    },
    /// Expected adjacency of the block model (weighted, deterministic).
    ExpectedSbm {
        n: usize,
        k: usize,
        a: f64,
        b: f64,
    },
    ErdosRenyi {
        n: usize,
        p: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemporalConfig {
    #[serde(default)]
    pub ar: Vec<FilterSpec>,
    pub ma: Vec<FilterSpec>,
    /// Number of time steps.
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
    pub ns: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommunityMethod {
    /// k-means on the bottom eigenvectors of the configured graph.
    Spectral,
    /// k-means on the top eigenvectors of the signals' sample covariance.
    Blind,
}

fn default_restarts() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommunitiesConfig {
    pub method: CommunityMethod,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    /// Subtract each node's mean before forming the covariance.
    #[serde(default)]
    pub center: bool,
}

fn default_learn_sigma() -> f64 {
    0.1
}
fn default_beta_reg() -> f64 {
    0.5
}
fn default_max_iter() -> usize {
    50
}
fn default_learn_tol() -> f64 {
    1e-6
}
fn default_inner_iter() -> usize {
    2000
}
fn default_edge_threshold() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearningConfig {
    #[serde(default = "default_learn_sigma")]
    pub sigma: f64,
    #[serde(default = "default_beta_reg")]
    pub beta_reg: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_learn_tol")]
    pub tol: f64,
    #[serde(default = "default_inner_iter")]
    pub inner_iter: usize,
    /// Relative weight threshold when scoring edge support against the graph.
    #[serde(default = "default_edge_threshold")]
    pub edge_threshold: f64,
}

fn default_interp_tol() -> f64 {
    1e-8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterpolationConfig {
    pub gamma: f64,
    #[serde(default = "default_interp_tol")]
    pub tol: f64,
}

fn default_quantile() -> f64 {
    0.95
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnomalyConfig {
    #[serde(default = "default_quantile")]
    pub quantile: f64,
    /// Entry threshold for localization; no localization file when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entry_threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub graph: GraphSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter: Option<FilterSpec>,
    /// Number of signals to generate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// Additive noise level for generation.
    #[serde(default)]
    pub sigma: f64,
    /// Bandwidth, which is also the number of communities.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temporal: Option<TemporalConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling: Option<SamplingConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub communities: Option<CommunitiesConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learning: Option<LearningConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interpolation: Option<InterpolationConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anomaly: Option<AnomalyConfig>,
}

fn pointer_of(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    if out.is_empty() {
        out.push('/');
    }
    out
}

impl ExperimentConfig {
    /// Parses and validates a config document.
    pub fn from_json(text: &str) -> CliResult<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let pointer = pointer_of(e.path());
            CliError::config(pointer, format!("invalid config: {}", e.into_inner()))
        })?;
        config.validate()?;
        Ok(config)
    }

    /// Reads a config file and resolves relative graph paths against its directory.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut config = Self::from_json(&text)?;
        if let GraphSource::File(p) = &mut config.graph {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.m == Some(0) {
            return Err(CliError::config("/m", "m must be at least 1"));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(CliError::config(
                "/sigma",
                "sigma must be a nonnegative number",
            ));
        }
        if self.k == Some(0) {
            return Err(CliError::config("/k", "k must be at least 1"));
        }
        match &self.graph {
            GraphSource::Sbm { n, k, .. } | GraphSource::ExpectedSbm { n, k, .. } => {
                if *k == 0 || *n == 0 || n % k != 0 {
                    return Err(CliError::config(
                        "/graph",
                        "block model needs k >= 1 dividing n >= 1",
                    ));
                }
            }
            GraphSource::ErdosRenyi { n, p } => {
                if *n == 0 || !(0.0..=1.0).contains(p) {
                    return Err(CliError::config(
                        "/graph/erdos_renyi",
                        "needs n >= 1 and p in [0, 1]",
                    ));
                }
            }
            GraphSource::File(_) => {}
        }
        if let Some(f) = &self.filter {
            f.validate()
                .map_err(|e| CliError::config("/filter", e.to_string()))?;
        }
        if let Some(t) = &self.temporal {
            if t.steps == 0 {
                return Err(CliError::config(
                    "/temporal/steps",
                    "steps must be at least 1",
                ));
            }
            if t.ma.is_empty() {
                return Err(CliError::config(
                    "/temporal/ma",
                    "at least one moving-average tap is required",
                ));
            }
        }
        if let Some(s) = &self.sampling {
            if s.ns == 0 {
                return Err(CliError::config("/sampling/ns", "ns must be at least 1"));
            }
        }
        if let Some(c) = &self.communities {
            if c.restarts == 0 {
                return Err(CliError::config(
                    "/communities/restarts",
                    "restarts must be at least 1",
                ));
            }
        }
        if let Some(l) = &self.learning {
            if !(l.sigma > 0.0) {
                return Err(CliError::config(
                    "/learning/sigma",
                    "sigma must be positive",
                ));
            }
            if !(l.beta_reg >= 0.0) {
                return Err(CliError::config(
                    "/learning/beta_reg",
                    "beta_reg must be nonnegative",
                ));
            }
            if l.max_iter == 0 {
                return Err(CliError::config(
                    "/learning/max_iter",
                    "max_iter must be at least 1",
                ));
            }
        }
        if let Some(i) = &self.interpolation {
            if !(i.gamma >= 0.0) {
                return Err(CliError::config(
                    "/interpolation/gamma",
                    "gamma must be nonnegative",
                ));
            }
            if !(i.tol > 0.0) {
                return Err(CliError::config(
                    "/interpolation/tol",
                    "tol must be positive",
                ));
            }
        }
        if let Some(a) = &self.anomaly {
            if !(a.quantile > 0.0 && a.quantile <= 1.0) {
                return Err(CliError::config(
                    "/anomaly/quantile",
                    "quantile must lie in (0, 1]",
                ));
            }
            if a.entry_threshold.is_some_and(|t| !(t >= 0.0)) {
                return Err(CliError::config(
                    "/anomaly/entry_threshold",
                    "entry_threshold must be nonnegative",
                ));
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        hex(&Sha256::digest(
            serde_json::to_vec(self).expect("config serializes"),
        ))
    }

    /// Seed for a named random stream, independent of the other streams.
    pub fn stream_seed(&self, name: &str) -> u64 {
        let mut h = Sha256::new();
        h.update(self.seed.to_le_bytes());
        h.update(name.as_bytes());
        let digest = h.finalize();
        u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
    }

    pub fn require_filter(&self) -> CliResult<&FilterSpec> {
        self.filter
            .as_ref()
            .ok_or_else(|| CliError::config("/filter", "this command needs a filter"))
    }

    pub fn require_k(&self) -> CliResult<usize> {
        self.k
            .ok_or_else(|| CliError::config("/k", "this command needs the bandwidth k"))
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
