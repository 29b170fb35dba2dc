//! One function per subcommand. Each reads its inputs, runs a single library
//! pipeline and writes its outputs into the run directory, returning the
//! names of the files it wrote.

use std::path::{Path, PathBuf};

use lowpass_gsp::anomaly::{calibrate_threshold, detect, hpf_statistics, localize};
use lowpass_gsp::filters::{apply_spectral, frequency_response, low_pass_ratio};
use lowpass_gsp::graph::{
    erdos_renyi_sample, expected_laplacian_sbm, sbm_ppm_sample, BlockModel, Graph,
};
use lowpass_gsp::io;
use lowpass_gsp::learning::{
    accuracy, blind_cd, center_signals, edge_support_f1, interpolate_time_vertex,
    interpolation_objective, learn_topology, spectral_clustering, TopologyOptions,
};
use lowpass_gsp::processes::sample_lowpass_signals;
use lowpass_gsp::sampling::{
    build_interpolator, greedy_select, reconstruct_matrix, SamplingPlanSpec,
};
use lowpass_gsp::spectral::{eigendecompose, SpectralBasis};
use lowpass_gsp::temporal::{simulate_gfarma, GfArmaSpec};
use lowpass_gsp::{FilterSpec, GspError};
use nalgebra::DMatrix;
use serde::Serialize;

use crate::config::{CommunityMethod, ExperimentConfig, GraphSource, TemporalConfig};
use crate::error::{CliError, CliResult};
use crate::manifest::write_json;

/// Input files named on the command line.
#[derive(Debug, Default, Clone)]
pub struct Inputs {
    pub signals: Option<PathBuf>,
    pub mask: Option<PathBuf>,
    pub plan: Option<PathBuf>,
    pub samples: Option<PathBuf>,
    pub train: Option<PathBuf>,
    pub membership: Option<PathBuf>,
}

impl Inputs {
    /// `(flag, path)` pairs for every input given, config graph file included.
    pub fn listed(&self, config: &ExperimentConfig) -> Vec<(String, PathBuf)> {
        let mut out = Vec::new();
        if let GraphSource::File(p) = &config.graph {
            out.push(("graph".to_string(), p.clone()));
        }
        let named = [
            ("signals", &self.signals),
            ("mask", &self.mask),
            ("plan", &self.plan),
            ("samples", &self.samples),
            ("train", &self.train),
            ("membership", &self.membership),
        ];
        for (name, path) in named {
            if let Some(p) = path {
                out.push((name.to_string(), p.clone()));
            }
        }
        out
    }
}

fn required<'a>(path: &'a Option<PathBuf>, flag: &str) -> CliResult<&'a Path> {
    path.as_deref()
        .ok_or_else(|| CliError::usage(format!("this command needs --{flag} <path>")))
}

fn open_err(path: &Path, e: GspError) -> CliError {
    match e {
        GspError::Io(io) => CliError::usage(format!("cannot read {}: {io}", path.display())),
        other => other.into(),
    }
}

fn read_matrix(path: &Path) -> CliResult<DMatrix<f64>> {
    io::read_matrix_file(path).map_err(|e| open_err(path, e))
}

fn write_err(path: &Path, e: GspError) -> CliError {
    match e {
        GspError::Io(io) => CliError::usage(format!("cannot write {}: {io}", path.display())),
        other => other.into(),
    }
}

/// Writes one output file through `f`, recording its name.
fn emit(
    out: &Path,
    name: &str,
    written: &mut Vec<String>,
    f: impl FnOnce(&Path) -> lowpass_gsp::Result<()>,
) -> CliResult<()> {
    let path = out.join(name);
    f(&path).map_err(|e| write_err(&path, e))?;
    written.push(name.to_string());
    Ok(())
}

fn emit_json<T: Serialize>(
    out: &Path,
    name: &str,
    written: &mut Vec<String>,
    value: &T,
) -> CliResult<()> {
    write_json(&out.join(name), value)?;
    written.push(name.to_string());
    Ok(())
}

/// The configured graph, plus planted labels for block models.
pub fn build_graph(config: &ExperimentConfig) -> CliResult<(Graph, Option<Vec<usize>>)> {
    let seed = config.stream_seed("graph");
    Ok(match &config.graph {
        GraphSource::File(p) => (
            io::read_adjacency_file(p).map_err(|e| open_err(p, e))?,
            None,
        ),
        GraphSource::Sbm { n, k, a, b } => {
            let model = BlockModel::new(*n, *k, *a, *b)?;
            (sbm_ppm_sample(&model, seed), Some(model.membership()))
        }
        GraphSource::ExpectedSbm { n, k, a, b } => {
            let model = BlockModel::new(*n, *k, *a, *b)?;
            let graph = Graph::new(expected_laplacian_sbm(&model).adjacency())?;
            (graph, Some(model.membership()))
        }
        GraphSource::ErdosRenyi { n, p } => (erdos_renyi_sample(*n, *p, seed)?, None),
    })
}

fn basis_of(graph: &Graph) -> CliResult<SpectralBasis> {
    Ok(eigendecompose(&graph.laplacian())?)
}

fn check_band(k: usize, n: usize) -> CliResult<()> {
    if k > n {
        return Err(CliError::config(
            "/k",
            format!("k = {k} exceeds the number of nodes {n}"),
        ));
    }
    Ok(())
}

#[derive(Serialize)]
struct GenerationMetadata<'a> {
    seed: u64,
    n: usize,
    columns: usize,
    sigma: f64,
    graph: &'a GraphSource,
    filter: Option<&'a FilterSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    temporal: Option<&'a TemporalConfig>,
    excitation_seed: u64,
    noise_seed: u64,
}

pub fn generate(config: &ExperimentConfig, out: &Path) -> CliResult<Vec<String>> {
    let (graph, membership) = build_graph(config)?;
    let basis = basis_of(&graph)?;
    let n = graph.n();
    let excitation_seed = config.stream_seed("excitation");
    let noise_seed = config.stream_seed("noise");
    let mut written = Vec::new();
    emit(out, "adjacency.csv", &mut written, |p| {
        io::write_adjacency_file(p, &graph)
    })?;
    if let Some(labels) = &membership {
        emit(out, "membership.csv", &mut written, |p| {
            io::write_assignment_file(p, labels)
        })?;
    }
    let white = |cols: usize, seed: u64, sigma: f64, spec: &FilterSpec| {
        sample_lowpass_signals(&basis, spec, cols, sigma, seed)
    };
    let columns;
    match &config.temporal {
        Some(t) => {
            let lambdas = basis.lambdas().as_slice().to_vec();
            let spec = GfArmaSpec::new(t.ar.clone(), t.ma.clone(), &lambdas)?;
            let x = white(t.steps, excitation_seed, 0.0, &FilterSpec::identity())?;
            let mut y = simulate_gfarma(&basis, &spec, &x)?;
            if config.sigma > 0.0 {
                y += white(t.steps, noise_seed, 1.0, &FilterSpec::zero())? * config.sigma;
            }
            columns = t.steps;
            emit(out, "trajectory.csv", &mut written, |p| {
                io::write_trajectory_file(p, &y)
            })?;
        }
        None => {
            let filter = config.require_filter()?;
            let m = config
                .m
                .ok_or_else(|| CliError::config("/m", "generate needs the number of signals m"))?;
            let x = white(m, excitation_seed, 0.0, &FilterSpec::identity())?;
            let mut y = apply_spectral(&basis, filter, &x)?;
            if config.sigma > 0.0 {
                y += white(m, noise_seed, 1.0, &FilterSpec::zero())? * config.sigma;
            }
            columns = m;
            emit(out, "signals.csv", &mut written, |p| {
                io::write_matrix_file(p, &y)
            })?;
        }
    }
    let meta = GenerationMetadata {
        seed: config.seed,
        n,
        columns,
        sigma: config.sigma,
        graph: &config.graph,
        filter: config.filter.as_ref(),
        temporal: config.temporal.as_ref(),
        excitation_seed,
        noise_seed,
    };
    let sidecar = if config.temporal.is_some() {
        "trajectory.json"
    } else {
        "signals.json"
    };
    emit_json(out, sidecar, &mut written, &meta)?;
    Ok(written)
}

pub fn spectrum(config: &ExperimentConfig, inputs: &Inputs, out: &Path) -> CliResult<Vec<String>> {
    let (graph, _) = build_graph(config)?;
    let basis = basis_of(&graph)?;
    let lambdas = basis.lambdas().as_slice().to_vec();
    let mut written = Vec::new();
    emit(out, "spectrum.csv", &mut written, |p| {
        io::write_spectrum_file(p, &lambdas)
    })?;
    if let Some(path) = &inputs.signals {
        let y = read_matrix(path)?;
        if y.nrows() != graph.n() {
            return Err(GspError::Dimension {
                expected: graph.n(),
                found: y.nrows(),
            }
            .into());
        }
        let coeffs = basis.vectors().tr_mul(&y);
        let m = coeffs.ncols() as f64;
        let profile = DMatrix::from_fn(lambdas.len(), 3, |i, c| match c {
            0 => i as f64,
            1 => lambdas[i],
            _ => coeffs.row(i).iter().map(|v| v.abs()).sum::<f64>() / m,
        });
        emit(out, "gft.csv", &mut written, |p| {
            write_table(p, &["index", "lambda", "mean_abs_coefficient"], &profile)
        })?;
    }
    Ok(written)
}

fn write_table(path: &Path, header: &[&str], rows: &DMatrix<f64>) -> lowpass_gsp::Result<()> {
    let mut text = header.join(",");
    text.push('\n');
    for row in rows.row_iter() {
        let fields: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        text.push_str(&fields.join(","));
        text.push('\n');
    }
    std::fs::write(path, text)?;
    Ok(())
}

pub fn filter(config: &ExperimentConfig, inputs: &Inputs, out: &Path) -> CliResult<Vec<String>> {
    let spec = config.require_filter()?;
    let (graph, _) = build_graph(config)?;
    let basis = basis_of(&graph)?;
    let lambdas = basis.lambdas().as_slice().to_vec();
    let response = frequency_response(spec, &lambdas)?;
    let table = DMatrix::from_fn(lambdas.len(), 3, |i, c| {
        [i as f64, lambdas[i], response[i]][c]
    });
    let mut written = Vec::new();
    emit(out, "response.csv", &mut written, |p| {
        write_table(p, &["index", "lambda", "response"], &table)
    })?;
    if let Some(path) = &inputs.signals {
        let y = apply_spectral(&basis, spec, &read_matrix(path)?)?;
        emit(out, "filtered.csv", &mut written, |p| {
            io::write_matrix_file(p, &y)
        })?;
    }
    Ok(written)
}

#[derive(Serialize)]
struct RatioReport {
    k: usize,
    /// `null` when the low band contains a zero response.
    eta: f64,
    low_pass: bool,
}

pub fn ratio(config: &ExperimentConfig, out: &Path) -> CliResult<Vec<String>> {
    let spec = config.require_filter()?;
    let k = config.require_k()?;
    let (graph, _) = build_graph(config)?;
    let basis = basis_of(&graph)?;
    let response = frequency_response(spec, basis.lambdas().as_slice())?;
    let eta = low_pass_ratio(&response, k)?;
    let report = RatioReport {
        k,
        eta,
        low_pass: eta < 1.0,
    };
    println!(
        "{}",
        serde_json::to_string(&report).expect("report serializes")
    );
    let mut written = Vec::new();
    emit_json(out, "ratio.json", &mut written, &report)?;
    Ok(written)
}

#[derive(Serialize)]
struct SampleReport {
    k: usize,
    ns: usize,
    sigma_min: f64,
}

pub fn sample(config: &ExperimentConfig, inputs: &Inputs, out: &Path) -> CliResult<Vec<String>> {
    let k = config.require_k()?;
    let ns = config
        .sampling
        .as_ref()
        .ok_or_else(|| CliError::config("/sampling", "sample needs a sampling block"))?
        .ns;
    let (graph, _) = build_graph(config)?;
    check_band(k, graph.n())?;
    if ns > graph.n() {
        return Err(CliError::config(
            "/sampling/ns",
            format!("ns = {ns} exceeds the number of nodes {}", graph.n()),
        ));
    }
    let basis = basis_of(&graph)?;
    let uk = basis.low_band(k);
    let indices = greedy_select(&uk, ns)?;
    let plan = build_interpolator(&uk, &indices)?;
    let mut written = Vec::new();
    emit_json(out, "plan.json", &mut written, &plan.spec())?;
    emit(out, "psi.csv", &mut written, |p| {
        io::write_matrix_file(p, plan.psi())
    })?;
    let report = SampleReport {
        k,
        ns,
        sigma_min: lowpass_gsp::sampling::smallest_singular_value(&uk, &indices),
    };
    emit_json(out, "sample.json", &mut written, &report)?;
    if let Some(path) = &inputs.signals {
        let samples = plan.sample_matrix(&read_matrix(path)?)?;
        emit(out, "samples.csv", &mut written, |p| {
            io::write_matrix_file(p, &samples)
        })?;
    }
    Ok(written)
}

pub fn reconstruct(
    config: &ExperimentConfig,
    inputs: &Inputs,
    out: &Path,
) -> CliResult<Vec<String>> {
    let plan_path = required(&inputs.plan, "plan")?;
    let text = std::fs::read_to_string(plan_path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", plan_path.display())))?;
    let spec: SamplingPlanSpec =
        serde_json::from_str(&text).map_err(|e| GspError::Parse(format!("sampling plan: {e}")))?;
    let samples = read_matrix(required(&inputs.samples, "samples")?)?;
    let (graph, _) = build_graph(config)?;
    check_band(spec.k, graph.n())?;
    let basis = basis_of(&graph)?;
    let plan = build_interpolator(&basis.low_band(spec.k), &spec.indices)?;
    let y = reconstruct_matrix(&plan, &samples)?;
    let mut written = Vec::new();
    emit(out, "reconstructed.csv", &mut written, |p| {
        io::write_matrix_file(p, &y)
    })?;
    Ok(written)
}

#[derive(Serialize)]
struct CommunityReport {
    method: CommunityMethod,
    k: usize,
    objective: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    accuracy: Option<f64>,
}

pub fn communities(
    config: &ExperimentConfig,
    inputs: &Inputs,
    out: &Path,
) -> CliResult<Vec<String>> {
    let k = config.require_k()?;
    let block = config
        .communities
        .as_ref()
        .ok_or_else(|| CliError::config("/communities", "communities needs a communities block"))?;
    let seed = config.stream_seed("kmeans");
    let assignment = match block.method {
        CommunityMethod::Spectral => {
            let (graph, _) = build_graph(config)?;
            check_band(k, graph.n())?;
            spectral_clustering(&graph.laplacian(), k, block.restarts, seed)?
        }
        CommunityMethod::Blind => {
            let mut y = read_matrix(required(&inputs.signals, "signals")?)?;
            check_band(k, y.nrows())?;
            if block.center {
                y = center_signals(&y);
            }
            blind_cd(&y, k, block.restarts, seed)?
        }
    };
    let accuracy = match &inputs.membership {
        Some(p) => {
            let truth = io::read_assignment_file(p).map_err(|e| open_err(p, e))?;
            Some(accuracy(&truth, &assignment.labels)?)
        }
        None => None,
    };
    let mut written = Vec::new();
    emit(out, "assignments.csv", &mut written, |p| {
        io::write_assignment_file(p, &assignment.labels)
    })?;
    let report = CommunityReport {
        method: block.method,
        k,
        objective: assignment.objective,
        accuracy,
    };
    emit_json(out, "communities.json", &mut written, &report)?;
    Ok(written)
}

#[derive(Serialize)]
struct LearnReport {
    history: Vec<f64>,
    warnings: Vec<String>,
    /// Edge-support F1 against the configured graph.
    edge_f1: f64,
}

pub fn learn_graph(
    config: &ExperimentConfig,
    inputs: &Inputs,
    out: &Path,
) -> CliResult<Vec<String>> {
    let block = config
        .learning
        .as_ref()
        .ok_or_else(|| CliError::config("/learning", "learn-graph needs a learning block"))?;
    let y = read_matrix(required(&inputs.signals, "signals")?)?;
    let options = TopologyOptions {
        sigma: block.sigma,
        beta_reg: block.beta_reg,
        max_iter: block.max_iter,
        tol: block.tol,
        inner_iter: block.inner_iter,
    };
    let learned = learn_topology(&y, &options)?;
    let (graph, _) = build_graph(config)?;
    let edge_f1 = edge_support_f1(&learned.adjacency(), graph.weights(), block.edge_threshold)?;
    let mut written = Vec::new();
    emit(out, "laplacian.csv", &mut written, |p| {
        io::write_matrix_file(p, learned.matrix())
    })?;
    let report = LearnReport {
        history: learned.history.clone(),
        warnings: learned.warnings.clone(),
        edge_f1,
    };
    emit_json(out, "learn.json", &mut written, &report)?;
    Ok(written)
}

#[derive(Serialize)]
struct InterpolationReport {
    iterations: usize,
    gradient_norm: f64,
    objective: f64,
}

pub fn interpolate(
    config: &ExperimentConfig,
    inputs: &Inputs,
    out: &Path,
) -> CliResult<Vec<String>> {
    let block = config.interpolation.as_ref().ok_or_else(|| {
        CliError::config("/interpolation", "interpolate needs an interpolation block")
    })?;
    let path = required(&inputs.signals, "signals")?;
    let y = io::read_trajectory_file(path).map_err(|e| open_err(path, e))?;
    let mask_path = required(&inputs.mask, "mask")?;
    let mask = io::read_mask_file(mask_path).map_err(|e| open_err(mask_path, e))?;
    if mask.shape() != y.shape() {
        return Err(GspError::Validation(format!(
            "mask is {}x{} but trajectory is {}x{}",
            mask.nrows(),
            mask.ncols(),
            y.nrows(),
            y.ncols()
        ))
        .into());
    }
    let y_samp = y.zip_map(&mask.map(|b| if b { 1.0 } else { 0.0 }), |v, m| v * m);
    let (graph, _) = build_graph(config)?;
    let l = graph.laplacian();
    let result = interpolate_time_vertex(&y_samp, &mask, &l, block.gamma, block.tol)?;
    let objective = interpolation_objective(&result.signals, &y_samp, &mask, &l, block.gamma);
    let mut written = Vec::new();
    emit(out, "interpolated.csv", &mut written, |p| {
        io::write_trajectory_file(p, &result.signals)
    })?;
    let report = InterpolationReport {
        iterations: result.iterations,
        gradient_norm: result.gradient_norm,
        objective,
    };
    emit_json(out, "interpolate.json", &mut written, &report)?;
    Ok(written)
}

#[derive(Serialize)]
struct DetectReport {
    k: usize,
    quantile: f64,
    threshold: f64,
    anomalies: usize,
}

pub fn detect_anomalies(
    config: &ExperimentConfig,
    inputs: &Inputs,
    out: &Path,
) -> CliResult<Vec<String>> {
    let k = config.require_k()?;
    let block = config
        .anomaly
        .as_ref()
        .ok_or_else(|| CliError::config("/anomaly", "detect needs an anomaly block"))?;
    let train = read_matrix(required(&inputs.train, "train")?)?;
    let y = read_matrix(required(&inputs.signals, "signals")?)?;
    let (graph, _) = build_graph(config)?;
    let basis = basis_of(&graph)?;
    let threshold = calibrate_threshold(&basis, k, &train, block.quantile)?;
    let results = hpf_statistics(&basis, k, &y)?
        .into_iter()
        .map(|s| detect(s, threshold))
        .collect::<lowpass_gsp::Result<Vec<_>>>()?;
    let mut written = Vec::new();
    emit(out, "detections.csv", &mut written, |p| {
        io::write_detections_file(p, &results)
    })?;
    if let Some(entry) = block.entry_threshold {
        let flagged = y
            .column_iter()
            .map(|c| localize(&basis, k, &c.into_owned(), entry))
            .collect::<lowpass_gsp::Result<Vec<_>>>()?;
        emit(out, "localization.csv", &mut written, |p| {
            io::write_localization_file(p, &flagged)
        })?;
    }
    let anomalies = results
        .iter()
        .filter(|r| r.decision == lowpass_gsp::anomaly::Hypothesis::Anomaly)
        .count();
    let report = DetectReport {
        k,
        quantile: block.quantile,
        threshold,
        anomalies,
    };
    emit_json(out, "detect.json", &mut written, &report)?;
    Ok(written)
}
