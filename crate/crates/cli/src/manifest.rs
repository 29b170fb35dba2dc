//! Run manifests. `manifest.json` depends only on the config, the inputs and
//! the outputs, so it is byte-identical across reruns; wall-clock data goes to
//! `timings.json`.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{hex, ExperimentConfig};
use crate::error::{CliError, CliResult};

#[derive(Serialize)]
struct FileDigest {
    name: String,
    sha256: String,
}

#[derive(Serialize)]
struct Versions {
    #[serde(rename = "lowpass-gsp")]
    library: &'static str,
    #[serde(rename = "lowpass-gsp-cli")]
    cli: &'static str,
}

#[derive(Serialize)]
struct Manifest<'a> {
    subcommand: &'a str,
    config_sha256: String,
    seed: u64,
    versions: Versions,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
}

#[derive(Serialize)]
struct Timings<'a> {
    subcommand: &'a str,
    elapsed_seconds: f64,
    threads: usize,
}

fn digest_file(path: &Path) -> CliResult<String> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    Ok(hex(&Sha256::digest(bytes)))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("value serializes");
    text.push('\n');
    std::fs::write(path, text)
        .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))
}

pub fn write_run_records(
    out: &Path,
    subcommand: &str,
    config: &ExperimentConfig,
    inputs: &[(String, PathBuf)],
    outputs: &[String],
    elapsed: Duration,
) -> CliResult<()> {
    let inputs = inputs
        .iter()
        .map(|(name, path)| {
            Ok(FileDigest {
                name: name.clone(),
                sha256: digest_file(path)?,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let outputs = outputs
        .iter()
        .map(|name| {
            Ok(FileDigest {
                name: name.clone(),
                sha256: digest_file(&out.join(name))?,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let manifest = Manifest {
        subcommand,
        config_sha256: config.hash(),
        seed: config.seed,
        versions: Versions {
            library: lowpass_gsp::VERSION,
            cli: env!("CARGO_PKG_VERSION"),
        },
        inputs,
        outputs,
    };
    write_json(&out.join("manifest.json"), &manifest)?;
    let timings = Timings {
        subcommand,
        elapsed_seconds: elapsed.as_secs_f64(),
        threads: rayon::current_num_threads(),
    };
    write_json(&out.join("timings.json"), &timings)
}
