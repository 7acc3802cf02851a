//! Scenario runner behind the `twotime` binary.
//!
//! A run executes one scenario (or `all`) from a [`RunConfig`] and writes,
//! under the output root:
//!
//! - `<scenario>/reports.json` and the scenario's CSV/JSON data files;
//! - `config.echo.toml`, the canonical configuration, which re-parses to the
//!   same [`RunConfig`];
//! - `manifest.json`: inputs, artifact hashes, wall times and thread count.
//!
//! Data files carry no timestamps and do not depend on the worker count, so
//! repeated runs with the same configuration are byte-identical; only the
//! manifest changes.

pub mod config;
mod scenarios;

pub use config::RunConfig;
pub use scenarios::{
    emergence_model, list_scenarios, resolve, run_scenario, to_sorted_json, Artifact, ScenarioInfo, ScenarioOutput, ALL,
    SCENARIOS,
};

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use crate::error::{Error, Result};
use crate::report::{Provenance, VerificationReport};

/// Environment variable holding the default output root.
pub const OUTPUT_ENV: &str = "TWOTIME_OUTPUT";
pub const DEFAULT_OUTPUT: &str = "twotime-output";

/// Process exit codes, one per failure class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum ExitStatus {
    Success = 0,
    /// A scenario could not run to completion.
    ScenarioFailure = 1,
    /// The configuration or command line was rejected.
    ParseError = 2,
    /// A scenario ran but an embedded verification failed.
    VerificationFailure = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }

    /// Scenario failures outrank verification failures.
    fn worst(self, other: Self) -> Self {
        let rank = |s: Self| match s {
            Self::Success => 0,
            Self::VerificationFailure => 1,
            Self::ScenarioFailure => 2,
            Self::ParseError => 3,
        };
        if rank(other) > rank(self) {
            other
        } else {
            self
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub output: PathBuf,
    /// Worker cap for the internal thread pool; `None` uses rayon's default.
    pub threads: Option<usize>,
    pub binary_dumps: bool,
}

/// Output root: explicit flag, then the config, then the environment.
pub fn resolve_output(flag: Option<PathBuf>, config: &RunConfig) -> PathBuf {
    flag.or_else(|| config.output_dir.clone())
        .or_else(|| std::env::var_os(OUTPUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT))
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioRecord {
    pub name: String,
    pub anchor: String,
    pub status: ExitStatus,
    pub wall_time_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Names of failing checks, as `report: check`.
    pub failures: Vec<String>,
    #[serde(skip)]
    pub reports: Vec<VerificationReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ArtifactRecord {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub version: String,
    pub scenario: String,
    pub config_hash: String,
    pub seed: u64,
    pub threads: usize,
    pub started_unix_s: u64,
    pub wall_time_s: f64,
    pub scenarios: Vec<ScenarioRecord>,
    pub artifacts: Vec<ArtifactRecord>,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub status: ExitStatus,
    pub manifest: Manifest,
    pub output: PathBuf,
}

fn write_artifact(root: &Path, relative: &str, bytes: &[u8], records: &mut Vec<ArtifactRecord>) -> Result<()> {
    let path = root.join(relative);
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(&path, bytes)?;
    records.push(ArtifactRecord {
        path: relative.to_string(),
        sha256: hex::encode(Sha256::digest(bytes)),
        bytes: bytes.len(),
    });
    Ok(())
}

/// Runs the configured scenario(s) and writes every artifact plus the
/// manifest. Errors are returned only for I/O problems with the output
/// root; scenario errors are recorded and reflected in the status.
pub fn run(config: &RunConfig, options: &RunOptions) -> Result<RunSummary> {
    let entries = resolve(&config.scenario)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let threads = pool.current_num_threads();
    // Blocked dense factorizations split their reductions by worker count;
    // run them sequentially so artifacts do not depend on `--threads`.
    faer::set_global_parallelism(faer::Par::Seq);
    let started = Instant::now();
    let started_unix_s = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let provenance = Provenance {
        config_hash: config.hash(),
        seed: config.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    let root = options.output.clone();
    std::fs::create_dir_all(&root)?;

    let mut artifacts = Vec::new();
    let mut records = Vec::new();
    let mut status = ExitStatus::Success;
    for info in entries {
        let t0 = Instant::now();
        let outcome = pool.install(|| run_scenario(info, config, options.binary_dumps));
        let wall_time_s = t0.elapsed().as_secs_f64();
        let mut record = ScenarioRecord {
            name: info.name.to_string(),
            anchor: info.anchor.to_string(),
            status: ExitStatus::Success,
            wall_time_s,
            error: None,
            failures: Vec::new(),
            reports: Vec::new(),
        };
        match outcome {
            Ok(mut out) => {
                for rep in &mut out.reports {
                    rep.provenance = Some(provenance.clone());
                    record
                        .failures
                        .extend(rep.failures().map(|c| format!("{}: {}", rep.check, c.name)));
                }
                if !out.passed() {
                    record.status = ExitStatus::VerificationFailure;
                }
                let reports_json = to_sorted_json(&out.reports);
                write_artifact(&root, &format!("{}/reports.json", info.name), reports_json.as_bytes(), &mut artifacts)?;
                for a in &out.artifacts {
                    write_artifact(&root, &format!("{}/{}", info.name, a.name), &a.contents, &mut artifacts)?;
                }
                record.reports = out.reports;
            }
            Err(e) => {
                record.status = ExitStatus::ScenarioFailure;
                record.error = Some(e.to_string());
            }
        }
        status = status.worst(record.status);
        records.push(record);
    }
    write_artifact(&root, "config.echo.toml", config.to_toml().as_bytes(), &mut artifacts)?;
    artifacts.sort_by(|a, b| a.path.cmp(&b.path));

    let manifest = Manifest {
        version: provenance.version,
        scenario: config.scenario.clone(),
        config_hash: provenance.config_hash,
        seed: config.seed,
        threads,
        started_unix_s,
        wall_time_s: started.elapsed().as_secs_f64(),
        scenarios: records,
        artifacts,
    };
    std::fs::write(root.join("manifest.json"), to_sorted_json(&manifest))?;
    Ok(RunSummary {
        status,
        manifest,
        output: root,
    })
}

/// The catalog as printed by `--list`.
pub fn catalog_text() -> String {
    let width = SCENARIOS.iter().map(|s| s.name.len()).max().unwrap_or(0);
    let mut out = String::new();
    for s in SCENARIOS.iter().chain([&ALL]) {
        out.push_str(&format!("{:width$}  [{}]  {}\n", s.name, s.anchor, s.description));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_ordering() {
        use ExitStatus::*;
        assert_eq!(Success.worst(VerificationFailure), VerificationFailure);
        assert_eq!(VerificationFailure.worst(ScenarioFailure), ScenarioFailure);
        assert_eq!(ScenarioFailure.worst(VerificationFailure), ScenarioFailure);
        assert_eq!((Success.code(), ScenarioFailure.code(), ParseError.code(), VerificationFailure.code()), (0, 1, 2, 3));
    }

    #[test]
    fn algebra_run_writes_manifest_and_echo() {
        let dir = tempfile::tempdir().unwrap();
        let config = RunConfig {
            scenario: "verify-algebra".into(),
            ..RunConfig::default()
        };
        let options = RunOptions {
            output: dir.path().to_path_buf(),
            threads: Some(1),
            binary_dumps: false,
        };
        let summary = run(&config, &options).unwrap();
        assert_eq!(summary.status, ExitStatus::Success);
        assert_eq!(summary.manifest.threads, 1);
        let echo = std::fs::read_to_string(dir.path().join("config.echo.toml")).unwrap();
        assert_eq!(RunConfig::from_toml(&echo).unwrap(), config);
        let reports = std::fs::read_to_string(dir.path().join("verify-algebra/reports.json")).unwrap();
        assert!(reports.contains("\"anchor\": \"clifford-algebra\""));
        assert!(dir.path().join("manifest.json").exists());
    }

    #[test]
    fn catalog_lists_all_last() {
        let text = catalog_text();
        assert_eq!(text.lines().count(), 14);
        assert!(text.lines().last().unwrap().starts_with("all"));
    }
}
