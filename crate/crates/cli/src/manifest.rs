//! Run manifests: the resolved options of a run plus digests of everything
//! it read and wrote. `oudisc rerun` replays a manifest.

use std::path::{Path, PathBuf};

use ou_discount::ingest::{self, Provenance};
use serde::{Deserialize, Serialize};

use crate::curve::CurveRun;
use crate::error::{report_err, CliError, CliResult};
use crate::estimate::EstimateRun;
use crate::prepare::PrepareRun;
use crate::simulate::SimulateRun;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

impl FileDigest {
    pub fn of_input(path: &Path) -> CliResult<Self> {
        Ok(FileDigest {
            path: path.to_path_buf(),
            sha256: ingest::file_sha256(path).map_err(CliError::Ingest)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum RunConfig {
    Prepare(PrepareRun),
    Estimate(EstimateRun),
    Curve(CurveRun),
    Simulate(SimulateRun),
}

/// What a command reports back besides the files it wrote.
#[derive(Debug, Default)]
pub struct RunRecord {
    pub inputs: Vec<FileDigest>,
    pub provenance: Option<Provenance>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub tool_version: String,
    pub library_version: String,
    pub run: RunConfig,
    /// Worker threads used. Outputs do not depend on it.
    pub threads: usize,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

impl Manifest {
    pub fn new(run: RunConfig, threads: usize, record: RunRecord, outputs: Vec<FileDigest>) -> Self {
        Manifest {
            tool: env!("CARGO_PKG_NAME").into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            library_version: ou_discount::VERSION.into(),
            run,
            threads,
            inputs: record.inputs,
            outputs,
            provenance: record.provenance,
        }
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read manifest {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: malformed manifest: {e}", path.display())))
    }

    /// Checks that every recorded input still has its recorded digest.
    pub fn verify_inputs(&self) -> CliResult<()> {
        for input in &self.inputs {
            let now = FileDigest::of_input(&input.path)?;
            if now.sha256 != input.sha256 {
                return Err(CliError::Ingest(ou_discount::Error::InvalidConfig(format!(
                    "{} changed since the recorded run (sha256 {}, recorded {})",
                    input.path.display(),
                    now.sha256,
                    input.sha256
                ))));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> CliResult<String> {
        // run options are written unrounded so a rerun sees the same values
        let mut s = serde_json::to_string_pretty(self).map_err(report_err)?;
        s.push('\n');
        Ok(s)
    }
}
