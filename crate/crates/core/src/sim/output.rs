use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::Experiment;
use crate::error::Result;

pub const CSV_HEADER: &str = "experiment,scheme,snr_db,metric,value,stderr,n_trials";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub snr_db: f64,
    pub value: f64,
    pub stderr: f64,
    pub n_trials: u64,
}

/// One series of one metric over the SNR grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub series: String,
    pub metric: String,
    pub points: Vec<CurvePoint>,
}

impl Curve {
    pub fn at(&self, snr_db: f64) -> Option<&CurvePoint> {
        self.points.iter().find(|p| p.snr_db == snr_db)
    }

    /// `(snr, value)` pairs.
    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.snr_db, p.value)).collect()
    }
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub experiment: String,
    pub version: String,
    pub seed: u64,
    /// SHA-256 of the canonical JSON of `config`.
    pub config_hash: String,
    pub csv_file: String,
    pub csv_sha256: String,
    pub config: Experiment,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub experiment: Experiment,
    pub curves: Vec<Curve>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Hash of the experiment's canonical JSON form.
pub fn config_hash(exp: &Experiment) -> String {
    let json = serde_json::to_string(exp).expect("experiments serialize");
    sha256_hex(json.as_bytes())
}

impl RunOutput {
    pub fn curve(&self, series: &str, metric: &str) -> Option<&Curve> {
        self.curves.iter().find(|c| c.series == series && c.metric == metric)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * self.curves.len() * self.experiment.snr_db.len());
        out.push_str(CSV_HEADER);
        out.push('\n');
        for c in &self.curves {
            for p in &c.points {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{:e},{:e},{}",
                    self.experiment.id, c.series, p.snr_db, c.metric, p.value, p.stderr, p.n_trials
                );
            }
        }
        out
    }

    pub fn csv_file_name(&self) -> String {
        format!("{}.csv", self.experiment.id)
    }

    pub fn manifest(&self) -> Manifest {
        Manifest {
            experiment: self.experiment.id.clone(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: self.experiment.seed,
            config_hash: config_hash(&self.experiment),
            csv_file: self.csv_file_name(),
            csv_sha256: sha256_hex(self.to_csv().as_bytes()),
            config: self.experiment.clone(),
        }
    }

    /// Writes `<id>.csv` and `<id>.manifest.json` into `dir`, creating it.
    pub fn write_to(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir)?;
        let csv = dir.join(self.csv_file_name());
        std::fs::write(&csv, self.to_csv())?;
        let manifest = dir.join(format!("{}.manifest.json", self.experiment.id));
        let mut json = serde_json::to_string_pretty(&self.manifest()).expect("manifests serialize");
        json.push('\n');
        std::fs::write(&manifest, json)?;
        Ok((csv, manifest))
    }
}
