//! Writing run outputs: every file goes through [`OutputSink`], which
//! records its size and SHA-256 for the manifest.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::ExponentProfile;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Relative to the output directory.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Lowercase hex SHA-256.
pub fn sha256_hex(data: &[u8]) -> String {
    let digest = Sha256::digest(data);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Git-style object hash: SHA-256 of `"<kind> <len>\0" ++ data`.
pub fn object_hash(kind: &str, data: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("{kind} {}\0", data.len()).as_bytes());
    h.update(data);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug)]
pub struct OutputSink {
    dir: PathBuf,
    manifest: Vec<ManifestEntry>,
}

impl OutputSink {
    pub fn create(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(OutputSink {
            dir,
            manifest: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn manifest(&self) -> &[ManifestEntry] {
        &self.manifest
    }

    pub fn into_manifest(self) -> Vec<ManifestEntry> {
        self.manifest
    }

    pub fn write(&mut self, name: &str, data: &[u8]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        std::fs::write(&path, data).map_err(|e| Error::io(&path, e))?;
        self.manifest.retain(|m| m.path != name);
        self.manifest.push(ManifestEntry {
            path: name.to_string(),
            bytes: data.len() as u64,
            sha256: sha256_hex(data),
        });
        Ok(path)
    }

    pub fn write_json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value).expect("serializable output");
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// Writes any table of records as CSV with the given header.
    pub fn write_csv<R: Serialize>(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = R>) -> Result<PathBuf> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.write_record(header).map_err(|e| csv_to_io(&self.dir.join(name), e))?;
        for r in rows {
            w.serialize(r).map_err(|e| csv_to_io(&self.dir.join(name), e))?;
        }
        let data = w.into_inner().map_err(|e| Error::io(self.dir.join(name), e.into_error()))?;
        self.write(name, &data)
    }

    /// `<stem>.csv` with `scale,value` rows and a `<stem>.json` sidecar
    /// holding the fit, `parameters` and `seed`.
    pub fn write_profile(&mut self, stem: &str, profile: &ExponentProfile, parameters: serde_json::Value, seed: u64) -> Result<ProfileSidecar> {
        self.write_csv(&format!("{stem}.csv"), &["scale", "value"], profile.points())?;
        let sidecar = ProfileSidecar {
            slope: profile.fit.as_ref().map(|f| f.slope),
            intercept: profile.fit.as_ref().map(|f| f.intercept),
            r_squared: profile.fit.as_ref().map(|f| f.r_squared),
            halfwidth: profile.fit.as_ref().map(|f| f.halfwidth),
            fitted_points: profile.fit.as_ref().map_or(0, |f| f.points),
            parameters,
            seed,
        };
        self.write_json(&format!("{stem}.json"), &sidecar)?;
        Ok(sidecar)
    }
}

fn csv_to_io(path: &Path, e: csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e.to_string()))
}

/// JSON sidecar of a profile CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSidecar {
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub r_squared: Option<f64>,
    pub halfwidth: Option<f64>,
    pub fitted_points: usize,
    pub parameters: serde_json::Value,
    pub seed: u64,
}
