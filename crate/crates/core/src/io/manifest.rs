//! Dataset manifests: explicit id → (semantic mask, saliency map) pairing.
//!
//! A manifest is a JSON file listing every record; explicit pairing (instead
//! of directory scanning) means unmatched or missing files are reported, not
//! silently dropped.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub id: String,
    pub semantic: PathBuf,
    pub saliency: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub split: Option<Split>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub records: Vec<ManifestRecord>,
}

impl DatasetManifest {
    pub fn new(records: Vec<ManifestRecord>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for r in &records {
            if !seen.insert(r.id.as_str()) {
                return Err(Error::Config(format!("duplicate manifest id `{}`", r.id)));
            }
        }
        Ok(DatasetManifest { records })
    }

    /// Reads a manifest and verifies ids are unique and every referenced file
    /// exists. Relative paths are resolved against the manifest's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut manifest: DatasetManifest = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("invalid manifest {}: {}", path.display(), e)))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        for r in &mut manifest.records {
            if r.semantic.is_relative() {
                r.semantic = base.join(&r.semantic);
            }
            if r.saliency.is_relative() {
                r.saliency = base.join(&r.saliency);
            }
        }
        let manifest = DatasetManifest::new(manifest.records)?;
        let missing: Vec<String> = manifest
            .records
            .iter()
            .flat_map(|r| [&r.semantic, &r.saliency])
            .filter(|p| !p.exists())
            .map(|p| p.display().to_string())
            .collect();
        if !missing.is_empty() {
            return Err(Error::Config(format!(
                "manifest references missing files: {}",
                missing.join(", ")
            )));
        }
        Ok(manifest)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(
            path,
            serde_json::to_string_pretty(self).expect("manifest serializes"),
        )?;
        Ok(())
    }

    /// Assigns a reproducible random split: `train_count` records to the
    /// train split, the rest to test. The assignment is recorded in the
    /// records so re-running with the same seed is a no-op.
    pub fn assign_split(&mut self, train_count: usize, seed: u64) -> Result<()> {
        if train_count > self.records.len() {
            return Err(Error::domain(format!(
                "cannot put {} of {} records into the train split",
                train_count,
                self.records.len()
            )));
        }
        let mut order: Vec<usize> = (0..self.records.len()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        for (rank, idx) in order.into_iter().enumerate() {
            self.records[idx].split = Some(if rank < train_count {
                Split::Train
            } else {
                Split::Test
            });
        }
        Ok(())
    }

    pub fn subset(&self, split: Split) -> Vec<&ManifestRecord> {
        self.records
            .iter()
            .filter(|r| r.split == Some(split))
            .collect()
    }

    /// Pairs this manifest's records with another's by id. Ids present in
    /// only one manifest are an error listing the offenders.
    pub fn pair_with<'a>(
        &'a self,
        other: &'a DatasetManifest,
    ) -> Result<Vec<(&'a ManifestRecord, &'a ManifestRecord)>> {
        let mine: BTreeSet<&str> = self.records.iter().map(|r| r.id.as_str()).collect();
        let theirs: BTreeSet<&str> = other.records.iter().map(|r| r.id.as_str()).collect();
        let unmatched: Vec<&str> = mine.symmetric_difference(&theirs).copied().collect();
        if !unmatched.is_empty() {
            return Err(Error::Config(format!(
                "unmatched manifest ids: {}",
                unmatched.join(", ")
            )));
        }
        let mut pairs = Vec::with_capacity(self.records.len());
        for r in &self.records {
            let o = other
                .records
                .iter()
                .find(|x| x.id == r.id)
                .expect("id sets are equal");
            pairs.push((r, o));
        }
        Ok(pairs)
    }
}
