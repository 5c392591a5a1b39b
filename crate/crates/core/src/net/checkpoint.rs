//! Parameter checkpoints: a flat little-endian f64 binary file paired with a
//! JSON manifest describing every tensor's name, shape, and offset.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::layer::ConvSpec;
use crate::net::variant::{Network, Variant};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckpointManifest {
    pub variant: Variant,
    pub total_scalars: usize,
    pub entries: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub spec: ConvSpec,
    /// Scalar offset of the weight block in the flat file.
    pub weight_offset: usize,
    pub weight_len: usize,
    /// Scalar offset of the bias block in the flat file.
    pub bias_offset: usize,
    pub bias_len: usize,
}

pub fn manifest_for(net: &Network) -> CheckpointManifest {
    let mut entries = Vec::with_capacity(net.params.convs.len());
    let mut at = 0usize;
    for c in &net.params.convs {
        entries.push(ManifestEntry {
            name: c.name.clone(),
            spec: c.spec,
            weight_offset: at,
            weight_len: c.weight.len(),
            bias_offset: at + c.weight.len(),
            bias_len: c.bias.len(),
        });
        at += c.len();
    }
    CheckpointManifest {
        variant: net.config.variant,
        total_scalars: at,
        entries,
    }
}

/// Writes `<stem>.bin` (flat f64, little endian) and `<stem>.json`.
pub fn save_checkpoint(net: &Network, stem: &Path) -> Result<()> {
    let flat = net.params.to_flat();
    let mut bytes = Vec::with_capacity(flat.len() * 8);
    for v in &flat {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(stem.with_extension("bin"), bytes)?;
    let manifest = manifest_for(net);
    fs::write(
        stem.with_extension("json"),
        serde_json::to_string_pretty(&manifest).expect("manifest serializes"),
    )?;
    Ok(())
}

/// Restores parameters into a network built from the same configuration.
pub fn load_checkpoint(net: &mut Network, stem: &Path) -> Result<()> {
    let manifest_path = stem.with_extension("json");
    let manifest: CheckpointManifest =
        serde_json::from_str(&fs::read_to_string(&manifest_path)?).map_err(|e| {
            Error::Config(format!(
                "invalid checkpoint manifest {}: {}",
                manifest_path.display(),
                e
            ))
        })?;
    if manifest.variant != net.config.variant {
        return Err(Error::Config(format!(
            "checkpoint is for variant {}, network is {}",
            manifest.variant.name(),
            net.config.variant.name()
        )));
    }
    let expected = manifest_for(net);
    if expected.entries.len() != manifest.entries.len()
        || expected
            .entries
            .iter()
            .zip(manifest.entries.iter())
            .any(|(a, b)| a.name != b.name || a.spec != b.spec || a.weight_len != b.weight_len)
    {
        return Err(Error::Config(
            "checkpoint manifest does not match the network configuration".into(),
        ));
    }
    let bytes = fs::read(stem.with_extension("bin"))?;
    if bytes.len() != manifest.total_scalars * 8 {
        return Err(Error::Config(format!(
            "checkpoint holds {} bytes, expected {}",
            bytes.len(),
            manifest.total_scalars * 8
        )));
    }
    let flat: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    net.params.load_flat(&flat)
}
