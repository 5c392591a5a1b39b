//! Plain-text key-value run configuration for training and gradient checks.
//!
//! Format: one `key = value` pair per line, `#` starts a comment. Unknown
//! keys are rejected so typos fail loudly.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::net::train::Hyper;
use crate::net::variant::{Variant, VariantConfig};

/// Everything a `train` run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub variant: Variant,
    pub num_sem_classes: usize,
    pub backbone_channels: [usize; 3],
    pub branch_channels: usize,
    pub branch_depth: usize,
    pub hyper: Hyper,
    /// Manifest of the training scenes; resolved relative to the config file.
    pub dataset: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            variant: Variant::V2Branches,
            num_sem_classes: 4,
            backbone_channels: [8, 12, 16],
            branch_channels: 16,
            branch_depth: 2,
            hyper: Hyper::default(),
            dataset: None,
        }
    }
}

impl RunConfig {
    pub fn variant_config(&self) -> VariantConfig {
        VariantConfig::toy_sized(
            self.variant,
            self.num_sem_classes,
            self.backbone_channels,
            self.branch_channels,
            self.branch_depth,
        )
    }

    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut pairs: BTreeMap<String, String> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            pairs.insert(key.trim().to_string(), value.trim().to_string());
        }
        let mut cfg = RunConfig::default();
        for (key, value) in pairs {
            match key.as_str() {
                "variant" => cfg.variant = Variant::parse(&value)?,
                "sem_classes" => cfg.num_sem_classes = parse_num(&key, &value)?,
                "backbone_channels" => {
                    let parts: Vec<usize> = value
                        .split(',')
                        .map(|p| parse_num(&key, p.trim()))
                        .collect::<Result<_>>()?;
                    if parts.len() != 3 {
                        return Err(Error::Config(
                            "backbone_channels needs exactly three comma-separated widths".into(),
                        ));
                    }
                    cfg.backbone_channels = [parts[0], parts[1], parts[2]];
                }
                "branch_channels" => cfg.branch_channels = parse_num(&key, &value)?,
                "branch_depth" => cfg.branch_depth = parse_num(&key, &value)?,
                "lr" => {
                    cfg.hyper.lr = value
                        .parse()
                        .map_err(|_| Error::Config(format!("bad lr `{}`", value)))?
                }
                "steps" => cfg.hyper.steps = parse_num(&key, &value)?,
                "seed" => {
                    cfg.hyper.seed = value
                        .parse()
                        .map_err(|_| Error::Config(format!("bad seed `{}`", value)))?
                }
                "dataset" => cfg.dataset = Some(value),
                other => {
                    return Err(Error::Config(format!("unknown config key `{}`", other)));
                }
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        Self::parse(&fs::read_to_string(path)?)
    }
}

fn parse_num(key: &str, value: &str) -> Result<usize> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("bad value `{}` for {}", value, key)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let cfg = RunConfig::parse(
            "# run
             variant = v3
             lr = 0.25
             steps = 100
             seed = 7
             sem_classes = 5
             backbone_channels = 4, 6, 8
             branch_channels = 8
             branch_depth = 1
             dataset = scenes/manifest.json",
        )
        .unwrap();
        assert_eq!(cfg.variant, Variant::V3Refined);
        assert_eq!(cfg.hyper.lr, 0.25);
        assert_eq!(cfg.hyper.steps, 100);
        assert_eq!(cfg.hyper.seed, 7);
        assert_eq!(cfg.num_sem_classes, 5);
        assert_eq!(cfg.backbone_channels, [4, 6, 8]);
        assert_eq!(cfg.dataset.as_deref(), Some("scenes/manifest.json"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::parse("momentum = 0.9").is_err());
    }

    #[test]
    fn defaults_fill_missing_keys() {
        let cfg = RunConfig::parse("variant = v1").unwrap();
        assert_eq!(cfg.variant, Variant::V1Sequential);
        assert_eq!(cfg.hyper.steps, Hyper::default().steps);
    }
}
