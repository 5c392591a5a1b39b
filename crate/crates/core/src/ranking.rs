//! Relative saliency rank of semantic categories.
//!
//! For every foreground category present in a semantic map, the overlap with
//! the saliency map is taken per pixel, a coverage criterion keeps or rejects
//! the category, and kept categories are ordered by the maximum saliency value
//! inside their overlap. The result is a per-image [`RankTable`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::{BinaryMask, CategoryTaxonomy, LabelMask, SaliencyMap};

/// Knobs of the inclusion/rejection criterion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankConfig {
    /// Minimum fraction of a category mask that must carry saliency above the
    /// floor for the category to stay rankable.
    pub coverage_threshold: f64,
    /// Saliency values at or below this level count as "no overlap".
    pub saliency_floor: f64,
    /// Rank values closer than this are treated as tied by [`rank_ties`].
    pub tie_epsilon: f64,
}

impl Default for RankConfig {
    fn default() -> Self {
        RankConfig {
            coverage_threshold: 0.5,
            saliency_floor: 0.0,
            tie_epsilon: 1e-9,
        }
    }
}

impl RankConfig {
    pub fn with_tau(tau: f64) -> Self {
        RankConfig {
            coverage_threshold: tau,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.coverage_threshold) {
            return Err(Error::domain(format!(
                "coverage threshold {} outside [0, 1]",
                self.coverage_threshold
            )));
        }
        if self.saliency_floor < 0.0 || !self.saliency_floor.is_finite() {
            return Err(Error::domain(format!(
                "saliency floor {} must be finite and non-negative",
                self.saliency_floor
            )));
        }
        Ok(())
    }
}

/// One category's outcome within an image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    /// Foreground category index (1-based).
    pub category: u8,
    /// Maximum saliency value inside the category's overlap.
    pub rank_value: f64,
    /// Fraction of the category mask carrying saliency above the floor.
    pub coverage: f64,
    /// 1-based ordinal among the kept categories; `None` means the category is
    /// absent from the ranking (rejected or below the saliency floor).
    pub rank_position: Option<usize>,
}

impl RankEntry {
    pub fn is_ranked(&self) -> bool {
        self.rank_position.is_some()
    }
}

/// Ordered ranking outcome for one image: ranked entries first (positions
/// `1..=k`, rank values non-increasing), absent entries after, by category.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTable {
    pub image_id: String,
    pub entries: Vec<RankEntry>,
}

impl RankTable {
    /// Entries that made it into the ranking, in position order.
    pub fn ranked(&self) -> impl Iterator<Item = &RankEntry> {
        self.entries.iter().filter(|e| e.is_ranked())
    }

    pub fn entry(&self, category: u8) -> Option<&RankEntry> {
        self.entries.iter().find(|e| e.category == category)
    }

    /// Position of a category, if ranked.
    pub fn position(&self, category: u8) -> Option<usize> {
        self.entry(category).and_then(|e| e.rank_position)
    }
}

/// Keep/reject decision for one category's overlap.
#[derive(Debug, Clone, PartialEq)]
pub enum OverlapDecision {
    /// Overlap survives the coverage criterion; carries the overlap unchanged.
    Kept(SaliencyMap),
    Rejected,
}

/// Applies the coverage criterion to a category overlap.
///
/// Coverage is the fraction of the category mask whose overlap value exceeds
/// the saliency floor. The overlap is kept unchanged iff coverage reaches the
/// threshold (boundary inclusive).
pub fn valid_overlap(
    overlap: &SaliencyMap,
    cat_mask: &BinaryMask,
    cfg: &RankConfig,
) -> Result<(OverlapDecision, f64)> {
    cfg.validate()?;
    if overlap.width() != cat_mask.width() || overlap.height() != cat_mask.height() {
        return Err(Error::domain(format!(
            "dimension mismatch: overlap {}x{} vs category mask {}x{}",
            overlap.width(),
            overlap.height(),
            cat_mask.width(),
            cat_mask.height()
        )));
    }
    let mask_area = cat_mask.area();
    if mask_area == 0 {
        return Err(Error::domain("empty category mask has no coverage"));
    }
    let covered = overlap
        .values()
        .iter()
        .zip(cat_mask.bits().iter())
        .filter(|(&v, &b)| b && v > cfg.saliency_floor)
        .count();
    let coverage = covered as f64 / mask_area as f64;
    let decision = if coverage >= cfg.coverage_threshold {
        OverlapDecision::Kept(overlap.clone())
    } else {
        OverlapDecision::Rejected
    };
    Ok((decision, coverage))
}

/// Ranks every foreground category present in `sem` by its maximum saliency
/// value inside the valid overlap with `sal`.
///
/// Kept categories are ordered by rank value descending into positions
/// `1..=k`; exact ties are broken by larger coverage, then lower category
/// index. Rejected categories and categories whose rank value does not exceed
/// the saliency floor are recorded with no position.
pub fn semantic_rank(
    image_id: &str,
    sem: &LabelMask,
    sal: &SaliencyMap,
    cfg: &RankConfig,
) -> Result<RankTable> {
    cfg.validate()?;
    if sem.width() != sal.width() || sem.height() != sal.height() {
        return Err(Error::domain(format!(
            "dimension mismatch: semantic {}x{} vs saliency {}x{}",
            sem.width(),
            sem.height(),
            sal.width(),
            sal.height()
        )));
    }
    let mut kept: Vec<RankEntry> = Vec::new();
    let mut absent: Vec<RankEntry> = Vec::new();
    for c in sem.present_categories() {
        let cat_mask = sem.category_mask(c)?;
        let overlap = sal.elementwise_product(&cat_mask)?;
        let (decision, coverage) = valid_overlap(&overlap, &cat_mask, cfg)?;
        match decision {
            OverlapDecision::Kept(valid) => {
                let rank_value = valid.max_value();
                if rank_value > cfg.saliency_floor {
                    kept.push(RankEntry {
                        category: c,
                        rank_value,
                        coverage,
                        rank_position: None,
                    });
                } else {
                    absent.push(RankEntry {
                        category: c,
                        rank_value,
                        coverage,
                        rank_position: None,
                    });
                }
            }
            OverlapDecision::Rejected => absent.push(RankEntry {
                category: c,
                rank_value: overlap.max_value(),
                coverage,
                rank_position: None,
            }),
        }
    }
    kept.sort_by(|a, b| {
        b.rank_value
            .partial_cmp(&a.rank_value)
            .unwrap()
            .then(b.coverage.partial_cmp(&a.coverage).unwrap())
            .then(a.category.cmp(&b.category))
    });
    for (i, e) in kept.iter_mut().enumerate() {
        e.rank_position = Some(i + 1);
    }
    kept.extend(absent);
    Ok(RankTable {
        image_id: image_id.to_string(),
        entries: kept,
    })
}

/// Groups ranked entries whose adjacent rank values (sorted descending)
/// differ by at most `tie_epsilon`. Returns groups of indices into the
/// table's ranked entries, in position order.
pub fn rank_ties(table: &RankTable, tie_epsilon: f64) -> Vec<Vec<usize>> {
    let ranked: Vec<(usize, &RankEntry)> = table
        .entries
        .iter()
        .enumerate()
        .filter(|(_, e)| e.is_ranked())
        .collect();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (idx, entry) in ranked {
        let start_new = match groups.last() {
            Some(g) => {
                let prev = &table.entries[*g.last().unwrap()];
                (prev.rank_value - entry.rank_value).abs() > tie_epsilon
            }
            None => true,
        };
        if start_new {
            groups.push(vec![idx]);
        } else {
            groups.last_mut().unwrap().push(idx);
        }
    }
    groups
}

/// JSON view of a [`RankTable`] with category names resolved.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RankTableJson {
    pub image: String,
    pub entries: Vec<RankEntryJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RankEntryJson {
    pub category: u8,
    pub name: String,
    pub rank_value: f64,
    pub coverage: f64,
    pub rank_position: Option<usize>,
}

impl RankTableJson {
    pub fn from_table(table: &RankTable, taxonomy: &CategoryTaxonomy) -> Self {
        RankTableJson {
            image: table.image_id.clone(),
            entries: table
                .entries
                .iter()
                .map(|e| RankEntryJson {
                    category: e.category,
                    name: taxonomy.name(e.category).unwrap_or("?").to_string(),
                    rank_value: e.rank_value,
                    coverage: e.coverage,
                    rank_position: e.rank_position,
                })
                .collect(),
        }
    }
}
