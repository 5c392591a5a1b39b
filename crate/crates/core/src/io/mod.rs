//! Data ingestion, ground-truth preparation, synthetic data, and dataset
//! orchestration helpers.

pub mod image;
pub mod manifest;
pub mod synth;

use rayon::prelude::*;

use crate::error::Result;
use crate::mask::LabelMask;
use crate::ranking::{semantic_rank, RankConfig, RankTable};

pub use image::{
    binarize, load_saliency_map, load_semantic_mask, voc_palette, write_saliency_map,
    write_semantic_mask,
};
pub use manifest::{DatasetManifest, ManifestRecord, Split};
pub use synth::{
    generate_synthetic, random_scene, render_input, PlantedRegion, RandomSceneOptions, Rect,
    SyntheticSceneSpec,
};

/// Loads every record of a manifest and ranks it. Per-image work runs as a
/// parallel map; results keep manifest order, so output is deterministic.
pub fn rank_manifest(
    manifest: &DatasetManifest,
    num_categories: usize,
    cfg: &RankConfig,
) -> Result<Vec<(RankTable, LabelMask)>> {
    manifest
        .records
        .par_iter()
        .map(|record| {
            let sem = load_semantic_mask(&record.semantic, num_categories)?;
            let sal = load_saliency_map(&record.saliency)?;
            let table = semantic_rank(&record.id, &sem, &sal, cfg)?;
            Ok((table, sem))
        })
        .collect()
}

/// Pixels labeled salient (above the floor) that carry no foreground semantic
/// label. Reported so annotation mismatches surface instead of being guessed
/// into a category.
pub fn unattributed_salient_area(
    sem: &LabelMask,
    sal: &crate::mask::SaliencyMap,
    floor: f64,
) -> usize {
    sem.labels()
        .iter()
        .zip(sal.values().iter())
        .filter(|(&l, &v)| (l == 0 || l == crate::mask::IGNORE_LABEL) && v > floor)
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mask::SaliencyMap;

    #[test]
    fn unattributed_area_counts_background_saliency() {
        let sem = LabelMask::new(2, 2, vec![0, 1, crate::mask::IGNORE_LABEL, 0], 1).unwrap();
        let sal = SaliencyMap::new(2, 2, vec![0.8, 0.8, 0.8, 0.0]).unwrap();
        assert_eq!(unattributed_salient_area(&sem, &sal, 0.0), 2);
    }

    #[test]
    fn rank_manifest_runs_end_to_end() {
        use crate::io::synth::{generate_synthetic, random_scene, RandomSceneOptions};
        let dir = tempfile::tempdir().unwrap();
        let cfg = RankConfig::default();
        let mut records = Vec::new();
        let mut expected = Vec::new();
        for seed in 0..4 {
            let spec = random_scene(seed, &RandomSceneOptions::default());
            let (sem, sal, table) = generate_synthetic(&spec, cfg.coverage_threshold).unwrap();
            let sem_path = dir.path().join(format!("{}_sem.png", seed));
            let sal_path = dir.path().join(format!("{}_sal.png", seed));
            write_semantic_mask(&sem_path, &sem).unwrap();
            write_saliency_map(&sal_path, &sal).unwrap();
            records.push(ManifestRecord {
                id: table.image_id.clone(),
                semantic: sem_path,
                saliency: sal_path,
                split: None,
            });
            expected.push(table);
        }
        let manifest = DatasetManifest::new(records).unwrap();
        let ranked = rank_manifest(&manifest, 6, &cfg).unwrap();
        assert_eq!(ranked.len(), 4);
        for ((table, _), exp) in ranked.iter().zip(expected.iter()) {
            assert_eq!(table, exp);
        }
    }
}
