//! Synthetic scene generation with known (planted) rank order.
//!
//! A scene plants non-overlapping rectangles, one category each, at distinct
//! uniform saliency levels. The expected rank table follows by construction:
//! levels descending, coverage equal to each region's salient fraction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::{LabelMask, SaliencyMap};
use crate::net::tensor::Tensor4;
use crate::ranking::{RankEntry, RankTable};

/// Axis-aligned rectangle, half-open: `x0 <= x < x1`, `y0 <= y < y1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl Rect {
    pub fn area(&self) -> usize {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    fn overlaps(&self, other: &Rect) -> bool {
        self.x0 < other.x1 && other.x0 < self.x1 && self.y0 < other.y1 && other.y0 < self.y1
    }

    fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x0 && x < self.x1 && y >= self.y0 && y < self.y1
    }
}

/// One planted region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantedRegion {
    pub category: u8,
    pub rect: Rect,
    /// Uniform saliency level inside the salient part of the region, in (0, 1].
    pub level: f64,
    /// Fraction of the region that carries saliency; the salient part is the
    /// top-left sub-rectangle realizing (at most) this fraction. 1.0 plants a
    /// fully covered region.
    pub salient_fraction: f64,
}

/// Declarative synthetic scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSceneSpec {
    pub width: usize,
    pub height: usize,
    pub num_categories: usize,
    pub regions: Vec<PlantedRegion>,
    pub seed: u64,
}

impl SyntheticSceneSpec {
    pub fn validate(&self) -> Result<()> {
        for (i, r) in self.regions.iter().enumerate() {
            if r.rect.x1 > self.width || r.rect.y1 > self.height || r.rect.x0 >= r.rect.x1
                || r.rect.y0 >= r.rect.y1
            {
                return Err(Error::domain(format!(
                    "region {} rectangle {:?} does not fit the {}x{} canvas",
                    i, r.rect, self.width, self.height
                )));
            }
            if r.category == 0 || r.category as usize > self.num_categories {
                return Err(Error::domain(format!(
                    "region {} category {} out of range 1..={}",
                    i, r.category, self.num_categories
                )));
            }
            if !(r.level > 0.0 && r.level <= 1.0) {
                return Err(Error::domain(format!(
                    "region {} saliency level {} outside (0, 1]",
                    i, r.level
                )));
            }
            if !(0.0..=1.0).contains(&r.salient_fraction) {
                return Err(Error::domain(format!(
                    "region {} salient fraction {} outside [0, 1]",
                    i, r.salient_fraction
                )));
            }
            for (j, other) in self.regions.iter().enumerate().take(i) {
                if r.rect.overlaps(&other.rect) {
                    return Err(Error::domain(format!(
                        "regions {} and {} overlap",
                        j, i
                    )));
                }
                if r.category == other.category {
                    return Err(Error::domain(format!(
                        "regions {} and {} repeat category {}",
                        j, i, r.category
                    )));
                }
                if r.level == other.level {
                    return Err(Error::domain(format!(
                        "regions {} and {} repeat saliency level {}",
                        j, i, r.level
                    )));
                }
            }
        }
        Ok(())
    }
}

/// The salient sub-rectangle of a region: the whole rectangle at fraction 1,
/// otherwise the top-left block whose row/column counts realize the fraction
/// as closely as the integer grid allows (rounding down, at least one pixel).
fn salient_rect(region: &PlantedRegion) -> Rect {
    let r = region.rect;
    if region.salient_fraction >= 1.0 {
        return r;
    }
    let h = r.y1 - r.y0;
    let w = r.x1 - r.x0;
    // split the fraction across both axes
    let axis = region.salient_fraction.sqrt();
    let sh = ((h as f64 * axis).floor() as usize).clamp(1, h);
    let sw = ((w as f64 * axis).floor() as usize).clamp(1, w);
    Rect {
        x0: r.x0,
        y0: r.y0,
        x1: r.x0 + sw,
        y1: r.y0 + sh,
    }
}

/// Realizes a scene: label mask, saliency map, and the rank table the ranking
/// algorithm is expected to reproduce (at the given coverage threshold).
pub fn generate_synthetic(
    spec: &SyntheticSceneSpec,
    coverage_threshold: f64,
) -> Result<(LabelMask, SaliencyMap, RankTable)> {
    spec.validate()?;
    let mut labels = vec![0u8; spec.width * spec.height];
    let mut values = vec![0.0f64; spec.width * spec.height];
    let mut realized: Vec<(u8, f64, f64)> = Vec::new(); // (category, level, coverage)
    for region in &spec.regions {
        let sal = salient_rect(region);
        let mut salient_pixels = 0usize;
        for y in region.rect.y0..region.rect.y1 {
            for x in region.rect.x0..region.rect.x1 {
                labels[y * spec.width + x] = region.category;
                if sal.contains(x, y) {
                    values[y * spec.width + x] = region.level;
                    salient_pixels += 1;
                }
            }
        }
        realized.push((
            region.category,
            region.level,
            salient_pixels as f64 / region.rect.area() as f64,
        ));
    }

    // expected table: kept regions by level descending, rejected ones absent
    let mut kept: Vec<&(u8, f64, f64)> = realized
        .iter()
        .filter(|(_, _, cov)| *cov >= coverage_threshold)
        .collect();
    kept.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    let mut entries: Vec<RankEntry> = kept
        .iter()
        .enumerate()
        .map(|(i, &&(category, level, coverage))| RankEntry {
            category,
            rank_value: level,
            coverage,
            rank_position: Some(i + 1),
        })
        .collect();
    let mut absent: Vec<RankEntry> = realized
        .iter()
        .filter(|(_, _, cov)| *cov < coverage_threshold)
        .map(|&(category, level, coverage)| RankEntry {
            category,
            rank_value: level,
            coverage,
            rank_position: None,
        })
        .collect();
    absent.sort_by_key(|e| e.category);
    entries.extend(absent);

    Ok((
        LabelMask::new(spec.width, spec.height, labels, spec.num_categories)?,
        SaliencyMap::new(spec.width, spec.height, values)?,
        RankTable {
            image_id: format!("synthetic-{}", spec.seed),
            entries,
        },
    ))
}

/// Options for [`random_scene`].
#[derive(Debug, Clone, Copy)]
pub struct RandomSceneOptions {
    pub width: usize,
    pub height: usize,
    pub min_regions: usize,
    pub max_regions: usize,
    /// Plant one region with coverage strictly below this threshold instead of
    /// full coverage (`None` plants all regions fully covered).
    pub low_coverage_below: Option<f64>,
}

impl Default for RandomSceneOptions {
    fn default() -> Self {
        RandomSceneOptions {
            width: 48,
            height: 48,
            min_regions: 2,
            max_regions: 6,
            low_coverage_below: None,
        }
    }
}

/// Draws a random scene spec: 2–6 non-overlapping regions placed on a cell
/// grid, distinct categories, distinct 8-bit-exact saliency levels.
pub fn random_scene(seed: u64, opts: &RandomSceneOptions) -> SyntheticSceneSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.gen_range(opts.min_regions..=opts.max_regions);
    // 3x2 placement grid keeps rectangles disjoint by construction
    let (grid_x, grid_y) = (3usize, 2usize);
    let cell_w = opts.width / grid_x;
    let cell_h = opts.height / grid_y;
    let mut cells: Vec<(usize, usize)> = (0..grid_x)
        .flat_map(|cx| (0..grid_y).map(move |cy| (cx, cy)))
        .collect();
    // Fisher-Yates over the cells
    for i in (1..cells.len()).rev() {
        let j = rng.gen_range(0..=i);
        cells.swap(i, j);
    }
    let mut categories: Vec<u8> = (1..=6u8).collect();
    for i in (1..categories.len()).rev() {
        let j = rng.gen_range(0..=i);
        categories.swap(i, j);
    }
    // distinct multiples of 1/255 survive 8-bit image round-trips exactly
    let mut level_steps: Vec<u32> = (10..=250).collect();
    for i in (1..level_steps.len()).rev() {
        let j = rng.gen_range(0..=i);
        level_steps.swap(i, j);
    }
    let low_idx = opts.low_coverage_below.map(|_| rng.gen_range(0..k));
    let regions = (0..k)
        .map(|i| {
            let (cx, cy) = cells[i];
            let max_w = cell_w - 1;
            let max_h = cell_h - 1;
            let w = rng.gen_range(2..=max_w.max(2));
            let h = rng.gen_range(2..=max_h.max(2));
            let x0 = cx * cell_w + rng.gen_range(0..=(cell_w - w));
            let y0 = cy * cell_h + rng.gen_range(0..=(cell_h - h));
            let salient_fraction = match (low_idx, opts.low_coverage_below) {
                (Some(li), Some(tau)) if li == i => {
                    // aim safely below tau; the integer grid only lowers it
                    (tau * 0.5).max(0.01)
                }
                _ => 1.0,
            };
            PlantedRegion {
                category: categories[i],
                rect: Rect {
                    x0,
                    y0,
                    x1: x0 + w,
                    y1: y0 + h,
                },
                level: level_steps[i] as f64 / 255.0,
                salient_fraction,
            }
        })
        .collect();
    SyntheticSceneSpec {
        width: opts.width,
        height: opts.height,
        num_categories: 6,
        regions,
        seed,
    }
}

/// Renders a network input tensor from a scene's ground truths: category
/// identity, saliency level, and a positional gradient channel.
pub fn render_input(sem: &LabelMask, sal: &SaliencyMap) -> Tensor4 {
    let (w, h) = (sem.width(), sem.height());
    let mut t = Tensor4::zeros(1, 3, h, w);
    let c = sem.num_categories().max(1) as f64;
    for y in 0..h {
        for x in 0..w {
            t.set(0, 0, y, x, sem.get(x, y) as f64 / c);
            t.set(0, 1, y, x, sal.get(x, y));
            let gx = if w > 1 { x as f64 / (w - 1) as f64 } else { 0.0 };
            let gy = if h > 1 { y as f64 / (h - 1) as f64 } else { 0.0 };
            t.set(0, 2, y, x, 0.5 * (gx + gy));
        }
    }
    t
}
