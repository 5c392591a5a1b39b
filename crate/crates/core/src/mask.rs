//! Raster domain types and elementary mask algebra.
//!
//! Everything downstream (ranking, statistics, metrics, the toy network)
//! speaks in terms of these three rasters: a [`LabelMask`] of per-pixel
//! semantic category indices, a [`SaliencyMap`] of per-pixel agreement
//! levels in `[0, 1]`, and a plain [`BinaryMask`]. All rasters are row-major
//! with the origin at the top-left, immutable after construction, and cheap
//! to share across threads.

use crate::error::{Error, Result};

/// Sentinel label for pixels excluded from evaluation (the indexed-palette
/// "void" border index in VOC-style annotation files).
pub const IGNORE_LABEL: u8 = 255;

/// Highest category index a [`LabelMask`] may carry; 255 is reserved for
/// [`IGNORE_LABEL`].
pub const MAX_CATEGORIES: usize = 254;

/// Per-pixel semantic category indices. `0` is background, `1..=num_categories`
/// are foreground categories, [`IGNORE_LABEL`] marks void pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMask {
    width: usize,
    height: usize,
    labels: Vec<u8>,
    num_categories: usize,
}

impl LabelMask {
    pub fn new(width: usize, height: usize, labels: Vec<u8>, num_categories: usize) -> Result<Self> {
        if labels.len() != width * height {
            return Err(Error::domain(format!(
                "label buffer has {} entries, expected {}x{}={}",
                labels.len(),
                width,
                height,
                width * height
            )));
        }
        if num_categories > MAX_CATEGORIES {
            return Err(Error::domain(format!(
                "num_categories {} exceeds the supported maximum {}",
                num_categories, MAX_CATEGORIES
            )));
        }
        let bad: Vec<u8> = {
            let mut seen = [false; 256];
            for &l in &labels {
                if (l as usize) > num_categories && l != IGNORE_LABEL {
                    seen[l as usize] = true;
                }
            }
            (0..=255u8).filter(|&v| seen[v as usize]).collect()
        };
        if !bad.is_empty() {
            return Err(Error::domain(format!(
                "label values {:?} out of range 0..={} (255 = ignore)",
                bad, num_categories
            )));
        }
        Ok(LabelMask {
            width,
            height,
            labels,
            num_categories,
        })
    }

    /// Mask filled with a single label value.
    pub fn uniform(width: usize, height: usize, label: u8, num_categories: usize) -> Result<Self> {
        Self::new(width, height, vec![label; width * height], num_categories)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn num_categories(&self) -> usize {
        self.num_categories
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.labels[y * self.width + x]
    }

    /// Binary mask of the pixels carrying foreground category `c`.
    ///
    /// `c` must be a foreground index in `1..=num_categories`.
    pub fn category_mask(&self, c: u8) -> Result<BinaryMask> {
        if c == 0 || (c as usize) > self.num_categories {
            return Err(Error::domain(format!(
                "category {} out of range 1..={}",
                c, self.num_categories
            )));
        }
        let bits = self.labels.iter().map(|&l| l == c).collect();
        Ok(BinaryMask {
            width: self.width,
            height: self.height,
            bits,
        })
    }

    /// Foreground categories with at least one pixel, in ascending index order.
    pub fn present_categories(&self) -> Vec<u8> {
        let mut seen = [false; 256];
        for &l in &self.labels {
            seen[l as usize] = true;
        }
        (1..=self.num_categories as u8).filter(|&c| seen[c as usize]).collect()
    }

    /// Number of pixels labeled [`IGNORE_LABEL`].
    pub fn ignored_pixels(&self) -> usize {
        self.labels.iter().filter(|&&l| l == IGNORE_LABEL).count()
    }
}

/// Per-pixel saliency values in `[0, 1]`. Values outside the range are a hard
/// construction error, never clamped.
#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl SaliencyMap {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::domain(format!(
                "saliency buffer has {} entries, expected {}x{}={}",
                values.len(),
                width,
                height,
                width * height
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0 || **v > 1.0) {
            return Err(Error::domain(format!(
                "saliency value {} outside [0, 1]",
                v
            )));
        }
        Ok(SaliencyMap {
            width,
            height,
            values,
        })
    }

    pub fn uniform(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    /// Per-pixel product with a binary mask: keeps the saliency value where the
    /// bit is set, zeroes it elsewhere. The `[0, 1]` range is preserved.
    pub fn elementwise_product(&self, mask: &BinaryMask) -> Result<SaliencyMap> {
        if self.width != mask.width || self.height != mask.height {
            return Err(Error::domain(format!(
                "dimension mismatch: saliency {}x{} vs mask {}x{}",
                self.width, self.height, mask.width, mask.height
            )));
        }
        let values = self
            .values
            .iter()
            .zip(mask.bits.iter())
            .map(|(&v, &b)| if b { v } else { 0.0 })
            .collect();
        Ok(SaliencyMap {
            width: self.width,
            height: self.height,
            values,
        })
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }
}

/// Row-major boolean raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::domain(format!(
                "bit buffer has {} entries, expected {}x{}={}",
                bits.len(),
                width,
                height,
                width * height
            )));
        }
        Ok(BinaryMask {
            width,
            height,
            bits,
        })
    }

    pub fn uniform(width: usize, height: usize, value: bool) -> Self {
        BinaryMask {
            width,
            height,
            bits: vec![value; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    /// Number of set bits.
    pub fn area(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

/// Ordered category names; index 0 is the background, foreground categories
/// are 1-based in list order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryTaxonomy {
    names: Vec<String>,
}

/// The 20 VOC object categories in their conventional order.
pub const VOC_CATEGORIES: [&str; 20] = [
    "aero", "bike", "bird", "boat", "bottle", "bus", "car", "cat", "chair", "cow", "table", "dog",
    "horse", "mbike", "person", "plant", "sheep", "sofa", "train", "tv",
];

impl CategoryTaxonomy {
    pub fn new(names: Vec<String>) -> Result<Self> {
        if names.len() > MAX_CATEGORIES {
            return Err(Error::domain(format!(
                "{} categories exceed the supported maximum {}",
                names.len(),
                MAX_CATEGORIES
            )));
        }
        for (i, a) in names.iter().enumerate() {
            if names[..i].contains(a) {
                return Err(Error::domain(format!("duplicate category name `{}`", a)));
            }
        }
        Ok(CategoryTaxonomy { names })
    }

    /// Default taxonomy: the 20 VOC categories.
    pub fn voc() -> Self {
        CategoryTaxonomy {
            names: VOC_CATEGORIES.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Synthetic taxonomy `c1..cN` for generated datasets.
    pub fn synthetic(n: usize) -> Result<Self> {
        Self::new((1..=n).map(|i| format!("c{}", i)).collect())
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn background_index(&self) -> u8 {
        0
    }

    /// Name of foreground category `c` (1-based).
    pub fn name(&self, c: u8) -> Option<&str> {
        if c == 0 {
            return Some("background");
        }
        self.names.get(c as usize - 1).map(|s| s.as_str())
    }

    pub fn index_of(&self, name: &str) -> Option<u8> {
        self.names.iter().position(|n| n == name).map(|i| (i + 1) as u8)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}
