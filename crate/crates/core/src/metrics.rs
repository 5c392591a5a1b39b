//! Evaluation metrics for both prediction tasks.
//!
//! Segmentation quality is scored from a pooled [`ConfusionMatrix`] (pixel
//! accuracy, per-category accuracy, per-category IoU, mIoU). Saliency quality
//! is scored by sweeping a fixed threshold grid over the prediction
//! (max-F along the precision/recall curve, trapezoidal AUC over the ROC
//! curve) plus the mean absolute error against the binary ground truth.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::{BinaryMask, LabelMask, SaliencyMap};

/// Square count matrix; rows are ground-truth classes, columns predictions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    num_classes: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn empty(num_classes: usize) -> Self {
        ConfusionMatrix {
            num_classes,
            counts: vec![0; num_classes * num_classes],
        }
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn count(&self, gt: usize, pred: usize) -> u64 {
        self.counts[gt * self.num_classes + pred]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn row_sum(&self, gt: usize) -> u64 {
        self.counts[gt * self.num_classes..(gt + 1) * self.num_classes]
            .iter()
            .sum()
    }

    pub fn col_sum(&self, pred: usize) -> u64 {
        (0..self.num_classes).map(|g| self.count(g, pred)).sum()
    }

    /// Adds the counts of another matrix of the same size; confusion is
    /// additive under dataset concatenation.
    pub fn merge(&mut self, other: &ConfusionMatrix) -> Result<()> {
        if self.num_classes != other.num_classes {
            return Err(Error::domain(format!(
                "cannot merge confusion matrices of {} and {} classes",
                self.num_classes, other.num_classes
            )));
        }
        for (a, b) in self.counts.iter_mut().zip(other.counts.iter()) {
            *a += b;
        }
        Ok(())
    }
}

/// Tallies per-pixel (ground truth, prediction) pairs.
///
/// Pixels whose ground-truth or predicted label equals `ignore_label` are
/// skipped. The matrix covers classes `0..=C` where `C` is the larger
/// foreground category count of the two masks.
pub fn confusion(
    pred: &LabelMask,
    gt: &LabelMask,
    ignore_label: Option<u8>,
) -> Result<ConfusionMatrix> {
    if pred.width() != gt.width() || pred.height() != gt.height() {
        return Err(Error::domain(format!(
            "dimension mismatch: prediction {}x{} vs ground truth {}x{}",
            pred.width(),
            pred.height(),
            gt.width(),
            gt.height()
        )));
    }
    let num_classes = pred.num_categories().max(gt.num_categories()) + 1;
    let mut cm = ConfusionMatrix::empty(num_classes);
    for (&p, &g) in pred.labels().iter().zip(gt.labels().iter()) {
        if Some(p) == ignore_label || Some(g) == ignore_label {
            continue;
        }
        cm.counts[g as usize * num_classes + p as usize] += 1;
    }
    Ok(cm)
}

/// Segmentation scores derived from a confusion matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegScores {
    pub pixel_acc: f64,
    pub mean_acc: f64,
    /// Per-class IoU; `None` for classes absent from both prediction and
    /// ground truth (excluded from the means).
    pub per_class_iou: Vec<Option<f64>>,
    pub mean_iou: f64,
}

/// Derives pixel accuracy, mean per-class accuracy, per-class IoU, and mIoU.
///
/// Classes with no pixels in either the prediction or the ground truth are
/// excluded from both means. `x/0` ratios with a zero numerator evaluate to 0.
pub fn segmentation_scores(cm: &ConfusionMatrix) -> Result<SegScores> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::domain("confusion matrix is empty"));
    }
    let n = cm.num_classes();
    let trace: u64 = (0..n).map(|c| cm.count(c, c)).sum();
    let pixel_acc = trace as f64 / total as f64;

    let mut per_class_iou = Vec::with_capacity(n);
    let mut acc_sum = 0.0;
    let mut iou_sum = 0.0;
    let mut present = 0usize;
    for c in 0..n {
        let row = cm.row_sum(c);
        let col = cm.col_sum(c);
        if row + col == 0 {
            per_class_iou.push(None);
            continue;
        }
        let diag = cm.count(c, c);
        let acc = if row == 0 { 0.0 } else { diag as f64 / row as f64 };
        let union = row + col - diag;
        let iou = if union == 0 { 0.0 } else { diag as f64 / union as f64 };
        per_class_iou.push(Some(iou));
        acc_sum += acc;
        iou_sum += iou;
        present += 1;
    }
    Ok(SegScores {
        pixel_acc,
        mean_acc: acc_sum / present as f64,
        per_class_iou,
        mean_iou: iou_sum / present as f64,
    })
}

/// Threshold-sweep configuration for saliency scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    /// β² of the F-measure.
    pub beta_squared: f64,
    /// Number of evenly spaced thresholds over `[0, 1]`, endpoints included.
    pub num_thresholds: usize,
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig {
            beta_squared: 0.3,
            num_thresholds: 256,
        }
    }
}

impl MetricConfig {
    pub fn validate(&self) -> Result<()> {
        if self.beta_squared <= 0.0 || !self.beta_squared.is_finite() {
            return Err(Error::domain(format!(
                "beta_squared {} must be positive",
                self.beta_squared
            )));
        }
        if self.num_thresholds < 2 {
            return Err(Error::domain("num_thresholds must be at least 2"));
        }
        Ok(())
    }

    /// The sweep grid `i / (n-1)`, symmetric under `t -> 1-t`.
    pub fn thresholds(&self) -> Vec<f64> {
        let n = self.num_thresholds;
        (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
    }
}

/// Saliency scores for one map (or one pooled set of pixels).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaliencyScore {
    pub f_measure_max: f64,
    pub auc: f64,
    pub mae: f64,
    /// `(threshold, precision, recall)` ordered by threshold ascending.
    pub pr_curve: Vec<(f64, f64, f64)>,
    /// `(fpr, tpr)` ordered by threshold descending, endpoints included.
    pub roc_curve: Vec<(f64, f64)>,
    /// Set when the ground truth has no positives or no negatives, which
    /// leaves precision/recall or the ROC undefined at some thresholds.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, Default)]
struct SweepCounts {
    tp: u64,
    fp: u64,
    fn_: u64,
    tn: u64,
}

/// Exhaustive per-threshold tally: a pixel is predicted positive iff its value
/// strictly exceeds the threshold.
fn sweep_counts(pred: &[f64], gt: &[bool], thresholds: &[f64]) -> Vec<SweepCounts> {
    thresholds
        .iter()
        .map(|&t| {
            let mut c = SweepCounts::default();
            for (&v, &g) in pred.iter().zip(gt.iter()) {
                match (v > t, g) {
                    (true, true) => c.tp += 1,
                    (true, false) => c.fp += 1,
                    (false, true) => c.fn_ += 1,
                    (false, false) => c.tn += 1,
                }
            }
            c
        })
        .collect()
}

fn safe_div(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f_beta(precision: f64, recall: f64, beta_squared: f64) -> f64 {
    let den = beta_squared * precision + recall;
    if den == 0.0 {
        0.0
    } else {
        (1.0 + beta_squared) * precision * recall / den
    }
}

/// Trapezoidal area under `(fpr, tpr)` points ordered from (0,0) to (1,1).
fn trapezoid(points: &[(f64, f64)]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum()
}

/// Assembles the ROC polyline from per-threshold rates: highest threshold
/// first, with the (0,0) and (1,1) endpoints appended where missing.
fn roc_points(counts: &[SweepCounts]) -> Vec<(f64, f64)> {
    let mut pts = vec![(0.0, 0.0)];
    for c in counts.iter().rev() {
        let tpr = safe_div(c.tp, c.tp + c.fn_);
        let fpr = safe_div(c.fp, c.fp + c.tn);
        if pts.last() != Some(&(fpr, tpr)) {
            pts.push((fpr, tpr));
        }
    }
    if pts.last() != Some(&(1.0, 1.0)) {
        pts.push((1.0, 1.0));
    }
    pts
}

/// Scores one saliency prediction against a binary ground truth.
pub fn saliency_scores(
    pred: &SaliencyMap,
    gt: &BinaryMask,
    cfg: &MetricConfig,
) -> Result<SaliencyScore> {
    cfg.validate()?;
    if pred.width() != gt.width() || pred.height() != gt.height() {
        return Err(Error::domain(format!(
            "dimension mismatch: prediction {}x{} vs ground truth {}x{}",
            pred.width(),
            pred.height(),
            gt.width(),
            gt.height()
        )));
    }
    let thresholds = cfg.thresholds();
    let counts = sweep_counts(pred.values(), gt.bits(), &thresholds);
    let positives = gt.area();
    let negatives = gt.bits().len() - positives;
    let degenerate = positives == 0 || negatives == 0;

    let pr_curve: Vec<(f64, f64, f64)> = thresholds
        .iter()
        .zip(counts.iter())
        .map(|(&t, c)| {
            (
                t,
                safe_div(c.tp, c.tp + c.fp),
                safe_div(c.tp, c.tp + c.fn_),
            )
        })
        .collect();
    let f_measure_max = pr_curve
        .iter()
        .map(|&(_, p, r)| f_beta(p, r, cfg.beta_squared))
        .fold(0.0, f64::max);

    let roc_curve = roc_points(&counts);
    let auc = trapezoid(&roc_curve);

    let mae = pred
        .values()
        .iter()
        .zip(gt.bits().iter())
        .map(|(&v, &g)| (v - if g { 1.0 } else { 0.0 }).abs())
        .sum::<f64>()
        / pred.values().len() as f64;

    Ok(SaliencyScore {
        f_measure_max,
        auc,
        mae,
        pr_curve,
        roc_curve,
        degenerate,
    })
}

/// How dataset-level AUC aggregates across images.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AucAveraging {
    /// Mean of per-image AUCs (degenerate images excluded).
    PerImage,
    /// All pixels pooled into one sweep.
    Pooled,
}

/// Dataset-level saliency scores.
///
/// Precision and recall are averaged across images per threshold before the
/// F-measure is taken; `per_image_max_f` carries the mean of per-image max-F
/// values for comparison. MAE is the mean of per-image MAEs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSaliencyScore {
    pub f_measure_max: f64,
    pub per_image_max_f: f64,
    pub auc: f64,
    pub mae: f64,
    pub num_images: usize,
    pub num_degenerate: usize,
}

pub fn saliency_scores_dataset(
    pairs: &[(SaliencyMap, BinaryMask)],
    cfg: &MetricConfig,
    auc_mode: AucAveraging,
) -> Result<DatasetSaliencyScore> {
    cfg.validate()?;
    if pairs.is_empty() {
        return Err(Error::domain("no image pairs to score"));
    }
    let thresholds = cfg.thresholds();
    let mut precision_sum = vec![0.0; thresholds.len()];
    let mut recall_sum = vec![0.0; thresholds.len()];
    let mut mae_sum = 0.0;
    let mut max_f_sum = 0.0;
    let mut auc_sum = 0.0;
    let mut auc_images = 0usize;
    let mut num_degenerate = 0usize;
    for (pred, gt) in pairs {
        let score = saliency_scores(pred, gt, cfg)?;
        for (i, &(_, p, r)) in score.pr_curve.iter().enumerate() {
            precision_sum[i] += p;
            recall_sum[i] += r;
        }
        mae_sum += score.mae;
        max_f_sum += score.f_measure_max;
        if score.degenerate {
            num_degenerate += 1;
        } else {
            auc_sum += score.auc;
            auc_images += 1;
        }
    }
    let n = pairs.len() as f64;
    let f_measure_max = (0..thresholds.len())
        .map(|i| f_beta(precision_sum[i] / n, recall_sum[i] / n, cfg.beta_squared))
        .fold(0.0, f64::max);
    let auc = match auc_mode {
        AucAveraging::PerImage => {
            if auc_images == 0 {
                f64::NAN
            } else {
                auc_sum / auc_images as f64
            }
        }
        AucAveraging::Pooled => {
            let (pred, gt) = pool_pixels(pairs);
            saliency_scores(&pred, &gt, cfg)?.auc
        }
    };
    Ok(DatasetSaliencyScore {
        f_measure_max,
        per_image_max_f: max_f_sum / n,
        auc,
        mae: mae_sum / n,
        num_images: pairs.len(),
        num_degenerate,
    })
}

/// Concatenates every pixel of a dataset into one single-row pair, so pooled
/// scoring can reuse the single-image sweep.
pub fn pool_pixels(pairs: &[(SaliencyMap, BinaryMask)]) -> (SaliencyMap, BinaryMask) {
    let mut values = Vec::new();
    let mut bits = Vec::new();
    for (pred, gt) in pairs {
        values.extend_from_slice(pred.values());
        bits.extend_from_slice(gt.bits());
    }
    let w = values.len();
    (
        SaliencyMap::new(w, 1, values).expect("pooled values stay in range"),
        BinaryMask::new(w, 1, bits).expect("pooled bits match"),
    )
}
