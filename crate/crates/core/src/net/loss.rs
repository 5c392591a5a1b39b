//! Pixel-wise cross-entropy over logit maps, the joint two/three-term loss,
//! and nearest-neighbor label downsampling for supervision at 1/8 resolution.

use crate::error::{Error, Result};
use crate::mask::{BinaryMask, LabelMask};
use crate::net::tensor::Tensor4;
use crate::net::variant::{ForwardOutputs, OutputGrads};

/// Downsamples a label mask by picking the top-left sample of each block.
/// Label indices are never interpolated. The target size must divide the
/// source size evenly.
pub fn downsample_labels(mask: &LabelMask, th: usize, tw: usize) -> Result<LabelMask> {
    let (ry, rx) = downsample_ratio(mask.width(), mask.height(), th, tw)?;
    let mut labels = Vec::with_capacity(th * tw);
    for y in 0..th {
        for x in 0..tw {
            labels.push(mask.get(x * rx, y * ry));
        }
    }
    LabelMask::new(tw, th, labels, mask.num_categories())
}

/// [`downsample_labels`] for binary masks.
pub fn downsample_binary(mask: &BinaryMask, th: usize, tw: usize) -> Result<BinaryMask> {
    let (ry, rx) = downsample_ratio(mask.width(), mask.height(), th, tw)?;
    let mut bits = Vec::with_capacity(th * tw);
    for y in 0..th {
        for x in 0..tw {
            bits.push(mask.get(x * rx, y * ry));
        }
    }
    BinaryMask::new(tw, th, bits)
}

fn downsample_ratio(w: usize, h: usize, th: usize, tw: usize) -> Result<(usize, usize)> {
    if th == 0 || tw == 0 || h % th != 0 || w % tw != 0 {
        return Err(Error::domain(format!(
            "target {}x{} does not evenly divide source {}x{}",
            tw, th, w, h
        )));
    }
    Ok((h / th, w / tw))
}

/// Mean pixel-wise cross-entropy between channel logits and integer labels.
///
/// Returns the scalar loss and dL/dlogits, which is
/// `(softmax - onehot) / num_pixels` per pixel.
pub fn cross_entropy_loss(logits: &Tensor4, labels: &[u8]) -> Result<(f64, Tensor4)> {
    let (n, k, h, w) = logits.shape();
    let pixels = n * h * w;
    if labels.len() != pixels {
        return Err(Error::domain(format!(
            "{} labels for {} logit pixels",
            labels.len(),
            pixels
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l as usize >= k) {
        return Err(Error::domain(format!(
            "label {} out of range for {} classes",
            bad, k
        )));
    }
    let mut grad = Tensor4::zeros(n, k, h, w);
    let mut loss = 0.0;
    let inv = 1.0 / pixels as f64;
    for bn in 0..n {
        for y in 0..h {
            for x in 0..w {
                let label = labels[(bn * h + y) * w + x] as usize;
                // stabilized log-softmax
                let mut max_logit = f64::NEG_INFINITY;
                for c in 0..k {
                    max_logit = max_logit.max(logits.get(bn, c, y, x));
                }
                let mut sum_exp = 0.0;
                for c in 0..k {
                    sum_exp += (logits.get(bn, c, y, x) - max_logit).exp();
                }
                let log_sum = sum_exp.ln() + max_logit;
                loss += (log_sum - logits.get(bn, label, y, x)) * inv;
                for c in 0..k {
                    let p = (logits.get(bn, c, y, x) - log_sum).exp();
                    let onehot = if c == label { 1.0 } else { 0.0 };
                    grad.set(bn, c, y, x, (p - onehot) * inv);
                }
            }
        }
    }
    Ok((loss, grad))
}

fn binary_labels(mask: &BinaryMask) -> Vec<u8> {
    mask.bits().iter().map(|&b| u8::from(b)).collect()
}

/// Per-term decomposition of the joint loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossTerms {
    pub semantic: f64,
    pub saliency: f64,
    /// Present only when the refined saliency head exists.
    pub refined: Option<f64>,
}

impl LossTerms {
    pub fn total(&self) -> f64 {
        self.semantic + self.saliency + self.refined.unwrap_or(0.0)
    }
}

/// Joint loss over the forward outputs: semantic cross-entropy plus saliency
/// cross-entropy plus, where the refined head exists, the refined saliency
/// cross-entropy. Ground truths must already match the prediction size.
pub fn total_loss(
    out: &ForwardOutputs,
    sem_gt: &LabelMask,
    sal_gt: &BinaryMask,
) -> Result<(LossTerms, OutputGrads)> {
    let (_, _, h, w) = out.s_theta.shape();
    if sem_gt.width() != w || sem_gt.height() != h {
        return Err(Error::domain(format!(
            "semantic ground truth {}x{} does not match prediction {}x{}",
            sem_gt.width(),
            sem_gt.height(),
            w,
            h
        )));
    }
    if sal_gt.width() != w || sal_gt.height() != h {
        return Err(Error::domain(format!(
            "saliency ground truth {}x{} does not match prediction {}x{}",
            sal_gt.width(),
            sal_gt.height(),
            w,
            h
        )));
    }
    let (semantic, sem_grad) = cross_entropy_loss(&out.s_theta, sem_gt.labels())?;
    let sal_labels = binary_labels(sal_gt);
    let (saliency, sal_grad) = cross_entropy_loss(&out.s_d, &sal_labels)?;
    let (refined, refined_grad) = match out.s_d_refined.as_ref() {
        Some(r) => {
            let (l, g) = cross_entropy_loss(r, &sal_labels)?;
            (Some(l), Some(g))
        }
        None => (None, None),
    };
    Ok((
        LossTerms {
            semantic,
            saliency,
            refined,
        },
        OutputGrads {
            sem: sem_grad,
            sal: sal_grad,
            refined: refined_grad,
        },
    ))
}
