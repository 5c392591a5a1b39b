//! Full-batch gradient-descent trainer and finite-difference gradient
//! verification.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::{BinaryMask, LabelMask};
use crate::net::loss::{downsample_binary, downsample_labels, total_loss};
use crate::net::tensor::Tensor4;
use crate::net::variant::{Network, Variant, VariantConfig};

/// One training example: input tensor plus full-resolution ground truths.
#[derive(Debug, Clone)]
pub struct TrainSample {
    pub input: Tensor4,
    pub sem_gt: LabelMask,
    pub sal_gt: BinaryMask,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyper {
    pub lr: f64,
    pub steps: usize,
    pub seed: u64,
}

impl Default for Hyper {
    fn default() -> Self {
        Hyper {
            lr: 0.1,
            steps: 500,
            seed: 42,
        }
    }
}

/// Trains a freshly initialized network by plain full-batch gradient descent.
///
/// The loss trace records the mean joint loss of each step, evaluated before
/// that step's update. Deterministic for a fixed seed: identical runs produce
/// bitwise-identical traces.
pub fn train(
    cfg: &VariantConfig,
    dataset: &[TrainSample],
    hyper: &Hyper,
) -> Result<(Network, Vec<f64>)> {
    if dataset.is_empty() {
        return Err(Error::domain("training dataset is empty"));
    }
    if hyper.lr <= 0.0 || !hyper.lr.is_finite() {
        return Err(Error::domain(format!(
            "learning rate {} must be positive",
            hyper.lr
        )));
    }
    let mut net = Network::new(cfg.clone(), hyper.seed)?;
    // ground truths downsampled once to the prediction resolution
    let prepared: Vec<(Tensor4, LabelMask, BinaryMask)> = dataset
        .iter()
        .map(|s| {
            let (_, _, h, w) = s.input.shape();
            let sem = downsample_labels(&s.sem_gt, h / 8, w / 8)?;
            let sal = downsample_binary(&s.sal_gt, h / 8, w / 8)?;
            Ok((s.input.clone(), sem, sal))
        })
        .collect::<Result<_>>()?;

    let mut trace = Vec::with_capacity(hyper.steps);
    let scale = 1.0 / prepared.len() as f64;
    for step in 0..hyper.steps {
        let mut step_loss = 0.0;
        let mut grads = vec![0.0; net.params.num_scalars()];
        for (input, sem, sal) in &prepared {
            let (out, tr) = net.forward(input)?;
            let (terms, seeds) = total_loss(&out, sem, sal)?;
            step_loss += terms.total() * scale;
            let g = net.backward(&tr, &seeds);
            for (acc, gi) in grads.iter_mut().zip(g) {
                *acc += gi * scale;
            }
        }
        if !step_loss.is_finite() {
            return Err(Error::NonFiniteLoss(step));
        }
        trace.push(step_loss);
        net.apply_gradients(&grads, hyper.lr);
    }
    Ok((net, trace))
}

/// Mean joint loss of a network over a prepared dataset, without updating.
pub fn evaluate_loss(net: &Network, dataset: &[TrainSample]) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::domain("dataset is empty"));
    }
    let mut total = 0.0;
    for s in dataset {
        let (_, _, h, w) = s.input.shape();
        let sem = downsample_labels(&s.sem_gt, h / 8, w / 8)?;
        let sal = downsample_binary(&s.sal_gt, h / 8, w / 8)?;
        let (out, _) = net.forward(&s.input)?;
        let (terms, _) = total_loss(&out, &sem, &sal)?;
        total += terms.total();
    }
    Ok(total / dataset.len() as f64)
}

/// Outcome of one finite-difference verification run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GradCheckReport {
    pub variant: Variant,
    pub num_params: usize,
    pub max_rel_err: f64,
    /// Parameter tensor owning the worst scalar.
    pub worst_param: String,
    pub tolerance: f64,
    pub passed: bool,
}

/// Compares analytic parameter gradients against central finite differences
/// of the joint loss, scalar by scalar.
///
/// The relative error denominator is floored at 1e-6: below that both sides
/// are numerically zero and the quotient would only amplify rounding noise.
pub fn gradient_check(
    cfg: &VariantConfig,
    seed: u64,
    sample: &TrainSample,
    fd_step: f64,
    tolerance: f64,
) -> Result<GradCheckReport> {
    let mut net = Network::new(cfg.clone(), seed)?;
    let (_, _, h, w) = sample.input.shape();
    let sem = downsample_labels(&sample.sem_gt, h / 8, w / 8)?;
    let sal = downsample_binary(&sample.sal_gt, h / 8, w / 8)?;

    let (out, tr) = net.forward(&sample.input)?;
    let (_, seeds) = total_loss(&out, &sem, &sal)?;
    let analytic = net.backward(&tr, &seeds);

    let mut max_rel_err = 0.0;
    let mut worst_param = String::new();
    let num_params = net.params.num_scalars();
    for i in 0..num_params {
        let (slot, _) = net.params.scalar_mut(i);
        let orig = *slot;
        *slot = orig + fd_step;
        let plus = loss_only(&net, &sample.input, &sem, &sal)?;
        let (slot, _) = net.params.scalar_mut(i);
        *slot = orig - fd_step;
        let minus = loss_only(&net, &sample.input, &sem, &sal)?;
        let (slot, name) = net.params.scalar_mut(i);
        *slot = orig;
        let name = name.to_string();
        let fd = (plus - minus) / (2.0 * fd_step);
        let rel = (fd - analytic[i]).abs() / fd.abs().max(analytic[i].abs()).max(1e-6);
        if rel > max_rel_err {
            max_rel_err = rel;
            worst_param = name;
        }
    }
    Ok(GradCheckReport {
        variant: cfg.variant,
        num_params,
        max_rel_err,
        worst_param,
        tolerance,
        passed: max_rel_err < tolerance,
    })
}

fn loss_only(
    net: &Network,
    input: &Tensor4,
    sem: &LabelMask,
    sal: &BinaryMask,
) -> Result<f64> {
    let (out, _) = net.forward(input)?;
    let (terms, _) = total_loss(&out, sem, sal)?;
    Ok(terms.total())
}

/// Deterministic pseudo-random sample for gradient checks: input values and
/// labels drawn from a seeded generator over the full label alphabets.
pub fn gradcheck_sample(h: usize, w: usize, num_sem_classes: usize, seed: u64) -> TrainSample {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut input = Tensor4::zeros(1, 3, h, w);
    for v in input.data_mut() {
        *v = rng.gen::<f64>() * 2.0 - 1.0;
    }
    let sem_labels: Vec<u8> = (0..h * w)
        .map(|_| rng.gen_range(0..num_sem_classes as u8))
        .collect();
    let sal_bits: Vec<bool> = (0..h * w).map(|_| rng.gen()).collect();
    TrainSample {
        input,
        sem_gt: LabelMask::new(w, h, sem_labels, num_sem_classes - 1).unwrap(),
        sal_gt: BinaryMask::new(w, h, sal_bits).unwrap(),
    }
}
