//! Dual-task network variants and their wiring.
//!
//! Every variant shares a convolutional backbone that brings the input to 1/8
//! resolution; they differ in how the semantic and saliency prediction paths
//! are connected:
//!
//! * `V0SharedHeads` — two 1×1 prediction heads directly on the backbone
//!   features.
//! * `V1Sequential` — semantic head first, then a 3×3 convolution over the
//!   semantic logits produces the saliency logits.
//! * `V2Branches` — unshared per-task branches between the backbone and the
//!   two heads.
//! * `V3Refined` — as V2, plus a refined saliency head over the channel
//!   concatenation of both predictions.
//! * `V4Gated` — saliency branch features are concatenated into the semantic
//!   branch input through a channel-restoring 1×1 convolution.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::layer::{
    concat_backward, concat_forward, conv2d_backward, conv2d_forward, relu_backward,
    relu_forward, ConvSpec, LayerSpec,
};
use crate::net::tensor::Tensor4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    V0SharedHeads,
    V1Sequential,
    V2Branches,
    V3Refined,
    V4Gated,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::V0SharedHeads,
        Variant::V1Sequential,
        Variant::V2Branches,
        Variant::V3Refined,
        Variant::V4Gated,
    ];

    pub fn parse(s: &str) -> Result<Variant> {
        match s.to_ascii_lowercase().as_str() {
            "v0" | "shared-heads" => Ok(Variant::V0SharedHeads),
            "v1" | "sequential" => Ok(Variant::V1Sequential),
            "v2" | "branches" => Ok(Variant::V2Branches),
            "v3" | "refined" => Ok(Variant::V3Refined),
            "v4" | "gated" => Ok(Variant::V4Gated),
            other => Err(Error::Config(format!(
                "unknown variant `{}` (expected v0..v4)",
                other
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Variant::V0SharedHeads => "v0",
            Variant::V1Sequential => "v1",
            Variant::V2Branches => "v2",
            Variant::V3Refined => "v3",
            Variant::V4Gated => "v4",
        }
    }
}

/// Declarative wiring of one network variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantConfig {
    pub variant: Variant,
    /// Backbone stack; must downsample by exactly 8 in each spatial dimension.
    pub backbone: Vec<LayerSpec>,
    /// Per-task branch template, instantiated twice without weight sharing.
    pub branch: Vec<LayerSpec>,
    /// Semantic classes including background (C+1).
    pub num_sem_classes: usize,
    /// Saliency classes (background / salient).
    pub num_sal_classes: usize,
}

impl VariantConfig {
    /// Desk-scale default: three stride-2 convolutions down to 1/8 resolution
    /// followed by a dilation-2 context convolution, and two-convolution task
    /// branches.
    pub fn toy(variant: Variant, num_sem_classes: usize) -> Self {
        Self::toy_sized(variant, num_sem_classes, [8, 12, 16], 16, 2)
    }

    /// Reduced-width configuration; used where full finite-difference sweeps
    /// over every parameter must stay fast.
    pub fn toy_slim(variant: Variant, num_sem_classes: usize) -> Self {
        Self::toy_sized(variant, num_sem_classes, [4, 6, 8], 8, 2)
    }

    pub fn toy_sized(
        variant: Variant,
        num_sem_classes: usize,
        backbone_ch: [usize; 3],
        branch_ch: usize,
        branch_depth: usize,
    ) -> Self {
        let backbone = vec![
            LayerSpec::Conv(ConvSpec::k3(3, backbone_ch[0], 2, 1)),
            LayerSpec::Relu,
            LayerSpec::Conv(ConvSpec::k3(backbone_ch[0], backbone_ch[1], 2, 1)),
            LayerSpec::Relu,
            LayerSpec::Conv(ConvSpec::k3(backbone_ch[1], backbone_ch[2], 2, 1)),
            LayerSpec::Relu,
            LayerSpec::Conv(ConvSpec::k3(backbone_ch[2], backbone_ch[2], 1, 2)),
            LayerSpec::Relu,
        ];
        let mut branch = Vec::new();
        let mut in_ch = backbone_ch[2];
        for _ in 0..branch_depth {
            branch.push(LayerSpec::Conv(ConvSpec::k3(in_ch, branch_ch, 1, 1)));
            branch.push(LayerSpec::Relu);
            in_ch = branch_ch;
        }
        VariantConfig {
            variant,
            backbone,
            branch,
            num_sem_classes,
            num_sal_classes: 2,
        }
    }

    pub fn input_channels(&self) -> usize {
        self.backbone
            .iter()
            .find_map(|l| match l {
                LayerSpec::Conv(s) => Some(s.in_ch),
                LayerSpec::Relu => None,
            })
            .unwrap_or(3)
    }

    /// Channel count delivered by the backbone.
    pub fn backbone_out_channels(&self) -> usize {
        self.backbone
            .iter()
            .rev()
            .find_map(|l| match l {
                LayerSpec::Conv(s) => Some(s.out_ch),
                LayerSpec::Relu => None,
            })
            .unwrap_or(self.input_channels())
    }

    /// Channel count delivered by a branch instance (backbone channels when
    /// the branch template is empty).
    pub fn branch_out_channels(&self) -> usize {
        self.branch
            .iter()
            .rev()
            .find_map(|l| match l {
                LayerSpec::Conv(s) => Some(s.out_ch),
                LayerSpec::Relu => None,
            })
            .unwrap_or(self.backbone_out_channels())
    }

    fn backbone_stride(&self) -> usize {
        self.backbone
            .iter()
            .map(|l| match l {
                LayerSpec::Conv(s) => s.stride,
                LayerSpec::Relu => 1,
            })
            .product()
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_sem_classes < 2 {
            return Err(Error::Config(
                "num_sem_classes must cover background plus at least one category".into(),
            ));
        }
        if self.num_sal_classes != 2 {
            return Err(Error::Config("num_sal_classes must be 2".into()));
        }
        let stride = self.backbone_stride();
        if stride != 8 {
            return Err(Error::Config(format!(
                "backbone downsamples by {}, expected exactly 8",
                stride
            )));
        }
        let branch_stride: usize = self
            .branch
            .iter()
            .map(|l| match l {
                LayerSpec::Conv(s) => s.stride,
                LayerSpec::Relu => 1,
            })
            .product();
        if branch_stride != 1 {
            return Err(Error::Config(
                "branch template must preserve spatial resolution".into(),
            ));
        }
        if let Some(LayerSpec::Conv(first)) = self
            .branch
            .iter()
            .find(|l| matches!(l, LayerSpec::Conv(_)))
        {
            if first.in_ch != self.backbone_out_channels() {
                return Err(Error::Config(format!(
                    "branch input channels {} do not match backbone output {}",
                    first.in_ch,
                    self.backbone_out_channels()
                )));
            }
        }
        Ok(())
    }
}

/// A named, shaped parameter tensor (convolution weight + bias).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvParam {
    pub name: String,
    pub spec: ConvSpec,
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl ConvParam {
    pub fn len(&self) -> usize {
        self.weight.len() + self.bias.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// All learnable parameters of a network, in a fixed declaration order so the
/// flat view is stable across runs with the same configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSet {
    pub convs: Vec<ConvParam>,
}

impl ParamSet {
    pub fn num_scalars(&self) -> usize {
        self.convs.iter().map(|c| c.len()).sum()
    }

    /// Copies every parameter into one flat vector (weights then bias, conv by
    /// conv in declaration order).
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_scalars());
        for c in &self.convs {
            out.extend_from_slice(&c.weight);
            out.extend_from_slice(&c.bias);
        }
        out
    }

    pub fn load_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.num_scalars() {
            return Err(Error::domain(format!(
                "flat parameter buffer has {} scalars, expected {}",
                flat.len(),
                self.num_scalars()
            )));
        }
        let mut at = 0;
        for c in &mut self.convs {
            let wl = c.weight.len();
            c.weight.copy_from_slice(&flat[at..at + wl]);
            at += wl;
            let bl = c.bias.len();
            c.bias.copy_from_slice(&flat[at..at + bl]);
            at += bl;
        }
        Ok(())
    }

    /// Mutable access to one scalar by flat index; returns the owning conv's
    /// name for diagnostics.
    pub fn scalar_mut(&mut self, flat_index: usize) -> (&mut f64, &str) {
        let mut at = flat_index;
        for c in &mut self.convs {
            if at < c.weight.len() {
                return (&mut c.weight[at], &c.name);
            }
            at -= c.weight.len();
            if at < c.bias.len() {
                return (&mut c.bias[at], &c.name);
            }
            at -= c.bias.len();
        }
        panic!("flat index {} out of range", flat_index);
    }
}

/// Node of the per-variant computation graph. Nodes are listed in topological
/// order; `src` indices always point at earlier nodes.
#[derive(Debug, Clone, PartialEq)]
enum Node {
    Input,
    Conv { src: usize, param: usize },
    Relu { src: usize },
    Concat { a: usize, b: usize },
}

/// Prediction maps produced by one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardOutputs {
    /// Semantic logits (n, C+1, h/8, w/8).
    pub s_theta: Tensor4,
    /// Saliency logits (n, 2, h/8, w/8).
    pub s_d: Tensor4,
    /// Refined saliency logits; present only on the refined variant.
    pub s_d_refined: Option<Tensor4>,
}

/// A wired network: graph plus parameters.
#[derive(Debug, Clone)]
pub struct Network {
    pub config: VariantConfig,
    pub params: ParamSet,
    nodes: Vec<Node>,
    sem_node: usize,
    sal_node: usize,
    refined_node: Option<usize>,
}

/// Activations cached by a forward pass, needed for the backward pass.
pub struct ForwardTrace {
    activations: Vec<Tensor4>,
}

struct GraphBuilder {
    nodes: Vec<Node>,
    params: Vec<ConvParam>,
    rng: ChaCha8Rng,
}

impl GraphBuilder {
    fn new(seed: u64) -> Self {
        GraphBuilder {
            nodes: vec![Node::Input],
            params: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// He-style fan-in initialization; biases start at zero.
    fn init_conv(&mut self, name: &str, spec: ConvSpec) -> usize {
        let fan_in = (spec.in_ch * spec.kernel * spec.kernel) as f64;
        let normal = Normal::new(0.0, (2.0 / fan_in).sqrt()).expect("finite std");
        let weight = (0..spec.weight_len())
            .map(|_| normal.sample(&mut self.rng))
            .collect();
        self.params.push(ConvParam {
            name: name.to_string(),
            spec,
            weight,
            bias: vec![0.0; spec.out_ch],
        });
        self.params.len() - 1
    }

    fn conv(&mut self, src: usize, name: &str, spec: ConvSpec) -> usize {
        let param = self.init_conv(name, spec);
        self.nodes.push(Node::Conv { src, param });
        self.nodes.len() - 1
    }

    fn relu(&mut self, src: usize) -> usize {
        self.nodes.push(Node::Relu { src });
        self.nodes.len() - 1
    }

    fn concat(&mut self, a: usize, b: usize) -> usize {
        self.nodes.push(Node::Concat { a, b });
        self.nodes.len() - 1
    }

    fn stack(&mut self, mut at: usize, prefix: &str, layers: &[LayerSpec]) -> usize {
        for (i, layer) in layers.iter().enumerate() {
            at = match layer {
                LayerSpec::Conv(spec) => self.conv(at, &format!("{}.{}", prefix, i), *spec),
                LayerSpec::Relu => self.relu(at),
            };
        }
        at
    }
}

impl Network {
    /// Builds the graph for `config` and initializes parameters from `seed`.
    pub fn new(config: VariantConfig, seed: u64) -> Result<Network> {
        config.validate()?;
        let mut b = GraphBuilder::new(seed);
        let backbone_out = b.stack(0, "backbone", &config.backbone);
        let feat_ch = config.backbone_out_channels();
        let branch_ch = config.branch_out_channels();
        let sem_head = ConvSpec::k1(branch_ch, config.num_sem_classes);
        let sal_head = ConvSpec::k1(branch_ch, config.num_sal_classes);

        let (sem_node, sal_node, refined_node) = match config.variant {
            Variant::V0SharedHeads => {
                let sem = b.conv(
                    backbone_out,
                    "sem_head",
                    ConvSpec::k1(feat_ch, config.num_sem_classes),
                );
                let sal = b.conv(
                    backbone_out,
                    "sal_head",
                    ConvSpec::k1(feat_ch, config.num_sal_classes),
                );
                (sem, sal, None)
            }
            Variant::V1Sequential => {
                let sem = b.conv(
                    backbone_out,
                    "sem_head",
                    ConvSpec::k1(feat_ch, config.num_sem_classes),
                );
                // saliency read directly off the semantic logits
                let sal = b.conv(
                    sem,
                    "sal_from_sem",
                    ConvSpec::k3(config.num_sem_classes, config.num_sal_classes, 1, 1),
                );
                (sem, sal, None)
            }
            Variant::V2Branches | Variant::V3Refined => {
                let sem_feat = b.stack(backbone_out, "sem_branch", &config.branch);
                let sem = b.conv(sem_feat, "sem_head", sem_head);
                let sal_feat = b.stack(backbone_out, "sal_branch", &config.branch);
                let sal = b.conv(sal_feat, "sal_head", sal_head);
                let refined = if config.variant == Variant::V3Refined {
                    let cat = b.concat(sem, sal);
                    Some(b.conv(
                        cat,
                        "refine",
                        ConvSpec::k3(
                            config.num_sem_classes + config.num_sal_classes,
                            config.num_sal_classes,
                            1,
                            1,
                        ),
                    ))
                } else {
                    None
                };
                (sem, sal, refined)
            }
            Variant::V4Gated => {
                let sal_feat = b.stack(backbone_out, "sal_branch", &config.branch);
                let sal = b.conv(sal_feat, "sal_head", sal_head);
                // gate: saliency features joined to the semantic branch input,
                // then a 1x1 conv restores the expected channel count
                let cat = b.concat(backbone_out, sal_feat);
                let gate = b.conv(cat, "gate", ConvSpec::k1(feat_ch + branch_ch, feat_ch));
                let sem_feat = b.stack(gate, "sem_branch", &config.branch);
                let sem = b.conv(sem_feat, "sem_head", sem_head);
                (sem, sal, None)
            }
        };

        Ok(Network {
            config,
            params: ParamSet { convs: b.params },
            nodes: b.nodes,
            sem_node,
            sal_node,
            refined_node,
        })
    }

    /// Runs the graph, returning the prediction maps and the activation trace
    /// needed for [`Network::backward`].
    pub fn forward(&self, x: &Tensor4) -> Result<(ForwardOutputs, ForwardTrace)> {
        let (_, c, h, w) = x.shape();
        if c != self.config.input_channels() {
            return Err(Error::shape(
                "input",
                format!(
                    "expected {} channels, got {}",
                    self.config.input_channels(),
                    c
                ),
            ));
        }
        if h % 8 != 0 || w % 8 != 0 {
            return Err(Error::shape(
                "input",
                format!("spatial dims {}x{} must be divisible by 8", h, w),
            ));
        }
        let mut acts: Vec<Tensor4> = Vec::with_capacity(self.nodes.len());
        for (i, node) in self.nodes.iter().enumerate() {
            let out = match node {
                Node::Input => x.clone(),
                Node::Conv { src, param } => {
                    let p = &self.params.convs[*param];
                    conv2d_forward(&acts[*src], &p.weight, &p.bias, &p.spec, &p.name)?
                }
                Node::Relu { src } => relu_forward(&acts[*src]),
                Node::Concat { a, b } => {
                    concat_forward(&acts[*a], &acts[*b], &format!("concat.{}", i))?
                }
            };
            acts.push(out);
        }
        let outputs = ForwardOutputs {
            s_theta: acts[self.sem_node].clone(),
            s_d: acts[self.sal_node].clone(),
            s_d_refined: self.refined_node.map(|n| acts[n].clone()),
        };
        Ok((outputs, ForwardTrace { activations: acts }))
    }

    /// Reverse accumulation through the graph. `seeds` pairs output node roles
    /// with dL/d(logits); returns dL/d(parameter) aligned with the flat layout
    /// of [`ParamSet::to_flat`].
    pub fn backward(&self, trace: &ForwardTrace, seeds: &OutputGrads) -> Vec<f64> {
        let mut node_grads: Vec<Option<Tensor4>> = vec![None; self.nodes.len()];
        let add_grad = |slot: &mut Option<Tensor4>, g: &Tensor4| match slot {
            Some(acc) => acc.accumulate(g),
            None => *slot = Some(g.clone()),
        };
        add_grad(&mut node_grads[self.sem_node], &seeds.sem);
        add_grad(&mut node_grads[self.sal_node], &seeds.sal);
        if let (Some(n), Some(g)) = (self.refined_node, seeds.refined.as_ref()) {
            add_grad(&mut node_grads[n], g);
        }

        let mut grads: Vec<(Vec<f64>, Vec<f64>)> = self
            .params
            .convs
            .iter()
            .map(|c| (vec![0.0; c.weight.len()], vec![0.0; c.bias.len()]))
            .collect();

        for i in (0..self.nodes.len()).rev() {
            let Some(gout) = node_grads[i].take() else {
                continue;
            };
            match &self.nodes[i] {
                Node::Input => {}
                Node::Conv { src, param } => {
                    let p = &self.params.convs[*param];
                    let (gx, gw, gb) =
                        conv2d_backward(&trace.activations[*src], &p.weight, &p.spec, &gout);
                    for (a, b) in grads[*param].0.iter_mut().zip(gw) {
                        *a += b;
                    }
                    for (a, b) in grads[*param].1.iter_mut().zip(gb) {
                        *a += b;
                    }
                    match &mut node_grads[*src] {
                        Some(acc) => acc.accumulate(&gx),
                        slot => *slot = Some(gx),
                    }
                }
                Node::Relu { src } => {
                    let gx = relu_backward(&trace.activations[*src], &gout);
                    match &mut node_grads[*src] {
                        Some(acc) => acc.accumulate(&gx),
                        slot => *slot = Some(gx),
                    }
                }
                Node::Concat { a, b } => {
                    let ca = trace.activations[*a].channels();
                    let (ga, gb) = concat_backward(&gout, ca);
                    match &mut node_grads[*a] {
                        Some(acc) => acc.accumulate(&ga),
                        slot => *slot = Some(ga),
                    }
                    match &mut node_grads[*b] {
                        Some(acc) => acc.accumulate(&gb),
                        slot => *slot = Some(gb),
                    }
                }
            }
        }

        let mut flat = Vec::with_capacity(self.params.num_scalars());
        for (gw, gb) in grads {
            flat.extend(gw);
            flat.extend(gb);
        }
        flat
    }

    /// Applies one gradient-descent step to every parameter.
    pub fn apply_gradients(&mut self, flat_grads: &[f64], lr: f64) {
        debug_assert_eq!(flat_grads.len(), self.params.num_scalars());
        let mut at = 0;
        for c in &mut self.params.convs {
            for w in &mut c.weight {
                *w -= lr * flat_grads[at];
                at += 1;
            }
            for b in &mut c.bias {
                *b -= lr * flat_grads[at];
                at += 1;
            }
        }
    }
}

/// Loss gradients with respect to each prediction map.
pub struct OutputGrads {
    pub sem: Tensor4,
    pub sal: Tensor4,
    pub refined: Option<Tensor4>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn input(h: usize, w: usize) -> Tensor4 {
        let mut t = Tensor4::zeros(1, 3, h, w);
        for (i, v) in t.data_mut().iter_mut().enumerate() {
            *v = ((i % 17) as f64) / 17.0 - 0.3;
        }
        t
    }

    #[test]
    fn all_variants_hit_eighth_resolution() {
        for variant in Variant::ALL {
            let net = Network::new(VariantConfig::toy_slim(variant, 4), 7).unwrap();
            for (h, w) in [(16, 16), (24, 32), (64, 16)] {
                let (out, _) = net.forward(&input(h, w)).unwrap();
                assert_eq!(out.s_theta.shape(), (1, 4, h / 8, w / 8), "{:?}", variant);
                assert_eq!(out.s_d.shape(), (1, 2, h / 8, w / 8), "{:?}", variant);
                if variant == Variant::V3Refined {
                    let r = out.s_d_refined.as_ref().unwrap();
                    assert_eq!(r.shape(), (1, 2, h / 8, w / 8));
                } else {
                    assert!(out.s_d_refined.is_none());
                }
            }
        }
    }

    #[test]
    fn refined_head_with_zero_weights_outputs_zero() {
        let mut net = Network::new(VariantConfig::toy_slim(Variant::V3Refined, 4), 3).unwrap();
        for c in &mut net.params.convs {
            if c.name == "refine" {
                c.weight.iter_mut().for_each(|w| *w = 0.0);
                c.bias.iter_mut().for_each(|b| *b = 0.0);
            }
        }
        let (out, _) = net.forward(&input(16, 16)).unwrap();
        assert!(out
            .s_d_refined
            .unwrap()
            .data()
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn gate_restores_semantic_branch_channels() {
        let cfg = VariantConfig::toy_slim(Variant::V4Gated, 4);
        let feat = cfg.backbone_out_channels();
        let branch = cfg.branch_out_channels();
        let net = Network::new(cfg, 1).unwrap();
        let gate = net
            .params
            .convs
            .iter()
            .find(|c| c.name == "gate")
            .expect("gated variant has a gate conv");
        assert_eq!(gate.spec.in_ch, feat + branch);
        assert_eq!(gate.spec.out_ch, feat);
        // and the forward pass accepts it
        net.forward(&input(16, 16)).unwrap();
    }

    #[test]
    fn v2_with_empty_branches_reproduces_v0() {
        let mut v2cfg = VariantConfig::toy_slim(Variant::V2Branches, 4);
        v2cfg.branch.clear();
        let v0 = Network::new(VariantConfig::toy_slim(Variant::V0SharedHeads, 4), 99).unwrap();
        let v2 = Network::new(v2cfg, 99).unwrap();
        let x = input(16, 16);
        let (a, _) = v0.forward(&x).unwrap();
        let (b, _) = v2.forward(&x).unwrap();
        assert_eq!(a.s_theta, b.s_theta);
        assert_eq!(a.s_d, b.s_d);
    }

    #[test]
    fn constant_input_gives_constant_interior_logits() {
        // zero padding corrupts a border; interior pixels of a constant input
        // must map to one constant logit per channel
        let x = Tensor4::from_vec(1, 3, 128, 128, vec![0.37; 3 * 128 * 128]).unwrap();
        for variant in Variant::ALL {
            let net = Network::new(VariantConfig::toy_slim(variant, 4), 21).unwrap();
            let (out, _) = net.forward(&x).unwrap();
            let t = &out.s_theta;
            let (_, cs, hh, ww) = t.shape();
            let m = 7; // contamination margin at 1/8 resolution (V4 sem path is deepest)
            for c in 0..cs {
                let reference = t.get(0, c, m, m);
                for y in m..hh - m {
                    for xx in m..ww - m {
                        assert!(
                            (t.get(0, c, y, xx) - reference).abs() < 1e-9,
                            "{:?} interior not constant at ({}, {}, {})",
                            variant,
                            c,
                            y,
                            xx
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_input_not_divisible_by_8() {
        let net = Network::new(VariantConfig::toy_slim(Variant::V2Branches, 4), 7).unwrap();
        let x = Tensor4::zeros(1, 3, 20, 16);
        assert!(net.forward(&x).is_err());
    }

    #[test]
    fn rejects_backbone_without_factor_8() {
        let mut cfg = VariantConfig::toy_slim(Variant::V2Branches, 4);
        cfg.backbone = vec![LayerSpec::Conv(ConvSpec::k3(3, 4, 2, 1))];
        assert!(Network::new(cfg, 0).is_err());
    }

    #[test]
    fn flat_roundtrip_preserves_params() {
        let mut net = Network::new(VariantConfig::toy_slim(Variant::V3Refined, 4), 5).unwrap();
        let flat = net.params.to_flat();
        let before = net.params.clone();
        net.params.load_flat(&flat).unwrap();
        assert_eq!(before, net.params);
        assert_eq!(flat.len(), net.params.num_scalars());
    }
}
