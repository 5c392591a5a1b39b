//! Toy-scale differentiable dual-task network: tensors, layer primitives,
//! the five wiring variants, the joint loss, a gradient-descent trainer, and
//! finite-difference gradient verification.

pub mod checkpoint;
pub mod config;
pub mod layer;
pub mod loss;
pub mod tensor;
pub mod train;
pub mod variant;

pub use config::RunConfig;
pub use layer::{ConvSpec, LayerSpec};
pub use loss::{cross_entropy_loss, downsample_binary, downsample_labels, total_loss, LossTerms};
pub use tensor::Tensor4;
pub use train::{
    evaluate_loss, gradcheck_sample, gradient_check, train, GradCheckReport, Hyper, TrainSample,
};
pub use variant::{ForwardOutputs, Network, OutputGrads, ParamSet, Variant, VariantConfig};
