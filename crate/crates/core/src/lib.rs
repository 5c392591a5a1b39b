//! Desk-scale laboratory for joint semantic segmentation and saliency
//! prediction.
//!
//! The crate provides:
//!
//! * [`mask`] — raster domain types (label masks, saliency maps, binary
//!   masks) and elementary mask algebra;
//! * [`ranking`] — relative saliency ranking of the semantic categories in
//!   an image;
//! * [`stats`] — dataset-level distribution, co-occurrence, and precedence
//!   statistics over rank tables;
//! * [`metrics`] — segmentation metrics (pixel/mean accuracy, IoU, mIoU) and
//!   saliency metrics (max F-measure, ROC AUC, MAE);
//! * [`net`] — a toy differentiable dual-task convolutional network with
//!   five wiring variants, a joint loss, a trainer, and finite-difference
//!   gradient verification;
//! * [`io`] — PNG ingestion (indexed/gray 8-bit), dataset manifests, and
//!   synthetic scene generation with planted rank order;
//! * [`report`] — CSV/JSON/SVG report rendering.

pub mod error;
pub mod io;
pub mod mask;
pub mod metrics;
pub mod net;
pub mod ranking;
pub mod report;
pub mod stats;

pub use error::{Error, Result};
