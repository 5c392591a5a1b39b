use thiserror::Error;

/// Crate-wide error type. Variants are grouped so the CLI can map them onto
/// its two failure exit codes (domain/validation vs. I/O).
#[derive(Debug, Error)]
pub enum Error {
    /// Violated precondition or inconsistent input data.
    #[error("{0}")]
    Domain(String),

    /// Tensor/layer shape mismatch; names the layer that rejected its input.
    #[error("shape mismatch in `{layer}`: {detail}")]
    Shape { layer: String, detail: String },

    /// Bad run-configuration or manifest contents.
    #[error("config error: {0}")]
    Config(String),

    /// Training aborted because the loss became non-finite.
    #[error("non-finite loss at step {0}")]
    NonFiniteLoss(usize),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Unreadable or structurally invalid image file.
    #[error("image error in `{path}`: {detail}")]
    Image { path: String, detail: String },
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn shape(layer: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Shape {
            layer: layer.into(),
            detail: detail.into(),
        }
    }

    /// True for failures caused by the environment (unreadable/missing files)
    /// rather than by invalid data or arguments.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_) | Error::Image { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
