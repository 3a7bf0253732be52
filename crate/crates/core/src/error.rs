use thiserror::Error;

/// Errors raised by the simulation engines, the protocol pipeline and the harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QssError {
    #[error("dimension must be at least 2, got {0}")]
    InvalidDimension(usize),

    #[error("label {label} is outside Z_{dim}")]
    LabelOutOfRange { label: usize, dim: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("operation needs exactly {expected} subsystems, state has {found}")]
    SubsystemCount { expected: usize, found: usize },

    #[error("subsystem index {index} out of range for {count} subsystems")]
    SubsystemIndex { index: usize, count: usize },

    #[error("state norm {norm} deviates from 1 beyond tolerance")]
    NormCorrupted { norm: f64 },

    #[error("round {0} is not valid (odd announced parity)")]
    InvalidRound(u64),

    #[error("length mismatch: expected at most {expected}, got {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("insufficient samples: need at least {needed}, got {found}")]
    InsufficientSamples { needed: u64, found: u64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("joint state would need {requested} amplitudes, cap is {cap}")]
    DimensionCap { requested: u128, cap: u128 },
}

pub type Result<T> = std::result::Result<T, QssError>;
