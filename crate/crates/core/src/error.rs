//! Error types shared across the crate.

use thiserror::Error;

/// Errors raised while loading or generating tensors.
#[derive(Debug, Error)]
pub enum TensorError {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error("requested {requested} nonzeros but the index space only holds {capacity}")]
    Capacity { requested: u64, capacity: u128 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Errors raised by the MTTKRP kernels.
#[derive(Debug, Error)]
pub enum KernelError {
    #[error("mode {mode} out of range for a {num_modes}-mode tensor")]
    ModeOutOfRange { mode: usize, num_modes: usize },
    #[error("expected {expected} factor matrices, got {got}")]
    FactorCount { expected: usize, got: usize },
    #[error("factor for mode {mode} has rank {rank}, expected {expected}")]
    RankMismatch {
        mode: usize,
        rank: usize,
        expected: usize,
    },
    #[error("factor for mode {mode} has {rows} rows but the tensor dim is {dim}")]
    ShapeMismatch { mode: usize, rows: usize, dim: u32 },
    #[error("dense oracle refuses {cells} cells (limit {limit})")]
    OracleCapacity { cells: u128, limit: u64 },
}

/// Errors raised by the memory-technology models.
#[derive(Debug, Error)]
pub enum MemtechError {
    #[error("{active} active bits exceed the {max} bits a block can serve per cycle")]
    ActiveBitsExceedService { active: u64, max: u64 },
}

/// Aggregated configuration violations; each entry names the offending field.
#[derive(Debug, Error)]
#[error("invalid configuration:\n  {}", violations.join("\n  "))]
pub struct ConfigError {
    pub violations: Vec<String>,
}

impl ConfigError {
    pub fn single(msg: impl Into<String>) -> Self {
        ConfigError {
            violations: vec![msg.into()],
        }
    }
}

/// Errors raised by the simulator driver.
#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("ordering rejected for mode {mode}: {msg}")]
    BadOrdering { mode: usize, msg: String },
    #[error("reports are not comparable: {0}")]
    ReportMismatch(String),
}
