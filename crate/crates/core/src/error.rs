//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

use crate::field::Space;
use crate::solver::BlowupSignal;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("field is in {got:?} space, expected {expected:?}")]
    WrongSpace { expected: Space, got: Space },
    #[error("non-finite value at {node}: {context}")]
    NonFinite { node: String, context: String },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("{0}")]
    InvalidArgument(String),
    #[error("blow-up signal at t = {:.6} (sup ratio {:.3e}, H2 ratio {:.3e})", .0.t, .0.sup_ratio, .0.h2_ratio)]
    Blowup(Box<BlowupSignal>),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("snapshot {path}: {reason}")]
    Snapshot { path: PathBuf, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
