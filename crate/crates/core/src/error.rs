use thiserror::Error;

use crate::model::Regime;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SwweError {
    #[error("invalid value for `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    #[error("inconsistent flow configuration: {0}")]
    Inconsistent(String),

    #[error("operation requires {expected} flow, got {found}")]
    Regime { expected: &'static str, found: Regime },

    #[error("inadmissible boundary treatment: {0}")]
    Inadmissible(String),

    #[error(
        "boundary layout ({left} at x=0, {right} at x=L) does not match {regime} \
         (requires {req_left} at x=0, {req_right} at x=L)"
    )]
    Layout {
        regime: Regime,
        left: usize,
        right: usize,
        req_left: usize,
        req_right: usize,
    },

    #[error("grid error: {0}")]
    Grid(String),

    #[error("shape mismatch: expected length {expected}, got {found}")]
    Shape { expected: usize, found: usize },

    #[error("solution diverged at step {step} (t = {time}): non-finite value in stage {stage}")]
    Diverged { step: usize, time: f64, stage: usize },
}

pub type Result<T> = std::result::Result<T, SwweError>;
