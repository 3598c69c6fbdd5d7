use std::fmt;

use thiserror::Error;

use crate::root::RootError;

/// Pipeline stage that produced an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Spectrum,
    Support,
    Grid,
    Solve,
    Density,
    Cdf,
    Quantize,
    Invert,
    Simulate,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Spectrum => "spectrum",
            Stage::Support => "support",
            Stage::Grid => "grid",
            Stage::Solve => "mp-solve",
            Stage::Density => "density",
            Stage::Cdf => "cdf",
            Stage::Quantize => "quantize",
            Stage::Invert => "invert",
            Stage::Simulate => "simulate",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum QuestError {
    #[error("spectrum: empty eigenvalue list")]
    EmptySpectrum,

    #[error("spectrum: degenerate spectrum (all eigenvalues are zero)")]
    DegenerateSpectrum,

    #[error("spectrum: invalid eigenvalue {value} at index {index}")]
    InvalidEigenvalue { index: usize, value: f64 },

    #[error("spectrum: sample size must be positive")]
    ZeroSampleSize,

    #[error("{stage}: pole at u = {u} (coincides with a population eigenvalue)")]
    Pole { stage: Stage, u: f64 },

    #[error("{stage}: index {index} out of range (len {len})")]
    IndexOutOfRange {
        stage: Stage,
        index: usize,
        len: usize,
    },

    #[error("{stage}: root finding failed: {source}")]
    Root {
        stage: Stage,
        #[source]
        source: RootError,
    },

    #[error("density: not on MP solution manifold (imaginary residual {residual:e} at grid point {index})")]
    OffManifold { index: usize, residual: f64 },

    #[error("cdf: degenerate interval {interval} (zero raw mass)")]
    DegenerateInterval { interval: usize },

    #[error("{stage}: {message}")]
    Numerical { stage: Stage, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl QuestError {
    pub(crate) fn numerical(stage: Stage, message: impl Into<String>) -> Self {
        QuestError::Numerical {
            stage,
            message: message.into(),
        }
    }

    /// Stage the error originated from.
    pub fn stage(&self) -> Stage {
        match self {
            QuestError::EmptySpectrum
            | QuestError::DegenerateSpectrum
            | QuestError::InvalidEigenvalue { .. }
            | QuestError::ZeroSampleSize
            | QuestError::InvalidArgument(_) => Stage::Spectrum,
            QuestError::Pole { stage, .. }
            | QuestError::IndexOutOfRange { stage, .. }
            | QuestError::Root { stage, .. }
            | QuestError::Numerical { stage, .. } => *stage,
            QuestError::OffManifold { .. } => Stage::Density,
            QuestError::DegenerateInterval { .. } => Stage::Cdf,
        }
    }
}

pub type Result<T> = std::result::Result<T, QuestError>;
