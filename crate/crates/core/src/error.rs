use thiserror::Error;

use crate::planner::DriftOrbit;

pub type Result<T> = std::result::Result<T, Error>;

/// Which stage of a transition map `F ∘ σ ∘ F` left the model domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    FirstInner,
    Scattering,
    SecondInner,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Stage::FirstInner => "first inner step",
            Stage::Scattering => "scattering step",
            Stage::SecondInner => "second inner step",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("mass ratio {0} outside (0, 0.5]")]
    InvalidMassRatio(f64),

    #[error("state within {distance:e} of primary P{primary}")]
    Singularity { primary: u8, distance: f64 },

    #[error("unexpected linear spectrum at L1: {0}")]
    Eigenstructure(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("no section crossing within t_max = {t_max}")]
    NoCrossing { t_max: f64 },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("torus {torus}: {msg}")]
    Invariant { torus: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("duplicate interpolation node {0}")]
    DuplicateNode(f64),

    #[error("need at least {needed} tori, grid has {found}")]
    InsufficientTori { needed: usize, found: usize },

    #[error("Fourier degree {requested} exceeds {max} (samples / 2)")]
    DegreeTooHigh { requested: usize, max: usize },

    #[error("fixed point did not converge after {iterations} iterations (last step {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("twist denominator {0:e} is singular")]
    SingularTwist(f64),

    #[error("resonant harmonic n = {n}: |e^(i n w0) - 1| = {divisor:e}")]
    Resonance { n: i32, divisor: f64 },

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("domain exit at {stage}: I = {action}")]
    DomainExit { stage: Stage, action: f64 },

    #[error("target not reached within {max_steps} steps")]
    MaxSteps {
        max_steps: usize,
        partial: Box<DriftOrbit>,
    },

    #[error("cell {to} unreachable from cell {from}")]
    Unreachable { from: usize, to: usize },

    #[error("livelock: cell {cell} with map {label} repeated {visits} times")]
    Livelock {
        cell: usize,
        label: String,
        visits: usize,
    },
}
