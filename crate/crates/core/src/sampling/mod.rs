//! All randomness: reproducible counter-based streams, Haar measure on
//! U(q, F), the matrix-ball measure, the hypergroup convolution sampler
//! and the random-walk engine.
//!
//! Every sampler is a pure function of its [`RngStream`]; ensembles fan
//! out over per-replica streams so that results are independent of worker
//! count and scheduling order.

mod ball;
mod haar;
mod measure;
mod rng;
mod walk;

pub use ball::{sample_mp, BallStrategy, MpSampler};
pub use haar::haar_unitary;
pub use measure::{BaseLaw, EmpiricalMeasure, MeasureSpec, MeasureVariant};
pub use rng::RngStream;
pub use walk::{convolve_point_pair, simulate_ensemble, simulate_walk};

use thiserror::Error;

use crate::algebra::AlgebraError;

/// Proposals per accepted matrix-ball sample before the sampler gives up.
pub const REJECTION_CAP: u64 = 1_000_000;

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error(
        "matrix-ball density exponent gamma = {gamma:.4} is negative at \
         (q = {q}, d = {d}, p = {p}); the rejection envelope is unbounded"
    )]
    UnsupportedExponent { gamma: f64, q: usize, d: usize, p: f64 },
    #[error(
        "matrix-ball sampler exceeded {cap} proposals (strategy {strategy:?}, \
         gamma = {gamma:.4}, q = {q})"
    )]
    RejectionCapExceeded { cap: u64, strategy: BallStrategy, gamma: f64, q: usize },
    #[error("invalid measure specification: {0}")]
    InvalidSpec(String),
    #[error("decomposition failure inside a sampler: {0}")]
    Decomposition(#[from] AlgebraError),
}
