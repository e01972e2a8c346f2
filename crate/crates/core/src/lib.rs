//! Graph-constrained temporal subspace clustering for motion segmentation.
//!
//! The pipeline learns auxiliary data `X~`, a nonnegative dictionary `D` and
//! codes `Z` with an ADMM solver ([`optim::fit`]), builds the cosine affinity
//! of the codes ([`clustering::code_affinity`]), segments the sequence with a
//! spectral normalized cut ([`clustering::normalized_cut`]) and scores the
//! result against ground truth ([`eval`]).

// Negated float comparisons such as `!(x > 0.0)` are deliberate: NaN must
// fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clustering;
pub mod config;
pub mod data;
pub mod error;
pub mod eval;
pub mod graph;
pub mod io;
pub mod kmeans;
pub mod optim;
pub mod rng;
pub mod synth;

pub use config::{Mode, SolverConfig};
pub use data::{normalize, FeatureSequence, Mat, Segment, Segmentation};
pub use error::{Error, Result};
pub use eval::MetricReport;

/// Fit, cluster into `k` groups and return the segmentation.
pub fn segment(x: &FeatureSequence, cfg: &SolverConfig, k: usize) -> Result<(optim::FitResult, Segmentation)> {
    let fit = optim::fit(x, cfg)?;
    let aff = clustering::code_affinity(&fit.z)?;
    let seg = clustering::normalized_cut(&aff, k, cfg.seed)?;
    Ok((fit, seg))
}
