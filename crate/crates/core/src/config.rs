use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Learn the auxiliary data under the graph-preserving loss.
    #[default]
    Full,
    /// Auxiliary data pinned to the input and graph loss removed. This is the
    /// plain temporal subspace clustering model, used as the ablation baseline.
    TscAblation,
}

/// Solver hyperparameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Weight of the fidelity term `||Y - UV||_F^2`.
    pub lambda0: f64,
    /// Weight of the Frobenius (block-diagonal) penalty on the codes.
    pub lambda1: f64,
    /// Weight of the temporal Laplacian penalty on the codes.
    pub lambda2: f64,
    /// ADMM penalty.
    pub rho: f64,
    /// Bandwidth of the similarity kernel.
    pub h: f64,
    /// Number of dictionary atoms.
    pub r: usize,
    /// Temporal half-window of the Laplacian.
    pub s: usize,
    pub max_outer_iters: usize,
    pub inner_gd_iters: usize,
    pub inner_gd_step: f64,
    /// Stop once the largest entry of `Y - X~`, `U - D` and `V - Z` drops
    /// below this.
    pub tol: f64,
    pub mode: Mode,
    pub seed: u64,
    /// Floor applied inside logarithms of graph probabilities.
    pub epsilon_log: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda0: 0.25,
            lambda1: 0.004,
            lambda2: 10.0,
            rho: 1.0,
            h: 0.0015,
            r: 10,
            s: 7,
            max_outer_iters: 150,
            inner_gd_iters: 20,
            inner_gd_step: 1e-2,
            tol: 1e-4,
            mode: Mode::Full,
            seed: 0,
            epsilon_log: 1e-300,
        }
    }
}

impl SolverConfig {
    /// Defaults with the dictionary sized at twice the expected cluster count.
    pub fn for_clusters(k: usize) -> Self {
        Self { r: (2 * k).max(1), ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = [("lambda0", self.lambda0), ("lambda1", self.lambda1), ("lambda2", self.lambda2)];
        for (name, v) in nonneg {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        let positive = [
            ("rho", self.rho),
            ("h", self.h),
            ("inner_gd_step", self.inner_gd_step),
            ("tol", self.tol),
            ("epsilon_log", self.epsilon_log),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        if self.r == 0 {
            return Err(Error::Config("r must be >= 1".into()));
        }
        if self.s == 0 {
            return Err(Error::Config("s must be >= 1".into()));
        }
        if self.inner_gd_iters == 0 {
            return Err(Error::Config("inner_gd_iters must be >= 1".into()));
        }
        Ok(())
    }
}
