use serde::Serialize;

use crate::data::Mat;

/// Everything the ADMM iteration carries between steps.
#[derive(Clone, Debug)]
pub struct SolverState {
    /// Auxiliary data, `n x N`.
    pub xtilde: Mat,
    /// Split copy of the auxiliary data, `n x N`.
    pub y: Mat,
    /// Split copy of the dictionary, `n x r`.
    pub u: Mat,
    /// Nonnegative dictionary with columns in the unit ball, `n x r`.
    pub d: Mat,
    /// Split copy of the codes, `r x N`.
    pub v: Mat,
    /// Nonnegative codes, `r x N`.
    pub z: Mat,
    pub lambda_xtilde: Mat,
    pub lambda_u: Mat,
    pub lambda_v: Mat,
    pub iteration: usize,
    pub diagnostics: Vec<IterationRecord>,
}

/// Per-iteration convergence record.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub objective: f64,
    pub graph_loss: f64,
    pub y_minus_xtilde_fro: f64,
    pub y_minus_xtilde_inf: f64,
    pub u_minus_d_fro: f64,
    pub v_minus_z_fro: f64,
    pub sylvester_residual: f64,
    /// Accepted descent steps in the auxiliary-data update.
    pub gd_steps: usize,
    /// Set when the auxiliary-data update stopped because no backtracked
    /// step decreased its objective.
    pub gd_stalled: bool,
}

impl SolverState {
    pub fn n_frames(&self) -> usize {
        self.z.ncols()
    }

    pub fn atoms(&self) -> usize {
        self.z.nrows()
    }
}
