//! ADMM solver for the graph-constrained representation model.
//!
//! The model couples a cross-entropy graph loss on auxiliary data `X~` with a
//! nonnegative factorization `X~ ~ D Z` regularized by `||Z||_F^2` and a
//! temporal Laplacian penalty. Splitting `Y = X~`, `U = D`, `V = Z` gives
//! closed-form or cheap updates for every block except `X~`, which takes a
//! few projected gradient steps.

mod laplacian;
mod solver;
mod state;
mod updates;

pub use laplacian::{build_temporal_laplacian, TemporalLaplacian};
pub use solver::{fit, fit_with_hook, initial_state, model_objective, FitResult};
pub use state::{IterationRecord, SolverState};
pub use updates::{
    rescale_to_norm,
    solve_sylvester, sylvester_residual, update_d, update_multipliers, update_u, update_v, update_xtilde,
    update_y, update_y_unclipped, update_z, v_system, xtilde_objective, XtildeUpdate, COLUMN_FLOOR,
};
