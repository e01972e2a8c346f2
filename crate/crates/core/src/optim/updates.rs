//! Per-variable minimizers of the augmented Lagrangian.
//!
//! Each function reads the current [`SolverState`] and returns the new value
//! of one block; the caller writes it back. All quantities use the split
//! variables `Y = X~`, `U = D`, `V = Z`.

use nalgebra::SymmetricEigen;

use super::laplacian::TemporalLaplacian;
use super::state::SolverState;
use crate::config::SolverConfig;
use crate::data::Mat;
use crate::error::{Error, Result};
use crate::graph::{graph_loss_and_grad, AffinityGraph};

/// Value substituted for columns of the auxiliary data that get clipped to
/// all zeros, where the cosine kernel is undefined.
pub const COLUMN_FLOOR: f64 = 1e-6;

/// Left factor `2 lambda0 U^T U + (lambda1 + rho) I` and right-hand side
/// `2 lambda0 U^T Y - Lambda_V + rho Z` of the code update.
pub fn v_system(state: &SolverState, cfg: &SolverConfig) -> (Mat, Mat) {
    let r = state.atoms();
    let m = state.u.transpose() * &state.u * (2.0 * cfg.lambda0) + Mat::identity(r, r) * (cfg.lambda1 + cfg.rho);
    let c = state.u.transpose() * &state.y * (2.0 * cfg.lambda0) - &state.lambda_v + &state.z * cfg.rho;
    (m, c)
}

/// Solve `M V + lambda2 V L_T = C` by diagonalizing both sides: with
/// `M = P diag(m) P^T` and `L_T = Q diag(mu) Q^T`, the transformed unknown
/// `P^T V Q` is `P^T C Q` divided entrywise by `m_i + lambda2 mu_j`.
pub fn solve_sylvester(m: &Mat, lambda2: f64, lt: &TemporalLaplacian, c: &Mat) -> Result<Mat> {
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::Eigen("code system did not converge".into()))?;
    let p = &eig.eigenvectors;
    let mut t = p.transpose() * c * &lt.eigvecs;
    for j in 0..t.ncols() {
        for i in 0..t.nrows() {
            let shift = eig.eigenvalues[i] + lambda2 * lt.eigvals[j];
            if !(shift > 0.0) {
                return Err(Error::Singular(format!("shifted code system has pivot {shift}")));
            }
            t[(i, j)] /= shift;
        }
    }
    Ok(p * t * lt.eigvecs.transpose())
}

/// `||M V + lambda2 V L_T - C||_F / ||C||_F`.
pub fn sylvester_residual(m: &Mat, v: &Mat, lambda2: f64, lt: &TemporalLaplacian, c: &Mat) -> f64 {
    let lhs = m * v + lt.apply_right(v) * lambda2;
    let denom = c.norm();
    let num = (lhs - c).norm();
    if denom > 0.0 { num / denom } else { num }
}

pub fn update_v(state: &SolverState, cfg: &SolverConfig, lt: &TemporalLaplacian) -> Result<Mat> {
    let (m, c) = v_system(state, cfg);
    solve_sylvester(&m, cfg.lambda2, lt, &c)
}

/// `U = (2 lambda0 Y V^T - Lambda_U + rho D)(2 lambda0 V V^T + rho I)^-1`,
/// computed as a Cholesky solve on the transposed system.
pub fn update_u(state: &SolverState, cfg: &SolverConfig) -> Result<Mat> {
    let r = state.atoms();
    let gram = &state.v * state.v.transpose() * (2.0 * cfg.lambda0) + Mat::identity(r, r) * cfg.rho;
    let rhs = &state.y * state.v.transpose() * (2.0 * cfg.lambda0) - &state.lambda_u + &state.d * cfg.rho;
    let chol = gram
        .cholesky()
        .ok_or_else(|| Error::Singular("dictionary system is not positive definite".into()))?;
    Ok(chol.solve(&rhs.transpose()).transpose())
}

pub fn update_z(state: &SolverState, cfg: &SolverConfig) -> Mat {
    (&state.v + &state.lambda_v / cfg.rho).map(|x| x.max(0.0))
}

/// Nonnegative clip followed by projecting each column onto the unit ball.
pub fn update_d(state: &SolverState, cfg: &SolverConfig) -> Mat {
    let mut d = (&state.u + &state.lambda_u / cfg.rho).map(|x| x.max(0.0));
    for mut col in d.column_iter_mut() {
        let nrm = col.norm();
        if nrm > 1.0 {
            col /= nrm;
        }
    }
    d
}

/// Unclipped minimizer in `Y`; [`update_y`] clips it into `[0, 1]`.
pub fn update_y_unclipped(state: &SolverState, cfg: &SolverConfig) -> Mat {
    let fit = &state.u * &state.v * (2.0 * cfg.lambda0);
    (fit - &state.lambda_xtilde + &state.xtilde * cfg.rho) / (2.0 * cfg.lambda0 + cfg.rho)
}

pub fn update_y(state: &SolverState, cfg: &SolverConfig) -> Mat {
    update_y_unclipped(state, cfg).map(|x| x.clamp(0.0, 1.0))
}

/// Outcome of the inner descent on the auxiliary data.
#[derive(Clone, Debug)]
pub struct XtildeUpdate {
    pub xtilde: Mat,
    pub objective_before: f64,
    pub objective_after: f64,
    pub accepted_steps: usize,
    pub stalled: bool,
}

/// `L_G(X~) + <Lambda_X, Y - X~> + rho/2 ||Y - X~||_F^2`.
pub fn xtilde_objective(state: &SolverState, cfg: &SolverConfig, graph_loss: f64, xt: &Mat) -> f64 {
    let gap = &state.y - xt;
    graph_loss + state.lambda_xtilde.dot(&gap) + 0.5 * cfg.rho * gap.norm_squared()
}

fn project_unit_box(x: &mut Mat) {
    x.apply(|v| *v = v.clamp(0.0, 1.0));
    for mut col in x.column_iter_mut() {
        if col.iter().all(|&v| v == 0.0) {
            col.fill(COLUMN_FLOOR);
        }
    }
}

/// Scale `x` to Frobenius norm `target`, then clip into `[0, 1]`.
///
/// The graph loss depends only on column directions, so without this the
/// auxiliary data can shrink toward zero and drag the fidelity and code
/// penalties down with it. A norm target keeps the scale factor a smooth
/// function of `x`, unlike rescaling by the largest entry.
pub fn rescale_to_norm(x: &mut Mat, target: f64) {
    let nrm = x.norm();
    if nrm > 0.0 {
        *x *= target / nrm;
    }
    x.apply(|v| *v = v.clamp(0.0, 1.0));
}

const MAX_BACKTRACKS: usize = 10;

/// Projected gradient descent on the auxiliary data with step halving.
pub fn update_xtilde(state: &SolverState, cfg: &SolverConfig, g0: &AffinityGraph) -> Result<XtildeUpdate> {
    let mut xt = state.xtilde.clone();
    let (loss, mut grad_g) = graph_loss_and_grad(g0, &xt, cfg.h)?;
    let mut obj = xtilde_objective(state, cfg, loss, &xt);
    let objective_before = obj;
    let mut accepted_steps = 0;
    let mut stalled = false;

    for _ in 0..cfg.inner_gd_iters {
        let grad = &grad_g - &state.lambda_xtilde - (&state.y - &xt) * cfg.rho;
        if grad.amax() == 0.0 {
            break;
        }
        let mut step = cfg.inner_gd_step;
        let mut accepted = None;
        for _ in 0..=MAX_BACKTRACKS {
            let mut trial = &xt - &grad * step;
            project_unit_box(&mut trial);
            let (trial_loss, trial_grad) = graph_loss_and_grad(g0, &trial, cfg.h)?;
            let trial_obj = xtilde_objective(state, cfg, trial_loss, &trial);
            if trial_obj <= obj {
                accepted = Some((trial, trial_grad, trial_obj));
                break;
            }
            step *= 0.5;
        }
        match accepted {
            Some((trial, g, o)) => {
                let done = trial == xt;
                xt = trial;
                grad_g = g;
                obj = o;
                accepted_steps += 1;
                if done {
                    break;
                }
            }
            None => {
                stalled = true;
                break;
            }
        }
    }
    Ok(XtildeUpdate { xtilde: xt, objective_before, objective_after: obj, accepted_steps, stalled })
}

/// Dual ascent on the three consensus constraints.
pub fn update_multipliers(state: &mut SolverState, cfg: &SolverConfig) {
    state.lambda_u += (&state.u - &state.d) * cfg.rho;
    state.lambda_v += (&state.v - &state.z) * cfg.rho;
    state.lambda_xtilde += (&state.y - &state.xtilde) * cfg.rho;
}
