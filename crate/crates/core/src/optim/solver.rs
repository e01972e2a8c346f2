use log::{debug, warn};
use rand::Rng;

use super::laplacian::{build_temporal_laplacian, TemporalLaplacian};
use super::state::{IterationRecord, SolverState};
use super::updates::{
    rescale_to_norm, update_d, update_multipliers, update_u, update_xtilde, update_y, update_z, v_system, solve_sylvester,
    sylvester_residual,
};
use crate::config::{Mode, SolverConfig};
use crate::data::{check_unit_interval, FeatureSequence, Mat};
use crate::error::{Error, Result};
use crate::graph::{build_affinity, graph_loss, AffinityGraph};
use crate::rng::seeded_rng;

/// Upper bound of the uniform distribution used to initialize the codes.
const CODE_INIT_SCALE: f64 = 1e-2;

#[derive(Clone, Debug)]
pub struct FitResult {
    pub z: Mat,
    pub d: Mat,
    pub xtilde: Mat,
    pub diagnostics: Vec<IterationRecord>,
    pub converged: bool,
    pub iterations_run: usize,
}

/// Random dictionary with unit columns, small random codes, auxiliary data
/// equal to the input, zero multipliers.
pub fn initial_state(x: &Mat, cfg: &SolverConfig) -> SolverState {
    let (n, frames) = x.shape();
    let mut rng = seeded_rng(cfg.seed);
    let mut d = Mat::from_fn(n, cfg.r, |_, _| rng.random::<f64>());
    for mut col in d.column_iter_mut() {
        let nrm = col.norm();
        if nrm > 0.0 {
            col /= nrm;
        }
    }
    let z = Mat::from_fn(cfg.r, frames, |_, _| rng.random::<f64>() * CODE_INIT_SCALE);
    SolverState {
        xtilde: x.clone(),
        y: x.clone(),
        u: d.clone(),
        d,
        v: z.clone(),
        z,
        lambda_xtilde: Mat::zeros(n, frames),
        lambda_u: Mat::zeros(n, cfg.r),
        lambda_v: Mat::zeros(cfg.r, frames),
        iteration: 0,
        diagnostics: Vec::new(),
    }
}

/// Value of the constrained model at the current (`X~`, `D`, `Z`).
pub fn model_objective(
    state: &SolverState,
    cfg: &SolverConfig,
    lt: &TemporalLaplacian,
    graph_loss: f64,
) -> f64 {
    let fidelity = (&state.xtilde - &state.d * &state.z).norm_squared();
    graph_loss
        + cfg.lambda0 * fidelity
        + cfg.lambda1 * state.z.norm_squared()
        + cfg.lambda2 * lt.quadratic_form(&state.z)
}

pub fn fit(x: &FeatureSequence, cfg: &SolverConfig) -> Result<FitResult> {
    fit_with_hook(x, cfg, |_| {})
}

/// Run the solver, calling `hook` with the state after every outer iteration.
pub fn fit_with_hook<F>(x: &FeatureSequence, cfg: &SolverConfig, mut hook: F) -> Result<FitResult>
where
    F: FnMut(&SolverState),
{
    cfg.validate()?;
    let data = &x.features;
    check_unit_interval(data)?;
    let frames = data.ncols();
    let lt = build_temporal_laplacian(frames, cfg.s)?;
    let g0: Option<AffinityGraph> = match cfg.mode {
        Mode::Full => Some(build_affinity(data, cfg.h)?),
        Mode::TscAblation => None,
    };

    let mut state = initial_state(data, cfg);
    let data_norm = data.norm();
    let mut converged = false;

    while state.iteration < cfg.max_outer_iters {
        let (m, c) = v_system(&state, cfg);
        state.v = solve_sylvester(&m, cfg.lambda2, &lt, &c)?;
        let residual = sylvester_residual(&m, &state.v, cfg.lambda2, &lt, &c);
        state.u = update_u(&state, cfg)?;
        state.z = update_z(&state, cfg);
        state.d = update_d(&state, cfg);

        let mut gd_steps = 0;
        let mut gd_stalled = false;
        if let Some(g0) = &g0 {
            state.y = update_y(&state, cfg);
            let step = update_xtilde(&state, cfg, g0)?;
            gd_steps = step.accepted_steps;
            gd_stalled = step.stalled;
            if step.stalled {
                warn!(
                    "iteration {}: auxiliary-data descent stalled after {} steps",
                    state.iteration + 1,
                    step.accepted_steps
                );
            }
            state.xtilde = step.xtilde;
            rescale_to_norm(&mut state.xtilde, data_norm);
        }
        update_multipliers(&mut state, cfg);
        state.iteration += 1;

        let gl = match &g0 {
            Some(g0) => graph_loss(g0, &state.xtilde, cfg.h)?,
            None => 0.0,
        };
        let gap = &state.y - &state.xtilde;
        let u_gap = &state.u - &state.d;
        let v_gap = &state.v - &state.z;
        let record = IterationRecord {
            iteration: state.iteration,
            objective: model_objective(&state, cfg, &lt, gl),
            graph_loss: gl,
            y_minus_xtilde_fro: gap.norm(),
            y_minus_xtilde_inf: gap.amax(),
            u_minus_d_fro: u_gap.norm(),
            v_minus_z_fro: v_gap.norm(),
            sylvester_residual: residual,
            gd_steps,
            gd_stalled,
        };
        if !record.objective.is_finite() {
            return Err(Error::Singular(format!("objective became {} at iteration {}", record.objective, state.iteration)));
        }
        debug!("{record:?}");
        state.diagnostics.push(record);
        hook(&state);

        // Every consensus constraint must hold; with X~ pinned the first term is zero.
        let stop = gap.amax().max(u_gap.amax()).max(v_gap.amax()) < cfg.tol;
        if stop {
            converged = true;
            break;
        }
    }

    Ok(FitResult {
        iterations_run: state.iteration,
        z: state.z,
        d: state.d,
        xtilde: state.xtilde,
        diagnostics: state.diagnostics,
        converged,
    })
}
