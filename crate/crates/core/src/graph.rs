//! Frame-similarity graphs and the cross-entropy loss between them.
//!
//! A graph over `N` frames weights every ordered pair `k != j` by
//! `exp(-(1 - cos(x_k, x_j)) / h)` and normalizes the weights to sum to one,
//! so it can be read as a joint distribution over vertex pairs. The loss
//! between a reference graph `P0` and the graph `P~` of the auxiliary data is
//! the cross-entropy `-sum P0 log P~`.

use nalgebra::DVector;

use crate::data::Mat;
use crate::error::{Error, Result};

pub fn cosine_sim(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!("vectors of length {} and {}", a.len(), b.len())));
    }
    let na = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector);
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

/// Normalized pairwise-similarity graph.
#[derive(Clone, Debug, PartialEq)]
pub struct AffinityGraph {
    /// `N x N` edge weights; zero diagonal, unit total mass.
    pub p: Mat,
    pub h: f64,
}

impl AffinityGraph {
    pub fn len(&self) -> usize {
        self.p.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.p.nrows() == 0
    }

    /// Shannon entropy of the pair distribution, in nats.
    pub fn entropy(&self) -> f64 {
        -self.p.iter().filter(|&&v| v > 0.0).map(|&v| v * v.ln()).sum::<f64>()
    }
}

/// Column norms and unit-normalized columns.
pub(crate) struct UnitColumns {
    pub norms: DVector<f64>,
    pub unit: Mat,
}

pub(crate) fn unit_columns(x: &Mat) -> Result<UnitColumns> {
    let mut unit = x.clone();
    let mut norms = DVector::zeros(x.ncols());
    for (j, mut col) in unit.column_iter_mut().enumerate() {
        let nrm = col.norm();
        if !(nrm > 0.0) || !nrm.is_finite() {
            return Err(Error::ZeroColumn(j));
        }
        col /= nrm;
        norms[j] = nrm;
    }
    Ok(UnitColumns { norms, unit })
}

/// Gram matrix of unit columns, clamped into `[-1, 1]`.
pub(crate) fn cosine_matrix(unit: &Mat) -> Mat {
    let mut c = unit.transpose() * unit;
    c.apply(|v| *v = v.clamp(-1.0, 1.0));
    c
}

/// Kernel weights shifted by the largest off-diagonal exponent
/// `-(1 - c)/h`, which belongs to the largest off-diagonal cosine.
struct Kernel {
    /// `exp(e - max)` off the diagonal, zero on it.
    shifted: Mat,
    shifted_sum: f64,
    log_partition: f64,
}

fn kernel(cos: &Mat, h: f64) -> Kernel {
    let n = cos.nrows();
    let mut cmax = f64::NEG_INFINITY;
    for j in 0..n {
        for k in 0..j {
            cmax = cmax.max(cos[(k, j)]);
        }
    }
    let max = -(1.0 - cmax) / h;
    // The Gram matrix is symmetric, so only the upper triangle is exponentiated.
    let mut shifted = Mat::zeros(n, n);
    let mut half = 0.0;
    for j in 0..n {
        for k in 0..j {
            let w = ((cos[(k, j)] - cmax) / h).exp();
            shifted[(k, j)] = w;
            shifted[(j, k)] = w;
            half += w;
        }
    }
    let shifted_sum = 2.0 * half;
    Kernel { shifted, shifted_sum, log_partition: max + shifted_sum.ln() }
}

fn probabilities(k: &Kernel) -> Mat {
    &k.shifted / k.shifted_sum
}

fn check_h(h: f64) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Config(format!("bandwidth h must be > 0, got {h}")));
    }
    Ok(())
}

fn check_frames(x: &Mat) -> Result<()> {
    if x.ncols() < 2 {
        return Err(Error::Dimension(format!("need at least 2 frames, got {}", x.ncols())));
    }
    Ok(())
}

/// Build the normalized similarity graph of the columns of `x`.
///
/// The maximum exponent is subtracted before exponentiating; the final
/// normalization makes this exact.
pub fn build_affinity(x: &Mat, h: f64) -> Result<AffinityGraph> {
    check_h(h)?;
    check_frames(x)?;
    let cols = unit_columns(x)?;
    let k = kernel(&cosine_matrix(&cols.unit), h);
    Ok(AffinityGraph { p: probabilities(&k), h })
}

fn check_pair(g0: &AffinityGraph, xt: &Mat) -> Result<()> {
    if g0.len() != xt.ncols() {
        return Err(Error::Dimension(format!(
            "graph over {} frames, auxiliary data has {}",
            g0.len(),
            xt.ncols()
        )));
    }
    Ok(())
}

/// Cross-entropy `-sum P0 log P~` evaluated in the stable closed form
/// `(1/h) sum P0 (1 - c) + logsumexp(-(1 - c)/h)`.
pub fn graph_loss(g0: &AffinityGraph, xt: &Mat, h: f64) -> Result<f64> {
    check_h(h)?;
    check_frames(xt)?;
    check_pair(g0, xt)?;
    let cols = unit_columns(xt)?;
    let cos = cosine_matrix(&cols.unit);
    Ok(stable_loss(g0, &cos, &kernel(&cos, h), h))
}

fn stable_loss(g0: &AffinityGraph, cos: &Mat, k: &Kernel, h: f64) -> f64 {
    let n = g0.len();
    let mut cross = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                cross += g0.p[(i, j)] * (1.0 - cos[(i, j)]);
            }
        }
    }
    cross / h + k.log_partition
}

/// Cross-entropy evaluated literally from the two probability tables, with
/// the logarithm floored at `epsilon_log`. Agrees with [`graph_loss`] except
/// where `P~` underflows below the floor on the support of `P0`.
pub fn graph_loss_direct(g0: &AffinityGraph, xt: &Mat, h: f64, epsilon_log: f64) -> Result<f64> {
    check_pair(g0, xt)?;
    let gt = build_affinity(xt, h)?;
    let n = g0.len();
    let mut loss = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                loss -= g0.p[(i, j)] * gt.p[(i, j)].max(epsilon_log).ln();
            }
        }
    }
    Ok(loss)
}

/// Loss and its gradient with respect to the auxiliary data.
///
/// With `G = (P~ - P0)/h` (zero diagonal) and `u_k = x_k / |x_k|`:
/// `grad_k = (2 / |x_k|) (sum_j G_kj u_j - (sum_j G_kj c_kj) u_k)`.
pub fn graph_loss_and_grad(g0: &AffinityGraph, xt: &Mat, h: f64) -> Result<(f64, Mat)> {
    check_h(h)?;
    check_frames(xt)?;
    check_pair(g0, xt)?;
    let cols = unit_columns(xt)?;
    let cos = cosine_matrix(&cols.unit);
    let k = kernel(&cos, h);
    let loss = stable_loss(g0, &cos, &k, h);

    let scale = 1.0 / (k.shifted_sum * h);
    let mut g = k.shifted;
    g.zip_apply(&g0.p, |w, p0| *w = *w * scale - p0 / h);
    let mut grad = &cols.unit * &g;
    for (j, mut col) in grad.column_iter_mut().enumerate() {
        let weight: f64 = g.column(j).dot(&cos.column(j));
        col.axpy(-weight, &cols.unit.column(j), 1.0);
        col *= 2.0 / cols.norms[j];
    }
    Ok((loss, grad))
}

pub fn graph_loss_grad(g0: &AffinityGraph, xt: &Mat, h: f64) -> Result<Mat> {
    graph_loss_and_grad(g0, xt, h).map(|(_, g)| g)
}
