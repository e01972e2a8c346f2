use nalgebra::{DVector, SymmetricEigen};

use crate::data::Mat;
use crate::error::{Error, Result};

/// Laplacian of the time-axis graph joining frames at most `s` steps apart,
/// with its eigendecomposition.
#[derive(Clone, Debug)]
pub struct TemporalLaplacian {
    pub s: usize,
    pub lt: Mat,
    pub eigvals: DVector<f64>,
    pub eigvecs: Mat,
}

impl TemporalLaplacian {
    pub fn len(&self) -> usize {
        self.lt.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.lt.nrows() == 0
    }

    /// `V * L_T` using the band structure, `O(r N s)`.
    pub fn apply_right(&self, v: &Mat) -> Mat {
        let n = self.len();
        assert_eq!(v.ncols(), n, "column count must match the Laplacian");
        let mut out = Mat::zeros(v.nrows(), n);
        for j in 0..n {
            let lo = j.saturating_sub(self.s);
            let hi = (j + self.s).min(n - 1);
            let degree = (hi - lo) as f64;
            let mut col = out.column_mut(j);
            col.axpy(degree, &v.column(j), 0.0);
            for i in (lo..=hi).filter(|&i| i != j) {
                col -= v.column(i);
            }
        }
        out
    }

    /// `tr(V L_T V^T)`.
    pub fn quadratic_form(&self, v: &Mat) -> f64 {
        v.dot(&self.apply_right(v))
    }
}

pub fn build_temporal_laplacian(n_frames: usize, s: usize) -> Result<TemporalLaplacian> {
    if n_frames < 2 {
        return Err(Error::Dimension(format!("need at least 2 frames, got {n_frames}")));
    }
    if s == 0 || s >= n_frames {
        return Err(Error::Config(format!("temporal window s = {s} must lie in [1, {})", n_frames)));
    }
    let lt = Mat::from_fn(n_frames, n_frames, |i, j| {
        let gap = i.abs_diff(j);
        if i == j {
            let lo = i.saturating_sub(s);
            let hi = (i + s).min(n_frames - 1);
            (hi - lo) as f64
        } else if gap <= s {
            -1.0
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::try_new(lt.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::Eigen("temporal Laplacian did not converge".into()))?;
    // Rounding can leave the null-space eigenvalue a hair below zero.
    let eigvals = eig.eigenvalues.map(|v| v.max(0.0));
    Ok(TemporalLaplacian { s, lt, eigvals, eigvecs: eig.eigenvectors })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force(n: usize, s: usize) -> Mat {
        let mut w = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if i != j && (i as i64 - j as i64).abs() <= s as i64 {
                    w[(i, j)] = 1.0;
                }
            }
        }
        let d = Mat::from_diagonal(&w.column_sum());
        d - w
    }

    #[test]
    fn path_graph() {
        let l = build_temporal_laplacian(3, 1).unwrap();
        let want = Mat::from_row_slice(3, 3, &[1.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 1.0]);
        assert_eq!(l.lt, want);
    }

    #[test]
    fn matches_direct_construction() {
        let l = build_temporal_laplacian(5, 2).unwrap();
        assert_eq!(l.lt, brute_force(5, 2));
    }

    #[test]
    fn rows_sum_to_zero_and_reconstructs() {
        for (n, s) in [(2, 1), (9, 3), (40, 7), (25, 24)] {
            let l = build_temporal_laplacian(n, s).unwrap();
            assert_eq!(l.lt, brute_force(n, s));
            assert!(l.lt.row_sum().amax() == 0.0);
            let recon = &l.eigvecs * Mat::from_diagonal(&l.eigvals) * l.eigvecs.transpose();
            assert!((recon - &l.lt).amax() < 1e-10);
            assert!(l.eigvals.iter().all(|&v| v >= 0.0));
            let orth = l.eigvecs.transpose() * &l.eigvecs - Mat::identity(n, n);
            assert!(orth.amax() < 1e-10);
        }
    }

    #[test]
    fn banded_product_matches_dense() {
        let l = build_temporal_laplacian(12, 3).unwrap();
        let v = Mat::from_fn(4, 12, |r, c| ((r * 7 + c * 3) % 5) as f64 - 1.5);
        assert!((l.apply_right(&v) - &v * &l.lt).amax() < 1e-12);
    }

    #[test]
    fn rejects_window_too_large() {
        assert!(build_temporal_laplacian(5, 5).is_err());
        assert!(build_temporal_laplacian(5, 0).is_err());
        assert!(build_temporal_laplacian(1, 1).is_err());
    }
}
