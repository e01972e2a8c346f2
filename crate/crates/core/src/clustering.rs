//! Code affinity and normalized-cut segmentation.

use log::warn;
use nalgebra::SymmetricEigen;

use crate::data::{relabel_first_appearance, Mat, Segmentation};
use crate::error::{Error, Result};
use crate::kmeans::kmeans;

/// Number of k-means restarts used to discretize the spectral embedding.
pub const KMEANS_RESTARTS: usize = 50;

/// Value written into all-zero code columns before taking cosines.
pub const ZERO_CODE_FLOOR: f64 = 1e-12;

/// Cosine similarity between every pair of code columns.
#[derive(Clone, Debug, PartialEq)]
pub struct CodeAffinity {
    pub a: Mat,
}

pub fn code_affinity(z: &Mat) -> Result<CodeAffinity> {
    let frames = z.ncols();
    if frames < 2 {
        return Err(Error::Dimension(format!("need at least 2 frames, got {frames}")));
    }
    let mut unit = z.clone();
    for (j, mut col) in unit.column_iter_mut().enumerate() {
        let mut nrm = col.norm();
        if nrm == 0.0 {
            warn!("code column {j} is all zero; flooring to {ZERO_CODE_FLOOR}");
            col.fill(ZERO_CODE_FLOOR);
            nrm = col.norm();
        }
        col /= nrm;
    }
    let mut a = unit.transpose() * &unit;
    // Symmetrize exactly and keep rounding inside [-1, 1].
    for j in 0..frames {
        for i in 0..j {
            let v = (0.5 * (a[(i, j)] + a[(j, i)])).clamp(-1.0, 1.0);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
        a[(j, j)] = a[(j, j)].clamp(-1.0, 1.0);
    }
    Ok(CodeAffinity { a })
}

/// Bottom eigenvectors of the symmetric normalized Laplacian.
#[derive(Clone, Debug)]
pub struct SpectralEmbedding {
    /// `N x k` eigenvectors, one per column, ascending eigenvalue.
    pub vectors: Mat,
    pub values: Vec<f64>,
    pub laplacian: Mat,
}

impl SpectralEmbedding {
    /// `max_j ||L v_j - mu_j v_j||`.
    pub fn max_residual(&self) -> f64 {
        (0..self.values.len())
            .map(|j| {
                let v = self.vectors.column(j);
                (&self.laplacian * v - v * self.values[j]).norm()
            })
            .fold(0.0, f64::max)
    }
}

pub fn spectral_embedding(aff: &CodeAffinity, k: usize) -> Result<SpectralEmbedding> {
    let a = &aff.a;
    let frames = a.nrows();
    let degree = a.row_sum();
    let mut inv_sqrt = Vec::with_capacity(frames);
    for (i, &d) in degree.iter().enumerate() {
        if !(d > 0.0) {
            return Err(Error::IsolatedVertex(i));
        }
        inv_sqrt.push(1.0 / d.sqrt());
    }
    let laplacian = Mat::from_fn(frames, frames, |i, j| {
        let off = a[(i, j)] * inv_sqrt[i] * inv_sqrt[j];
        if i == j { 1.0 - off } else { -off }
    });
    let eig = SymmetricEigen::try_new(laplacian.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::Eigen("normalized Laplacian did not converge".into()))?;
    let mut order: Vec<usize> = (0..frames).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]).then(x.cmp(&y)));
    let chosen = &order[..k];
    let vectors = Mat::from_fn(frames, k, |i, j| eig.eigenvectors[(i, chosen[j])]);
    let values = chosen.iter().map(|&c| eig.eigenvalues[c]).collect();
    Ok(SpectralEmbedding { vectors, values, laplacian })
}

/// Spectral relaxation of the k-way normalized cut: bottom-`k` eigenvectors
/// of `I - D^-1/2 A D^-1/2`, rows scaled to unit length, then k-means.
/// Labels are numbered in order of first appearance.
pub fn normalized_cut(aff: &CodeAffinity, k: usize, seed: u64) -> Result<Segmentation> {
    let frames = aff.a.nrows();
    if k < 2 || k > frames {
        return Err(Error::Config(format!("cluster count k = {k} must lie in [2, {frames}]")));
    }
    let emb = spectral_embedding(aff, k)?;
    let mut rows = emb.vectors;
    for mut row in rows.row_iter_mut() {
        let nrm = row.norm();
        if nrm > 0.0 {
            row /= nrm;
        }
    }
    let km = kmeans(&rows, k, KMEANS_RESTARTS, seed);
    Ok(Segmentation::from_labels(relabel_first_appearance(&km.labels), k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::nmi;
    use crate::rng::seeded_rng;
    use rand::Rng;

    #[test]
    fn one_hot_codes_give_identity() {
        let z = Mat::identity(4, 4);
        assert_eq!(code_affinity(&z).unwrap().a, Mat::identity(4, 4));
    }

    #[test]
    fn identical_codes_give_ones() {
        let z = Mat::from_fn(3, 5, |r, _| r as f64 + 0.5);
        let a = code_affinity(&z).unwrap().a;
        assert!((a - Mat::from_element(5, 5, 1.0)).amax() < 1e-15);
    }

    #[test]
    fn affinity_matches_double_loop() {
        let mut rng = seeded_rng(4);
        let z = Mat::from_fn(3, 5, |_, _| rng.random::<f64>());
        let a = code_affinity(&z).unwrap().a;
        for k in 0..5 {
            for j in 0..5 {
                let zk = z.column(k);
                let zj = z.column(j);
                let dot: f64 = zk.iter().zip(zj.iter()).map(|(p, q)| p * q).sum();
                let want = dot / (zj.iter().map(|v| v * v).sum::<f64>().sqrt() * zk.iter().map(|v| v * v).sum::<f64>().sqrt());
                assert!((a[(k, j)] - want).abs() < 1e-12);
            }
        }
        assert_eq!(a, a.transpose());
    }

    #[test]
    fn zero_code_column_is_floored() {
        let mut z = Mat::from_element(2, 4, 1.0);
        z.column_mut(1).fill(0.0);
        let a = code_affinity(&z).unwrap().a;
        assert!(a.iter().all(|v| v.is_finite()));
        assert!((a[(1, 1)] - 1.0).abs() < 1e-12);
        assert!(code_affinity(&Mat::from_element(2, 1, 1.0)).is_err());
    }

    fn block_affinity(sizes: &[usize], inside: f64, outside: f64) -> Mat {
        let owner: Vec<usize> = sizes.iter().enumerate().flat_map(|(b, &s)| std::iter::repeat_n(b, s)).collect();
        let n = owner.len();
        Mat::from_fn(n, n, |i, j| if owner[i] == owner[j] { inside } else { outside })
    }

    #[test]
    fn disconnected_blocks_split_exactly() {
        let a = CodeAffinity { a: block_affinity(&[4, 6], 1.0, 0.0) };
        for seed in 0..5 {
            let seg = normalized_cut(&a, 2, seed).unwrap();
            assert_eq!(seg.labels, vec![0, 0, 0, 0, 1, 1, 1, 1, 1, 1]);
            assert_eq!(seg.segments.len(), 2);
        }
    }

    #[test]
    fn k_equal_n_gives_singletons() {
        let mut rng = seeded_rng(8);
        let z = Mat::from_fn(4, 6, |_, _| rng.random::<f64>());
        let seg = normalized_cut(&code_affinity(&z).unwrap(), 6, 0).unwrap();
        assert_eq!(seg.labels, vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn recovers_noisy_planted_blocks() {
        let mut rng = seeded_rng(12);
        let sizes = [15, 25];
        let mut a = block_affinity(&sizes, 0.9, 0.1);
        let n = a.nrows();
        for i in 0..n {
            for j in 0..i {
                let v = a[(i, j)] + 0.1 * (rng.random::<f64>() - 0.5);
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
            a[(i, i)] = 1.0;
        }
        let truth: Vec<i64> = (0..n).map(|i| (i >= 15) as i64).collect();
        let seg = normalized_cut(&CodeAffinity { a }, 2, 3).unwrap();
        let pred: Vec<i64> = seg.labels.iter().map(|&l| l as i64).collect();
        assert_eq!(nmi(&pred, &truth).unwrap(), 1.0);
    }

    #[test]
    fn eigen_residuals_small() {
        let mut rng = seeded_rng(2);
        let z = Mat::from_fn(5, 40, |_, _| rng.random::<f64>());
        let emb = spectral_embedding(&code_affinity(&z).unwrap(), 4).unwrap();
        assert!(emb.max_residual() < 1e-8);
        assert!(emb.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn isolated_vertex_is_reported() {
        let mut a = block_affinity(&[3, 3], 1.0, 0.0);
        a.row_mut(4).fill(0.0);
        a.column_mut(4).fill(0.0);
        assert!(matches!(normalized_cut(&CodeAffinity { a }, 2, 0), Err(Error::IsolatedVertex(4))));
    }

    #[test]
    fn deterministic_labels() {
        let mut rng = seeded_rng(6);
        let z = Mat::from_fn(3, 30, |_, _| rng.random::<f64>());
        let a = code_affinity(&z).unwrap();
        assert_eq!(normalized_cut(&a, 3, 17).unwrap(), normalized_cut(&a, 3, 17).unwrap());
    }

    #[test]
    fn rejects_bad_k() {
        let a = CodeAffinity { a: block_affinity(&[2, 2], 1.0, 0.0) };
        assert!(normalized_cut(&a, 1, 0).is_err());
        assert!(normalized_cut(&a, 5, 0).is_err());
    }
}
