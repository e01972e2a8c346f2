//! Lloyd's k-means on the rows of a matrix, with farthest-point seeding and
//! deterministic restarts.

use rand::Rng;

use crate::data::Mat;
use crate::rng::seeded_rng;

const MAX_LLOYD_ITERS: usize = 300;

#[derive(Clone, Debug, PartialEq)]
pub struct KMeansResult {
    pub labels: Vec<usize>,
    pub centers: Mat,
    pub inertia: f64,
    /// Restart that produced the result.
    pub restart: usize,
}

fn sq_dist(points: &Mat, i: usize, centers: &Mat, c: usize) -> f64 {
    points.row(i).iter().zip(centers.row(c).iter()).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Start from `first`, then repeatedly add the point farthest from every
/// center chosen so far (lowest index on ties).
fn farthest_point_seeds(points: &Mat, k: usize, first: usize) -> Mat {
    let (n, dim) = points.shape();
    let mut centers = Mat::zeros(k, dim);
    centers.row_mut(0).copy_from(&points.row(first));
    let mut nearest: Vec<f64> = (0..n).map(|i| sq_dist(points, i, &centers, 0)).collect();
    for c in 1..k {
        let mut best = 0;
        for i in 1..n {
            if nearest[i] > nearest[best] {
                best = i;
            }
        }
        centers.row_mut(c).copy_from(&points.row(best));
        for (i, d) in nearest.iter_mut().enumerate() {
            *d = d.min(sq_dist(points, i, &centers, c));
        }
    }
    centers
}

fn assign(points: &Mat, centers: &Mat, labels: &mut [usize]) -> (bool, f64) {
    let mut changed = false;
    let mut inertia = 0.0;
    for (i, label) in labels.iter_mut().enumerate() {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for c in 0..centers.nrows() {
            let d = sq_dist(points, i, centers, c);
            if d < best_d {
                best_d = d;
                best = c;
            }
        }
        if *label != best {
            *label = best;
            changed = true;
        }
        inertia += best_d;
    }
    (changed, inertia)
}

fn recenter(points: &Mat, labels: &mut [usize], centers: &mut Mat) {
    let k = centers.nrows();
    let mut counts = vec![0usize; k];
    centers.fill(0.0);
    for (i, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        let mut row = centers.row_mut(l);
        row += points.row(i);
    }
    for (c, &count) in counts.iter().enumerate() {
        if count > 0 {
            let mut row = centers.row_mut(c);
            row /= count as f64;
        }
    }
    // Reseed each empty cluster at the point worst served by its center.
    for c in 0..k {
        if counts[c] == 0 {
            let mut worst = None;
            let mut worst_d = -1.0;
            for (i, &l) in labels.iter().enumerate() {
                if counts[l] > 1 {
                    let d = sq_dist(points, i, centers, l);
                    if d > worst_d {
                        worst_d = d;
                        worst = Some(i);
                    }
                }
            }
            if let Some(i) = worst {
                counts[labels[i]] -= 1;
                labels[i] = c;
                counts[c] = 1;
                centers.row_mut(c).copy_from(&points.row(i));
            }
        }
    }
}

fn lloyd(points: &Mat, mut centers: Mat) -> (Vec<usize>, Mat, f64) {
    let n = points.nrows();
    let mut labels = vec![usize::MAX; n];
    let mut inertia = assign(points, &centers, &mut labels).1;
    for _ in 0..MAX_LLOYD_ITERS {
        recenter(points, &mut labels, &mut centers);
        let (changed, value) = assign(points, &centers, &mut labels);
        inertia = value;
        if !changed {
            break;
        }
    }
    (labels, centers, inertia)
}

/// Cluster the rows of `points` into `k` groups. Each restart seeds from a
/// different random first point; the lowest inertia wins, earliest restart on
/// ties.
pub fn kmeans(points: &Mat, k: usize, restarts: usize, seed: u64) -> KMeansResult {
    let n = points.nrows();
    assert!(k >= 1 && k <= n, "k = {k} must lie in [1, {n}]");
    let mut rng = seeded_rng(seed);
    let mut best: Option<KMeansResult> = None;
    for restart in 0..restarts.max(1) {
        let first = rng.random_range(0..n);
        let (labels, centers, inertia) = lloyd(points, farthest_point_seeds(points, k, first));
        if best.as_ref().is_none_or(|b| inertia < b.inertia) {
            best = Some(KMeansResult { labels, centers, inertia, restart });
        }
    }
    best.expect("at least one restart")
}
