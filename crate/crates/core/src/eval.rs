//! Clustering accuracy under the best one-to-one label mapping, and
//! normalized mutual information.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};

/// Rows are predicted clusters, columns ground-truth classes, both in
/// ascending label order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Contingency {
    pub pred_labels: Vec<i64>,
    pub true_labels: Vec<i64>,
    pub counts: Vec<Vec<usize>>,
    pub total: usize,
}

impl Contingency {
    pub fn new(pred: &[i64], truth: &[i64]) -> Result<Self> {
        if pred.len() != truth.len() {
            return Err(Error::Dimension(format!(
                "{} predicted labels vs {} ground-truth labels",
                pred.len(),
                truth.len()
            )));
        }
        if pred.is_empty() {
            return Err(Error::Dimension("empty labelings".into()));
        }
        let index = |labels: &[i64]| -> BTreeMap<i64, usize> {
            let mut m = BTreeMap::new();
            for &l in labels {
                m.entry(l).or_insert(0);
            }
            for (i, v) in m.values_mut().enumerate() {
                *v = i;
            }
            m
        };
        let pi = index(pred);
        let ti = index(truth);
        let mut counts = vec![vec![0usize; ti.len()]; pi.len()];
        for (p, t) in pred.iter().zip(truth) {
            counts[pi[p]][ti[t]] += 1;
        }
        Ok(Self {
            pred_labels: pi.into_keys().collect(),
            true_labels: ti.into_keys().collect(),
            counts,
            total: pred.len(),
        })
    }
}

/// Maximum-weight assignment on a rectangular matrix, padded square with
/// zeros. Returns `assignment[row] = Some(col)` for real columns.
pub fn max_weight_assignment(weights: &[Vec<f64>]) -> Vec<Option<usize>> {
    let rows = weights.len();
    let cols = weights.first().map_or(0, |r| r.len());
    let n = rows.max(cols);
    if n == 0 {
        return Vec::new();
    }
    let top = weights.iter().flatten().copied().fold(0.0, f64::max);
    let cost = |i: usize, j: usize| -> f64 {
        if i < rows && j < cols { top - weights[i][j] } else { top }
    };

    // Shortest augmenting paths with row/column potentials (1-based arrays).
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![None; rows];
    for (j, &i) in owner.iter().enumerate().take(n + 1).skip(1) {
        if i >= 1 && i <= rows && j <= cols {
            assignment[i - 1] = Some(j - 1);
        }
    }
    assignment
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricReport {
    pub acc: f64,
    pub nmi: f64,
    /// Predicted-by-true counts.
    pub confusion: Vec<Vec<usize>>,
    /// `(predicted label, matched ground-truth label)` pairs.
    pub mapping: Vec<(i64, i64)>,
}

fn best_mapping(table: &Contingency) -> (usize, Vec<(i64, i64)>) {
    let weights: Vec<Vec<f64>> =
        table.counts.iter().map(|r| r.iter().map(|&c| c as f64).collect()).collect();
    let assignment = max_weight_assignment(&weights);
    let mut matched = 0;
    let mut mapping = Vec::new();
    for (i, a) in assignment.iter().enumerate() {
        if let Some(j) = *a {
            matched += table.counts[i][j];
            mapping.push((table.pred_labels[i], table.true_labels[j]));
        }
    }
    (matched, mapping)
}

/// Fraction of frames whose cluster maps to their true class under the best
/// one-to-one mapping of clusters to classes.
pub fn accuracy(pred: &[i64], truth: &[i64]) -> Result<f64> {
    let table = Contingency::new(pred, truth)?;
    Ok(best_mapping(&table).0 as f64 / table.total as f64)
}

fn entropy(counts: impl Iterator<Item = usize>, total: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / total;
            -p * p.ln()
        })
        .sum()
}

fn nmi_from_table(table: &Contingency) -> f64 {
    let total = table.total as f64;
    let row_sums: Vec<usize> = table.counts.iter().map(|r| r.iter().sum()).collect();
    let col_sums: Vec<usize> = (0..table.true_labels.len()).map(|j| table.counts.iter().map(|r| r[j]).sum()).collect();
    let h_pred = entropy(row_sums.iter().copied(), total);
    let h_true = entropy(col_sums.iter().copied(), total);
    match (table.pred_labels.len() == 1, table.true_labels.len() == 1) {
        (true, true) => return 1.0,
        (true, false) | (false, true) => return 0.0,
        _ => {}
    }
    let mut mi = 0.0;
    for (i, row) in table.counts.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c > 0 {
                let c = c as f64;
                mi += c / total * (c * total / (row_sums[i] as f64 * col_sums[j] as f64)).ln();
            }
        }
    }
    (mi / (0.5 * (h_pred + h_true))).clamp(0.0, 1.0)
}

/// Mutual information over the arithmetic mean of the two entropies.
pub fn nmi(pred: &[i64], truth: &[i64]) -> Result<f64> {
    Ok(nmi_from_table(&Contingency::new(pred, truth)?))
}

pub fn evaluate(pred: &[i64], truth: &[i64]) -> Result<MetricReport> {
    let table = Contingency::new(pred, truth)?;
    let (matched, mapping) = best_mapping(&table);
    Ok(MetricReport {
        acc: matched as f64 / table.total as f64,
        nmi: nmi_from_table(&table),
        confusion: table.counts.clone(),
        mapping,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perfect_and_renamed() {
        let gt = [0, 0, 1, 1, 2, 2, 2];
        assert_eq!(accuracy(&gt, &gt).unwrap(), 1.0);
        let renamed = [7, 7, -1, -1, 3, 3, 3];
        assert_eq!(accuracy(&renamed, &gt).unwrap(), 1.0);
        assert!((nmi(&renamed, &gt).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn crossed_two_by_two() {
        let pred = [0, 0, 1, 1];
        let gt = [0, 1, 0, 1];
        // Both mappings {0->0,1->1} and {0->1,1->0} match exactly 2 of 4.
        assert_eq!(accuracy(&pred, &gt).unwrap(), 0.5);
        assert_eq!(nmi(&pred, &gt).unwrap(), 0.0);
    }

    #[test]
    fn product_table_has_zero_nmi() {
        // 3x2 table with counts a_i * b_j.
        let a = [1usize, 2, 3];
        let b = [2usize, 5];
        let mut pred = Vec::new();
        let mut gt = Vec::new();
        for (i, &ai) in a.iter().enumerate() {
            for (j, &bj) in b.iter().enumerate() {
                for _ in 0..ai * bj {
                    pred.push(i as i64);
                    gt.push(j as i64);
                }
            }
        }
        assert!(nmi(&pred, &gt).unwrap().abs() < 1e-15);
    }

    #[test]
    fn single_cluster_conventions() {
        assert_eq!(nmi(&[0, 0, 0], &[1, 1, 1]).unwrap(), 1.0);
        assert_eq!(nmi(&[0, 0, 0], &[0, 1, 1]).unwrap(), 0.0);
        assert_eq!(nmi(&[0, 1, 1], &[0, 0, 0]).unwrap(), 0.0);
    }

    #[test]
    fn length_mismatch() {
        assert!(accuracy(&[0, 1], &[0]).is_err());
        assert!(nmi(&[0, 1], &[0]).is_err());
    }

    #[test]
    fn rectangular_assignment() {
        let pred = [0, 0, 1, 1, 2, 2];
        let gt = [0, 0, 0, 1, 1, 1];
        let r = evaluate(&pred, &gt).unwrap();
        assert!((r.acc - 4.0 / 6.0).abs() < 1e-15);
        assert_eq!(r.mapping, vec![(0, 0), (2, 1)]);
        assert_eq!(r.mapping.len(), 2);
        assert_eq!(r.confusion, vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
    }

    #[test]
    fn known_nmi_value() {
        // pred {0,0,1,1,1}, gt {0,0,0,1,1}: I = sum over cells of p log(p / (pr pc)).
        let pred = [0, 0, 1, 1, 1];
        let gt = [0, 0, 0, 1, 1];
        let (p, q) = (0.4f64, 0.6f64);
        let h = -(p * p.ln() + q * q.ln());
        let mi = 0.4 * (0.4f64 / (0.4 * 0.6)).ln() + 0.2 * (0.2f64 / (0.6 * 0.6)).ln() + 0.4 * (0.4f64 / (0.6 * 0.4)).ln();
        assert!((nmi(&pred, &gt).unwrap() - mi / h).abs() < 1e-14);
    }

    fn relabel(labels: &[i64], perm: &[i64]) -> Vec<i64> {
        labels.iter().map(|&l| perm[l as usize]).collect()
    }

    proptest! {
        #[test]
        fn invariant_to_relabeling(
            pred in proptest::collection::vec(0i64..4, 1..40),
            shift in 0usize..24,
        ) {
            let truth: Vec<i64> = pred.iter().enumerate().map(|(i, &p)| (p + (i % 3) as i64) % 3).collect();
            let perms: Vec<[i64; 4]> = vec![[0,1,2,3],[3,2,1,0],[1,0,3,2],[2,3,0,1],[10,-4,7,2],[5,6,7,8]];
            let perm = perms[shift % perms.len()];
            let moved = relabel(&pred, &perm);
            prop_assert_eq!(accuracy(&moved, &truth).unwrap(), accuracy(&pred, &truth).unwrap());
            prop_assert!((nmi(&moved, &truth).unwrap() - nmi(&pred, &truth).unwrap()).abs() < 1e-12);
            prop_assert!((nmi(&pred, &truth).unwrap() - nmi(&truth, &pred).unwrap()).abs() < 1e-12);
            let n = nmi(&pred, &truth).unwrap();
            prop_assert!((0.0..=1.0).contains(&n));
        }
    }
}
