//! Feature sequences and segmentations.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;

/// Global min-max rescale of every entry into `[0, 1]`.
///
/// A single min/max over the whole matrix is used (not per feature) so the
/// relative scale of features, which the cosine kernel sees, is preserved.
pub fn normalize(x: &Mat) -> Result<Mat> {
    check_finite(x)?;
    let (min, max) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if !(max > min) {
        return Err(Error::ZeroRange(min));
    }
    let range = max - min;
    Ok(x.map(|v| ((v - min) / range).clamp(0.0, 1.0)))
}

pub fn check_finite(x: &Mat) -> Result<()> {
    for c in 0..x.ncols() {
        for r in 0..x.nrows() {
            if !x[(r, c)].is_finite() {
                return Err(Error::NonFinite { row: r, col: c });
            }
        }
    }
    Ok(())
}

pub(crate) fn check_unit_interval(x: &Mat) -> Result<()> {
    check_finite(x)?;
    for c in 0..x.ncols() {
        for r in 0..x.nrows() {
            let v = x[(r, c)];
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::NotNormalized { row: r, col: c, value: v });
            }
        }
    }
    Ok(())
}

/// An `n x N` feature matrix, one column per time step.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureSequence {
    pub features: Mat,
    pub labels: Option<Vec<i64>>,
    pub name: String,
}

impl FeatureSequence {
    pub fn new(features: Mat, labels: Option<Vec<i64>>, name: impl Into<String>) -> Result<Self> {
        check_finite(&features)?;
        if features.nrows() < 1 || features.ncols() < 2 {
            return Err(Error::Dimension(format!(
                "need at least 1 feature and 2 frames, got {}x{}",
                features.nrows(),
                features.ncols()
            )));
        }
        if let Some(l) = &labels {
            if l.len() != features.ncols() {
                return Err(Error::Dimension(format!(
                    "{} labels for {} frames",
                    l.len(),
                    features.ncols()
                )));
            }
        }
        Ok(Self { features, labels, name: name.into() })
    }

    /// Feature dimension `n`.
    pub fn dim(&self) -> usize {
        self.features.nrows()
    }

    /// Number of frames `N`.
    pub fn len(&self) -> usize {
        self.features.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.features.ncols() == 0
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.features = normalize(&self.features)?;
        Ok(self)
    }

    /// Number of distinct ground-truth classes, if labels are present.
    pub fn class_count(&self) -> Option<usize> {
        self.labels.as_ref().map(|l| {
            let mut v = l.clone();
            v.sort_unstable();
            v.dedup();
            v.len()
        })
    }
}

/// A maximal run of frames sharing one cluster label. `end` is inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
    pub cluster: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segmentation {
    pub labels: Vec<usize>,
    pub segments: Vec<Segment>,
    pub k: usize,
}

impl Segmentation {
    pub fn from_labels(labels: Vec<usize>, k: usize) -> Self {
        let mut segments: Vec<Segment> = Vec::new();
        for (t, &c) in labels.iter().enumerate() {
            match segments.last_mut() {
                Some(seg) if seg.cluster == c => seg.end = t,
                _ => segments.push(Segment { start: t, end: t, cluster: c }),
            }
        }
        Self { labels, segments, k }
    }

    /// Expand the segments back into per-frame labels.
    pub fn expand(&self) -> Vec<usize> {
        self.segments
            .iter()
            .flat_map(|s| std::iter::repeat_n(s.cluster, s.end - s.start + 1))
            .collect()
    }
}

/// Relabel so clusters are numbered `0, 1, ...` in order of first appearance.
pub fn relabel_first_appearance(labels: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|&l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect()
}
