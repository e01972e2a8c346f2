//! Synthetic sequences drawn from a union of linear subspaces, plus
//! piecewise-variance noise.
//!
//! Each subspace is spanned by `dim` nonnegative generator vectors with
//! half-rectified Gaussian entries, so nonnegative coefficient mixtures stay
//! in the nonnegative orthant without any affine shift; the whole matrix is
//! then scaled (never shifted) into `[0, 1]`, which keeps every segment on
//! its linear subspace.

use nalgebra::QR;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{FeatureSequence, Mat};
use crate::error::{Error, Result};
use crate::rng::{seeded_rng, seeded_stream, SeededRng};

/// Noise multipliers of the four feature blocks, relative to `sigma`.
pub const STAIRCASE: [f64; 4] = [0.5, 1.0, 1.5, 2.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseMode {
    #[default]
    None,
    /// Same standard deviation on every entry.
    Iid,
    /// Feature vector split into four fixed contiguous blocks with standard
    /// deviations following [`STAIRCASE`].
    PiecewiseFixed,
    /// As `PiecewiseFixed`, but the block boundaries are redrawn per frame.
    PiecewiseRandom,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    /// Ambient dimension.
    pub n: usize,
    /// Number of subspaces.
    pub subspaces: usize,
    /// Dimension of each subspace.
    pub dims: Vec<usize>,
    /// `(subspace id, length)` per segment, in temporal order.
    pub segments: Vec<(usize, usize)>,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub noise_mode: NoiseMode,
    #[serde(default)]
    pub seed: u64,
}

impl SynthSpec {
    /// `subspaces` subspaces of equal dimension.
    pub fn uniform(n: usize, subspaces: usize, dim: usize, segments: Vec<(usize, usize)>, seed: u64) -> Self {
        Self {
            n,
            subspaces,
            dims: vec![dim; subspaces],
            segments,
            noise_sigma: 0.0,
            noise_mode: NoiseMode::None,
            seed,
        }
    }

    pub fn with_noise(mut self, mode: NoiseMode, sigma: f64) -> Self {
        self.noise_mode = mode;
        self.noise_sigma = sigma;
        self
    }

    pub fn frames(&self) -> usize {
        self.segments.iter().map(|&(_, len)| len).sum()
    }

    pub fn labels(&self) -> Vec<i64> {
        self.segments
            .iter()
            .flat_map(|&(id, len)| std::iter::repeat_n(id as i64, len))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.subspaces == 0 {
            return Err(Error::Config("need n >= 1 and at least one subspace".into()));
        }
        if self.dims.len() != self.subspaces {
            return Err(Error::Config(format!(
                "{} subspace dimensions given for {} subspaces",
                self.dims.len(),
                self.subspaces
            )));
        }
        if let Some(&d) = self.dims.iter().find(|&&d| d == 0 || d >= self.n) {
            return Err(Error::Config(format!("subspace dimension {d} must lie in [1, {})", self.n)));
        }
        if let Some(&(id, _)) = self.segments.iter().find(|&&(id, _)| id >= self.subspaces) {
            return Err(Error::Config(format!("segment uses subspace {id} of {}", self.subspaces)));
        }
        if self.segments.iter().any(|&(_, len)| len == 0) {
            return Err(Error::Config("empty segment".into()));
        }
        if self.frames() < 2 {
            return Err(Error::Config("need at least 2 frames".into()));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::Config(format!("noise sigma must be >= 0, got {}", self.noise_sigma)));
        }
        Ok(())
    }
}

/// Nonnegative spanning vectors of one subspace.
fn generators(n: usize, dim: usize, rng: &mut SeededRng) -> Mat {
    let mut g = Mat::zeros(n, dim);
    for mut col in g.column_iter_mut() {
        loop {
            for v in col.iter_mut() {
                *v = rng.sample::<f64, _>(StandardNormal).max(0.0);
            }
            if col.iter().any(|&v| v > 0.0) {
                break;
            }
        }
    }
    g
}

/// Orthonormal bases of the subspaces a spec draws from.
pub fn subspace_bases(spec: &SynthSpec) -> Result<Vec<Mat>> {
    spec.validate()?;
    let mut rng = seeded_rng(spec.seed);
    Ok(spec
        .dims
        .iter()
        .map(|&dim| QR::new(generators(spec.n, dim, &mut rng)).q())
        .collect())
}

/// Clean sequence for `spec`; noise settings are ignored (see [`add_noise`]).
pub fn generate(spec: &SynthSpec) -> Result<FeatureSequence> {
    spec.validate()?;
    let mut rng = seeded_rng(spec.seed);
    let gens: Vec<Mat> = spec.dims.iter().map(|&dim| generators(spec.n, dim, &mut rng)).collect();
    let mut x = Mat::zeros(spec.n, spec.frames());
    let mut t = 0;
    for &(id, len) in &spec.segments {
        let g = &gens[id];
        for _ in 0..len {
            let coeffs = nalgebra::DVector::from_fn(g.ncols(), |_, _| rng.random_range(0.05..1.0));
            x.set_column(t, &(g * coeffs));
            t += 1;
        }
    }
    let max = x.max();
    x /= max;
    FeatureSequence::new(x, Some(spec.labels()), format!("synth-{}", spec.seed))
}

fn block_bounds(n: usize) -> [usize; 5] {
    let mut b = [0; 5];
    for (i, v) in b.iter_mut().enumerate() {
        *v = i * n / 4;
    }
    b
}

/// Additive perturbation (before clipping) that [`add_noise`] applies.
pub fn noise_field(n: usize, frames: usize, mode: NoiseMode, sigma: f64, seed: u64) -> Result<Mat> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::Config(format!("noise sigma must be >= 0, got {sigma}")));
    }
    let mut rng = seeded_stream(seed, 1);
    let mut field = Mat::zeros(n, frames);
    if mode == NoiseMode::None || sigma == 0.0 {
        return Ok(field);
    }
    for t in 0..frames {
        let bounds = match mode {
            NoiseMode::Iid | NoiseMode::None => [0, n, n, n, n],
            NoiseMode::PiecewiseFixed => block_bounds(n),
            NoiseMode::PiecewiseRandom => {
                let mut cuts = [rng.random_range(0..=n), rng.random_range(0..=n), rng.random_range(0..=n)];
                cuts.sort_unstable();
                [0, cuts[0], cuts[1], cuts[2], n]
            }
        };
        for b in 0..4 {
            let scale = match mode {
                NoiseMode::Iid => sigma,
                _ => sigma * STAIRCASE[b],
            };
            for r in bounds[b]..bounds[b + 1] {
                field[(r, t)] = scale * rng.sample::<f64, _>(StandardNormal);
            }
        }
    }
    Ok(field)
}

/// Add zero-mean Gaussian noise per `spec` and clip back into `[0, 1]`.
/// Labels are carried over unchanged.
pub fn add_noise(x: &FeatureSequence, spec: &SynthSpec) -> Result<FeatureSequence> {
    let field = noise_field(x.dim(), x.len(), spec.noise_mode, spec.noise_sigma, spec.seed)?;
    if spec.noise_mode == NoiseMode::None || spec.noise_sigma == 0.0 {
        return Ok(x.clone());
    }
    let noisy = (&x.features + field).map(|v| v.clamp(0.0, 1.0));
    FeatureSequence::new(noisy, x.labels.clone(), format!("{}-noisy", x.name))
}

/// [`generate`] followed by [`add_noise`].
pub fn sample(spec: &SynthSpec) -> Result<FeatureSequence> {
    add_noise(&generate(spec)?, spec)
}
