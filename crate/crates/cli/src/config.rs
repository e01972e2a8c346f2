use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use gcrl::synth::SynthSpec;
use gcrl::{Error, Result, SolverConfig};
use serde::{Deserialize, Serialize};

/// Environment variable holding the default output directory.
pub const OUTPUT_DIR_ENV: &str = "GCRL_OUTPUT_DIR";

/// Output directory used when neither the flag, the config file nor the
/// environment names one.
pub const DEFAULT_OUTPUT_DIR: &str = "gcrl-out";

/// Where the feature sequence comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum InputSource {
    /// CSV or binary feature file, with an optional label CSV.
    File { features: PathBuf, labels: Option<PathBuf> },
    /// Sequence drawn by the synthetic generator.
    Synth(SynthSpec),
}

/// Number of clusters, either given or read off the ground-truth labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "KRepr", into = "KRepr")]
pub enum ClusterCount {
    Fixed(usize),
    #[default]
    FromLabels,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum KRepr {
    Count(usize),
    Name(String),
}

impl TryFrom<KRepr> for ClusterCount {
    type Error = String;

    fn try_from(r: KRepr) -> std::result::Result<Self, String> {
        match r {
            KRepr::Count(k) => Ok(ClusterCount::Fixed(k)),
            KRepr::Name(s) => s.parse(),
        }
    }
}

impl From<ClusterCount> for KRepr {
    fn from(k: ClusterCount) -> Self {
        match k {
            ClusterCount::Fixed(k) => KRepr::Count(k),
            ClusterCount::FromLabels => KRepr::Name("from-labels".into()),
        }
    }
}

impl std::str::FromStr for ClusterCount {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "from-labels" {
            return Ok(ClusterCount::FromLabels);
        }
        s.parse().map(ClusterCount::Fixed).map_err(|_| format!("expected a cluster count or \"from-labels\", got {s:?}"))
    }
}

impl fmt::Display for ClusterCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClusterCount::Fixed(k) => write!(f, "{k}"),
            ClusterCount::FromLabels => f.write_str("from-labels"),
        }
    }
}

/// Values to try per hyperparameter. An absent axis stays at the solver's
/// value.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepGrid {
    pub lambda0: Option<Vec<f64>>,
    pub lambda1: Option<Vec<f64>>,
    pub lambda2: Option<Vec<f64>>,
    pub h: Option<Vec<f64>>,
}

impl SweepGrid {
    pub fn is_empty(&self) -> bool {
        self.axes().iter().all(|(_, a)| a.is_none())
    }

    fn axes(&self) -> [(&'static str, &Option<Vec<f64>>); 4] {
        [("lambda0", &self.lambda0), ("lambda1", &self.lambda1), ("lambda2", &self.lambda2), ("h", &self.h)]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, axis) in self.axes() {
            if let Some(values) = axis {
                if values.is_empty() {
                    return Err(Error::Config(format!("sweep grid for {name} is empty")));
                }
                if let Some(v) = values.iter().find(|v| !v.is_finite()) {
                    return Err(Error::Config(format!("sweep grid for {name} contains {v}")));
                }
            }
        }
        Ok(())
    }
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub input: InputSource,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub k: ClusterCount,
    pub out_dir: Option<PathBuf>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub sweep: SweepGrid,
}

impl ExperimentConfig {
    pub fn new(input: InputSource) -> Self {
        Self {
            input,
            solver: SolverConfig::default(),
            k: ClusterCount::default(),
            out_dir: None,
            seeds: default_seeds(),
            sweep: SweepGrid::default(),
        }
    }

    /// Parse a TOML config file. Relative input paths are taken relative to
    /// the file's directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: Self = toml::from_str(&text).map_err(|e| Error::format(path, e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        if let InputSource::File { features, labels } = &mut cfg.input {
            *features = base.join(&*features);
            if let Some(l) = labels {
                *l = base.join(&*l);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Config("seed list is empty".into()));
        }
        if let ClusterCount::Fixed(k) = self.k {
            if k < 2 {
                return Err(Error::Config(format!("need k >= 2 clusters, got {k}")));
            }
        }
        if let InputSource::Synth(spec) = &self.input {
            spec.validate()?;
        }
        self.sweep.validate()?;
        self.solver.validate()
    }

    /// Output directory: the configured one, else the environment default,
    /// else [`DEFAULT_OUTPUT_DIR`].
    pub fn output_dir(&self) -> PathBuf {
        self.out_dir
            .clone()
            .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_file_input_and_defaults() {
        let cfg: ExperimentConfig = toml::from_str(
            r#"
            k = 3
            seeds = [1, 2]
            [input.file]
            features = "x.csv"
            [solver]
            lambda2 = 5.0
            "#,
        )
        .unwrap();
        assert_eq!(cfg.k, ClusterCount::Fixed(3));
        assert_eq!(cfg.seeds, vec![1, 2]);
        assert_eq!(cfg.solver.lambda2, 5.0);
        assert_eq!(cfg.solver.lambda0, SolverConfig::default().lambda0);
        assert!(cfg.sweep.is_empty());
        assert!(matches!(cfg.input, InputSource::File { labels: None, .. }));
    }

    #[test]
    fn parses_synth_input_and_grid() {
        let cfg: ExperimentConfig = toml::from_str(
            r#"
            k = "from-labels"
            [input.synth]
            n = 10
            subspaces = 2
            dims = [2, 2]
            segments = [[0, 20], [1, 20]]
            noise_mode = "piecewise-random"
            noise_sigma = 0.1
            [sweep]
            h = [0.001, 0.01]
            "#,
        )
        .unwrap();
        assert_eq!(cfg.k, ClusterCount::FromLabels);
        assert_eq!(cfg.seeds, vec![0]);
        assert_eq!(cfg.sweep.h, Some(vec![0.001, 0.01]));
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_unknown_fields_and_bad_k() {
        assert!(toml::from_str::<ExperimentConfig>("bogus = 1\n[input.file]\nfeatures = \"x\"").is_err());
        assert!(toml::from_str::<ExperimentConfig>("k = \"many\"\n[input.file]\nfeatures = \"x\"").is_err());
        let mut cfg = ExperimentConfig::new(InputSource::File { features: "x".into(), labels: None });
        cfg.k = ClusterCount::Fixed(1);
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        cfg.k = ClusterCount::Fixed(2);
        cfg.seeds.clear();
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn empty_grid_axis_is_rejected() {
        let mut cfg = ExperimentConfig::new(InputSource::File { features: "x".into(), labels: None });
        cfg.sweep.lambda0 = Some(vec![]);
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn k_round_trips_through_strings() {
        assert_eq!("4".parse::<ClusterCount>().unwrap(), ClusterCount::Fixed(4));
        assert_eq!("from-labels".parse::<ClusterCount>().unwrap(), ClusterCount::FromLabels);
        assert_eq!(ClusterCount::FromLabels.to_string(), "from-labels");
        let text = toml::to_string(&ExperimentConfig::new(InputSource::File { features: "x".into(), labels: None })).unwrap();
        let back: ExperimentConfig = toml::from_str(&text).unwrap();
        assert_eq!(back.k, ClusterCount::FromLabels);
    }
}
