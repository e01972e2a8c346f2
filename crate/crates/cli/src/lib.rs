//! Command-line experiment runner: `run`, `sweep`, `synth` and `convert`.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use gcrl::synth::{sample, NoiseMode, SynthSpec};
use gcrl::{io, Error, FeatureSequence, Mode, Result};

pub mod artifacts;
pub mod config;
pub mod experiment;

pub use config::{ClusterCount, ExperimentConfig, InputSource, SweepGrid};
pub use experiment::{run_experiment, run_sweep, ExperimentOutcome, SweepRow};

/// Process exit code for an error: 2 for I/O and configuration problems,
/// 1 for numerical failures.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_input_error() {
        2
    } else {
        1
    }
}

#[derive(Debug, Parser)]
#[command(name = "gcrl", version, about = "Graph-constrained temporal subspace clustering")]
pub struct Cli {
    /// More log output (-v info, -vv debug). RUST_LOG takes precedence.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit, segment and score a sequence over one or more seeds.
    Run(ExperimentArgs),
    /// Grid search over lambda0, lambda1, lambda2 and h.
    Sweep(SweepArgs),
    /// Write a synthetic union-of-subspaces sequence.
    Synth(SynthArgs),
    /// Convert between the CSV and binary feature formats.
    Convert(ConvertArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    Full,
    TscAblation,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Full => Mode::Full,
            ModeArg::TscAblation => Mode::TscAblation,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum NoiseArg {
    None,
    Iid,
    PiecewiseFixed,
    PiecewiseRandom,
}

impl From<NoiseArg> for NoiseMode {
    fn from(m: NoiseArg) -> Self {
        match m {
            NoiseArg::None => NoiseMode::None,
            NoiseArg::Iid => NoiseMode::Iid,
            NoiseArg::PiecewiseFixed => NoiseMode::PiecewiseFixed,
            NoiseArg::PiecewiseRandom => NoiseMode::PiecewiseRandom,
        }
    }
}

/// Solver overrides; each replaces the config-file value when given.
#[derive(Debug, Default, Args)]
pub struct SolverArgs {
    #[arg(long)]
    pub lambda0: Option<f64>,
    #[arg(long)]
    pub lambda1: Option<f64>,
    #[arg(long)]
    pub lambda2: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    /// Similarity kernel bandwidth.
    #[arg(long)]
    pub h: Option<f64>,
    /// Dictionary atoms.
    #[arg(long)]
    pub r: Option<usize>,
    /// Temporal half-window.
    #[arg(long)]
    pub s: Option<usize>,
    #[arg(long)]
    pub max_outer_iters: Option<usize>,
    #[arg(long)]
    pub inner_gd_iters: Option<usize>,
    #[arg(long)]
    pub inner_gd_step: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
}

#[derive(Debug, Default, Args)]
pub struct ExperimentArgs {
    /// TOML experiment config; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Feature file (CSV with frames as columns, or binary).
    #[arg(long, conflicts_with = "synth")]
    pub input: Option<PathBuf>,
    /// Label CSV for --input, one integer per frame.
    #[arg(long, requires = "input")]
    pub labels: Option<PathBuf>,
    /// TOML synthetic-sequence spec to use as input.
    #[arg(long)]
    pub synth: Option<PathBuf>,
    /// Cluster count, or "from-labels".
    #[arg(long)]
    pub k: Option<ClusterCount>,
    /// Comma-separated solver seeds.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    /// Output directory [default: $GCRL_OUTPUT_DIR, else ./gcrl-out].
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Default, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    #[arg(long, value_delimiter = ',')]
    pub grid_lambda0: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub grid_lambda1: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub grid_lambda2: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub grid_h: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// TOML synthetic-sequence spec; replaces the shape flags below.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Ambient dimension.
    #[arg(long, default_value_t = 50)]
    pub n: usize,
    #[arg(long, default_value_t = 5)]
    pub subspaces: usize,
    /// Dimension of every subspace.
    #[arg(long, default_value_t = 3)]
    pub dim: usize,
    /// Frames per segment; one segment per subspace, in order.
    #[arg(long, default_value_t = 60)]
    pub segment_len: usize,
    #[arg(long, value_enum, default_value = "none")]
    pub noise: NoiseArg,
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; `.gcrl` or `.bin` selects the binary format.
    #[arg(long)]
    pub out: PathBuf,
    /// Label CSV for CSV output [default: <out stem>_labels.csv].
    #[arg(long)]
    pub labels_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    pub input: PathBuf,
    /// Output file; `.gcrl` or `.bin` selects the binary format.
    pub output: PathBuf,
    /// Label CSV to attach to the input.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Where CSV output writes labels [default: <output stem>_labels.csv].
    #[arg(long)]
    pub labels_out: Option<PathBuf>,
    /// Min-max normalize into [0, 1] before writing.
    #[arg(long)]
    pub normalize: bool,
}

fn read_toml<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    toml::from_str(&text).map_err(|e| Error::format(path, e.to_string()))
}

impl SolverArgs {
    fn apply(&self, cfg: &mut gcrl::SolverConfig) {
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field {
                    cfg.$field = v;
                }
            )*};
        }
        set!(lambda0, lambda1, lambda2, rho, h, r, s, max_outer_iters, inner_gd_iters, inner_gd_step, tol);
        if let Some(m) = self.mode {
            cfg.mode = m.into();
        }
    }
}

impl ExperimentArgs {
    /// Config file (if any) with the flags layered on top.
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let input = match (&self.input, &self.synth) {
            (Some(features), _) => Some(InputSource::File { features: features.clone(), labels: self.labels.clone() }),
            (None, Some(spec)) => Some(InputSource::Synth(read_toml(spec)?)),
            (None, None) => None,
        };
        let mut cfg = match (&self.config, input) {
            (Some(path), input) => {
                let mut cfg = ExperimentConfig::from_file(path)?;
                if let Some(i) = input {
                    cfg.input = i;
                }
                cfg
            }
            (None, Some(i)) => ExperimentConfig::new(i),
            (None, None) => return Err(Error::Config("give --config, --input or --synth".into())),
        };
        if let Some(k) = self.k {
            cfg.k = k;
        }
        if let Some(seeds) = &self.seeds {
            cfg.seeds = seeds.clone();
        }
        if let Some(out) = &self.out {
            cfg.out_dir = Some(out.clone());
        }
        self.solver.apply(&mut cfg.solver);
        Ok(cfg)
    }
}

impl SweepArgs {
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = self.experiment.resolve()?;
        let g = &mut cfg.sweep;
        for (axis, flag) in [
            (&mut g.lambda0, &self.grid_lambda0),
            (&mut g.lambda1, &self.grid_lambda1),
            (&mut g.lambda2, &self.grid_lambda2),
            (&mut g.h, &self.grid_h),
        ] {
            if flag.is_some() {
                axis.clone_from(flag);
            }
        }
        Ok(cfg)
    }
}

impl SynthArgs {
    pub fn spec(&self) -> Result<SynthSpec> {
        match &self.spec {
            Some(path) => read_toml(path),
            None => {
                let segments = (0..self.subspaces).map(|s| (s, self.segment_len)).collect();
                Ok(SynthSpec::uniform(self.n, self.subspaces, self.dim, segments, self.seed)
                    .with_noise(self.noise.into(), self.sigma))
            }
        }
    }
}

fn is_binary(path: &Path) -> bool {
    matches!(path.extension().and_then(|e| e.to_str()), Some("gcrl" | "bin"))
}

fn default_labels_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}_labels.csv"))
}

/// Write a sequence in the format chosen by the file extension. CSV output
/// puts labels, if any, in a separate file.
pub fn write_sequence(path: &Path, seq: &FeatureSequence, labels_out: Option<&Path>) -> Result<()> {
    if is_binary(path) {
        return io::write_binary(path, seq);
    }
    io::write_matrix_csv(path, &seq.features)?;
    if let Some(l) = &seq.labels {
        let lp = labels_out.map(Path::to_path_buf).unwrap_or_else(|| default_labels_path(path));
        io::write_labels_csv(&lp, l)?;
    }
    Ok(())
}

fn print_outcome(out: &ExperimentOutcome) {
    if let Some(s) = &out.summary {
        println!("acc {}", artifacts::plus_minus(s.acc.0, s.acc.1));
        println!("nmi {}", artifacts::plus_minus(s.nmi.0, s.nmi.1));
    }
    println!("k = {}, {} seed(s); artifacts in {}", out.k, out.runs.len(), out.output_dir.display());
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Run(args) => {
            let outcome = run_experiment(&args.resolve()?)?;
            print_outcome(&outcome);
        }
        Command::Sweep(args) => {
            let cfg = args.resolve()?;
            let rows = run_sweep(&cfg)?;
            println!("{} grid point(s); results in {}", rows.len(), cfg.output_dir().join("sweep.csv").display());
        }
        Command::Synth(args) => {
            let spec = args.spec()?;
            let seq = sample(&spec)?;
            write_sequence(&args.out, &seq, args.labels_out.as_deref())?;
            println!("wrote {} x {} sequence to {}", seq.dim(), seq.len(), args.out.display());
        }
        Command::Convert(args) => {
            let mut seq = io::read_raw(&args.input, args.labels.as_deref())?;
            if args.normalize {
                seq = seq.normalized()?;
            }
            write_sequence(&args.output, &seq, args.labels_out.as_deref())?;
        }
    }
    Ok(())
}
