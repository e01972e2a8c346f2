use std::cmp::Ordering;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use gcrl::eval::{evaluate, MetricReport};
use gcrl::optim::FitResult;
use gcrl::synth::sample;
use gcrl::{io, segment, Error, FeatureSequence, Result, SolverConfig};
use log::{info, warn};

use crate::artifacts::{plus_minus, segment_strip_svg, write_diagnostics, write_label_strip, write_text};
use crate::config::{ClusterCount, ExperimentConfig, InputSource};

pub fn load_input(input: &InputSource) -> Result<FeatureSequence> {
    match input {
        InputSource::File { features, labels } => io::ingest(features, labels.as_deref()),
        InputSource::Synth(spec) => sample(spec),
    }
}

pub fn resolve_k(k: ClusterCount, seq: &FeatureSequence) -> Result<usize> {
    let k = match k {
        ClusterCount::Fixed(k) => k,
        ClusterCount::FromLabels => seq
            .class_count()
            .ok_or_else(|| Error::Config("k = \"from-labels\" needs ground-truth labels".into()))?,
    };
    if k < 2 || k > seq.len() {
        return Err(Error::Config(format!("need 2 <= k <= {} frames, got k = {k}", seq.len())));
    }
    Ok(k)
}

/// One fit-and-cluster pass.
#[derive(Clone, Debug)]
pub struct SeedRun {
    pub seed: u64,
    pub labels: Vec<usize>,
    pub report: Option<MetricReport>,
    pub fit: FitResult,
}

pub fn run_seed(seq: &FeatureSequence, solver: &SolverConfig, k: usize, seed: u64) -> Result<SeedRun> {
    let cfg = SolverConfig { seed, ..solver.clone() };
    let (fit, seg) = segment(seq, &cfg, k)?;
    let report = match &seq.labels {
        Some(truth) => {
            let pred: Vec<i64> = seg.labels.iter().map(|&l| l as i64).collect();
            Some(evaluate(&pred, truth)?)
        }
        None => None,
    };
    if let Some(r) = &report {
        info!("seed {seed}: acc {:.4} nmi {:.4} after {} iterations", r.acc, r.nmi, fit.iterations_run);
    }
    Ok(SeedRun { seed, labels: seg.labels, report, fit })
}

/// Mean and sample standard deviation; the deviation of a single value is 0.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricSummary {
    pub acc: (f64, f64),
    pub nmi: (f64, f64),
}

fn summarize(runs: &[SeedRun]) -> Option<MetricSummary> {
    let reports: Option<Vec<&MetricReport>> = runs.iter().map(|r| r.report.as_ref()).collect();
    let reports = reports?;
    let acc: Vec<f64> = reports.iter().map(|r| r.acc).collect();
    let nmi: Vec<f64> = reports.iter().map(|r| r.nmi).collect();
    Some(MetricSummary { acc: mean_std(&acc), nmi: mean_std(&nmi) })
}

#[derive(Clone, Debug)]
pub struct ExperimentOutcome {
    pub output_dir: PathBuf,
    pub k: usize,
    pub runs: Vec<SeedRun>,
    /// Present when the input carries ground-truth labels.
    pub summary: Option<MetricSummary>,
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Predicted labels renamed to their matched ground-truth label, so both
/// strips use the same colors. Unmatched clusters get negative ids.
fn aligned_prediction(run: &SeedRun) -> Vec<i64> {
    run.labels
        .iter()
        .map(|&p| {
            let p = p as i64;
            run.report
                .as_ref()
                .and_then(|r| r.mapping.iter().find(|(from, _)| *from == p).map(|&(_, to)| to))
                .unwrap_or(-1 - p)
        })
        .collect()
}

fn write_run_artifacts(dir: &Path, run: &SeedRun, truth: Option<&[i64]>) -> Result<()> {
    let s = run.seed;
    write_diagnostics(&dir.join(format!("diagnostics_seed{s}.csv")), &run.fit.diagnostics)?;
    write_label_strip(&dir.join(format!("labels_seed{s}.csv")), &run.labels, truth)?;
    let mut rows = Vec::new();
    if let Some(t) = truth {
        rows.push(("truth", t.to_vec()));
    }
    rows.push(("predicted", aligned_prediction(run)));
    write_text(&dir.join(format!("segments_seed{s}.svg")), &segment_strip_svg(&rows))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn runs_table(runs: &[SeedRun]) -> String {
    let mut out = String::from("seed,acc,nmi,iterations,converged\n");
    for r in runs {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.seed,
            fmt_opt(r.report.as_ref().map(|m| m.acc)),
            fmt_opt(r.report.as_ref().map(|m| m.nmi)),
            r.fit.iterations_run,
            r.fit.converged
        )
        .unwrap();
    }
    out
}

fn metrics_table(summary: Option<&MetricSummary>) -> String {
    let mut out = String::from("metric,mean,std,summary\n");
    if let Some(s) = summary {
        for (name, (mean, std)) in [("acc", s.acc), ("nmi", s.nmi)] {
            writeln!(out, "{name},{mean},{std},{}", plus_minus(mean, std)).unwrap();
        }
    }
    out
}

/// Fit, cluster and score once per seed, writing every artifact under the
/// output directory:
///
/// - `metrics.csv`: mean and sample standard deviation of ACC and NMI
/// - `runs.csv`: per-seed scores and iteration counts
/// - `diagnostics_seed{s}.csv`: per-iteration solver diagnostics
/// - `labels_seed{s}.csv`, `segments_seed{s}.svg`: label strips
/// - `config.toml`: the resolved configuration
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let seq = load_input(&cfg.input)?;
    let k = resolve_k(cfg.k, &seq)?;
    let dir = cfg.output_dir();
    create_dir(&dir)?;

    let mut runs = Vec::with_capacity(cfg.seeds.len());
    for &seed in &cfg.seeds {
        let run = run_seed(&seq, &cfg.solver, k, seed)?;
        write_run_artifacts(&dir, &run, seq.labels.as_deref())?;
        runs.push(run);
    }
    runs.sort_by_key(|r| r.seed);
    let summary = summarize(&runs);

    write_text(&dir.join("runs.csv"), &runs_table(&runs))?;
    write_text(&dir.join("metrics.csv"), &metrics_table(summary.as_ref()))?;
    let echo = toml::to_string(cfg).map_err(|e| Error::Config(e.to_string()))?;
    write_text(&dir.join("config.toml"), &echo)?;
    Ok(ExperimentOutcome { output_dir: dir, k, runs, summary })
}

/// One grid point of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub lambda0: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub h: f64,
    pub summary: MetricSummary,
}

impl SweepRow {
    fn params(&self) -> [f64; 4] {
        [self.lambda0, self.lambda1, self.lambda2, self.h]
    }
}

fn compare_params(a: &[f64; 4], b: &[f64; 4]) -> Ordering {
    a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
}

/// Cartesian product of the grid axes, sorted, with duplicates dropped.
pub fn grid_points(cfg: &ExperimentConfig) -> Vec<[f64; 4]> {
    let axis = |a: &Option<Vec<f64>>, base: f64| a.clone().unwrap_or_else(|| vec![base]);
    let s = &cfg.solver;
    let g = &cfg.sweep;
    let mut points = Vec::new();
    for &l0 in &axis(&g.lambda0, s.lambda0) {
        for &l1 in &axis(&g.lambda1, s.lambda1) {
            for &l2 in &axis(&g.lambda2, s.lambda2) {
                for &h in &axis(&g.h, s.h) {
                    points.push([l0, l1, l2, h]);
                }
            }
        }
    }
    points.sort_by(compare_params);
    let before = points.len();
    points.dedup_by(|a, b| compare_params(a, b).is_eq());
    if points.len() < before {
        warn!("sweep grid has {} duplicate point(s); each is run once", before - points.len());
    }
    points
}

fn sweep_table(rows: &[SweepRow]) -> String {
    let mut out = String::from("lambda0,lambda1,lambda2,h,acc_mean,acc_std,nmi_mean,nmi_std\n");
    for r in rows {
        let s = &r.summary;
        writeln!(out, "{},{},{},{},{},{},{},{}", r.lambda0, r.lambda1, r.lambda2, r.h, s.acc.0, s.acc.1, s.nmi.0, s.nmi.1).unwrap();
    }
    out
}

/// Score every grid point over all seeds and write `sweep.csv`, sorted by
/// `(lambda0, lambda1, lambda2, h)`.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    if cfg.sweep.is_empty() {
        return Err(Error::Config("sweep needs at least one grid axis".into()));
    }
    let seq = load_input(&cfg.input)?;
    if seq.labels.is_none() {
        return Err(Error::Config("sweep needs ground-truth labels to score grid points".into()));
    }
    let k = resolve_k(cfg.k, &seq)?;
    let dir = cfg.output_dir();
    create_dir(&dir)?;

    let mut rows = Vec::new();
    for [lambda0, lambda1, lambda2, h] in grid_points(cfg) {
        let solver = SolverConfig { lambda0, lambda1, lambda2, h, ..cfg.solver.clone() };
        solver.validate()?;
        info!("grid point lambda0={lambda0} lambda1={lambda1} lambda2={lambda2} h={h}");
        let runs = cfg.seeds.iter().map(|&s| run_seed(&seq, &solver, k, s)).collect::<Result<Vec<_>>>()?;
        let summary = summarize(&runs).expect("labels are present");
        rows.push(SweepRow { lambda0, lambda1, lambda2, h, summary });
    }
    rows.sort_by(|a, b| compare_params(&a.params(), &b.params()));
    write_text(&dir.join("sweep.csv"), &sweep_table(&rows))?;
    Ok(rows)
}
