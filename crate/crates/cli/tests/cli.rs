use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gcrl::synth::{NoiseMode, SynthSpec};
use gcrl::{io, Mat, Mode};
use gcrl_cli::{run_experiment, run_sweep, ClusterCount, ExperimentConfig, InputSource, SweepGrid};

fn gcrl(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gcrl"))
        .args(args)
        .current_dir(cwd)
        .env_remove("GCRL_OUTPUT_DIR")
        .output()
        .unwrap()
}

fn two_subspaces(sigma: f64) -> SynthSpec {
    SynthSpec::uniform(20, 2, 2, vec![(0, 30), (1, 30)], 3).with_noise(NoiseMode::PiecewiseRandom, sigma)
}

fn synth_cfg(spec: SynthSpec, out: &Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(InputSource::Synth(spec));
    cfg.out_dir = Some(out.to_path_buf());
    cfg.seeds = (0..5).collect();
    cfg
}

fn files_under(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(files_under(&p));
        } else {
            out.push(p);
        }
    }
    out.sort();
    out
}

#[test]
fn clean_two_subspaces_recover_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_experiment(&synth_cfg(two_subspaces(0.0), dir.path())).unwrap();
    let s = out.summary.unwrap();
    assert_eq!(out.k, 2);
    assert_eq!(s.nmi, (1.0, 0.0));
    assert_eq!(s.acc, (1.0, 0.0));
    let metrics = fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
    assert!(metrics.contains("nmi,1,0,1.0000 \u{b1} 0.0000"), "{metrics}");
}

/// Noisy-data hyperparameters used by the acceptance suite.
fn tune(cfg: &mut ExperimentConfig) {
    cfg.solver.lambda0 = 0.1;
    cfg.solver.lambda1 = 4e-4;
    cfg.solver.lambda2 = 0.01;
    cfg.solver.inner_gd_iters = 5;
    cfg.solver.max_outer_iters = 300;
}

#[test]
fn ablation_does_not_beat_full_model() {
    let dir = tempfile::tempdir().unwrap();
    let spec = two_subspaces(0.4);
    let mut cfg = synth_cfg(spec.clone(), &dir.path().join("full"));
    tune(&mut cfg);
    let full = run_experiment(&cfg).unwrap();
    cfg.out_dir = Some(dir.path().join("ablation"));
    cfg.solver.mode = Mode::TscAblation;
    let ablation = run_experiment(&cfg).unwrap();
    assert!(ablation.summary.unwrap().nmi.0 <= full.summary.unwrap().nmi.0);
}

#[test]
fn runs_are_byte_identical_and_confined_to_the_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let spec = two_subspaces(0.2);
    let mut cfg = synth_cfg(spec, &dir.path().join("a"));
    cfg.seeds = vec![0, 1];
    run_experiment(&cfg).unwrap();
    cfg.out_dir = Some(dir.path().join("b"));
    run_experiment(&cfg).unwrap();

    let a = files_under(&dir.path().join("a"));
    let b = files_under(&dir.path().join("b"));
    let names = |v: &[PathBuf]| v.iter().map(|p| p.file_name().unwrap().to_owned()).collect::<Vec<_>>();
    assert_eq!(names(&a), names(&b));
    assert_eq!(a.len(), 3 + 3 * 2);
    for (pa, pb) in a.iter().zip(&b) {
        if pa.file_name().unwrap() == "config.toml" {
            continue;
        }
        assert_eq!(fs::read(pa).unwrap(), fs::read(pb).unwrap(), "{}", pa.display());
    }
    // Nothing escapes the two output directories.
    assert_eq!(files_under(dir.path()).len(), a.len() + b.len());
}

#[test]
fn diagnostics_have_consensus_gap_columns() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = synth_cfg(two_subspaces(0.0), dir.path());
    cfg.seeds = vec![7];
    cfg.solver.max_outer_iters = 12;
    run_experiment(&cfg).unwrap();
    let text = fs::read_to_string(dir.path().join("diagnostics_seed7.csv")).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    assert!(header.contains(&"y_minus_xtilde_fro"));
    assert!(header.contains(&"y_minus_xtilde_inf"));
    assert_eq!(text.lines().count(), 1 + 12);
    let strip = fs::read_to_string(dir.path().join("labels_seed7.csv")).unwrap();
    assert_eq!(strip.lines().count(), 61);
    let svg = fs::read_to_string(dir.path().join("segments_seed7.svg")).unwrap();
    assert!(svg.contains(">truth<") && svg.contains(">predicted<"));
}

#[test]
fn sweep_covers_the_grid_once_in_sorted_order() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = synth_cfg(two_subspaces(0.0), dir.path());
    cfg.seeds = vec![0];
    cfg.solver.max_outer_iters = 10;
    cfg.sweep = SweepGrid { lambda0: Some(vec![0.5, 0.1, 0.5]), lambda2: Some(vec![10.0, 1.0]), ..Default::default() };
    let rows = run_sweep(&cfg).unwrap();
    assert_eq!(rows.len(), 4);
    let text = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let keys: Vec<String> = text.lines().skip(1).map(|l| l.split(',').take(3).collect::<Vec<_>>().join(",")).collect();
    assert_eq!(keys, vec!["0.1,0.004,1", "0.1,0.004,10", "0.5,0.004,1", "0.5,0.004,10"]);
}

#[test]
fn h_sweep_is_flat_on_synthetic_data() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = synth_cfg(two_subspaces(0.3), dir.path());
    cfg.seeds = vec![0, 1, 2];
    cfg.sweep.h = Some(vec![1.5e-4, 1.5e-3, 1.5e-2]);
    let rows = run_sweep(&cfg).unwrap();
    let nmi: Vec<f64> = rows.iter().map(|r| r.summary.nmi.0).collect();
    let spread = nmi.iter().cloned().fold(f64::MIN, f64::max) - nmi.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread < 0.1, "{nmi:?}");
}

#[test]
fn sweep_without_grid_or_labels_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = synth_cfg(two_subspaces(0.0), dir.path());
    assert!(matches!(run_sweep(&cfg), Err(gcrl::Error::Config(_))));

    let x = dir.path().join("x.csv");
    fs::write(&x, "0,0.5,1,0.2\n1,0.5,0,0.3\n").unwrap();
    let mut cfg = ExperimentConfig::new(InputSource::File { features: x, labels: None });
    cfg.k = ClusterCount::Fixed(2);
    cfg.sweep.h = Some(vec![0.01]);
    assert!(matches!(run_sweep(&cfg), Err(gcrl::Error::Config(_))));
}

#[test]
fn missing_input_exits_2_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = gcrl(&["run", "--input", "no_such_features.csv", "--k", "2"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no_such_features.csv"));
}

#[test]
fn nan_in_csv_exits_2_naming_the_cell() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("x.csv"), "0,0.5,1\n1,NaN,0\n").unwrap();
    let out = gcrl(&["run", "--input", "x.csv", "--k", "2"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("row 2") && err.contains("column 2"), "{err}");
}

#[test]
fn bad_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.toml"), "k = 2\n[input.file]\nfeatures = \"x.csv\"\n[solver]\nrho = -1.0\n").unwrap();
    let out = gcrl(&["run", "--config", "c.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    fs::write(dir.path().join("c.toml"), "not toml at all [").unwrap();
    let out = gcrl(&["run", "--config", "c.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("c.toml"));
}

#[test]
fn config_file_with_flag_overrides_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let synth = gcrl(&["synth", "--n", "12", "--subspaces", "2", "--dim", "2", "--segment-len", "15", "--out", "seq.csv"], dir.path());
    assert!(synth.status.success(), "{}", String::from_utf8_lossy(&synth.stderr));
    assert!(dir.path().join("seq_labels.csv").exists());
    fs::write(
        dir.path().join("exp.toml"),
        "seeds = [0, 1]\nout_dir = \"from-config\"\n[input.file]\nfeatures = \"seq.csv\"\nlabels = \"seq_labels.csv\"\n[solver]\nmax_outer_iters = 20\n",
    )
    .unwrap();
    let run = gcrl(&["run", "--config", "exp.toml", "--out", "from-flag", "--seeds", "4"], dir.path());
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(dir.path().join("from-flag/diagnostics_seed4.csv").exists());
    assert!(!dir.path().join("from-config").exists());
    let echoed: ExperimentConfig = toml::from_str(&fs::read_to_string(dir.path().join("from-flag/config.toml")).unwrap()).unwrap();
    assert_eq!(echoed.solver.max_outer_iters, 20);
    assert_eq!(echoed.seeds, vec![4]);
}

#[test]
fn output_dir_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_gcrl"))
        .args(["synth", "--n", "8", "--subspaces", "2", "--dim", "1", "--segment-len", "6", "--out", "s.gcrl"])
        .current_dir(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(env!("CARGO_BIN_EXE_gcrl"))
        .args(["run", "--input", "s.gcrl", "--max-outer-iters", "5"])
        .current_dir(dir.path())
        .env("GCRL_OUTPUT_DIR", "env-out")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("env-out/metrics.csv").exists());
}

#[test]
fn convert_round_trips_between_formats() {
    let dir = tempfile::tempdir().unwrap();
    let x = Mat::from_row_slice(2, 3, &[0.0, 0.5, 1.0, 1.0, 0.5, 0.0]);
    io::write_matrix_csv(&dir.path().join("x.csv"), &x).unwrap();
    io::write_labels_csv(&dir.path().join("y.csv"), &[0, 0, 1]).unwrap();

    let to_bin = gcrl(&["convert", "x.csv", "x.gcrl", "--labels", "y.csv"], dir.path());
    assert!(to_bin.status.success(), "{}", String::from_utf8_lossy(&to_bin.stderr));
    let seq = io::read_raw(&dir.path().join("x.gcrl"), None).unwrap();
    assert_eq!(seq.features, x);
    assert_eq!(seq.labels, Some(vec![0, 0, 1]));

    let back = gcrl(&["convert", "x.gcrl", "back.csv"], dir.path());
    assert!(back.status.success());
    assert_eq!(io::read_matrix_csv(&dir.path().join("back.csv")).unwrap(), x);
    assert_eq!(io::read_labels_csv(&dir.path().join("back_labels.csv")).unwrap(), vec![0, 0, 1]);
}
