use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dtquant(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dtquant")).args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn assert_error(o: &Output, kind: &str) {
    assert!(!o.status.success());
    let err = stderr(o);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with(&format!("error: kind={kind} message=")), "{err}");
}

fn out_arg(dir: &Path) -> String {
    dir.to_string_lossy().into_owned()
}

#[test]
fn quant1d_writes_fields_and_level_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = dtquant(&["quant1d", "--out-dir", &out_arg(dir.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    for name in ["sdt.sdf1", "sdt.csv", "levels.csv", "summary.csv", "config.txt"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let sdt = fs::read_to_string(dir.path().join("sdt.csv")).unwrap();
    assert!(sdt.contains("2.5000000000000000e0"));
}

#[test]
fn zero_radius_is_rejected_before_writing() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("never");
    let o = dtquant(&["quant2d", "--radius", "0", "--out-dir", &out_arg(&target)]);
    assert_error(&o, "invalid-argument");
    assert!(!target.exists());
}

#[test]
fn unknown_flag_reports_invalid_argument() {
    let o = dtquant(&["quant2d", "--no-such-flag", "1"]);
    assert_error(&o, "invalid-argument");
}

#[test]
fn malformed_value_reports_invalid_argument() {
    let dir = tempfile::tempdir().unwrap();
    let o = dtquant(&["reinit", "--cfl", "fast", "--out-dir", &out_arg(dir.path())]);
    assert_error(&o, "invalid-argument");
}

#[test]
fn zero_iterations_logs_header_and_first_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let o = dtquant(&["reinit", "--dims", "24x24", "--iterations", "0", "--out-dir", &out_arg(dir.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    assert_eq!(csv, "iter,e_R,e_MG,e_D\n");
    assert!(dir.path().join("snapshot_0.sdf1").exists());
    assert!(!dir.path().join("snapshot_10.sdf1").exists());
}

#[test]
fn reinit_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = dtquant(&["reinit", "--dims", "24,24", "--iterations", "15", "--seed", "7", "--out-dir", &out_arg(d.path())]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for name in ["convergence.csv", "final.csv", "input.sdf1"] {
        let x = fs::read(a.path().join(name)).unwrap();
        let y = fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
}

#[test]
fn different_seeds_change_the_dithered_input() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (d, seed) in [(&a, "1"), (&b, "2")] {
        let o = dtquant(&["reinit", "--dims", "16,16", "--iterations", "0", "--seed", seed, "--out-dir", &out_arg(d.path())]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    assert_ne!(fs::read(a.path().join("input.sdf1")).unwrap(), fs::read(b.path().join("input.sdf1")).unwrap());
}

#[test]
fn voronoi_with_empty_foreground_fails() {
    let dir = tempfile::tempdir().unwrap();
    // no cell center lies within 0.1 of the center of an even grid
    let target = dir.path().join("v");
    let o = dtquant(&["voronoi", "--dims", "20,20", "--radius", "0.1", "--out-dir", &out_arg(&target)]);
    assert_error(&o, "empty-set");
    assert!(!target.exists());
}

#[test]
fn voronoi_sites_produce_edge_map() {
    let dir = tempfile::tempdir().unwrap();
    let o = dtquant(&["voronoi", "--dims", "9,9", "--sites", "1,1;7,7", "--out-dir", &out_arg(dir.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("voronoi_edges.sdf1").exists());
    assert!(String::from_utf8_lossy(&o.stdout).contains("edge_cells="));
}

#[test]
fn zero_band_reports_empty_band() {
    let dir = tempfile::tempdir().unwrap();
    let o = dtquant(&[
        "curvature-hist", "--dims", "12,12,12", "--radius", "3", "--center", "5.5,5.5,5.5",
        "--iterations", "2", "--band", "0", "--out-dir", &out_arg(dir.path()),
    ]);
    assert_error(&o, "empty-band");
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.txt");
    fs::write(&cfg, "# small run\ndims=16,16\niterations=3\nseed=5\n").unwrap();
    let out = dir.path().join("out");
    let o = dtquant(&["reinit", "--config", &out_arg(&cfg), "--iterations", "2", "--out-dir", &out_arg(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let written = fs::read_to_string(out.join("config.txt")).unwrap();
    assert!(written.contains("iterations=2"));
    assert!(written.contains("dims=16,16"));
    assert!(written.contains("seed=5"));
    let csv = fs::read_to_string(out.join("convergence.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn config_file_with_bad_key_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.txt");
    fs::write(&cfg, "colour=blue\n").unwrap();
    let o = dtquant(&["quant2d", "--config", &out_arg(&cfg), "--out-dir", &out_arg(dir.path())]);
    assert_error(&o, "invalid-argument");
}
