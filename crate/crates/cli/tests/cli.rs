use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use emhuygens_cli::commands::scenario_from_header;
use emhuygens_cli::error::CliError;
use emhuygens_cli::scenario::Scenario;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_emhuygens"))
}

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const DIPOLE: &str = r#"{
  "exterior": {"kind": "dipole", "direction": [0, 0.6, 0.8], "position": [0.3, 0, 0],
               "pulse": {"t0": 0, "width": 2}},
  "surface": {"radius": 1, "trajectory": {"kind": "static"}},
  "quadrature": {"n_theta": 16, "n_phi": 32},
  "grid": {"plane": "xz", "offset": 0.1, "u_range": [-2.5, 2.5], "v_range": [-2.5, 2.5],
           "resolution": [6, 6], "times": [TIMES]},
  "charge": {"t_start": 0, "t_end": 4, "samples": 20}
}"#;

fn dipole(times: &str) -> String {
    DIPOLE.replace("TIMES", times)
}

fn data_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

fn columns(text: &str) -> Vec<String> {
    text.lines()
        .find(|l| !l.starts_with('#'))
        .unwrap()
        .split(',')
        .map(str::to_string)
        .collect()
}

#[test]
fn selftest_passes() {
    let o = run(&["--check", "selftest"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.contains(",pass,")).count(), 5, "{text}");
}

#[test]
fn reconstruct_is_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(&dir, "s.json", &dipole("2.0, 3.0"));
    let out_a = dir.path().join("a.csv");
    let a = run(&["--threads", "1", "reconstruct", &s, "-o", out_a.to_str().unwrap()]);
    assert!(a.status.success());
    let b = run(&["--threads", "3", "reconstruct", &s]);
    let c = run(&["reconstruct", &s]);
    let a = std::fs::read(out_a).unwrap();
    assert_eq!(a, b.stdout);
    assert_eq!(a, c.stdout);
}

#[test]
fn header_round_trips_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(&dir, "s.json", &dipole("2.0"));
    let o = run(&["reconstruct", &s]);
    let echoed = scenario_from_header(&stdout(&o)).unwrap();
    let original = Scenario::load(Path::new(&s)).unwrap();
    assert_eq!(echoed, original);
    assert_eq!(Scenario::parse(&echoed.canonical()).unwrap(), echoed);
    for name in ["dipole_static.json", "dipole_moving.json", "zero_jump.json", "poynting_two_cell.json"] {
        let sc = Scenario::load(&scenarios().join(name)).unwrap();
        assert_eq!(Scenario::parse(&sc.canonical()).unwrap(), sc, "{name}");
    }
}

#[test]
fn reconstruct_columns_and_accuracy() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(&dir, "s.json", &dipole("2.0, 3.0").replace("\"surface\"", "\"method\": \"both\", \"surface\""));
    let o = run(&["--check", "reconstruct", &s]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let cols = columns(&text);
    assert_eq!(&cols[..4], &["x", "y", "z", "t"]);
    assert_eq!(cols[4], "sc_ex");
    assert_eq!(cols[10], "kf_ex");
    assert_eq!(cols[16], "ref_ex");
    assert_eq!(&cols[22..], &["sc_abs_err", "sc_rel_err", "kf_abs_err", "kf_rel_err"]);
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 72);
    assert!(rows.iter().all(|r| r.len() == cols.len()));
    assert!(text.lines().next().unwrap().starts_with("# emhuygens "));
    let first = text.lines().filter(|l| !l.starts_with('#')).nth(1).unwrap();
    assert!(first.split(',').all(|v| v.contains('e')));
}

#[test]
fn zero_jump_gives_zero_columns() {
    let o = run(&["reconstruct", scenarios().join("zero_jump.json").to_str().unwrap()]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows = data_rows(&text);
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r[4..].iter().all(|&v| v == 0.0)));
}

#[test]
fn pre_onset_rows_are_zero() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(&dir, "s.json", &dipole("-1.0, 0.1"));
    let o = run(&["reconstruct", &s]);
    assert!(o.status.success());
    let rows = data_rows(&stdout(&o));
    assert!(rows.iter().all(|r| r[4..].iter().all(|&v| v == 0.0)));
}

#[test]
fn convergence_is_monotone_and_matches_reconstruct() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(&dir, "s.json", &dipole("2.0, 3.0"));
    let o = run(&["--check", "convergence", &s, "--orders", "8,16"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("# orders: 8x16,16x32"));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 2);
    assert!(rows[1][2] < rows[0][2] && rows[1][3] < rows[0][3]);
    assert!(text.lines().filter(|l| l.starts_with("# runtime:")).count() == 2);

    // the scenario's own order, recomputed from reconstruct output
    let rec = stdout(&run(&["reconstruct", &s]));
    let rows_rec = data_rows(&rec);
    let mut ext_scale = 0.0_f64;
    let mut ext = vec![];
    let mut int = vec![];
    for r in &rows_rec {
        let level = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt() - 1.0;
        if level.abs() < 0.2 {
            continue;
        }
        let refn = r[10..16].iter().map(|v| v * v).sum::<f64>().sqrt();
        if level > 0.0 {
            ext_scale = ext_scale.max(refn);
            ext.push(r[16]);
        } else {
            int.push(r[16]);
        }
    }
    let single = data_rows(&stdout(&run(&["convergence", &s, "--orders", "16"])));
    let max = |v: &[f64]| v.iter().cloned().fold(0.0, f64::max) / ext_scale;
    assert!((single[0][2] - max(&int)).abs() <= 1e-15 * single[0][2].max(1e-300) + 1e-300);
    assert!((single[0][3] - max(&ext)).abs() <= 1e-12 * single[0][3]);
}

fn runtime_total(text: &str) -> f64 {
    text.lines()
        .filter_map(|l| l.strip_prefix("# runtime: "))
        .map(|l| l.split_whitespace().nth(1).unwrap().parse::<f64>().unwrap())
        .sum()
}

#[test]
fn moving_surface_costs_more_than_static() {
    let dir = tempfile::tempdir().unwrap();
    let still = write(&dir, "s.json", &dipole("2.5"));
    let moving = write(
        &dir,
        "m.json",
        &dipole("2.5").replace(
            r#"{"kind": "static"}"#,
            r#"{"kind": "uniform", "origin": [-0.3, 0, 0], "velocity": [0.3, 0, 0]}"#,
        ),
    );
    let a = runtime_total(&stdout(&run(&["--threads", "1", "convergence", &still, "--orders", "16,24"])));
    let b = runtime_total(&stdout(&run(&["--threads", "1", "convergence", &moving, "--orders", "16,24"])));
    assert!(b > a, "static {a} s, moving {b} s");
}

#[test]
fn moving_reconstruct_passes_check() {
    let o = run(&["--check", "reconstruct", scenarios().join("dipole_moving.json").to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn charge_is_conserved() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(&dir, "s.json", &dipole("2.0"));
    let o = run(&["--check", "charge", &s]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(columns(&text), ["t", "re_q", "im_q", "re_dq_dt", "im_dq_dt"]);
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 20);
    assert!(rows[0][1..].iter().all(|&v| v == 0.0));
}

#[test]
fn poynting_two_cell_and_controls() {
    let o = run(&["--check", "poynting", scenarios().join("poynting_two_cell.json").to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = data_rows(&stdout(&o));
    assert!(rows[0][2] < 1e-3);

    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scenarios().join("poynting_two_cell.json"))
        .unwrap()
        .replace("\"partition\": {", "\"partition\": {\"single_cell\": true, ");
    let s = write(&dir, "single.json", &text);
    let o = run(&["poynting", &s]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = data_rows(&stdout(&o));
    assert_eq!(rows[0][1], 0.0);
}

#[test]
fn config_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let typo = write(&dir, "typo.json", &dipole("2.0").replace("\"plane\"", "\"plnae\""));
    let o = run(&["reconstruct", &typo]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("plnae") && err.contains("line"), "{err}");

    let fast = write(
        &dir,
        "fast.json",
        &dipole("2.0").replace(
            r#"{"kind": "static"}"#,
            r#"{"kind": "uniform", "origin": [0, 0, 0], "velocity": [1.0, 0, 0]}"#,
        ),
    );
    assert_eq!(run(&["reconstruct", &fast]).status.code(), Some(1));
    let outside = write(&dir, "out.json", &dipole("2.0").replace("[0.3, 0, 0]", "[2.0, 0, 0]"));
    assert_eq!(run(&["reconstruct", &outside]).status.code(), Some(1));
    assert_eq!(run(&["reconstruct", "/nonexistent.json"]).status.code(), Some(1));
    assert_eq!(run(&["poynting", &typo.replace("typo", "none")]).status.code(), Some(1));
    let s = write(&dir, "s.json", &dipole("2.0"));
    assert_eq!(run(&["convergence", &s, "--orders", "8,x"]).status.code(), Some(1));
}

#[test]
fn check_violation_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let coarse = write(
        &dir,
        "coarse.json",
        &dipole("2.0, 3.0").replace(r#""n_theta": 16, "n_phi": 32"#, r#""n_theta": 3, "n_phi": 6"#),
    );
    assert_eq!(run(&["--check", "reconstruct", &coarse]).status.code(), Some(3));
    let o = run(&["reconstruct", &coarse]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
}

#[test]
fn numerical_failures_map_to_exit_2() {
    let e: CliError = emhuygens::Error::RetardedTimeNonConvergence { residual: 1.0 }.into();
    assert_eq!(e.exit_code(), 2);
    let e: CliError = emhuygens::Error::InvalidParameter("x".into()).into();
    assert_eq!(e.exit_code(), 1);
}
