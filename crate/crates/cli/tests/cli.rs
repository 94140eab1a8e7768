use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cavity-eit"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn run_bare(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cavity-eit")).args(args).output().expect("binary runs")
}

fn ok(o: &Output) {
    assert!(o.status.success(), "exit {:?}: {}", o.status.code(), String::from_utf8_lossy(&o.stderr));
}

fn rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    (header, lines.map(|l| l.split(',').map(String::from).collect()).collect())
}

fn f(s: &str) -> f64 {
    s.parse().unwrap()
}

const BISTABLE: &[&str] = &["--g-units", "--set", "u0=2", "--set", "delta_c=-0.12"];

#[test]
fn spectrum_rows_follow_the_schema() {
    let dir = TempDir::new().unwrap();
    ok(&run(&["spectrum", "--resolution", "41"], dir.path()));
    let (header, data) = rows(&dir.path().join("spectrum.csv"));
    assert_eq!(header.join(","), "engine,axis_value,branch_index,n_s,T_a,stable,g2_0,status");
    assert!(dir.path().join("spectrum.svg").exists());

    let mut values: Vec<f64> = Vec::new();
    let mut mfa_rows = 0;
    for r in &data {
        assert_eq!(r.len(), 8);
        let x = f(&r[1]);
        assert!(values.last().is_none_or(|&v| x >= v), "axis column not monotone");
        if values.last() != Some(&x) {
            values.push(x);
        }
        match r[0].as_str() {
            "mfa" => {
                mfa_rows += 1;
                assert!(f(&r[2]) >= 1.0);
                assert!(r[5] == "1" || r[5] == "0");
                assert!(r[6].is_empty());
            }
            "qme" => {
                assert_eq!(r[2], "0");
                assert!(r[5].is_empty());
                assert_eq!(r[7], "ok");
            }
            other => panic!("engine {other}"),
        }
    }
    assert_eq!(values.len(), 41);
    assert_eq!((values[0], values[40]), (-6.0, 6.0));
    // one QME row per point plus one row per mean-field branch
    assert_eq!(data.len(), 41 + mfa_rows);
}

#[test]
fn coherent_dark_state_at_resonance() {
    let dir = TempDir::new().unwrap();
    ok(&run(&["spectrum", "--resolution", "41", "--engines", "qme"], dir.path()));
    let (_, data) = rows(&dir.path().join("spectrum.csv"));
    let step = 12.0 / 40.0;
    let hit = data
        .iter()
        .find(|r| r[0] == "qme" && f(&r[1]).abs() < step && (f(&r[6]) - 1.0).abs() <= 0.01);
    assert!(hit.is_some());
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let args = ["spectrum", "--resolution", "21", "--range", "-3,3"];
    ok(&run(&args, a.path()));
    ok(&run(&args, b.path()));
    assert_eq!(
        std::fs::read(a.path().join("spectrum.csv")).unwrap(),
        std::fs::read(b.path().join("spectrum.csv")).unwrap()
    );
    let args = ["phase", "--resolution", "30,30", "--set", "eta=0.6"];
    ok(&run(&args, a.path()));
    ok(&run(&args, b.path()));
    assert_eq!(
        std::fs::read(a.path().join("phase.csv")).unwrap(),
        std::fs::read(b.path().join("phase.csv")).unwrap()
    );
}

#[test]
fn s_curve_has_unstable_middle_branch_and_hysteresis() {
    let dir = TempDir::new().unwrap();
    let mut args = vec!["scurve", "--resolution", "61", "--engines", "mfa"];
    args.extend_from_slice(BISTABLE);
    ok(&run(&args, dir.path()));
    let (_, data) = rows(&dir.path().join("scurve.csv"));
    assert!(data.iter().any(|r| r[0] == "mfa" && r[2] == "2" && r[5] == "0"));

    // fold window from the root count of each drive value
    let mut counts = std::collections::BTreeMap::<String, usize>::new();
    for r in data.iter().filter(|r| r[0] == "mfa") {
        *counts.entry(r[1].clone()).or_default() += 1;
    }
    let (header, hyst) = rows(&dir.path().join("hysteresis.csv"));
    assert_eq!(header.join(","), "direction,axis_value,n_s,jump");
    let trace = |dir: &str| -> std::collections::BTreeMap<String, f64> {
        hyst.iter().filter(|r| r[0] == dir).map(|r| (r[1].clone(), f(&r[2]))).collect()
    };
    let (up, down) = (trace("up"), trace("down"));
    assert_eq!(up.len(), 61);
    assert_eq!(down.len(), 61);
    let mut differ_inside = 0;
    for (x, n_up) in &up {
        let n_down = down[x];
        let differ = (n_up - n_down).abs() > 1e-12 * n_up.abs().max(1e-30);
        if counts[x] == 1 {
            assert!(!differ, "traces differ outside the fold window at eta = {x}");
        } else if differ {
            differ_inside += 1;
        }
    }
    assert!(differ_inside > 0);
}

#[test]
fn zero_width_range_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let o = run(&["scurve", "--range", "0.1,0.1"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("zero width"));
    let o = run(&["spectrum", "--range", "2,2"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn invalid_config_is_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "eta = 0.1\nkappa_typo = 1\n").unwrap();
    let o = run(&["spectrum", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("kappa_typo"));
    assert_eq!(run(&["spectrum", "--set", "eta=-1"], dir.path()).status.code(), Some(1));
    assert_eq!(run(&["spectrum", "--resolution", "1,2,3"], dir.path()).status.code(), Some(1));
}

#[test]
fn config_file_and_overrides() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# drive sweep\nengines = mfa\nresolution = 5\nlo = 0.1\nhi = 0.2\n").unwrap();
    ok(&run(&["scurve", "--config", cfg.to_str().unwrap(), "--set", "hi=0.3"], dir.path()));
    let (_, data) = rows(&dir.path().join("scurve.csv"));
    assert!(data.iter().all(|r| r[0] == "mfa"));
    let last = data.last().unwrap();
    assert_eq!(f(&last[1]), 0.3);
}

#[test]
fn no_multistability_without_stark_shift() {
    let dir = TempDir::new().unwrap();
    ok(&run(
        &["phase", "--g-units", "--range", "0,2,0,0", "--resolution", "40,3", "--set", "eta=0.6"],
        dir.path(),
    ));
    let (header, data) = rows(&dir.path().join("phase.csv"));
    assert_eq!(header.join(","), "x,y,n_solutions,n_stable,n_s_lowest,flag");
    assert_eq!(data.len(), 120);
    assert!(data.iter().all(|r| r[2] == "1" && r[3] == "1" && f(&r[1]) == 0.0));
    assert!(dir.path().join("phase.svg").exists());
}

#[test]
fn phase_with_qme_budget() {
    let dir = TempDir::new().unwrap();
    ok(&run(
        &["phase", "--resolution", "4,4", "--engines", "mfa,qme", "--set", "qme_cell_budget=4"],
        dir.path(),
    ));
    let (header, data) = rows(&dir.path().join("phase_qme.csv"));
    assert_eq!(header.join(","), "x,y,n_s,T_a,g2_0,n_max_used,status");
    assert_eq!(data.len(), 4);
}

#[test]
fn delayed_correlation_matches_spectrum_and_factorizes() {
    let dir = TempDir::new().unwrap();
    let mut args = vec!["spectrum", "--range", "-0.6,-0.4", "--resolution", "5", "--engines", "qme"];
    args.extend_from_slice(BISTABLE);
    ok(&run(&args, dir.path()));
    let (_, data) = rows(&dir.path().join("spectrum.csv"));
    let point = &data[2];
    let g2_0 = f(&point[6]);
    assert!(g2_0 > 2.0);

    let dc = format!("delta_c={}", point[1]);
    ok(&run(&["g2tau", "--set", "u0=8", "--set", &dc], dir.path()));
    let (header, g2) = rows(&dir.path().join("g2.csv"));
    assert_eq!(header.join(","), "tau,g2");
    assert_eq!(g2.len(), 201);
    assert_eq!(f(&g2[0][0]), 0.0);
    assert!((f(&g2[0][1]) - g2_0).abs() <= 1e-6 * g2_0, "{} vs {g2_0}", g2[0][1]);

    // the resonant point of the default spectrum
    ok(&run(&["g2tau"], dir.path()));
    let (_, g2) = rows(&dir.path().join("g2.csv"));
    assert!((f(&g2.last().unwrap()[1]) - 1.0).abs() <= 1e-3);
}

#[test]
fn delayed_correlation_needs_photons() {
    let dir = TempDir::new().unwrap();
    let o = run(&["g2tau", "--set", "eta=0"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("below the floor"));
    assert!(!dir.path().join("g2.csv").exists());
}

#[test]
fn validate_exit_code_counts_failures() {
    let o = run_bare(&["validate", "--only", "A9"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("PASS A9"));

    let o = run_bare(&["validate", "--only", "a9,A8", "--inject-fault", "printed-c1"]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(1), "{stdout}");
    assert!(stdout.contains("FAIL A8"));
    assert!(stdout.contains("FAILED coefficient identity"));

    assert_eq!(run_bare(&["validate", "--only", "Z1"]).status.code(), Some(1));
}
