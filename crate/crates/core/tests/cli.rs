use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::tempdir;

fn dronecell(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dronecell"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

const SHORT: [&str; 4] = ["--set", "sim_time=30", "--set", "warmup=10"];

#[test]
fn run_writes_one_row_to_stdout() {
    let mut args = vec!["run"];
    args.extend(SHORT);
    let out = dronecell(&args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let table = rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(table.len(), 2);
    assert_eq!(table[0][0], "seed");
    assert_eq!(table[1][0], "1");
    assert_eq!(table[1][1], "mobile-nuf");
}

#[test]
fn run_with_replications() {
    let mut args = vec![
        "run",
        "--runs",
        "3",
        "--seed",
        "10",
        "--set",
        "policy=fixed-ebd",
    ];
    args.extend(SHORT);
    let out = dronecell(&args);
    assert!(out.status.success());
    let table = rows(&String::from_utf8(out.stdout).unwrap());
    let seeds: Vec<_> = table[1..].iter().map(|r| r[0].as_str()).collect();
    assert_eq!(seeds, ["10", "11", "12"]);
    assert!(table[1..].iter().all(|r| r[1] == "fixed-ebd"));
}

#[test]
fn sweep_grid_has_one_row_per_cell() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let path_str = path.to_str().unwrap();
    let mut args = vec![
        "sweep",
        "--param",
        "area_width",
        "--values",
        "40,60,80,100",
        "--runs",
        "2",
        "--out",
        path_str,
    ];
    args.extend(SHORT);
    let out = dronecell(&args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let table = rows(&fs::read_to_string(&path).unwrap());
    assert_eq!(table.len(), 1 + 12);
    assert_eq!(table[0][0], "area_width");
    assert_eq!(table[0][4], "seg_percent");
    assert!(table[1..].iter().all(|r| r.last().unwrap() == "2"));
}

#[test]
fn rerun_is_byte_identical() {
    let dir = tempdir().unwrap();
    let run_into = |name: &str| {
        let path = dir.path().join(name);
        let mut args = vec![
            "sweep",
            "--param",
            "speed",
            "--values",
            "10,20",
            "--policies",
            "nuf",
            "--runs",
            "3",
            "--out",
            path.to_str().unwrap(),
        ];
        args.extend(SHORT);
        assert!(dronecell(&args).status.success());
        fs::read(path).unwrap()
    };
    assert_eq!(run_into("a.csv"), run_into("b.csv"));
}

#[test]
fn config_file_and_override_precedence() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("sim.conf");
    fs::write(
        &cfg,
        "# short scenario\nsim_time = 30\nwarmup = 10\nusers = 2\nseed = 5\n",
    )
    .unwrap();
    let out = dronecell(&["run", "--config", cfg.to_str().unwrap(), "--seed", "8"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let table = rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(table[1][0], "8");
}

#[test]
fn bad_config_exits_nonzero_with_line() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("bad.conf");
    fs::write(&cfg, "users = 5\nheigth = 10\n").unwrap();
    let out = dronecell(&["run", "--config", cfg.to_str().unwrap()]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("heigth"), "{err}");
    assert!(err.contains('2'), "{err}");
}

#[test]
fn invalid_values_rejected() {
    for args in [
        vec!["run", "--set", "height=0"],
        vec!["run", "--set", "warmup=400"],
        vec!["run", "--set", "angle_step=0.3"],
        vec!["run", "--runs", "0"],
        vec!["sweep", "--param", "nonsense", "--values", "1"],
        vec!["reproduce", "fig9"],
    ] {
        let out = dronecell(&args);
        assert!(!out.status.success(), "{args:?} should fail");
        assert!(out.stdout.is_empty(), "{args:?} wrote output");
    }
}

#[test]
fn missing_config_file_reports_path() {
    let out = dronecell(&["run", "--config", "/no/such/file.conf"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("/no/such/file.conf"));
}

fn reproduce(figure: &str, dir: &Path) -> Vec<Vec<String>> {
    let path = dir.join(format!("{figure}.csv"));
    let out = dronecell(&[
        "reproduce",
        figure,
        "--runs",
        "2",
        "--set",
        "sim_time=30",
        "--set",
        "warmup=10",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    rows(&fs::read_to_string(path).unwrap())
}

#[test]
fn reproduce_speed_figure() {
    let dir = tempdir().unwrap();
    let t = reproduce("fig5c", dir.path());
    assert_eq!(t[0], ["speed", "seg_ebd", "seg_nuf", "seg_lbf"]);
    let speeds: Vec<_> = t[1..].iter().map(|r| r[0].as_str()).collect();
    assert_eq!(speeds, ["5", "10", "15", "20"]);
}

#[test]
fn reproduce_energy_figure() {
    let dir = tempdir().unwrap();
    let t = reproduce("fig7", dir.path());
    assert_eq!(
        t[0],
        ["area_width", "mee_fixed", "mee_mobile_20", "mee_mobile_10"]
    );
    assert_eq!(t.len(), 5);
}

#[test]
fn reproduce_convergence_figure() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("fig2.csv");
    let out = dronecell(&[
        "reproduce",
        "fig2",
        "--runs",
        "2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let t = rows(&fs::read_to_string(path).unwrap());
    assert_eq!(t[0][0], "sim_time");
    let times: Vec<_> = t[1..].iter().map(|r| r[0].as_str()).collect();
    assert_eq!(times, ["50", "100", "150", "200", "250", "300"]);
}
