use std::path::Path;
use std::process::{Command, Output};

const LINEAR: &str = "model.a = 1\nmodel.b = 1\nmodel.c = 1\nmodel.delta = 1\nmodel.kappa = 2\nmodel.lambda = 1\n";
const BISTABLE: &str = "model.a = 1\nmodel.b = 1\nmodel.c = 1\nmodel.delta = 3\nmodel.kappa = 0.01\nmodel.lambda = 0\nmodel.V = 10\nmodel.K = 2\nmodel.n = 2\n";

fn iffl(dir: &Path, args: &[&str], config: &str) -> Output {
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_iffl"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join("out").join(name)).unwrap()
}

#[test]
fn simulate_writes_trajectory_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = iffl(dir.path(), &["simulate"], LINEAR);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let traj = read(dir.path(), "trajectory.csv");
    let mut lines = traj.lines();
    assert_eq!(lines.next(), Some("t,x,y,u,p,v,q,ln_u"));
    assert!(lines.all(|l| l.split(',').count() == 8));
    let manifest = read(dir.path(), "manifest.jsonl");
    assert!(manifest.contains("\"version\":\"0.1.0\""));
    assert!(manifest.contains("\"outcome\":\"elimination\""));
}

#[test]
fn constant_input_settles_at_adapted_level() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "model.a = 1\nmodel.b = 1\nmodel.c = 1\nmodel.delta = 2\nmodel.kappa = 1\nmodel.lambda = 0\n\
               input.kind = constant\ninput.alpha = 5\nrun.t_end = 60\n";
    let out = iffl(dir.path(), &["simulate"], cfg);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let traj = read(dir.path(), "trajectory.csv");
    let last = traj.lines().last().unwrap();
    let y: f64 = last.split(',').nth(2).unwrap().parse().unwrap();
    assert!((y - 0.5).abs() < 1e-3, "y = {y}");
}

#[test]
fn jsonl_format_switches_tabular_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = iffl(dir.path(), &["simulate", "--format", "jsonl"], LINEAR);
    assert_eq!(out.status.code(), Some(0));
    let traj = read(dir.path(), "trajectory.jsonl");
    let first: serde_json::Value = serde_json::from_str(traj.lines().next().unwrap()).unwrap();
    assert!(first.get("ln_u").is_some());
}

#[test]
fn equilibria_lists_three_interior_roots() {
    let dir = tempfile::tempdir().unwrap();
    let out = iffl(dir.path(), &["equilibria"], BISTABLE);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let eq = read(dir.path(), "equilibria.jsonl");
    assert_eq!(eq.lines().filter(|l| l.contains("\"interior\"")).count(), 3);
}

#[test]
fn phase_and_heatmap_and_sweep_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = iffl(dir.path(), &["phase"], LINEAR);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let nc = read(dir.path(), "nullclines.csv");
    assert!(nc.lines().any(|l| l.starts_with("p_line,")));
    assert!(nc.lines().any(|l| l.starts_with("y_nullcline,")));

    let sweep = format!("{LINEAR}sweep.param1 = lambda\nsweep.min1 = 0\nsweep.max1 = 4\nsweep.count1 = 9\nsweep.method = algebraic\n");
    let out = iffl(dir.path(), &["sweep"], &sweep);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(read(dir.path(), "bands.jsonl").contains("\"boundary\""));

    let heat = format!(
        "{LINEAR}sweep.param1 = kappa\nsweep.min1 = 1\nsweep.max1 = 3\nsweep.count1 = 3\n\
         sweep.param2 = lambda\nsweep.min2 = 0\nsweep.max2 = 4\nsweep.count2 = 3\nsweep.method = algebraic\n"
    );
    let out = iffl(dir.path(), &["heatmap"], &heat);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let grid = read(dir.path(), "grid.csv");
    assert!(grid.starts_with("# axis1,kappa,"));
    let rows: Vec<_> = grid.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 1 + 9);
}

#[test]
fn manifest_replay_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!("{LINEAR}run.t_end = 20\n");
    assert_eq!(iffl(dir.path(), &["simulate"], &cfg).status.code(), Some(0));
    let first = read(dir.path(), "trajectory.csv");
    let manifest = read(dir.path(), "manifest.jsonl");

    let replay = tempfile::tempdir().unwrap();
    let out = iffl(replay.path(), &["simulate"], &manifest);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(read(replay.path(), "trajectory.csv"), first);
    assert_eq!(read(replay.path(), "manifest.jsonl"), manifest);
}

#[test]
fn validation_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = iffl(dir.path(), &["simulate"], "");
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing model section"));

    let out = iffl(dir.path(), &["simulate"], &LINEAR.replace("model.delta = 1", "model.delta = -1"));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("model.delta"));

    let out = iffl(dir.path(), &["simulate"], &format!("{LINEAR}model.lamda = 2\n"));
    assert_eq!(out.status.code(), Some(1));

    let out = iffl(dir.path(), &["bogus"], LINEAR);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn numerical_failure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!("{LINEAR}run.t_end = 50\nrun.max_step = 0.01\nrun.max_steps = 50\n");
    let out = iffl(dir.path(), &["simulate"], &cfg);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}
