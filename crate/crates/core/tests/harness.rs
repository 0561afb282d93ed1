use std::fs;
use std::path::Path;
use std::process::Command as Process;

use active_scalar::grid::{random_band_limited_field, GridSpec};
use active_scalar::harness::{
    parse_config, read_snapshot, run, write_snapshot, Command, HarnessError, CSV_HEADER, EXIT_GUARD,
    EXIT_VALIDATION,
};
use active_scalar::operators::Classification;

const VB: &str = "equation.preset = viscous_burgers
grid.n = 64
split.method = godunov
split.dt = 0.0625
split.T = 0.5
study.dt_count = 3
study.methods = godunov, strang
";

fn cfg(text: &str) -> active_scalar::harness::ExperimentConfig {
    parse_config(text).unwrap()
}

#[test]
fn study_csv_schema_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let outcome = run(&cfg(VB), Command::Study, dir.path()).unwrap();
    assert_eq!(outcome.reports.len(), 2);
    let report = &outcome.reports[0];
    let path = dir.path().join("study_viscous_burgers_godunov_s0.csv");
    let text = fs::read_to_string(&path).unwrap();
    assert!(!text.contains('\r'));
    assert_eq!(text.lines().count(), 4);
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER);

    let mut reader = csv::Reader::from_path(&path).unwrap();
    let mut rates = Vec::new();
    for (row, rec) in report.rows.iter().zip(reader.records()) {
        let rec = rec.unwrap();
        assert_eq!(rec[0].parse::<f64>().unwrap().to_bits(), row.dt.to_bits());
        assert_eq!(rec[1].parse::<f64>().unwrap().to_bits(), row.error.to_bits());
        assert_eq!(&rec[3], "godunov");
        assert_eq!(&rec[4], "viscous_burgers");
        rates.push(rec[5].to_string());
    }
    assert!(rates.windows(2).all(|w| w[0] == w[1]));
    assert!(dir.path().join("plot_study.py").exists());
}

#[test]
fn evolve_is_byte_deterministic() {
    let text = format!("{VB}init.kind = random\ninit.seed = 12\nsplit.record_every = 2\n");
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ra = run(&cfg(&text), Command::Evolve, a.path()).unwrap();
    run(&cfg(&text), Command::Evolve, b.path()).unwrap();
    // 8 steps recorded every 2: steps 0, 2, 4, 6, 8
    assert_eq!(ra.artifacts.iter().filter(|p| p.extension().unwrap() == "bin").count(), 5);
    for name in ["trajectory.csv", "conservation.json", "snapshots/snap_000008.bin"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
    let last = read_snapshot(&a.path().join("snapshots/snap_000008.bin")).unwrap();
    assert_eq!(last.time, 0.5);
}

#[test]
fn snapshot_initial_condition() {
    let dir = tempfile::tempdir().unwrap();
    let g = GridSpec::new(1, 64).unwrap();
    let f = random_band_limited_field(g, 3, 6.0, true).unwrap();
    let snap = dir.path().join("u0.bin");
    write_snapshot(&snap, &f, 0.0).unwrap();
    let text = format!("{VB}init.kind = snapshot\ninit.path = {}\n", snap.display());
    let c = cfg(&text);
    let u0 = active_scalar::harness::initial_field(&c).unwrap();
    let back = u0.inverse().unwrap();
    let err = back.values().iter().zip(f.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(err < 1e-14);

    let wrong = text.replace("grid.n = 64", "grid.n = 32");
    assert!(active_scalar::harness::initial_field(&cfg(&wrong)).is_err());
}

#[test]
fn admit_kdv_burgers() {
    let dir = tempfile::tempdir().unwrap();
    let text = VB.replace("viscous_burgers", "kdv");
    let outcome = run(&cfg(&text), Command::Admit, dir.path()).unwrap();
    let report = outcome.admissibility.unwrap();
    assert_eq!(report.classification, Classification::Dispersive);
    assert!(report.commutativity_residual <= 1e-12);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("admissibility.json")).unwrap()).unwrap();
    assert_eq!(json["passed"], true);
}

#[test]
fn guard_trip_writes_error_record() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{VB}bflow.guard_factor = 1.0001\n");
    let err = run(&cfg(&text), Command::Evolve, dir.path()).unwrap_err();
    assert!(matches!(err, HarnessError::Solver(active_scalar::Error::GuardTrip { .. })));
    assert_eq!(err.exit_code(), EXIT_GUARD);
    let record: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("error.json")).unwrap()).unwrap();
    assert_eq!(record["kind"], "guard_trip");
    assert!(dir.path().join("trajectory.csv").exists());
}

fn cli(args: &[&str], cwd: &Path) -> std::process::Output {
    Process::new(env!("CARGO_BIN_EXE_active-scalar"))
        .args(args)
        .current_dir(cwd)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

#[test]
fn cli_exit_codes_and_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.cfg");
    fs::write(&good, format!("{VB}init.kind = random\n")).unwrap();
    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "equation.preset = sqg\ngrid.dims = 1\n").unwrap();

    let out = cli(&["evolve", "good.cfg", "--out", "o1", "--seed", "5"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("o1/trajectory.csv").exists());
    let again = cli(&["evolve", "good.cfg", "--out", "o2", "--seed", "5", "--threads", "2"], dir.path());
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(
        fs::read(dir.path().join("o1/trajectory.csv")).unwrap(),
        fs::read(dir.path().join("o2/trajectory.csv")).unwrap()
    );
    let other = cli(&["evolve", "good.cfg", "--out", "o3", "--seed", "6"], dir.path());
    assert_eq!(other.status.code(), Some(0));
    assert_ne!(
        fs::read(dir.path().join("o1/trajectory.csv")).unwrap(),
        fs::read(dir.path().join("o3/trajectory.csv")).unwrap()
    );

    let out = cli(&["study", "bad.cfg", "--out", "o4"], dir.path());
    assert_eq!(out.status.code(), Some(EXIT_VALIDATION));
    let stderr = String::from_utf8_lossy(&out.stderr);
    let record = stderr.lines().find(|l| l.starts_with('{')).unwrap();
    let json: serde_json::Value = serde_json::from_str(record).unwrap();
    assert_eq!(json["kind"], "validation");
    assert!(json["details"].as_array().unwrap().len() >= 2);
    assert!(dir.path().join("o4/error.json").exists());
}
