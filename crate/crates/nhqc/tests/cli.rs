use nhqc::cli::{run, EXIT_IO, EXIT_OK, EXIT_USAGE};
use std::path::Path;

fn nhqc(args: &[&str]) -> (i32, String) {
    let mut buf = Vec::new();
    let code = run(std::iter::once("nhqc").chain(args.iter().copied()), &mut buf);
    (code, String::from_utf8(buf).unwrap())
}

fn value<'a>(out: &'a str, key: &str) -> &'a str {
    out.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("{key} missing in {out}"))
}

#[test]
fn simulate_sl_s_gate_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = nhqc(&["--out", dir.path().to_str().unwrap(), "simulate", "--scheme", "sl", "--gate", "S"]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert_eq!(value(&out, "fidelity"), "1.000000");
    assert_eq!(value(&out, "pulse_area_pi"), "1.000");
    let traj = std::fs::read_to_string(value(&out, "trajectory_file")).unwrap();
    assert!(traj.starts_with("# metric: two-design"));
    assert!(traj.lines().any(|l| l == "t,excited_population"));
}

#[test]
fn simulate_with_decoherence_writes_trace_column() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = nhqc(&[
        "--out",
        dir.path().to_str().unwrap(),
        "--lindblad-samples",
        "800",
        "simulate",
        "--scheme",
        "cdd",
        "--gate",
        "S",
        "--gamma-minus",
        "3e-4",
        "--gamma-z",
        "3e-4",
    ]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert_eq!(value(&out, "metric"), "axial-lindblad");
    let f: f64 = value(&out, "fidelity").parse().unwrap();
    assert!(f > 0.99 && f < 1.0);
    let traj = std::fs::read_to_string(value(&out, "trajectory_file")).unwrap();
    for line in traj.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let trace: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!((trace - 1.0).abs() < 1e-8);
    }
}

#[test]
fn physical_units_match_dimensionless_run() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let rate = format!("{}", 2.0 * std::f64::consts::PI * 3.0e3);
    let common = ["--lindblad-samples", "600", "simulate", "--scheme", "sl", "--gate", "T"];
    let (_, phys) = nhqc(&[&["--out", d, "--units", "physical"], &common[..], &["--gamma-z", &rate]].concat());
    let (_, dimless) = nhqc(&[&["--out", d], &common[..], &["--gamma-z", "3e-4"]].concat());
    assert_eq!(value(&phys, "fidelity"), value(&dimless, "fidelity"));
    let t_phys: f64 = value(&phys, "duration").parse().unwrap();
    assert!((t_phys - std::f64::consts::PI / (2.0 * std::f64::consts::PI * 1.0e7)).abs() < 1e-15);
}

#[test]
fn sweep_is_deterministic_and_documented() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let args = [
        "--out", d, "--lindblad-samples", "600", "sweep", "--axis", "epsilon", "--range", "-0.1:0.1:3", "--schemes",
        "sl,dc",
    ];
    let (code, out) = nhqc(&args);
    assert_eq!(code, EXIT_OK, "{out}");
    assert_eq!(value(&out, "rows"), "6");
    let path = value(&out, "file").to_string();
    let first = std::fs::read(&path).unwrap();
    nhqc(&args);
    assert_eq!(first, std::fs::read(&path).unwrap());
    let text = String::from_utf8(first).unwrap();
    assert!(text.contains("# metric: six-axial-state"));
    assert!(text.contains("# samples: unitary=2000 lindblad=600"));
    assert!(text.contains("# units: dimensionless"));
    assert!(text.contains("gamma_minus=3e-4"));
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"scheme": "dc", "gate": "NOT", "epsilon": 0.05}"#).unwrap();
    let out_dir = dir.path().join("o");
    let base = ["--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap(), "simulate"];
    let (code, from_file) = nhqc(&base);
    assert_eq!(code, EXIT_OK, "{from_file}");
    assert_eq!(value(&from_file, "scheme"), "DC-NHQC");
    let (_, overridden) = nhqc(&[&base[..], &["--scheme", "sl"]].concat());
    assert_eq!(value(&overridden, "scheme"), "SL-NHQC");
    let f_dc: f64 = value(&from_file, "fidelity").parse().unwrap();
    let f_sl: f64 = value(&overridden, "fidelity").parse().unwrap();
    assert!(f_dc > f_sl);
}

#[test]
fn table1_lists_every_scheme() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = nhqc(&["--out", dir.path().to_str().unwrap(), "table1"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.lines().next().unwrap().starts_with("SL-NHQC, area_pi=1.000, reference=1.00"));
    assert!(out.contains("PS-NHQC, area_pi=2.156, reference=2.16"));
    assert!(out.contains("CDD-NHQC, area_pi=1.323, reference=1.32"));
    assert_eq!(out.lines().count(), 10);
    assert!(Path::new(&dir.path().join("table1.csv")).exists());
}

#[test]
fn check_reports_time_optimal_ratio() {
    let (code, out) = nhqc(&["check", "--scheme", "to"]);
    assert_eq!(code, EXIT_OK, "{out}");
    let ratio: f64 = value(&out, "dynamical_geometric_ratio").parse().unwrap();
    assert!((ratio - 2.0 / 3.0).abs() < 1e-4);
    let defect: f64 = value(&out, "rk4_oracle_defect").parse().unwrap();
    assert!(defect < 1e-7);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(nhqc(&["simulate", "--scheme", "xyz"]).0, EXIT_USAGE);
    assert_eq!(nhqc(&["simulate", "--scheme", "sl", "--gate", "Y"]).0, EXIT_USAGE);
    assert_eq!(nhqc(&["sweep", "--axis", "epsilon", "--range", "0:1", "--schemes", "sl"]).0, EXIT_USAGE);
    assert_eq!(nhqc(&["sweep", "--axis", "omega", "--range", "0:1:3", "--schemes", "sl"]).0, EXIT_USAGE);
    assert_eq!(nhqc(&["fig13", "d"]).0, EXIT_USAGE);
    assert_eq!(nhqc(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(nhqc(&["simulate", "--scheme", "sl", "--gamma-z", "-1"]).0, EXIT_USAGE);
}

#[test]
fn unreadable_config_is_io_error() {
    let (code, _) = nhqc(&["--config", "/nonexistent/nhqc.json", "table1"]);
    assert_eq!(code, EXIT_IO);
}
