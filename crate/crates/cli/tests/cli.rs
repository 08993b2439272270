use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn sgsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sgsim"))
        .args(args)
        .env_remove("SGSIM_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn read(path: impl AsRef<Path>) -> Vec<u8> {
    fs::read(path).unwrap()
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

const SMALL_RUN: &str = r#"
seed = 11
trajectories = 20000

[device]
lattice = 60
a0 = 0.4
f = 0.5
n_budget = 300
phi = "60deg"

[sweep]
n_budget = [0, 300, "unlimited"]
"#;

#[test]
fn out_of_range_absorbance_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "bad.toml", "[device]\nf = 1.5\n");
    let out = sgsim(&["run", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    assert!(stderr(&out).contains("1.5"), "{}", stderr(&out));
    assert!(!tmp.path().join("report.json").exists());

    let out = sgsim(&["run", "-f", "1.5", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&out), 3);
}

#[test]
fn unknown_keys_and_missing_files_are_config_errors() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "typo.toml", "[device]\nabsorbance = 0.5\n");
    let out = sgsim(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("absorbance"), "{}", stderr(&out));
    let out = sgsim(&["run", "--config", tmp.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(code(&out), 3);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&sgsim(&["frobnicate"])), 2);
    assert_eq!(code(&sgsim(&["run", "--phi", "0.5"])), 2, "angle without unit");
    assert_eq!(code(&sgsim(&["run", "--mode", "seconds"])), 2);
    let tmp = TempDir::new().unwrap();
    let out = sgsim(&["dist", "fig2", "--sigma", "0", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
}

#[test]
fn sweep_requires_a_grid() {
    let tmp = TempDir::new().unwrap();
    let out = sgsim(&["sweep", "--trajectories", "10", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&out), 3);
}

#[test]
fn all_cells_failing_exits_4() {
    let tmp = TempDir::new().unwrap();
    let out = sgsim(&[
        "run",
        "--method",
        "exact",
        "--phi",
        "90deg",
        "--n-budget",
        "unlimited",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 4, "{}", stderr(&out));
    // the report is still written, with the failure recorded
    let report: Value = serde_json::from_slice(&read(tmp.path().join("report.json"))).unwrap();
    assert_eq!(report["cells"][0]["status"], "failed");
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "run.toml", SMALL_RUN);
    let mut outputs = Vec::new();
    for (dir, workers) in [("a", "1"), ("b", "1"), ("c", "3")] {
        let out_dir = tmp.path().join(dir);
        let out = sgsim(&[
            "sweep",
            "--config",
            cfg.to_str().unwrap(),
            "--workers",
            workers,
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        outputs.push((read(out_dir.join("report.json")), read(out_dir.join("results.csv"))));
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);

    let out_dir = tmp.path().join("d");
    sgsim(&["sweep", "--config", cfg.to_str().unwrap(), "--seed", "12", "--out", out_dir.to_str().unwrap()]);
    assert_ne!(read(out_dir.join("results.csv")), outputs[0].1);
}

#[test]
fn outputs_regenerate_from_their_embedded_config() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "run.toml", SMALL_RUN);
    let first = tmp.path().join("first");
    let out = sgsim(&["run", "--config", cfg.to_str().unwrap(), "-f", "0.25", "--out", first.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = read(first.join("report.json"));
    let results = read(first.join("results.csv"));

    // from the JSON report
    let parsed: Value = serde_json::from_slice(&report).unwrap();
    let echoed = write_config(tmp.path(), "echo.json", &parsed["config"].to_string());
    let second = tmp.path().join("second");
    let out = sgsim(&["run", "--config", echoed.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(read(second.join("report.json")), report);
    assert_eq!(read(second.join("results.csv")), results);

    // from the CSV preamble
    let text = String::from_utf8(results.clone()).unwrap();
    let line = text.lines().find_map(|l| l.strip_prefix("# config: ")).unwrap();
    let echoed = write_config(tmp.path(), "preamble.json", line);
    let third = tmp.path().join("third");
    sgsim(&["run", "--config", echoed.to_str().unwrap(), "--out", third.to_str().unwrap()]);
    assert_eq!(read(third.join("results.csv")), results);
}

#[test]
fn output_directory_from_environment() {
    let tmp = TempDir::new().unwrap();
    let target = tmp.path().join("from-env");
    let out = Command::new(env!("CARGO_BIN_EXE_sgsim"))
        .args(["run", "--trajectories", "100", "--n-budget", "10"])
        .env("SGSIM_OUT_DIR", &target)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(target.join("report.json").exists());
    assert!(target.join("results.csv").exists());
}

#[test]
fn reports_match_published_schema() {
    let schema_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas/report.schema.json");
    let schema: Value = serde_json::from_slice(&read(schema_path)).unwrap();
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");

    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "run.toml", SMALL_RUN);
    let runs: [&[&str]; 4] = [
        &["sweep", "--timing"],
        &["run", "--method", "exact"],
        &["compare", "--method", "gaussian", "--theta0", "45deg"],
        &["run", "--method", "exact", "--n-budget", "unlimited"],
    ];
    let mut statuses = Vec::new();
    for (i, args) in runs.iter().enumerate() {
        let dir = tmp.path().join(i.to_string());
        let mut full: Vec<&str> = args.to_vec();
        full.extend(["--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
        let out = sgsim(&full);
        assert!(matches!(code(&out), 0 | 4), "{}", stderr(&out));
        let report: Value = serde_json::from_slice(&read(dir.join("report.json"))).unwrap();
        let errors: Vec<String> = validator.iter_errors(&report).map(|e| format!("{e} at {}", e.instance_path())).collect();
        assert!(errors.is_empty(), "{args:?}: {errors:#?}");
        for cell in report["cells"].as_array().unwrap() {
            statuses.push(cell["status"].as_str().unwrap().to_owned());
        }
    }
    for status in ["completed", "predicted", "failed"] {
        assert!(statuses.iter().any(|s| s == status), "no {status} cell exercised");
    }

    let mut broken: Value = serde_json::from_slice(&read(tmp.path().join("0/report.json"))).unwrap();
    broken["cells"][0]["report"]["sp_d2_fraction"]
        .as_object_mut()
        .unwrap()
        .remove("lower");
    assert!(!validator.is_valid(&broken));
}

#[test]
fn born_rule_run() {
    let tmp = TempDir::new().unwrap();
    let out = sgsim(&[
        "run",
        "--lattice",
        "100",
        "--a0",
        "0.6667",
        "-f",
        "0",
        "--phi",
        "0deg",
        "--n-budget",
        "unlimited",
        "--trajectories",
        "1000000",
        "--seed",
        "2",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report: Value = serde_json::from_slice(&read(tmp.path().join("report.json"))).unwrap();
    let sp = &report["cells"][0]["report"]["sp_d2_fraction"];
    let est = sp["estimate"].as_f64().unwrap();
    assert!((est - 0.667).abs() < 0.005, "{est}");
    // a0 is quantized to 67/100
    assert!(sp["lower"].as_f64().unwrap() <= 0.67 && 0.67 <= sp["upper"].as_f64().unwrap(), "{sp}");
}

#[test]
fn compare_writes_divergence_and_surface() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "cmp.toml",
        r#"
        seed = 4
        trajectories = 40000
        [device]
        lattice = 100
        a0 = 0.5
        n_budget = "unlimited"
        [sweep]
        f = [0.0, 1.0]
        phi = ["0deg", "90deg"]
        "#,
    );
    let out = sgsim(&["compare", "--config", cfg.to_str().unwrap(), "--surface-f", "1", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let divergence = String::from_utf8(read(tmp.path().join("divergence.csv"))).unwrap();
    let header = divergence.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(
        header,
        "cell,lattice,a0,f,n_budget,phi,sp_d2_fraction,sp_d2_lower,sp_d2_upper,cqm_d2_fraction,divergence,divergence_lower,divergence_upper,consistent"
    );
    let rows = data_rows(&divergence);
    assert_eq!(rows.len(), 4);
    // f = 0, φ = 0: both models give A0, so the divergence interval holds zero
    assert_eq!(rows[0][3], "0");
    assert_eq!(rows[0][5], "0");
    assert_eq!(rows[0][13], "true");
    // f = 1, φ = π/2: the quarter limit
    let sp: f64 = rows[3][6].parse().unwrap();
    let cqm: f64 = rows[3][9].parse().unwrap();
    assert!((cqm - 0.25).abs() < 1e-12);
    assert!((sp - 0.25).abs() < 0.01, "{sp}");

    let surface = String::from_utf8(read(tmp.path().join("fig9_surface.csv"))).unwrap();
    assert!(surface.contains("# surface_f: 1\n"));
    assert_eq!(surface.lines().find(|l| !l.starts_with('#')).unwrap(), "A0,phi,F");
    let rows: Vec<[f64; 3]> = data_rows(&surface)
        .iter()
        .map(|r| [r[0].parse().unwrap(), r[1].parse().unwrap(), r[2].parse().unwrap()])
        .collect();
    let quarter = rows
        .iter()
        .find(|r| r[0] == 0.5 && (r[1] - std::f64::consts::FRAC_PI_2).abs() < 1e-15)
        .unwrap();
    assert!((quarter[2] - 0.25).abs() < 1e-12);

    let f0 = tmp.path().join("f0");
    sgsim(&["compare", "--config", cfg.to_str().unwrap(), "--surface-f", "0", "--out", f0.to_str().unwrap()]);
    let surface = String::from_utf8(read(f0.join("fig9_surface.csv"))).unwrap();
    for r in data_rows(&surface) {
        let (a0, phi, f): (f64, f64, f64) = (r[0].parse().unwrap(), r[1].parse().unwrap(), r[2].parse().unwrap());
        if phi == 0.0 {
            assert!((f - a0).abs() < 1e-15, "{r:?}");
        }
    }
}

#[test]
fn dist_figures() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path().to_str().unwrap();

    assert_eq!(code(&sgsim(&["dist", "fig8", "--phi", "45deg", "--out", dir])), 0);
    let fig8 = String::from_utf8(read(tmp.path().join("fig8.csv"))).unwrap();
    assert_eq!(fig8.lines().find(|l| !l.starts_with('#')).unwrap(), "kind,x,value");
    let last = data_rows(&fig8).pop().unwrap();
    assert_eq!(last[0], "curve");
    assert_eq!(last[1], "1");
    let b: f64 = last[2].parse().unwrap();
    assert!((b - 0.853_553_390_593_273_7).abs() < 1e-12, "{b}");

    assert_eq!(code(&sgsim(&["dist", "fig2", "--out", dir])), 0);
    let fig2 = data_rows(&String::from_utf8(read(tmp.path().join("fig2.csv"))).unwrap());
    let peak = fig2
        .iter()
        .filter(|r| r[0] == "density")
        .max_by(|a, b| a[2].parse::<f64>().unwrap().total_cmp(&b[2].parse().unwrap()))
        .unwrap();
    assert_eq!(peak[1], "0.5");
    assert!(fig2.iter().any(|r| r[0] == "mass_at_zero"));
    assert!(fig2.iter().any(|r| r[0] == "mass_at_one"));

    let out = sgsim(&["dist", "fig3", "--lattice", "200", "--trajectories", "20000", "--out", dir]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let fig3 = data_rows(&String::from_utf8(read(tmp.path().join("fig3.csv"))).unwrap());
    let at_one: f64 = fig3.iter().find(|r| r[0] == "mass_at_one").unwrap()[2].parse().unwrap();
    assert!(at_one > 0.0);

    assert_eq!(code(&sgsim(&["dist", "fig6", "--out", dir])), 0);
    let fig6 = data_rows(&String::from_utf8(read(tmp.path().join("fig6.csv"))).unwrap());
    assert!(fig6.iter().all(|r| r[0] == "density" && r[1].parse::<f64>().unwrap() > 0.5));
}
