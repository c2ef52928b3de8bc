use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use melan::{solve_full, BridgeParams, LcMode, LoadProfile, ModelVariant, SolverOptions};
use serde_json::Value;
use tempfile::TempDir;

const BRIDGE: &str = "[bridge]\nL = 460.0\nEI = 5.7e7\nEcA = 3.6e7\nq = 170.0\nH = 97750.0\n";

fn config(extra_top: &str, bridge: &str, load: &str) -> String {
    format!("{extra_top}\n{bridge}\n[load]\n{load}\n")
}

fn uniform(p0: f64) -> String {
    format!("kind = \"uniform\"\np0 = {p0:?}")
}

struct Run {
    dir: TempDir,
    out: Output,
}

impl Run {
    fn code(&self) -> i32 {
        self.out.status.code().expect("exit code")
    }

    fn stdout(&self) -> String {
        String::from_utf8_lossy(&self.out.stdout).into_owned()
    }

    fn stderr(&self) -> String {
        String::from_utf8_lossy(&self.out.stderr).into_owned()
    }

    fn out_dir(&self) -> PathBuf {
        self.dir.path().join("out")
    }

    fn read(&self, name: &str) -> String {
        fs::read_to_string(self.out_dir().join(name)).unwrap_or_else(|e| panic!("{name}: {e}\n{}", self.stderr()))
    }

    fn json(&self, name: &str) -> Value {
        serde_json::from_str(&self.read(name)).unwrap()
    }
}

fn melan(cfg: &str, args: &[&str]) -> Run {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    fs::write(&path, cfg).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_melan"))
        .args(args)
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    Run { dir, out }
}

/// Header row and data rows, skipping `#` metadata.
fn csv_body(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn metadata(text: &str, key: &str) -> Option<String> {
    let prefix = format!("# {key} = ");
    text.lines().find_map(|l| l.strip_prefix(&prefix).map(String::from))
}

fn column(rows: &[Vec<String>], k: usize) -> Vec<f64> {
    rows.iter().map(|r| r[k].parse().unwrap()).collect()
}

#[test]
fn solve_writes_solution_and_report() {
    let cfg = config("lc_mode = { ratio = 1.026 }", BRIDGE, &uniform(60.0));
    let run = melan(&cfg, &["solve", "--mesh", "1000"]);
    assert_eq!(run.code(), 0, "{}", run.stderr());
    let (header, rows) = csv_body(&run.read("solution.csv"));
    assert_eq!(header, ["s", "x", "z", "z1", "z2", "z3"]);
    assert_eq!(rows.len(), 1001);
    let report = run.json("report.json");
    assert_eq!(report["tool"], "melan");
    assert!(report["version"].is_string());
    let gamma_fix = report["report"]["gamma_fix"].as_f64().unwrap();
    let direct = solve_full(
        &BridgeParams::wollmann(),
        ModelVariant::Full,
        &LoadProfile::uniform(60.0),
        &SolverOptions::default().with_intervals(1000),
        LcMode::Ratio(1.026),
    )
    .unwrap();
    assert_eq!(gamma_fix, direct.gamma_fix);
    assert!(report["report"]["converged"].as_bool().unwrap());
    let z = column(&rows, 2);
    let m = z.iter().cloned().fold(f64::MIN, f64::max);
    assert!((m - direct.max_displacement).abs() < 1e-6);
}

#[test]
fn unloaded_solution_is_zero() {
    let run = melan(&config("", BRIDGE, &uniform(0.0)), &["solve", "--mesh", "200"]);
    assert_eq!(run.code(), 0, "{}", run.stderr());
    let (_, rows) = csv_body(&run.read("solution.csv"));
    assert!(column(&rows, 2).iter().all(|z| z.abs() <= 1e-12));
}

#[test]
fn missing_tension_is_a_config_error() {
    let bridge = BRIDGE.replace("H = 97750.0\n", "");
    let run = melan(&config("", &bridge, &uniform(10.0)), &["solve"]);
    assert_eq!(run.code(), 2);
    assert!(run.stderr().contains("`H`"), "{}", run.stderr());
}

#[test]
fn nonpositive_tension_is_a_config_error() {
    let bridge = BRIDGE.replace("H = 97750.0", "H = 0.0");
    let run = melan(&config("", &bridge, &uniform(10.0)), &["solve"]);
    assert_eq!(run.code(), 2);
    assert!(run.stderr().contains("`H`"), "{}", run.stderr());
}

#[test]
fn unreadable_config_is_a_config_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_melan"))
        .args(["solve", "--config", "/nonexistent/run.toml"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solver_failure_exits_with_three() {
    let cfg = config(
        "[solver]\nmax_newton = 1\ncontinuation_steps = 1\nnewton_tol = 1e-300",
        BRIDGE,
        &uniform(60.0),
    );
    let run = melan(&cfg, &["solve", "--mesh", "200"]);
    assert_eq!(run.code(), 3, "{}\n{}", run.stdout(), run.stderr());
}

#[test]
fn config_echo_round_trips() {
    let cfg = config(
        "variant = \"simplified\"\nlc_mode = { ratio = 1.026 }",
        BRIDGE,
        &uniform(10.0),
    );
    let run = melan(&cfg, &["solve", "--mesh", "300"]);
    assert_eq!(run.code(), 0, "{}", run.stderr());
    let echoed = run.json("report.json")["config"].clone();
    let toml_echo = run.read("config.toml");
    let from_toml: Value = serde_json::to_value(toml::from_str::<toml::Value>(&toml_echo).unwrap()).unwrap();
    assert_eq!(from_toml, echoed);
    let rerun = melan(&toml_echo, &["solve"]);
    assert_eq!(rerun.code(), 0, "{}", rerun.stderr());
    let mut again = rerun.json("report.json")["config"].clone();
    again["output"]["dir"] = echoed["output"]["dir"].clone();
    assert_eq!(again, echoed);
    assert_eq!(echoed["solver"]["n_intervals"], 300);
    assert_eq!(echoed["variant"], "simplified");
}

fn bodies(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name))
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn repeated_runs_are_byte_identical() {
    let cfg = config("", BRIDGE, &uniform(30.0));
    let a = melan(
        &cfg,
        &["gamma-map", "--range", "0,0.3", "--points", "7", "--mesh", "400"],
    );
    let b = melan(
        &cfg,
        &["gamma-map", "--range", "0,0.3", "--points", "7", "--mesh", "400"],
    );
    assert_eq!(a.code(), 0);
    assert_eq!(
        bodies(&a.out_dir(), "gamma_map.csv"),
        bodies(&b.out_dir(), "gamma_map.csv")
    );
    let a = melan(&cfg, &["solve", "--mesh", "400"]);
    let b = melan(&cfg, &["solve", "--mesh", "400"]);
    assert_eq!(
        bodies(&a.out_dir(), "solution.csv"),
        bodies(&b.out_dir(), "solution.csv")
    );
}

#[test]
fn gamma_map_flags_one_sign_change() {
    let cfg = config("lc_mode = { ratio = 1.026 }", BRIDGE, &uniform(30.0));
    let run = melan(&cfg, &["gamma-map", "--range", "0,0.3", "--points", "20"]);
    assert_eq!(run.code(), 0, "{}", run.stderr());
    let text = run.read("gamma_map.csv");
    let (header, rows) = csv_body(&text);
    assert_eq!(header, ["gamma_in", "gamma_out", "newton_iters", "converged"]);
    assert_eq!(rows.len(), 20);
    assert_eq!(metadata(&text, "sign_changes").as_deref(), Some("1"));
    assert_eq!(metadata(&text, "range").as_deref(), Some("0,0.3"));
    let slope = metadata(&text, "crossing_1").unwrap();
    let slope: f64 = slope.rsplit("slope=").next().unwrap().parse().unwrap();
    assert!(slope <= -1.0);
    let out = column(&rows, 1);
    assert!(out.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn gamma_map_needs_three_points() {
    let run = melan(&config("", BRIDGE, &uniform(30.0)), &["gamma-map", "--points", "1"]);
    assert_eq!(run.code(), 2);
    let run = melan(
        &config("", BRIDGE, &uniform(30.0)),
        &["gamma-map", "--range", "0.3,0.1"],
    );
    assert_eq!(run.code(), 2);
}

#[test]
fn half_span_gamma_map_converges_everywhere() {
    let load = "kind = \"piecewise\"\nsegments = [{ x_lo = 0.0, x_hi = 230.0, p = 30.0 }]";
    let cfg = config("lc_mode = { ratio = 1.026 }", BRIDGE, load);
    let run = melan(
        &cfg,
        &["gamma-map", "--range", "0,0.3", "--points", "12", "--format", "json"],
    );
    assert_eq!(run.code(), 0, "{}", run.stderr());
    let doc = run.json("gamma_map.json");
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 12);
    assert!(rows.iter().all(|r| r["converged"] == true));
    assert_eq!(doc["metadata"]["sign_changes"], "1");
}

fn table1_rows(run: &Run) -> Vec<Value> {
    run.json("table1.json")["report"]["rows"].as_array().unwrap().clone()
}

#[test]
fn table1_reports_every_reference_cell() {
    let run = melan(&config("", BRIDGE, &uniform(30.0)), &["table1"]);
    let rows = table1_rows(&run);
    assert_eq!(rows.len(), 4);
    let mut all_pass = true;
    for r in &rows {
        let checks = r["checks"].as_array().unwrap();
        assert_eq!(checks.len(), 3);
        for c in checks {
            assert!(c["cell"].as_str().unwrap().starts_with("row "));
            let pass = c["computed"]
                .as_f64()
                .is_some_and(|x| (x - c["reference"].as_f64().unwrap()).abs() <= c["tolerance"].as_f64().unwrap());
            assert_eq!(c["pass"].as_bool().unwrap(), pass);
        }
        all_pass &= r["status"] == "pass";
        assert!(r["converged"].as_bool().unwrap());
    }
    assert_eq!(run.code() == 0, all_pass, "exit {} with rows {rows:?}", run.code());
    assert_eq!(run.json("table1.json")["report"]["lc_mode"]["ratio"], 1.026);
    assert!(run.stdout().contains("gamma_fix"));
}

#[test]
fn coarse_table1_run_fails() {
    let run = melan(&config("", BRIDGE, &uniform(30.0)), &["table1", "--mesh", "100"]);
    assert_ne!(run.code(), 0);
    assert!(table1_rows(&run).iter().any(|r| r["status"] == "fail"));
}

#[test]
fn table1_without_reference_parameters() {
    let bridge = BRIDGE.replace("EcA = 3.6e7", "EcA = 3.0e7");
    let run = melan(&config("", &bridge, &uniform(30.0)), &["table1", "--mesh", "400"]);
    assert_eq!(run.code(), 0, "{}", run.stderr());
    let rows = table1_rows(&run);
    assert_eq!(rows.len(), 4);
    assert!(rows
        .iter()
        .all(|r| r["status"] == "no reference" && r["checks"].as_array().unwrap().is_empty()));
    assert!(run.stdout().contains("no reference"));
}

fn check_report(run: &Run) -> Value {
    assert_eq!(run.code(), 0, "{}", run.stderr());
    let printed: Value = serde_json::from_str(&run.stdout()).unwrap();
    assert_eq!(printed, run.json("check.json")["report"]);
    printed
}

#[test]
fn check_on_the_stiff_cable() {
    let r = check_report(&melan(&config("", BRIDGE, &uniform(10.0)), &["check", "--mesh", "400"]));
    assert_eq!(r["cc_holds"], false);
    assert!((r["c_alpha2"].as_f64().unwrap() - 378.0).abs() < 2.0);
}

#[test]
fn check_on_a_soft_cable() {
    let bridge = BRIDGE.replace("EcA = 3.6e7", "EcA = 3.6e3");
    let r = check_report(&melan(&config("", &bridge, &uniform(1.0)), &["check", "--mesh", "400"]));
    assert_eq!(r["cc_holds"], true);
    assert!(r["rho"].as_f64().unwrap() < 1.0);
    let r = check_report(&melan(&config("", &bridge, &uniform(0.0)), &["check", "--mesh", "400"]));
    assert_eq!(r["pc_holds"], true);
    assert_eq!(r["p_dual_norm"], 0.0);
}

#[test]
fn compare_tabulates_all_variants() {
    let run = melan(&config("", BRIDGE, &uniform(30.0)), &["compare"]);
    assert_eq!(run.code(), 0, "{}", run.stderr());
    let (header, rows) = csv_body(&run.read("compare.csv"));
    assert_eq!(
        header,
        [
            "variant",
            "gamma_fix",
            "max_displacement",
            "gap",
            "n_maxima",
            "n_minima",
            "converged"
        ]
    );
    let names: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(names, ["full", "simplified", "timoshenko-young"]);
    let simplified: f64 = rows[1][1].parse().unwrap();
    assert!((simplified - 0.212346).abs() <= 5e-3 * 0.212346, "{simplified}");
    assert_eq!(rows[1][4], "1");
    assert_eq!(rows[1][5], "0");
    for name in ["full", "simplified", "timoshenko_young"] {
        let (h, r) = csv_body(&run.read(&format!("solution_{name}.csv")));
        assert_eq!(h[0], "s");
        assert_eq!(r.len(), 2001);
    }
}

#[test]
fn unloaded_comparison_rows_are_identical() {
    let run = melan(&config("", BRIDGE, &uniform(0.0)), &["compare", "--mesh", "200"]);
    assert_eq!(run.code(), 0, "{}", run.stderr());
    let (_, rows) = csv_body(&run.read("compare.csv"));
    for r in &rows {
        assert_eq!(&r[1..], &rows[0][1..]);
        assert_eq!(r[2], "0");
    }
}

#[test]
fn variant_override_and_unknown_variant() {
    let run = melan(
        &config("", BRIDGE, &uniform(10.0)),
        &["solve", "--variant", "ty", "--mesh", "200"],
    );
    assert_eq!(run.code(), 0, "{}", run.stderr());
    assert_eq!(run.json("report.json")["report"]["variant"], "timoshenko_young");
    let run = melan(&config("", BRIDGE, &uniform(10.0)), &["solve", "--variant", "nope"]);
    assert_eq!(run.code(), 2);
}

#[test]
fn thread_count_does_not_change_results() {
    let cfg = config("", BRIDGE, &uniform(30.0));
    let once = |threads: &str| {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(&path, &cfg).unwrap();
        let out = Command::new(env!("CARGO_BIN_EXE_melan"))
            .env("RAYON_NUM_THREADS", threads)
            .args(["gamma-map", "--points", "5", "--mesh", "300", "--config"])
            .arg(&path)
            .arg("--out")
            .arg(dir.path())
            .output()
            .unwrap();
        assert!(out.status.success());
        bodies(dir.path(), "gamma_map.csv")
    };
    assert_eq!(once("1"), once("3"));
}
