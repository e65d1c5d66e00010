use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use wmgame_core::equilibrium::{is_interior, mixed_2x2_simplified, simplified_values, support_enumeration};
use wmgame_core::game::{RobustnessMatrix, StrategySpaces};
use wmgame_core::region::{feasibility_interval, parse_region_csv};
use wmgame_core::{
    build_payoff_matrix, Classification, CostParameters, CsrMode, ReportDocument, Scenario, ScenarioDocument,
};

fn wmgame(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wmgame")).args(args).output().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn worked() -> Scenario {
    Scenario {
        spaces: StrategySpaces {
            alphas: vec![0.1, 0.5],
            betas: vec![0.1, 0.9],
        },
        robustness: RobustnessMatrix(vec![vec![0.6, 0.1], vec![0.9, 0.6]]),
        costs: CostParameters {
            i_def: 1.0,
            i_att: 0.5,
            o_def: 0.25,
            o_att: 0.25,
            r_def_minus: 0.2,
            r_def_plus: 0.5,
            r_att_minus: 0.2,
            r_att_plus: 0.5,
            k: 0.5,
            lambda: 0.2,
        },
        csr_mode: CsrMode::SimplifiedLambda,
        profiles: None,
    }
}

fn write_scenario(dir: &TempDir, name: &str, scenario: &Scenario) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, ScenarioDocument::from(scenario).to_json()).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_accepts_worked_scenario() {
    let dir = TempDir::new().unwrap();
    let path = write_scenario(&dir, "w.json", &worked());
    let out = wmgame(&["validate", s(&path)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("result: pass"));
}

#[test]
fn validate_names_the_bad_field() {
    let dir = TempDir::new().unwrap();
    let mut bad = worked();
    bad.spaces.betas = vec![0.9, 0.1];
    let path = write_scenario(&dir, "bad.json", &bad);
    let out = wmgame(&["validate", s(&path)]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.starts_with("invalid-scenario"), "{err}");
    assert!(err.contains("betas"), "{err}");
}

#[test]
fn strict_promotes_sign_warnings() {
    let dir = TempDir::new().unwrap();
    let mut odd = worked();
    odd.robustness = RobustnessMatrix(vec![vec![0.1, 0.6], vec![0.6, 0.9]]);
    let path = write_scenario(&dir, "odd.json", &odd);
    let lenient = wmgame(&["validate", s(&path)]);
    assert_eq!(lenient.status.code(), Some(0));
    assert!(stdout(&lenient).contains("warning"));
    let strict = wmgame(&["validate", "--strict", s(&path)]);
    assert_eq!(strict.status.code(), Some(2));
    assert!(stderr(&strict).starts_with("sign-convention-warning"));
}

#[test]
fn parse_errors_report_position() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("broken.json");
    fs::write(&path, "{\n  \"alphas\": [0.1,\n}").unwrap();
    let out = wmgame(&["validate", s(&path)]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.starts_with("parse-error") && err.contains("line 3"), "{err}");
}

#[test]
fn missing_scenario_file() {
    let out = wmgame(&["solve", "/definitely/not/here.json"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).starts_with("file-not-found"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(wmgame(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(wmgame(&["solve"]).status.code(), Some(1));
    assert_eq!(wmgame(&["solve", "x.json", "--method", "magic"]).status.code(), Some(1));
}

#[test]
fn payoff_matches_library() {
    let dir = TempDir::new().unwrap();
    let path = write_scenario(&dir, "w.json", &worked());
    let csv = dir.path().join("payoff.csv");
    let out = wmgame(&["payoff", s(&path), "-o", s(&csv)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let matrix = build_payoff_matrix(&worked()).unwrap();
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("i,j,u_alice,u_bob"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4);
    for row in rows {
        let f: Vec<&str> = row.split(',').collect();
        let (i, j): (usize, usize) = (f[0].parse().unwrap(), f[1].parse().unwrap());
        assert_eq!(f[2].parse::<f64>().unwrap(), matrix.alice(i - 1, j - 1));
        assert_eq!(f[3].parse::<f64>().unwrap(), matrix.bob(i - 1, j - 1));
    }
}

#[test]
fn payoff_of_zero_constants_is_zero() {
    let dir = TempDir::new().unwrap();
    let mut zero = worked();
    zero.costs = CostParameters::default();
    let path = write_scenario(&dir, "z.json", &zero);
    let csv = dir.path().join("z.csv");
    assert_eq!(
        wmgame(&["payoff", s(&path), "--output", s(&csv)]).status.code(),
        Some(0)
    );
    let text = fs::read_to_string(&csv).unwrap();
    for row in text.lines().skip(1) {
        assert!(row.ends_with(",0,0"), "{row}");
    }
}

#[test]
fn payoff_to_unwritable_path() {
    let dir = TempDir::new().unwrap();
    let path = write_scenario(&dir, "w.json", &worked());
    let out = wmgame(&["payoff", s(&path), "-o", "/no/such/dir/out.csv"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).starts_with("io-failure"));
}

fn solve_json(path: &Path, method: &str) -> ReportDocument {
    let out = wmgame(&["solve", s(path), "--method", method, "--json"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn solve_worked_scenario_all_methods() {
    let dir = TempDir::new().unwrap();
    let path = write_scenario(&dir, "w.json", &worked());
    for method in ["auto", "simplified", "general", "matrix", "oracle"] {
        let report = solve_json(&path, method);
        let mixed = report.mixed.expect("mixed equilibrium");
        assert!((mixed.pr_alpha1() - 0.5).abs() < 1e-7, "{method}");
        assert!((mixed.pr_beta1() - 0.5).abs() < 1e-7, "{method}");
        assert!(report.pure.is_empty());
        assert_eq!(report.feasibility, "mixed");
    }
    let text = stdout(&wmgame(&["solve", s(&path), "--method", "simplified"]));
    assert!(text.contains("Pr(alpha) = [0.5, 0.5]"), "{text}");
}

#[test]
fn json_report_round_trips_exactly() {
    let dir = TempDir::new().unwrap();
    let path = write_scenario(&dir, "w.json", &worked());
    let report = solve_json(&path, "simplified");
    let expected = mixed_2x2_simplified(&worked()).unwrap();
    assert_eq!(report.mixed.unwrap(), expected);

    let oracle = solve_json(&path, "oracle");
    let found = support_enumeration(&build_payoff_matrix(&worked()).unwrap()).unwrap();
    let mixed = found.equilibria.iter().find(|e| !e.is_pure()).unwrap();
    assert_eq!(oracle.mixed.unwrap(), mixed.profile);
}

#[test]
fn simplified_requires_proportional_ongoing_costs() {
    let dir = TempDir::new().unwrap();
    let mut off = worked();
    off.costs.o_att = 0.3;
    let path = write_scenario(&dir, "off.json", &off);
    let out = wmgame(&["solve", s(&path), "--method", "simplified"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).starts_with("assumption-violated"));
    // The automatic ladder still finds the equilibrium.
    assert_eq!(wmgame(&["solve", s(&path)]).status.code(), Some(0));
}

fn records(dir: &TempDir, name: &str, correct: usize, total: usize) -> String {
    let mut text = String::from("sample_id,label,prediction\n");
    for n in 0..total {
        let prediction = if n < correct { 1 } else { 0 };
        text.push_str(&format!("s{n},1,{prediction}\n"));
    }
    fs::write(dir.path().join(name), text).unwrap();
    name.to_string()
}

fn manifest(dir: &TempDir, models: &[(f64, usize)]) -> PathBuf {
    let mut entries = Vec::new();
    for (n, &(alpha, trigger_correct)) in models.iter().enumerate() {
        let test = records(dir, &format!("test{n}.csv"), 10, 10);
        let trigger = records(dir, &format!("trigger{n}.csv"), trigger_correct, 10);
        entries.push(serde_json::json!({"alpha": alpha, "test": test, "trigger": trigger}));
    }
    let path = dir.path().join("manifest.json");
    fs::write(&path, serde_json::json!({ "models": entries }).to_string()).unwrap();
    path
}

#[test]
fn fit_recovers_lambda() {
    let dir = TempDir::new().unwrap();
    let path = manifest(&dir, &[(0.2, 8), (0.5, 8)]);
    let out = wmgame(&["fit", s(&path)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let line = text.lines().find(|l| l.starts_with("lambda=")).unwrap();
    let value: f64 = line["lambda=".len()..].split(' ').next().unwrap().parse().unwrap();
    assert!((value - 0.2).abs() < 1e-12, "{line}");
    assert!(text.contains("alpha=0.2 p=1 q=0.8"), "{text}");
}

#[test]
fn fit_rejects_inconsistent_lambdas() {
    let dir = TempDir::new().unwrap();
    // p = 1, so lambda = 1 - q: 0.1 and 0.5.
    let path = manifest(&dir, &[(0.5, 9), (0.5, 5)]);
    let out = wmgame(&["fit", s(&path), "--tol", "0.01"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).starts_with("assumption-failure"));
    let text = stdout(&out);
    let spread: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("spread="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((spread - 0.2).abs() < 1e-12, "{text}");
}

#[test]
fn fit_with_missing_file() {
    let dir = TempDir::new().unwrap();
    let path = manifest(&dir, &[(0.2, 8)]);
    fs::remove_file(dir.path().join("trigger0.csv")).unwrap();
    let out = wmgame(&["fit", s(&path)]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).starts_with("file-not-found"));
}

#[test]
fn region_csv_matches_interval() {
    let dir = TempDir::new().unwrap();
    let path = write_scenario(&dir, "w.json", &worked());
    let csv = dir.path().join("r.csv");
    let out = wmgame(&["region", s(&path), "--axis", "betas.1:0.11:1:500", "--csv", s(&csv)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let points = parse_region_csv(fs::File::open(&csv).unwrap()).unwrap();
    assert_eq!(points.len(), 500);

    // r = [[0.6, 0.1], [0.9, 0.6]]: d_r1 = 0.5, d_r2 = 0.3.
    let interval = feasibility_interval(0.5, 0.5, 0.3).unwrap();
    let mut mixed = 0;
    for p in &points {
        let beta2 = p.coordinates[0].1;
        let d_beta = 0.1 - beta2;
        let mut scenario = worked();
        scenario.spaces.betas[1] = beta2;
        let alice_mixes = is_interior(simplified_values(&scenario).unwrap().pr_alpha1);
        if (d_beta - interval.lower).abs() > 1e-9 && (d_beta - interval.upper).abs() > 1e-9 {
            assert_eq!(alice_mixes, interval.contains(d_beta), "{p:?}");
        }
        if p.classification == Classification::Mixed {
            mixed += 1;
            assert!(interval.contains(d_beta), "{p:?}");
        }
    }
    assert!(mixed > 0);
}

#[test]
fn region_svg_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let path = write_scenario(&dir, "w.json", &worked());
    let mut images = Vec::new();
    for run in 0..3 {
        let svg = dir.path().join(format!("r{run}.svg"));
        let threads = if run == 0 { "1" } else { "4" };
        let out = wmgame(&[
            "region",
            s(&path),
            "--axis",
            "betas.1:0.11:1:30",
            "--axis",
            "costs.k:0.1:1:30",
            "--couple-ongoing",
            "--threads",
            threads,
            "--svg",
            s(&svg),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        images.push(fs::read(&svg).unwrap());
    }
    assert!(images[0].starts_with(b"<svg"));
    assert_eq!(images[0], images[1]);
    assert_eq!(images[1], images[2]);
}

#[test]
fn region_svg_needs_two_axes() {
    let dir = TempDir::new().unwrap();
    let path = write_scenario(&dir, "w.json", &worked());
    let svg = dir.path().join("r.svg");
    let out = wmgame(&["region", s(&path), "--axis", "betas.1:0.11:1:10", "--svg", s(&svg)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("wrong-axis-count"));
    assert!(!svg.exists());
}

#[test]
fn region_grid_limit() {
    let dir = TempDir::new().unwrap();
    let path = write_scenario(&dir, "w.json", &worked());
    let out = wmgame(&[
        "region",
        s(&path),
        "--axis",
        "betas.1:0.11:1:2000",
        "--axis",
        "costs.k:0.1:1:2000",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("grid-too-large"));
}

#[test]
fn fit_reports_fidelity_against_base() {
    let dir = TempDir::new().unwrap();
    let test = records(&dir, "test.csv", 9, 10);
    let trigger = records(&dir, "trigger.csv", 8, 10);
    let base = records(&dir, "base.csv", 10, 10);
    let path = dir.path().join("manifest.json");
    let manifest = serde_json::json!({
        "base_test": base,
        "delta_test": 0.05,
        "delta_trigger": 0.1,
        "models": [{"alpha": 0.2, "test": test, "trigger": trigger}],
    });
    fs::write(&path, manifest.to_string()).unwrap();
    let out = wmgame(&["fit", s(&path)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(
        text.contains("agreement with base=0.9 (below 1 - delta_test)"),
        "{text}"
    );
    assert!(text.contains("trigger accuracy below 1 - delta_trigger"), "{text}");
}
