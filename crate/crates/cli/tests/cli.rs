use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn reclaim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reclaim"))
        .args(args)
        .env("RECLAIM_LOG", "off")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}{}", stdout(o), stderr(o)))
}

fn energy(v: &Value) -> f64 {
    v["energy"].as_f64().expect("energy is a number")
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs().max(1.0)
}

fn example() -> String {
    data("example.json").display().to_string()
}

/// Continuous optimum of the example, worked out by hand: T1 runs at s1,
/// then T2 alone and the chain T3 -> T4 share the remaining time.
fn continuous_oracle() -> f64 {
    let s1 = (2.0 / 3.0) * (3.0 + 35f64.cbrt());
    let rest = 1.5 - 3.0 / s1;
    let s2 = 2.0 / rest;
    let s34 = 3.0 / rest;
    3.0 * s1 * s1 + 2.0 * s2 * s2 + 3.0 * s34 * s34
}

#[test]
fn solve_continuous_example() {
    let o = reclaim(&["solve", "--model", "continuous", "--smax", "6", &example()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert!(close(energy(&v), continuous_oracle(), 1e-9), "{}", energy(&v));
    assert!((energy(&v) - 109.6).abs() < 0.05);
    assert_eq!(v["feasible"], true);
    assert_eq!(v["structure"], "tree");
    assert_eq!(v["schedule"].as_array().unwrap().len(), 4);
}

#[test]
fn solve_vdd_example() {
    let o = reclaim(&["solve", "--model", "vdd", "--modes", "2,5,6", &example()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert!(close(energy(&v), 144.0, 1e-9));
    for entry in v["schedule"].as_array().unwrap() {
        assert!(entry["profile"]["segments"].is_array(), "{entry}");
        assert!(entry["start"].is_number());
    }
}

#[test]
fn solve_discrete_example() {
    let o = reclaim(&["solve", "--model", "discrete", "--modes", "2,5,6", &example()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert!(close(energy(&v), 170.0, 1e-12));
    let speeds: Vec<f64> = v["schedule"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["profile"]["constant"].as_f64().unwrap())
        .collect();
    assert_eq!(speeds, vec![6.0, 2.0, 2.0, 5.0]);
}

#[test]
fn solve_incremental_example() {
    let o = reclaim(&[
        "solve", "--model", "incremental", "--smin", "2", "--smax", "6", "--delta", "2", &example(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(close(energy(&json(&o)), 128.0, 1e-12));
}

#[test]
fn malformed_json_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"tasks\": [\n  {\"id\": \"a\", \"cost\": }").unwrap();
    let o = reclaim(&["solve", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn missing_file_is_an_input_error() {
    let o = reclaim(&["solve", "/nonexistent/instance.json"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("reading"));
}

#[test]
fn missing_model_parameters() {
    let o = reclaim(&["solve", "--model", "vdd", &example()]);
    assert_eq!(code(&o), 1);
    let o = reclaim(&["solve", "--model", "incremental", "--smin", "2", &example()]);
    assert_eq!(code(&o), 1);
}

#[test]
fn infeasible_deadline_exits_2() {
    let o = reclaim(&["solve", "--model", "continuous", "--smax", "1", &example()]);
    assert_eq!(code(&o), 2);
    let o = reclaim(&["solve", "--model", "vdd", "--modes", "1,2", &example()]);
    assert_eq!(code(&o), 2);
    let o = reclaim(&["solve", "--model", "discrete", "--modes", "1,2", &example()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn validate_discrete_schedule() {
    let sched = data("discrete_schedule.json").display().to_string();
    let o = reclaim(&["validate", &example(), &sched]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["feasible"], true);
    assert!(close(energy(&v), 170.0, 1e-12));
    assert_eq!(v["deadline_slack"].as_array().unwrap().len(), 4);
    assert_eq!(v["precedence_slack"].as_array().unwrap().len(), 3);
}

#[test]
fn validate_tighter_deadline() {
    let sched = data("discrete_schedule.json").display().to_string();
    let o = reclaim(&["validate", "--deadline", "1.0", &example(), &sched]);
    assert_eq!(code(&o), 2);
    let v = json(&o);
    assert_eq!(v["feasible"], false);
    let violations: Vec<&str> = v["violations"].as_array().unwrap().iter().map(|s| s.as_str().unwrap()).collect();
    assert!(violations.iter().any(|s| s.contains("T2")), "{violations:?}");
}

#[test]
fn validate_work_deficit() {
    let sched = data("deficit_schedule.json").display().to_string();
    let o = reclaim(&["validate", &example(), &sched]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("T1"), "{}", stderr(&o));
}

#[test]
fn validate_checks_given_start_times() {
    let dir = tempfile::tempdir().unwrap();
    let sched = dir.path().join("s.json");
    // T3 starts before T1 completes
    std::fs::write(
        &sched,
        r#"[{"id": "T1", "constant": 6, "start": 0},
            {"id": "T2", "constant": 2, "start": 0.5},
            {"id": "T3", "constant": 2, "start": 0.25},
            {"id": "T4", "constant": 5, "start": 1.0}]"#,
    )
    .unwrap();
    let o = reclaim(&["validate", &example(), sched.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let v = json(&o);
    assert_eq!(v["timing"], "given");
    let slack = v["precedence_slack"]
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["from"] == "T1" && e["to"] == "T3")
        .unwrap();
    assert!(close(slack["slack"].as_f64().unwrap(), -0.25, 1e-12));
}

#[test]
fn solve_then_validate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 4] = [
        &["--model", "continuous", "--smax", "6"],
        &["--model", "vdd", "--modes", "2,5,6"],
        &["--model", "discrete", "--modes", "2,5,6"],
        &["--model", "incremental", "--smin", "2", "--smax", "6", "--delta", "2"],
    ];
    for (k, flags) in runs.iter().enumerate() {
        let out = dir.path().join(format!("r{k}.json"));
        let out = out.to_str().unwrap();
        let mut args = vec!["solve", "--out", out];
        args.extend_from_slice(flags);
        let example = example();
        args.push(&example);
        let o = reclaim(&args);
        assert_eq!(code(&o), 0, "{flags:?}: {}", stderr(&o));
        let solved: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();

        let o = reclaim(&["validate", &example, out]);
        assert_eq!(code(&o), 0, "{flags:?}: {}", stderr(&o));
        let v = json(&o);
        assert_eq!(v["feasible"], true, "{flags:?}");
        assert_eq!(v["timing"], "given");
        assert!(close(energy(&v), energy(&solved), 1e-9), "{flags:?}");
    }
}

#[test]
fn compare_example() {
    let o = reclaim(&[
        "compare", "--smax", "6", "--modes", "2,5,6", "--smin", "2", "--delta", "2", &example(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    let rows = v["rows"].as_array().unwrap();
    let models: Vec<&str> = rows.iter().map(|r| r["model"].as_str().unwrap()).collect();
    assert_eq!(models, ["continuous", "vdd", "discrete", "incremental"]);
    let expected = [continuous_oracle(), 144.0, 170.0, 128.0];
    for (r, e) in rows.iter().zip(expected) {
        assert_eq!(r["status"], "ok");
        assert!(close(energy(r), e, 1e-9), "{r}");
    }
    assert_eq!(v["ordering_ok"], true);
}

#[test]
fn compare_pretty_table() {
    let o = reclaim(&["--pretty", "compare", "--smax", "6", "--modes", "2,5,6", &example()]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("109.60"), "{text}");
    assert!(text.contains("144.000000"));
    assert!(text.contains("170.000000"));
    assert!(text.contains("skipped"));
}

#[test]
fn compare_single_task_rows_agree() {
    let single = data("single.json").display().to_string();
    let o = reclaim(&[
        "compare", "--smax", "2", "--modes", "2", "--smin", "2", "--delta", "1", &single,
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for r in json(&o)["rows"].as_array().unwrap() {
        assert!(close(energy(r), 8.0, 1e-9), "{r}");
    }
}

#[test]
fn compare_marks_budget_rows() {
    let o = reclaim(&[
        "compare", "--smax", "6", "--modes", "2,5,6", "--smin", "2", "--delta", "2", "--node-budget", "5",
        &example(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows[0]["status"], "ok");
    assert_eq!(rows[1]["status"], "ok");
    assert_eq!(rows[2]["status"], "incumbent");
    assert_eq!(rows[3]["status"], "incumbent");
    assert!(energy(&rows[2]) >= 170.0);
}

#[test]
fn compare_keeps_going_after_a_failed_row() {
    let o = reclaim(&["compare", "--smax", "6", "--modes", "1,2", &example()]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows[0]["status"], "ok");
    assert_eq!(rows[1]["status"], "error");
    assert_eq!(rows[2]["status"], "error");
}

#[test]
fn budget_exhaustion_prints_incumbent() {
    let o = reclaim(&["solve", "--model", "discrete", "--modes", "2,5,6", "--node-budget", "5", &example()]);
    assert_eq!(code(&o), 3);
    let v = json(&o);
    assert_eq!(v["status"], "incumbent");
    assert_eq!(v["feasible"], true);
}

#[test]
fn approx_reports_bounds() {
    let o = reclaim(&[
        "approx", "--model", "incremental", "--smin", "2", "--smax", "6", "--delta", "2", "--K", "2", &example(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    let e = energy(&v);
    assert!(e >= 128.0 - 1e-9);
    assert!(e <= (1.0 + 1.0f64).powi(2) * 1.5f64.powi(2) * 128.0);
    assert!(e <= v["certified_upper"].as_f64().unwrap() * (1.0 + 1e-12));
    assert!(close(v["bound_factor"].as_f64().unwrap(), 9.0, 1e-12));
    assert_eq!(v["K"], 2);

    let o = reclaim(&["approx", "--modes", "2,5,6", "--K", "1", &example()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(energy(&json(&o)) >= 170.0 - 1e-9);
}

#[test]
fn gen2p_writes_instance_and_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("p.json");
    let o = reclaim(&["gen2p", "--values", "1,1,2", "--out", inst.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert!(close(v["deadline"].as_f64().unwrap(), 3.0, 0.0));
    assert!(close(v["energy_bound"].as_f64().unwrap(), 10.0, 0.0));
    assert_eq!(v["has_equal_partition"], true);

    // the bound is met exactly when the values split evenly
    let o = reclaim(&["solve", "--model", "discrete", "--modes", "1,2", inst.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(energy(&json(&o)) <= 10.0 + 1e-9);

    let o = reclaim(&["gen2p", "--values", "1,0"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn power_profile_csv() {
    let o = reclaim(&["power-profile", "--smax", "6", &example()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,power"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (t, p) = l.split_once(',').unwrap();
            (t.parse().unwrap(), p.parse().unwrap())
        })
        .collect();
    let integral: f64 = rows.windows(2).map(|w| (w[1].0 - w[0].0) * w[0].1).sum();
    assert!(close(integral, continuous_oracle(), 1e-9), "{integral}");
    assert!(close(rows.last().unwrap().0, 1.5, 1e-12));
}

#[test]
fn power_profile_of_a_schedule_file() {
    let sched = data("discrete_schedule.json").display().to_string();
    let o = reclaim(&["power-profile", "--schedule", &sched, &example()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    // T1 alone at speed 6 for the first half time unit
    assert_eq!(text.lines().nth(1), Some("0,216"));
}

#[test]
fn dump_lp_writes_the_program() {
    let dir = tempfile::tempdir().unwrap();
    let lp = dir.path().join("p.lp");
    let o = reclaim(&[
        "solve", "--model", "vdd", "--modes", "2,5,6", "--dump-lp", lp.to_str().unwrap(), &example(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = std::fs::read_to_string(&lp).unwrap();
    assert!(text.starts_with("min "));
    assert!(text.contains("s.t."));
    // 4 deadline rows, 3 precedence rows, 4 work rows
    assert_eq!(text.lines().filter(|l| l.contains("<=")).count(), 11);
}

#[test]
fn spg_structure_with_finite_smax() {
    let diamond = data("diamond.json").display().to_string();
    let o = reclaim(&["solve", "--structure", "spg", "--smax", "10", &diamond]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("unsupported"), "{}", stderr(&o));

    let o = reclaim(&["solve", "--structure", "spg", "--smax", "10", "--fallback", "dag", &diamond]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let fallback = energy(&json(&o));

    let o = reclaim(&["solve", "--structure", "spg", &diamond]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["structure"], "spg");
    // s_max = 10 does not bind, so both solvers reach the same optimum
    assert!(close(energy(&v), fallback, 1e-7), "{} vs {fallback}", energy(&v));
}

#[test]
fn forced_structure_must_match() {
    let o = reclaim(&["solve", "--structure", "chain", &example()]);
    assert_eq!(code(&o), 1);
    let o = reclaim(&["solve", "--structure", "dag", &example()]);
    assert_eq!(code(&o), 0);
    assert!(close(energy(&json(&o)), continuous_oracle(), 1e-8));
}

#[test]
fn generate_is_seeded() {
    let a = reclaim(&["generate", "--kind", "tree", "-n", "12", "--seed", "4"]);
    let b = reclaim(&["generate", "--kind", "tree", "-n", "12", "--seed", "4"]);
    let c = reclaim(&["generate", "--kind", "tree", "-n", "12", "--seed", "5"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);

    let dir = tempfile::tempdir().unwrap();
    for kind in ["dag", "tree", "spg"] {
        let path = dir.path().join(format!("{kind}.json"));
        let o = reclaim(&[
            "generate", "--kind", kind, "-n", "9", "--seed", "1", "--slack", "2", "--out", path.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let o = reclaim(&["solve", path.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{kind}: {}", stderr(&o));
        // a deadline twice the unit-speed makespan allows speeds of one half
        assert!(json(&o)["feasible"] == true);
    }
}

#[test]
fn pretty_solve_lists_tasks() {
    let o = reclaim(&["solve", "--pretty", "--smax", "6", &example()]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    for id in ["T1", "T2", "T3", "T4"] {
        assert!(text.contains(id));
    }
    assert!(text.contains("structure  tree"));
}
