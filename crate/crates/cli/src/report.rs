//! JSON reports and their `--pretty` tables.

use std::fmt::Write;

use reclaim_core::discrete::{ApproxResult, ExactSolution};
use reclaim_core::{schedule_entries, Error, ExecutionGraph, SolveReport, SpeedProfile, TaskRun};
use serde_json::{json, Map, Value};

use crate::commands::exit_code;
use crate::Model;

pub fn name(model: Model) -> &'static str {
    match model {
        Model::Continuous => "continuous",
        Model::Vdd => "vdd",
        Model::Discrete => "discrete",
        Model::Incremental => "incremental",
    }
}

fn json_text(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("reports always serialize") + "\n"
}

fn profile_text(p: &SpeedProfile) -> String {
    match p {
        SpeedProfile::Constant(s) => format!("{s:.6}"),
        SpeedProfile::Segments(segs) => segs
            .iter()
            .map(|g| format!("{}x{:.6}", g.speed, g.duration))
            .collect::<Vec<_>>()
            .join(" + "),
    }
}

fn runs_table(out: &mut String, graph: &ExecutionGraph, runs: &[TaskRun]) {
    let width = graph.tasks().iter().map(|t| t.id.len()).max().unwrap_or(0).max(4);
    let _ = writeln!(out, "{:<width$}  {:>12}  {:>12}  speed", "task", "start", "end");
    for (i, r) in runs.iter().enumerate() {
        let _ = writeln!(
            out,
            "{:<width$}  {:>12.6}  {:>12.6}  {}",
            graph.id(i),
            r.start,
            r.completion,
            profile_text(&r.profile)
        );
    }
}

/// A solved schedule: energy, makespan, diagnostics and the per-task
/// schedule in the format `validate` reads back.
pub fn solution(graph: &ExecutionGraph, model: Model, report: &SolveReport, extra: Map<String, Value>, pretty: bool) -> String {
    let mut obj = Map::new();
    obj.insert("model".into(), json!(name(model)));
    obj.extend(extra);
    obj.insert("energy".into(), json!(report.energy));
    obj.insert("makespan".into(), json!(report.makespan));
    obj.insert("deadline".into(), json!(graph.deadline()));
    obj.insert("feasible".into(), json!(report.feasible));
    obj.insert("diagnostics".into(), json!(report.diagnostics));
    obj.insert("schedule".into(), json!(schedule_entries(graph, &report.runs)));
    if !pretty {
        return json_text(&Value::Object(obj));
    }
    let mut out = String::new();
    for key in ["model", "structure", "status", "energy", "makespan", "deadline", "feasible"] {
        if let Some(v) = obj.get(key) {
            let _ = writeln!(out, "{key:<10} {}", plain(v));
        }
    }
    let d = &report.diagnostics;
    if let Some(n) = d.iterations {
        let _ = writeln!(out, "{:<10} {n}", "iterations");
    }
    if let Some(r) = d.residual {
        let _ = writeln!(out, "{:<10} {r:e}", "residual");
    }
    if let Some(n) = d.nodes {
        let _ = writeln!(out, "{:<10} {n}", "nodes");
    }
    out.push('\n');
    runs_table(&mut out, graph, &report.runs);
    out
}

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Slack of every deadline and precedence constraint of a timed schedule.
pub struct Check {
    pub feasible: bool,
    pub makespan: f64,
    /// `D - completion` per task.
    pub deadline_slack: Vec<f64>,
    /// `start(v) - completion(u)` per edge, in edge order.
    pub edge_slack: Vec<f64>,
    pub violations: Vec<String>,
}

pub fn check(graph: &ExecutionGraph, runs: &[TaskRun], tol: f64) -> Check {
    let d = graph.deadline();
    let mut violations = Vec::new();
    let deadline_slack: Vec<f64> = runs.iter().map(|r| d - r.completion).collect();
    for (i, r) in runs.iter().enumerate() {
        if r.start < -tol {
            violations.push(format!("task {} starts at {} before time 0", graph.id(i), r.start));
        }
        if deadline_slack[i] < -tol {
            violations.push(format!("task {} completes at {} after the deadline {d}", graph.id(i), r.completion));
        }
    }
    let edge_slack: Vec<f64> = graph
        .edges()
        .iter()
        .map(|&(u, v)| runs[v].start - runs[u].completion)
        .collect();
    for (&(u, v), &s) in graph.edges().iter().zip(&edge_slack) {
        if s < -tol {
            violations.push(format!(
                "task {} starts at {} before its predecessor {} completes at {}",
                graph.id(v),
                runs[v].start,
                graph.id(u),
                runs[u].completion
            ));
        }
    }
    Check {
        feasible: violations.is_empty(),
        makespan: runs.iter().map(|r| r.completion).fold(0.0, f64::max),
        deadline_slack,
        edge_slack,
        violations,
    }
}

pub fn validation(
    graph: &ExecutionGraph,
    evaluated: &SolveReport,
    runs: &[TaskRun],
    check: &Check,
    timed: bool,
    pretty: bool,
) -> String {
    let deadlines: Vec<Value> = check
        .deadline_slack
        .iter()
        .enumerate()
        .map(|(i, s)| json!({"task": graph.id(i), "completion": runs[i].completion, "slack": s}))
        .collect();
    let edges: Vec<Value> = graph
        .edges()
        .iter()
        .zip(&check.edge_slack)
        .map(|(&(u, v), s)| json!({"from": graph.id(u), "to": graph.id(v), "slack": s}))
        .collect();
    let v = json!({
        "feasible": check.feasible,
        "energy": evaluated.energy,
        "makespan": check.makespan,
        "deadline": graph.deadline(),
        "timing": if timed { "given" } else { "asap" },
        "violations": check.violations,
        "deadline_slack": deadlines,
        "precedence_slack": edges,
    });
    if !pretty {
        return json_text(&v);
    }
    let mut out = String::new();
    let _ = writeln!(out, "feasible   {}", check.feasible);
    let _ = writeln!(out, "energy     {}", evaluated.energy);
    let _ = writeln!(out, "makespan   {}", check.makespan);
    let _ = writeln!(out, "deadline   {}", graph.deadline());
    let _ = writeln!(out, "timing     {}", if timed { "given" } else { "asap" });
    for msg in &check.violations {
        let _ = writeln!(out, "violation  {msg}");
    }
    out.push('\n');
    runs_table(&mut out, graph, runs);
    out.push('\n');
    for ((u, v), s) in graph.edges().iter().zip(&check.edge_slack) {
        let _ = writeln!(out, "{} -> {}  slack {s:.6}", graph.id(*u), graph.id(*v));
    }
    out
}

/// One model's line in `compare`.
pub struct Row {
    pub model: Model,
    pub energy: Option<f64>,
    /// "ok", "incumbent", "error" or "skipped".
    pub status: &'static str,
    pub detail: Option<String>,
    /// Exit code the row's error would have produced on its own.
    pub code: Option<u8>,
}

impl Row {
    pub fn from_result(model: Model, r: reclaim_core::Result<SolveReport>) -> Self {
        match r {
            Ok(report) => Self {
                model,
                energy: Some(report.energy),
                status: "ok",
                detail: None,
                code: None,
            },
            Err(e) => Self::failed(model, &e.into()),
        }
    }

    pub fn exact(model: Model, graph: &ExecutionGraph, r: reclaim_core::Result<ExactSolution>) -> Self {
        match r {
            Ok(sol) => Self {
                model,
                energy: Some(sol.energy),
                status: "ok",
                detail: None,
                code: None,
            },
            Err(Error::BudgetExceeded {
                budget,
                incumbent: Some(sol),
            }) => {
                debug_assert!(sol.makespan <= graph.deadline() * (1.0 + 1e-9));
                Self {
                    model,
                    energy: Some(sol.energy),
                    status: "incumbent",
                    detail: Some(format!("node budget of {budget} exhausted")),
                    code: None,
                }
            }
            Err(e) => Self::failed(model, &e.into()),
        }
    }

    pub fn failed(model: Model, e: &anyhow::Error) -> Self {
        Self {
            model,
            energy: None,
            status: "error",
            detail: Some(format!("{e:#}")),
            code: Some(exit_code(e)),
        }
    }

    pub fn skipped(model: Model, why: &str) -> Self {
        Self {
            model,
            energy: None,
            status: "skipped",
            detail: Some(why.to_string()),
            code: None,
        }
    }

    /// Whether the energy is a proven optimum.
    pub fn exact_ok(&self) -> bool {
        self.status == "ok"
    }
}

pub fn comparison(rows: &[Row], violations: &[String], pretty: bool) -> String {
    if pretty {
        let mut out = String::new();
        let _ = writeln!(out, "{:<12} {:>14}  status", "model", "energy");
        for r in rows {
            let energy = r.energy.map(|e| format!("{e:.6}")).unwrap_or_else(|| "-".into());
            let _ = write!(out, "{:<12} {:>14}  {}", name(r.model), energy, r.status);
            if let Some(d) = &r.detail {
                let _ = write!(out, " ({d})");
            }
            out.push('\n');
        }
        for v in violations {
            let _ = writeln!(out, "ordering violated: {v}");
        }
        return out;
    }
    let rows: Vec<Value> = rows
        .iter()
        .map(|r| {
            let mut obj = Map::new();
            obj.insert("model".into(), json!(name(r.model)));
            obj.insert("energy".into(), json!(r.energy));
            obj.insert("status".into(), json!(r.status));
            if let Some(d) = &r.detail {
                obj.insert("detail".into(), json!(d));
            }
            Value::Object(obj)
        })
        .collect();
    json_text(&json!({
        "rows": rows,
        "ordering_ok": violations.is_empty(),
        "violations": violations,
    }))
}

pub fn approximation(graph: &ExecutionGraph, model: Model, k: u32, r: &ApproxResult, pretty: bool) -> String {
    let mut extra = Map::new();
    extra.insert("K".into(), json!(k));
    extra.insert("bound_factor".into(), json!(r.bound_factor));
    extra.insert("lower_bound".into(), json!(r.lower_bound));
    extra.insert("certified_upper".into(), json!(r.certified_upper));
    extra.insert("vdd_energy".into(), json!(r.vdd_energy));
    extra.insert("modes".into(), json!(r.modes));
    if !pretty {
        return solution(graph, model, &r.report, extra, false);
    }
    let mut out = String::new();
    for (key, v) in &extra {
        let _ = writeln!(out, "{key:<16} {}", plain(v));
    }
    out + &solution(graph, model, &r.report, Map::new(), true)
}

pub fn summary(v: &Value, pretty: bool) -> String {
    if !pretty {
        return json_text(v);
    }
    let mut out = String::new();
    if let Value::Object(obj) = v {
        for (key, val) in obj {
            if key != "instance" {
                let _ = writeln!(out, "{key:<20} {val}");
            }
        }
        if let Some(inst) = obj.get("instance") {
            out.push('\n');
            out.push_str(&json_text(inst));
        }
    }
    out
}
