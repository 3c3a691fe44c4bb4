use std::fs;
use std::path::Path;

use anyhow::{bail, Context};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use reclaim_core::continuous::{power_profile, solve_continuous, Dispatch};
use reclaim_core::discrete::{
    approx_discrete, approx_incremental, gen_2partition, has_equal_partition, solve_exact_with_budget, DiscreteModel,
    IncrementalModel, SpeedGrid, DEFAULT_NODE_BUDGET,
};
use reclaim_core::generate::{random_instance, random_spg, random_tree};
use reclaim_core::schedule::TIME_TOL;
use reclaim_core::vdd::{build_lp, solve_vdd, VddModel};
use reclaim_core::{evaluate_schedule, parse_schedule, Error, ExecutionGraph, Instance, SolveReport, TaskRun};
use serde_json::json;

use crate::report::{self, Row};
use crate::{Cli, Command, Fallback, Kind, Model, ModelArgs, EXIT_INFEASIBLE, EXIT_INPUT, EXIT_OK, EXIT_SOLVER};

/// What a command prints and the exit code it ends with.
pub struct Outcome {
    pub body: String,
    pub code: u8,
}

impl Outcome {
    fn ok(body: String) -> Self {
        Self { body, code: EXIT_OK }
    }
}

pub fn run(cli: &Cli) -> u8 {
    let result = match &cli.command {
        Command::Solve {
            instance,
            model,
            dump_lp,
        } => solve(instance, model, dump_lp.as_deref(), cli.pretty),
        Command::Validate {
            instance,
            schedule,
            deadline,
        } => validate(instance, schedule, *deadline, cli.pretty),
        Command::Compare { instance, model } => compare(instance, model, cli.pretty),
        Command::Approx { instance, model, k } => approx(instance, model, *k, cli.pretty),
        Command::Gen2p { values } => return gen2p(values, cli.out.as_deref(), cli.pretty),
        Command::PowerProfile {
            instance,
            schedule,
            model,
        } => power(instance, schedule.as_deref(), model),
        Command::Generate {
            kind,
            n,
            seed,
            processors,
            edge_prob,
            slack,
        } => generate(*kind, *n, *seed, *processors, *edge_prob, *slack),
    };
    match result {
        Ok(outcome) => match emit(&outcome.body, cli.out.as_deref()) {
            Ok(()) => outcome.code,
            Err(e) => {
                eprintln!("error: {e:#}");
                EXIT_INPUT
            }
        },
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

fn emit(body: &str, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, body).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

pub fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(e) => core_exit_code(e),
        None => EXIT_INPUT,
    }
}

fn core_exit_code(e: &Error) -> u8 {
    match e {
        Error::Infeasible(_) | Error::LpInfeasible | Error::WorkDeficit { .. } => EXIT_INFEASIBLE,
        Error::NoConvergence { .. } | Error::BudgetExceeded { .. } | Error::LpNumerical(_) => EXIT_SOLVER,
        _ => EXIT_INPUT,
    }
}

fn load(path: &Path, deadline: Option<f64>) -> anyhow::Result<ExecutionGraph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let instance = Instance::from_json(&text).with_context(|| path.display().to_string())?;
    let graph = instance.to_graph()?;
    Ok(match deadline {
        Some(d) => graph.with_deadline(d)?,
        None => graph,
    })
}

fn modes(args: &ModelArgs) -> anyhow::Result<Vec<f64>> {
    match &args.modes {
        Some(m) if !m.is_empty() => Ok(m.clone()),
        _ => Err(Error::InvalidInput("this model needs --modes".into()).into()),
    }
}

fn incremental(args: &ModelArgs) -> anyhow::Result<IncrementalModel> {
    match (args.smin, args.smax, args.delta) {
        (Some(lo), Some(hi), Some(d)) => Ok(IncrementalModel::new(lo, hi, d)?),
        _ => Err(Error::InvalidInput("the incremental model needs --smin, --smax and --delta".into()).into()),
    }
}

fn dispatch(args: &ModelArgs) -> Dispatch {
    Dispatch {
        structure: args.structure,
        fallback_dag: args.fallback == Some(Fallback::Dag),
    }
}

fn budget(args: &ModelArgs) -> u64 {
    args.node_budget.unwrap_or(DEFAULT_NODE_BUDGET)
}

fn solve(path: &Path, args: &ModelArgs, dump_lp: Option<&Path>, pretty: bool) -> anyhow::Result<Outcome> {
    let graph = load(path, args.deadline)?;
    let model = args.model.unwrap_or(Model::Continuous);
    if dump_lp.is_some() && model != Model::Vdd {
        bail!(Error::InvalidInput("--dump-lp applies to --model vdd only".into()));
    }
    let mut extra = serde_json::Map::new();
    let report = match model {
        Model::Continuous => {
            let s_max = args.smax.unwrap_or(f64::INFINITY);
            let (structure, report) = solve_continuous(&graph, s_max, dispatch(args))?;
            extra.insert("structure".into(), json!(structure));
            report
        }
        Model::Vdd => {
            let vdd = VddModel::new(modes(args)?)?;
            if let Some(lp_path) = dump_lp {
                fs::write(lp_path, build_lp(&graph, &vdd).to_string())
                    .with_context(|| format!("writing {}", lp_path.display()))?;
            }
            solve_vdd(&graph, &vdd)?.1
        }
        Model::Discrete => return exact(&graph, &DiscreteModel::new(modes(args)?)?, model, budget(args), pretty),
        Model::Incremental => return exact(&graph, &incremental(args)?, model, budget(args), pretty),
    };
    Ok(Outcome::ok(report::solution(&graph, model, &report, extra, pretty)))
}

/// Exact discrete search. A blown budget still prints the incumbent.
fn exact<M: SpeedGrid>(
    graph: &ExecutionGraph,
    grid: &M,
    model: Model,
    budget: u64,
    pretty: bool,
) -> anyhow::Result<Outcome> {
    match solve_exact_with_budget(graph, grid, budget) {
        Ok(sol) => {
            let report = sol.report(graph)?;
            Ok(Outcome::ok(report::solution(graph, model, &report, Default::default(), pretty)))
        }
        Err(Error::BudgetExceeded {
            budget,
            incumbent: Some(sol),
        }) => {
            eprintln!("warning: node budget of {budget} exhausted; reporting the best schedule found");
            let report = sol.report(graph)?;
            let mut extra = serde_json::Map::new();
            extra.insert("status".into(), json!("incumbent"));
            Ok(Outcome {
                body: report::solution(graph, model, &report, extra, pretty),
                code: EXIT_SOLVER,
            })
        }
        Err(e) => Err(e.into()),
    }
}

fn validate(path: &Path, schedule: &Path, deadline: Option<f64>, pretty: bool) -> anyhow::Result<Outcome> {
    let graph = load(path, deadline)?;
    let text = fs::read_to_string(schedule).with_context(|| format!("reading {}", schedule.display()))?;
    let parsed = parse_schedule(&text, &graph).with_context(|| schedule.display().to_string())?;
    let evaluated = evaluate_schedule(&graph, &parsed.profiles)?;
    let timed = parsed.starts.iter().all(Option::is_some);
    let runs: Vec<TaskRun> = if timed {
        evaluated
            .runs
            .iter()
            .zip(&parsed.starts)
            .map(|(r, s)| {
                let start = s.expect("all starts present");
                TaskRun {
                    profile: r.profile.clone(),
                    start,
                    completion: start + r.duration(),
                }
            })
            .collect()
    } else {
        evaluated.runs.clone()
    };
    let check = report::check(&graph, &runs, TIME_TOL * graph.deadline());
    let body = report::validation(&graph, &evaluated, &runs, &check, timed, pretty);
    Ok(Outcome {
        body,
        code: if check.feasible { EXIT_OK } else { EXIT_INFEASIBLE },
    })
}

fn compare(path: &Path, args: &ModelArgs, pretty: bool) -> anyhow::Result<Outcome> {
    let graph = load(path, args.deadline)?;
    let top_mode = args.modes.as_ref().and_then(|m| m.iter().copied().reduce(f64::max));
    let s_max = args.smax.or(top_mode).unwrap_or(f64::INFINITY);
    let mut rows = Vec::new();

    rows.push(Row::from_result(
        Model::Continuous,
        solve_continuous(&graph, s_max, dispatch(args)).map(|(_, r)| r),
    ));
    if args.modes.is_some() {
        let vdd = modes(args).and_then(|m| Ok(VddModel::new(m)?));
        rows.push(match vdd {
            Ok(v) => Row::from_result(Model::Vdd, solve_vdd(&graph, &v).map(|(_, r)| r)),
            Err(e) => Row::failed(Model::Vdd, &e),
        });
        rows.push(match DiscreteModel::new(modes(args)?) {
            Ok(d) => Row::exact(Model::Discrete, &graph, solve_exact_with_budget(&graph, &d, budget(args))),
            Err(e) => Row::failed(Model::Discrete, &e.into()),
        });
    } else {
        rows.push(Row::skipped(Model::Vdd, "needs --modes"));
        rows.push(Row::skipped(Model::Discrete, "needs --modes"));
    }
    let inc = if args.smin.is_some() && args.delta.is_some() {
        let model = ModelArgs {
            smax: Some(s_max),
            ..args.clone()
        };
        match incremental(&model) {
            Ok(m) => Some(m),
            Err(e) => {
                rows.push(Row::failed(Model::Incremental, &e));
                None
            }
        }
    } else {
        rows.push(Row::skipped(Model::Incremental, "needs --smin and --delta"));
        None
    };
    if let Some(m) = &inc {
        rows.push(Row::exact(
            Model::Incremental,
            &graph,
            solve_exact_with_budget(&graph, m, budget(args)),
        ));
    }

    let violations = sandwich_violations(&rows, s_max, top_mode, inc.as_ref().map(|m| m.top()));
    let code = if !violations.is_empty() {
        EXIT_SOLVER
    } else if rows.iter().any(|r| r.energy.is_some()) {
        EXIT_OK
    } else {
        rows.iter().filter_map(|r| r.code).max().unwrap_or(EXIT_INPUT)
    };
    Ok(Outcome {
        body: report::comparison(&rows, &violations, pretty),
        code,
    })
}

/// Orderings that must hold between optimal energies: continuous below VDD
/// below discrete (when the continuous speed cap covers the modes), and
/// continuous below incremental (when the cap covers the grid).
fn sandwich_violations(rows: &[Row], s_max: f64, top_mode: Option<f64>, top_inc: Option<f64>) -> Vec<String> {
    let energy = |m: Model| rows.iter().find(|r| r.model == m && r.exact_ok()).and_then(|r| r.energy);
    let mut pairs = vec![(Model::Vdd, Model::Discrete)];
    if top_mode.is_some_and(|t| s_max >= t) {
        pairs.push((Model::Continuous, Model::Vdd));
        pairs.push((Model::Continuous, Model::Discrete));
    }
    if top_inc.is_some_and(|t| s_max >= t) {
        pairs.push((Model::Continuous, Model::Incremental));
    }
    pairs
        .into_iter()
        .filter_map(|(lo, hi)| {
            let (a, b) = (energy(lo)?, energy(hi)?);
            (a > b * (1.0 + 1e-9)).then(|| format!("{} energy {a} exceeds {} energy {b}", report::name(lo), report::name(hi)))
        })
        .collect()
}

fn approx(path: &Path, args: &ModelArgs, k: u32, pretty: bool) -> anyhow::Result<Outcome> {
    let graph = load(path, args.deadline)?;
    let model = match args.model {
        Some(m) => m,
        None if args.modes.is_some() => Model::Discrete,
        None => Model::Incremental,
    };
    let result = match model {
        Model::Discrete => approx_discrete(&graph, &DiscreteModel::new(modes(args)?)?, k)?,
        Model::Incremental => approx_incremental(&graph, &incremental(args)?, k)?,
        _ => bail!(Error::InvalidInput("approx runs the discrete or incremental model".into())),
    };
    Ok(Outcome::ok(report::approximation(&graph, model, k, &result, pretty)))
}

/// Writes the instance to `out` (or stdout) and the bounds to stdout.
fn gen2p(values: &[u64], out: Option<&Path>, pretty: bool) -> u8 {
    let p = match gen_2partition(values) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return core_exit_code(&e);
        }
    };
    let instance = Instance::from_graph(&p.graph);
    let summary = json!({
        "values": values,
        "modes": p.model.modes(),
        "deadline": *p.deadline.numer() as f64 / *p.deadline.denom() as f64,
        "deadline_exact": p.deadline.to_string(),
        "energy_bound": p.energy_bound_f64(),
        "energy_bound_exact": p.energy_bound.to_string(),
        "has_equal_partition": has_equal_partition(values),
    });
    let result = match out {
        Some(path) => fs::write(path, instance.to_json() + "\n")
            .with_context(|| format!("writing {}", path.display()))
            .map(|()| report::summary(&summary, pretty)),
        None => {
            let mut all = summary.clone();
            all["instance"] = serde_json::to_value(&instance).expect("instances always serialize");
            Ok(report::summary(&all, pretty))
        }
    };
    match result {
        Ok(body) => {
            print!("{body}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_INPUT
        }
    }
}

fn power(path: &Path, schedule: Option<&Path>, args: &ModelArgs) -> anyhow::Result<Outcome> {
    let graph = load(path, args.deadline)?;
    let runs = match schedule {
        Some(s) => {
            let text = fs::read_to_string(s).with_context(|| format!("reading {}", s.display()))?;
            let parsed = parse_schedule(&text, &graph).with_context(|| s.display().to_string())?;
            let evaluated = evaluate_schedule(&graph, &parsed.profiles)?;
            if parsed.starts.iter().all(Option::is_some) {
                evaluated
                    .runs
                    .into_iter()
                    .zip(&parsed.starts)
                    .map(|(r, s)| TaskRun {
                        start: s.expect("all starts present"),
                        completion: s.expect("all starts present") + r.duration(),
                        profile: r.profile,
                    })
                    .collect()
            } else {
                evaluated.runs
            }
        }
        None => solved(&graph, args)?.runs,
    };
    Ok(Outcome::ok(power_profile(&graph, &runs).to_csv()))
}

fn solved(graph: &ExecutionGraph, args: &ModelArgs) -> anyhow::Result<SolveReport> {
    Ok(match args.model.unwrap_or(Model::Continuous) {
        Model::Continuous => solve_continuous(graph, args.smax.unwrap_or(f64::INFINITY), dispatch(args))?.1,
        Model::Vdd => solve_vdd(graph, &VddModel::new(modes(args)?)?)?.1,
        Model::Discrete => solve_exact_with_budget(graph, &DiscreteModel::new(modes(args)?)?, budget(args))?.report(graph)?,
        Model::Incremental => solve_exact_with_budget(graph, &incremental(args)?, budget(args))?.report(graph)?,
    })
}

fn generate(kind: Kind, n: usize, seed: u64, processors: usize, edge_prob: f64, slack: f64) -> anyhow::Result<Outcome> {
    if !(slack > 0.0 && slack.is_finite()) {
        bail!(Error::InvalidInput(format!("--slack must be positive, got {slack}")));
    }
    if !(0.0..=1.0).contains(&edge_prob) {
        bail!(Error::InvalidInput(format!("--edge-prob must lie in [0, 1], got {edge_prob}")));
    }
    let min = if kind == Kind::Spg { 2 } else { 1 };
    if n < min {
        bail!(Error::InvalidInput(format!("a {kind:?} instance needs at least {min} tasks").to_lowercase()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut instance = match kind {
        Kind::Dag => random_instance(&mut rng, n, processors, edge_prob),
        Kind::Tree => Instance::from_graph(&random_tree(&mut rng, n).to_graph(1.0)?),
        Kind::Spg => Instance::from_graph(&random_spg(&mut rng, n).to_graph(1.0)?),
    };
    instance.deadline = instance.to_graph()?.makespan_at(1.0) * slack;
    Ok(Outcome::ok(instance.to_json() + "\n"))
}
