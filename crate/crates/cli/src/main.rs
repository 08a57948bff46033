//! Command-line front end: solve missions, run the quantum TSP heuristics,
//! export models, and validate instances or route sets.
//!
//! Exit codes: 0 success, 1 infeasible instance or failed optimization,
//! 2 usage or I/O errors. Every artifact embeds the seed and the full run
//! configuration; re-running with the same configuration reproduces JSON and
//! CSV artifacts byte for byte.

mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use serde_json::{json, Value};

use swarmplan_core::instance::{load_instance, load_tsp, MissionInstance, TspInstance};
use swarmplan_core::milp::{
    build_milp, rewrite_bases, validate_routes, write_lp, FormulationOptions, RouteSet,
};
use swarmplan_core::quantum::{
    canonical_rotation, minimal_sorting_network, perm, run_qswap, sample_routes, vqe_apply,
    vqe_optimize, ArTracePoint, QswapConfig, Strategy, TspHamiltonian, VqeConfig,
};
use swarmplan_core::qubo::{auto_lambda, milp_to_qubo, write_qubo, PenaltyWeights};
use swarmplan_core::solvers::{solve_pipeline, PipelineConfig};
use swarmplan_core::Error;

#[derive(Parser)]
#[command(
    name = "swarmplan",
    version,
    about = "Multi-drone mission planning: MILP/QUBO compilation, annealing, and quantum TSP heuristics"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve a mission instance with the decomposition pipeline
    Solve(SolveArgs),
    /// Run the Q-SWAP heuristic on a TSP instance
    Qswap(QswapArgs),
    /// Run the sorting-network VQE on a TSP instance
    Vqe(VqeArgs),
    /// Export the MILP (LP text) and compiled QUBO for a mission instance
    Export(ExportArgs),
    /// Validate a mission instance, optionally with a route set against it
    Validate(ValidateArgs),
}

#[derive(Args)]
struct Common {
    /// Input instance file (mission JSON, or TSP coords/matrix JSON)
    #[arg(long)]
    instance: PathBuf,
    /// Output directory for artifacts
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// RNG seed; drawn from entropy and embedded in artifacts when omitted
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: Common,
    /// Time budget; mapped to the total annealing sweep budget
    #[arg(long)]
    budget_ms: Option<u64>,
    /// Annealing restarts per stage
    #[arg(long, default_value_t = 300)]
    restarts: u32,
    /// Penalty weight override, `family=value`; `default=value` sets the base
    #[arg(long, value_parser = parse_lambda)]
    lambda: Vec<(String, f64)>,
    /// Recharge copies cloned per base during graph rewriting
    #[arg(long, default_value_t = 1)]
    recharge_copies: usize,
}

#[derive(Args)]
struct QswapArgs {
    #[command(flatten)]
    common: Common,
    /// Layers to apply
    #[arg(long, default_value_t = 40)]
    steps: usize,
    /// Swap-pair selection strategy
    #[arg(long, value_enum, default_value_t = StrategyArg::Mutations)]
    strategy: StrategyArg,
    /// Measurement shots for the tour sample
    #[arg(long, default_value_t = 100)]
    shots: usize,
}

#[derive(Args)]
struct VqeArgs {
    #[command(flatten)]
    common: Common,
    /// Objective evaluation budget per restart
    #[arg(long, default_value_t = 2000)]
    steps: usize,
    /// Independent optimizer restarts
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    /// Measurement shots for the tour sample
    #[arg(long, default_value_t = 100)]
    shots: usize,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_parser = parse_lambda)]
    lambda: Vec<(String, f64)>,
    #[arg(long, default_value_t = 1)]
    recharge_copies: usize,
}

#[derive(Args)]
struct ValidateArgs {
    /// Mission instance file to check
    #[arg(long)]
    instance: PathBuf,
    /// Optional route-set JSON to validate against the instance
    #[arg(long)]
    routes: Option<PathBuf>,
    /// Recharge copies used when the routes were produced
    #[arg(long, default_value_t = 1)]
    recharge_copies: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    /// Random single transposition per layer
    #[value(name = "1swap")]
    OneSwap,
    /// Alternating improvement of both swap permutations
    Both,
    /// Hill climb over involution mutations
    Mutations,
}

impl StrategyArg {
    fn to_strategy(self) -> Strategy {
        match self {
            StrategyArg::OneSwap => Strategy::Random1Swap { samples: 1 },
            StrategyArg::Both => Strategy::RandomBoth { rounds: 2 },
            StrategyArg::Mutations => Strategy::Mutations,
        }
    }

    fn name(self) -> &'static str {
        self.to_strategy().name()
    }
}

fn parse_lambda(s: &str) -> Result<(String, f64), String> {
    let (family, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected family=value, got `{s}`"))?;
    let value: f64 = value
        .parse()
        .map_err(|_| format!("penalty weight `{value}` is not a number"))?;
    if !(value > 0.0) {
        return Err("penalty weight must be positive".into());
    }
    Ok((family.to_string(), value))
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn solve(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        // bad inputs are usage errors; everything downstream of a loaded
        // instance is a solve failure
        let code = match &e {
            Error::Io(_) | Error::Parse(_) | Error::Validation(_) => 2,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Solve(a) => cmd_solve(a),
        Cmd::Qswap(a) => cmd_qswap(a),
        Cmd::Vqe(a) => cmd_vqe(a),
        Cmd::Export(a) => cmd_export(a),
        Cmd::Validate(a) => cmd_validate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, Failure> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Failure::usage(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn write_json(dir: &Path, name: &str, value: &Value) -> Result<PathBuf, Failure> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    write_artifact(dir, name, &text)
}

fn pick_seed(explicit: Option<u64>) -> u64 {
    explicit.unwrap_or_else(rand::random)
}

fn lambda_value(overrides: &[(String, f64)]) -> Value {
    if overrides.is_empty() {
        Value::Null
    } else {
        Value::Object(
            overrides
                .iter()
                .map(|(k, v)| (k.clone(), json!(v)))
                .collect(),
        )
    }
}

/// Merges user overrides onto the automatic weights of the full joint model.
/// `default=value` replaces the base weight; other families become overrides.
fn merged_lambda(
    rewritten: &MissionInstance,
    overrides: &[(String, f64)],
) -> Result<Option<PenaltyWeights>, Failure> {
    if overrides.is_empty() {
        return Ok(None);
    }
    let model = build_milp(rewritten, &FormulationOptions::default())?;
    let mut weights = auto_lambda(&model);
    for (family, value) in overrides {
        if family == "default" {
            weights.default = *value;
        } else {
            weights.overrides.insert(family.clone(), *value);
        }
    }
    Ok(Some(weights))
}

fn cmd_solve(a: SolveArgs) -> Result<(), Failure> {
    let instance = load_instance(&a.common.instance)?;
    let rewritten = rewrite_bases(&instance, a.recharge_copies)?;
    let seed = pick_seed(a.common.seed);
    // budget maps to sweeps at roughly one sweep per millisecond
    let sweeps = a
        .budget_ms
        .map(|ms| ms.clamp(64, 200_000) as u32)
        .unwrap_or(2000);
    let config = json!({
        "command": "solve",
        "instance": a.common.instance.display().to_string(),
        "seed": seed,
        "sweeps": sweeps,
        "restarts": a.restarts,
        "recharge_copies": a.recharge_copies,
        "lambda": lambda_value(&a.lambda),
    });
    let cfg = PipelineConfig {
        seed,
        sweeps,
        restarts: a.restarts,
        lambda: merged_lambda(&rewritten, &a.lambda)?,
    };
    let result = solve_pipeline(&rewritten, &cfg)?;
    let stages: Vec<Value> = result
        .stages
        .iter()
        .map(|s| {
            json!({
                "stage": s.stage,
                "description": s.description,
                "energy": s.energy,
                "sweeps": s.sweeps,
            })
        })
        .collect();
    let dir = &a.common.out;
    write_json(
        dir,
        "routes.json",
        &json!({
            "config": config,
            "makespan": result.routes.makespan,
            "routes": result.routes,
            "stages": stages,
        }),
    )?;
    write_json(
        dir,
        "validation.json",
        &json!({
            "config": config,
            "valid": result.report.is_valid(),
            "violations": result.report.violations,
        }),
    )?;
    write_artifact(dir, "routes.svg", &svg::route_plot(&rewritten, &result.routes))?;
    if !result.report.is_valid() {
        return Err(Failure::solve(format!(
            "solution violates {} constraint(s); see {}",
            result.report.violations.len(),
            dir.join("validation.json").display()
        )));
    }
    println!(
        "solved: makespan {}, {} drone(s), seed {seed}, artifacts in {}",
        result.routes.makespan,
        result.routes.routes.len(),
        dir.display()
    );
    Ok(())
}

fn load_tsp_checked(path: &Path) -> Result<TspInstance, Failure> {
    let tsp = load_tsp(path)?;
    if tsp.n < 2 {
        return Err(Failure::usage(format!(
            "TSP instance needs at least 2 nodes, got {}",
            tsp.n
        )));
    }
    Ok(tsp)
}

fn trace_csv(config: &Value, trace: &[ArTracePoint]) -> String {
    let mut out = format!("# config {config}\n{}\n", ArTracePoint::csv_header());
    for p in trace {
        out.push_str(&p.csv_line());
        out.push('\n');
    }
    out
}

/// Tally of sampled tours: unique tours with shot counts, cheapest first.
fn sample_tally(samples: &[(Vec<u8>, f64)]) -> Vec<Value> {
    let mut tally: Vec<(Vec<u8>, f64, usize)> = Vec::new();
    for (tour, cost) in samples {
        match tally.iter_mut().find(|(t, _, _)| t == tour) {
            Some((_, _, count)) => *count += 1,
            None => tally.push((tour.clone(), *cost, 1)),
        }
    }
    tally
        .iter()
        .map(|(tour, cost, count)| json!({ "tour": tour, "cost": cost, "shots": count }))
        .collect()
}

fn cmd_qswap(a: QswapArgs) -> Result<(), Failure> {
    let tsp = load_tsp_checked(&a.common.instance)?;
    let seed = pick_seed(a.common.seed);
    let config = json!({
        "command": "qswap",
        "instance": a.common.instance.display().to_string(),
        "seed": seed,
        "steps": a.steps,
        "strategy": a.strategy.name(),
        "shots": a.shots,
    });
    let run = run_qswap(
        &tsp,
        &QswapConfig {
            steps: a.steps,
            delta: None,
            strategy: a.strategy.to_strategy(),
            seed,
        },
    )?;
    let h = TspHamiltonian::new(&tsp)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x5157_4150);
    let samples = sample_routes(&run.state, &h, a.shots, &mut rng);
    let best = samples.first().cloned();
    let dir = &a.common.out;
    write_artifact(dir, "ar_trace.csv", &trace_csv(&config, &run.trace))?;
    write_json(
        dir,
        "tours.json",
        &json!({
            "config": config,
            "final_ar": run.final_ar,
            "optimal_cost": h.h_min,
            "best": best.as_ref().map(|(t, c)| json!({ "tour": t, "cost": c })),
            "samples": sample_tally(&samples),
        }),
    )?;
    let curve: Vec<(f64, f64)> = run
        .trace
        .iter()
        .map(|p| (p.step as f64, p.ar))
        .collect();
    write_artifact(dir, "ar_curve.svg", &svg::curve_plot(&curve, "step", "AR"))?;
    println!(
        "qswap: {} trace point(s), final AR {:.6}, seed {seed}, artifacts in {}",
        run.trace.len(),
        run.final_ar,
        dir.display()
    );
    Ok(())
}

fn cmd_vqe(a: VqeArgs) -> Result<(), Failure> {
    let tsp = load_tsp_checked(&a.common.instance)?;
    let seed = pick_seed(a.common.seed);
    let network = minimal_sorting_network(tsp.n)?;
    let config = json!({
        "command": "vqe",
        "instance": a.common.instance.display().to_string(),
        "seed": seed,
        "steps": a.steps,
        "restarts": a.restarts,
        "shots": a.shots,
    });
    println!(
        "vqe: n={} ansatz with {} comparator angle(s)",
        tsp.n,
        network.parameter_count()
    );
    let run = vqe_optimize(
        &network,
        &tsp,
        &VqeConfig {
            restarts: a.restarts,
            max_evals: a.steps,
            seed,
            ..VqeConfig::new(seed)
        },
    )?;
    let h = TspHamiltonian::new(&tsp)?;
    let state = vqe_apply(&network, &run.best_params)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x5651_4500);
    let samples = sample_routes(&state, &h, a.shots, &mut rng);
    // most probable basis permutation of the optimized state
    let peak = state
        .amplitudes
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let tour = canonical_rotation(&perm::perm_unrank(state.n, peak));
    let dir = &a.common.out;
    write_artifact(dir, "vqe_trace.csv", &trace_csv(&config, &run.trace))?;
    write_json(
        dir,
        "vqe.json",
        &json!({
            "config": config,
            "parameter_count": network.parameter_count(),
            "best_ar": run.best_ar,
            "best_params": run.best_params,
            "optimal_cost": h.h_min,
            "best": { "tour": tour, "cost": h.route_cost[peak] },
            "samples": sample_tally(&samples),
        }),
    )?;
    let curve: Vec<(f64, f64)> = run
        .trace
        .iter()
        .map(|p| (p.step as f64, p.ar))
        .collect();
    write_artifact(dir, "vqe_curve.svg", &svg::curve_plot(&curve, "evaluation", "AR"))?;
    println!(
        "vqe: best AR {:.6} over {} evaluation(s), seed {seed}, artifacts in {}",
        run.best_ar,
        run.trace.len(),
        dir.display()
    );
    Ok(())
}

fn cmd_export(a: ExportArgs) -> Result<(), Failure> {
    let instance = load_instance(&a.common.instance)?;
    let rewritten = rewrite_bases(&instance, a.recharge_copies)?;
    let model = build_milp(&rewritten, &FormulationOptions::default())?;
    let weights = merged_lambda(&rewritten, &a.lambda)?.unwrap_or_else(|| auto_lambda(&model));
    let qubo = milp_to_qubo(&model, &weights)?;
    let seed = a.common.seed.unwrap_or(0);
    let config = json!({
        "command": "export",
        "instance": a.common.instance.display().to_string(),
        "seed": seed,
        "recharge_copies": a.recharge_copies,
        "lambda": lambda_value(&a.lambda),
    });
    let dir = &a.common.out;
    write_artifact(dir, "model.lp", &write_lp(&model))?;
    std::fs::create_dir_all(dir)
        .map_err(|e| Failure::usage(format!("cannot create {}: {e}", dir.display())))?;
    write_qubo(&qubo, dir.join("model.qubo"))?;
    write_json(
        dir,
        "export.json",
        &json!({
            "config": config,
            "variables": model.variables.len(),
            "constraints": model.constraints.len(),
            "qubo_bits": qubo.n,
            "lambda_default": weights.default,
            "files": ["model.lp", "model.qubo", "model.qubo.decode.json"],
        }),
    )?;
    println!(
        "exported: {} variable(s), {} constraint(s), {} QUBO bit(s), artifacts in {}",
        model.variables.len(),
        model.constraints.len(),
        qubo.n,
        dir.display()
    );
    Ok(())
}

fn cmd_validate(a: ValidateArgs) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&a.instance)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", a.instance.display())))?;
    let instance = match MissionInstance::from_json(&text) {
        Ok(i) => i,
        // a structurally invalid instance is the finding, not a usage error
        Err(Error::Validation(msg)) => return Err(Failure::solve(format!("invalid instance: {msg}"))),
        Err(e) => return Err(e.into()),
    };
    let config = json!({
        "command": "validate",
        "instance": a.instance.display().to_string(),
        "routes": a.routes.as_ref().map(|p| p.display().to_string()),
        "recharge_copies": a.recharge_copies,
    });
    let Some(routes_path) = &a.routes else {
        println!(
            "instance ok: {} node(s), {} edge(s), {} drone(s)",
            instance.nodes.len(),
            instance.edges.len(),
            instance.drones.len()
        );
        return Ok(());
    };
    let routes_text = std::fs::read_to_string(routes_path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", routes_path.display())))?;
    let routes: RouteSet = serde_json::from_str(&routes_text)
        .or_else(|_| {
            // accept a solve artifact wrapping the route set
            serde_json::from_str::<Value>(&routes_text)
                .map_err(Error::from)
                .and_then(|v| {
                    serde_json::from_value(v["routes"].clone()).map_err(Error::from)
                })
        })
        .map_err(Failure::from)?;
    // routes from `solve` name nodes of the rewritten graph
    let rewritten = rewrite_bases(&instance, a.recharge_copies)?;
    let report = validate_routes(&rewritten, &routes);
    write_json(
        &a.out,
        "validation.json",
        &json!({
            "config": config,
            "valid": report.is_valid(),
            "violations": report.violations,
        }),
    )?;
    if report.is_valid() {
        println!("routes ok: makespan {}", routes.makespan);
        Ok(())
    } else {
        Err(Failure::solve(format!(
            "route set violates {} constraint(s); see {}",
            report.violations.len(),
            a.out.join("validation.json").display()
        )))
    }
}
