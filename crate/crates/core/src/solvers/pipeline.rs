//! Iterative decomposition: solve the joint model, refine each drone alone,
//! fix the slowest drone, repeat on the rest, then re-schedule all routes
//! together with crash avoidance enabled.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::instance::{MissionInstance, NodeKind};
use crate::milp::{build_milp, DroneRoute, FormulationOptions, RouteSet, ValidationReport};
use crate::qubo::{auto_lambda, milp_to_qubo, PenaltyWeights, Qubo};
use crate::solvers::{
    exact_milp_min, routes_from_assignment, simulated_anneal, structural_fixing, AnnealSchedule,
    DecodeOutcome,
};

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub seed: u64,
    /// Total sweep budget, split top-heavy (1/2, 1/4, ...) across outer
    /// iterations; each stage keeps a small floor.
    pub sweeps: u32,
    pub restarts: u32,
    /// Penalty weights for every compiled model; `None` means auto per model.
    pub lambda: Option<PenaltyWeights>,
}

impl PipelineConfig {
    pub fn new(seed: u64) -> Self {
        PipelineConfig {
            seed,
            sweeps: 2000,
            restarts: 40,
            lambda: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StageReport {
    pub stage: usize,
    pub description: String,
    pub energy: f64,
    pub sweeps: u32,
}

#[derive(Debug, Clone)]
pub struct PipelineResult {
    pub routes: RouteSet,
    pub report: ValidationReport,
    pub stages: Vec<StageReport>,
}

const SWEEP_FLOOR: u32 = 32;

struct Runner<'a> {
    cfg: &'a PipelineConfig,
    stages: Vec<StageReport>,
    calls: u64,
}

impl<'a> Runner<'a> {
    fn compile(&self, model: &crate::milp::MilpModel) -> Result<Qubo> {
        let lambda = self
            .cfg
            .lambda
            .clone()
            .unwrap_or_else(|| auto_lambda(model));
        milp_to_qubo(model, &lambda)
    }

    fn solve(
        &mut self,
        stage: usize,
        description: &str,
        instance: &MissionInstance,
        model: &crate::milp::MilpModel,
        sweeps: u32,
    ) -> Result<DecodeOutcome> {
        let qubo = self.compile(model)?;
        self.calls += 1;
        let sched = AnnealSchedule {
            sweeps: sweeps.max(SWEEP_FLOOR),
            restarts: self.cfg.restarts.max(1),
            seed: self.cfg.seed.wrapping_add(self.calls.wrapping_mul(0x9E37_79B9)),
            ..AnnealSchedule::new(0)
        };
        let result = simulated_anneal(&qubo, &sched)?;
        self.stages.push(StageReport {
            stage,
            description: description.to_string(),
            energy: result.best_energy,
            sweeps: sched.sweeps,
        });
        crate::solvers::decode_routes(instance, &qubo, &result.best_bits)
    }
}

/// Keeps only the listed drones (preserving order) and drops banned nodes
/// and everything referencing them. Owner indices are remapped.
fn sub_instance(
    full: &MissionInstance,
    keep: &[usize],
    banned: &BTreeSet<String>,
) -> MissionInstance {
    let remap: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(i, &d)| (d, i)).collect();
    let nodes: Vec<_> = full
        .nodes
        .iter()
        .filter(|n| !banned.contains(&n.id))
        .filter(|n| n.owner.map_or(true, |d| remap.contains_key(&d)))
        .map(|n| {
            let mut n = n.clone();
            n.owner = n.owner.map(|d| remap[&d]);
            n
        })
        .collect();
    let alive: BTreeSet<&str> = nodes.iter().map(|n| n.id.as_str()).collect();
    let edges = full
        .edges
        .iter()
        .filter(|((a, b), _)| alive.contains(a.as_str()) && alive.contains(b.as_str()))
        .map(|(k, v)| (k.clone(), *v))
        .collect();
    let crash_pairs = full
        .crash_pairs
        .iter()
        .filter(|(e1, e2)| {
            [&e1.0, &e1.1, &e2.0, &e2.1]
                .iter()
                .all(|id| alive.contains(id.as_str()))
        })
        .cloned()
        .collect();
    MissionInstance {
        nodes,
        edges,
        drones: keep.iter().map(|&d| full.drones[d].clone()).collect(),
        crash_pairs,
        t_max: full.t_max,
    }
}

/// Branching budget for one structure-fixed scheduling solve.
const POLISH_NODE_CAP: u64 = 500_000;

/// Exact minimum-makespan schedule for a fixed route structure, or `None`
/// when the structure admits no feasible schedule (or uses a missing arc).
fn exact_schedule(
    instance: &MissionInstance,
    opts: &FormulationOptions,
    structure: &[Vec<String>],
) -> Option<RouteSet> {
    let model = build_milp(instance, opts).ok()?;
    for nodes in structure {
        for w in nodes.windows(2) {
            model.var(&format!("e.{}.{}", w[0], w[1]))?;
        }
    }
    let skeleton = RouteSet {
        routes: structure
            .iter()
            .enumerate()
            .map(|(d, nodes)| DroneRoute {
                drone: d,
                nodes: nodes.clone(),
                arrival: vec![],
                battery: vec![],
                quantity: vec![],
            })
            .collect(),
        makespan: 0,
    };
    let fixes = structural_fixing(&model, &skeleton);
    let fixed = model.fix_partial(&fixes).ok()?;
    let (solution, _) = exact_milp_min(&fixed, POLISH_NODE_CAP).ok()??;
    let assignment: BTreeMap<String, i64> = fixed
        .variables
        .iter()
        .zip(&solution)
        .map(|(v, &x)| (v.name.clone(), x))
        .collect();
    routes_from_assignment(instance, &assignment)
        .valid_routes()
        .cloned()
}

/// Budget of structure-fixed scheduling solves one polish call may spend.
const POLISH_EVAL_CAP: u32 = 800;

fn spare_recharges(instance: &MissionInstance, structure: &[Vec<String>]) -> Vec<(usize, String)> {
    let used: BTreeSet<&String> = structure.iter().flatten().collect();
    instance
        .nodes
        .iter()
        .filter(|n| n.has_kind(NodeKind::Recharge) && !used.contains(&n.id))
        .filter_map(|n| n.owner.map(|d| (d, n.id.clone())))
        .filter(|(d, _)| *d < structure.len())
        .collect()
}

/// Best feasible schedule reachable from `structure` by inserting unused
/// recharge copies: exact scheduling when one exists, otherwise a bounded
/// recursive search over single insertions.
fn with_recharges(
    instance: &MissionInstance,
    opts: &FormulationOptions,
    structure: Vec<Vec<String>>,
    budget: &mut u32,
) -> Option<(Vec<Vec<String>>, RouteSet)> {
    if *budget == 0 {
        return None;
    }
    *budget -= 1;
    match exact_schedule(instance, opts, &structure) {
        Some(rs) => {
            // feasible: keep inserting while the makespan strictly improves
            let mut best = (structure, rs);
            loop {
                let mut improvement: Option<(Vec<Vec<String>>, RouteSet)> = None;
                for (d, id) in spare_recharges(instance, &best.0) {
                    for pos in 1..best.0[d].len().max(1) {
                        if *budget == 0 {
                            break;
                        }
                        *budget -= 1;
                        let mut cand = best.0.clone();
                        cand[d].insert(pos, id.clone());
                        let Some(rs) = exact_schedule(instance, opts, &cand) else {
                            continue;
                        };
                        if rs.makespan < best.1.makespan
                            && improvement.as_ref().map_or(true, |(_, c)| rs.makespan < c.makespan)
                        {
                            improvement = Some((cand, rs));
                        }
                    }
                }
                match improvement {
                    Some(better) => best = better,
                    None => return Some(best),
                }
            }
        }
        None => {
            let mut best: Option<(Vec<Vec<String>>, RouteSet)> = None;
            for (d, id) in spare_recharges(instance, &structure) {
                for pos in 1..structure[d].len().max(1) {
                    let mut cand = structure.clone();
                    cand[d].insert(pos, id.clone());
                    let found = with_recharges(instance, opts, cand, budget);
                    if let Some(found) = found {
                        if best.as_ref().map_or(true, |(_, b)| found.1.makespan < b.makespan) {
                            best = Some(found);
                        }
                    }
                }
            }
            best
        }
    }
}

/// All ways to insert the missing nodes into the route structure, capped.
fn completions(
    structure: &[Vec<String>],
    missing: &[String],
    out: &mut Vec<Vec<Vec<String>>>,
    cap: usize,
) {
    let Some((first, rest)) = missing.split_first() else {
        if out.len() < cap {
            out.push(structure.to_vec());
        }
        return;
    };
    for d in 0..structure.len() {
        for pos in 1..structure[d].len().max(1) {
            if out.len() >= cap {
                return;
            }
            let mut cand = structure.to_vec();
            cand[d].insert(pos, first.clone());
            completions(&cand, rest, out, cap);
        }
    }
}

/// Repairs and exactly re-schedules a sampled route structure: completes
/// missing objective coverage by bounded insertion enumeration, then adds
/// recharge stops where the schedule needs them. Recovers plans the
/// annealer leaves a stop or an objective short of feasible.
fn polish(
    instance: &MissionInstance,
    opts: &FormulationOptions,
    base: &RouteSet,
) -> Option<RouteSet> {
    let structure: Vec<Vec<String>> = base.routes.iter().map(|r| r.nodes.clone()).collect();
    let visited: BTreeSet<&String> = structure.iter().flatten().collect();
    let missing: Vec<String> = instance
        .nodes
        .iter()
        .filter(|n| {
            n.has_kind(NodeKind::Objective)
                && !opts.relaxed_objectives.contains(&n.id)
                && !visited.contains(&n.id)
        })
        .map(|n| n.id.clone())
        .collect();
    let mut candidates = Vec::new();
    completions(&structure, &missing, &mut candidates, 200);
    let mut budget = POLISH_EVAL_CAP;
    let mut best: Option<RouteSet> = None;
    for cand in candidates {
        if let Some((_, rs)) = with_recharges(instance, opts, cand, &mut budget) {
            if best.as_ref().map_or(true, |b| rs.makespan < b.makespan) {
                best = Some(rs);
            }
        }
    }
    best
}

/// One start-to-end route per drone with nothing in between; the repair
/// fallback when a sample has no usable arc structure at all.
fn skeleton_routes(instance: &MissionInstance) -> RouteSet {
    let routes = (0..instance.drones.len())
        .map(|d| {
            let nodes = [
                crate::milp::start_node_id(instance, d),
                crate::milp::end_node_id(instance, d),
            ]
            .into_iter()
            .flatten()
            .map(str::to_string)
            .collect();
            DroneRoute {
                drone: d,
                nodes,
                arrival: vec![],
                battery: vec![],
                quantity: vec![],
            }
        })
        .collect();
    RouteSet {
        routes,
        makespan: 0,
    }
}

fn route_end(route: &crate::milp::DroneRoute) -> i64 {
    route.arrival.last().copied().unwrap_or(0)
}

fn visited_objectives(instance: &MissionInstance, route: &crate::milp::DroneRoute) -> BTreeSet<String> {
    route
        .nodes
        .iter()
        .filter(|id| {
            instance
                .node(id)
                .map_or(false, |n| n.has_kind(NodeKind::Objective))
        })
        .cloned()
        .collect()
}

/// Runs the five-stage decomposition on a rewritten instance. Crash
/// constraints are held back until the final joint scheduling pass.
pub fn solve_pipeline(instance: &MissionInstance, cfg: &PipelineConfig) -> Result<PipelineResult> {
    if instance.drones.is_empty() {
        return Err(Error::Build("pipeline needs at least one drone".into()));
    }
    let mut runner = Runner {
        cfg,
        stages: Vec::new(),
        calls: 0,
    };
    let no_crash = FormulationOptions {
        include_crash: false,
        ..FormulationOptions::default()
    };

    let mut remaining: Vec<usize> = (0..instance.drones.len()).collect();
    let mut fixed: BTreeMap<usize, crate::milp::DroneRoute> = BTreeMap::new();
    // nodes consumed by fixed routes (their owned copies plus everything
    // they visit) are off-limits to the rest of the fleet
    let mut banned: BTreeSet<String> = BTreeSet::new();
    let mut iteration = 0u32;

    while !remaining.is_empty() {
        let share = (cfg.sweeps >> (iteration + 1)).max(SWEEP_FLOOR);
        let joint = sub_instance(instance, &remaining, &banned);

        // stage 1: joint model over the remaining drones and objectives
        let model = build_milp(&joint, &no_crash)?;
        let outcome = runner.solve(
            1,
            &format!("joint solve, {} drones", remaining.len()),
            &joint,
            &model,
            share,
        )?;
        let sampled = match &outcome {
            DecodeOutcome::Routes { routes, .. } => routes.clone(),
            DecodeOutcome::Malformed { .. } => skeleton_routes(&joint),
        };
        // if the sampled visit order is unschedulable, retry from a bare
        // start-to-end skeleton so repair may reorder the objectives
        let incumbent = polish(&joint, &no_crash, &sampled)
            .or_else(|| polish(&joint, &no_crash, &skeleton_routes(&joint)))
            .ok_or_else(|| Error::Infeasible {
                stage: 1,
                reason: format!(
                    "no feasible joint solution for {} drones: {:?}",
                    remaining.len(),
                    outcome.problems().first()
                ),
            })?;

        // stage 2: per-drone refinement over that drone's objective set
        let mut refined: Vec<crate::milp::DroneRoute> = incumbent.routes.clone();
        for (local, route) in refined.iter_mut().enumerate() {
            let old = remaining[local];
            let mine = visited_objectives(&joint, route);
            let mut off_limits = banned.clone();
            for (other_local, other) in incumbent.routes.iter().enumerate() {
                if other_local != local {
                    off_limits.extend(other.nodes.iter().cloned());
                }
            }
            for n in joint.nodes.iter().filter(|n| n.has_kind(NodeKind::Objective)) {
                if !mine.contains(&n.id) {
                    off_limits.insert(n.id.clone());
                }
            }
            let single = sub_instance(instance, &[old], &off_limits);
            let Ok(model) = build_milp(&single, &no_crash) else {
                continue; // reduced graph unusable, keep the incumbent route
            };
            let outcome = runner.solve(
                2,
                &format!("refine drone {old}"),
                &single,
                &model,
                (share / (2 * remaining.len() as u32)).max(SWEEP_FLOOR),
            )?;
            let sampled = match &outcome {
                DecodeOutcome::Routes { routes, .. } => routes.clone(),
                DecodeOutcome::Malformed { .. } => skeleton_routes(&single),
            };
            if let Some(better) = polish(&single, &no_crash, &sampled) {
                let candidate = &better.routes[0];
                if route_end(candidate) <= route_end(route)
                    && visited_objectives(&single, candidate) == mine
                {
                    let mut candidate = candidate.clone();
                    candidate.drone = old;
                    *route = candidate;
                }
            }
        }
        for (local, route) in refined.iter_mut().enumerate() {
            route.drone = remaining[local];
        }

        // stage 3: fix the slowest drone (ties break to the lowest index)
        let slowest = refined
            .iter()
            .enumerate()
            .max_by_key(|(i, r)| (route_end(r), std::cmp::Reverse(*i)))
            .map(|(i, _)| i)
            .unwrap();
        let route = refined.remove(slowest);
        banned.extend(route.nodes.iter().cloned());
        fixed.insert(route.drone, route);
        remaining.remove(slowest);
        iteration += 1; // stage 4: loop
    }

    let mut routes: Vec<crate::milp::DroneRoute> = fixed.into_values().collect();
    routes.sort_by_key(|r| r.drone);
    let makespan = routes.iter().map(route_end).max().unwrap_or(0);
    let mut best = RouteSet { routes, makespan };

    // stage 5: joint re-scheduling with crash constraints, structure fixed
    if !instance.crash_pairs.is_empty() {
        let with_crash = FormulationOptions::default();
        let structure: Vec<Vec<String>> = best.routes.iter().map(|r| r.nodes.clone()).collect();
        let rescheduled = match exact_schedule(instance, &with_crash, &structure) {
            Some(rs) => {
                runner.stages.push(StageReport {
                    stage: 5,
                    description: "joint re-scheduling with crash avoidance (exact)".into(),
                    energy: rs.makespan as f64,
                    sweeps: 0,
                });
                Some(rs)
            }
            None => {
                // exact pass failed; anneal the structure-fixed model instead
                let model = build_milp(instance, &with_crash)?;
                let fixes = structural_fixing(&model, &best);
                let model = model.fix_partial(&fixes)?;
                let outcome = runner.solve(
                    5,
                    "joint re-scheduling with crash avoidance",
                    instance,
                    &model,
                    (cfg.sweeps / 2).max(SWEEP_FLOOR),
                )?;
                outcome.valid_routes().cloned()
            }
        };
        best = rescheduled.ok_or_else(|| Error::Infeasible {
            stage: 5,
            reason: "crash-aware re-scheduling of the fixed routes failed".into(),
        })?;
    }

    let report = crate::milp::validate_routes(instance, &best);
    Ok(PipelineResult {
        routes: best,
        report,
        stages: runner.stages,
    })
}
