//! Route reconstruction from a solved bitstring or integer assignment.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::Result;
use crate::instance::{MissionInstance, NodeKind};
use crate::milp::{start_node_id, DroneRoute, RouteSet, ValidationReport, Violation};
use crate::qubo::Qubo;

/// Either reconstructed routes with their validation report, or a structural
/// failure: the selected arcs do not form one start-to-end path per drone.
#[derive(Debug, Clone)]
pub enum DecodeOutcome {
    Routes {
        routes: RouteSet,
        report: ValidationReport,
    },
    Malformed {
        problems: Vec<Violation>,
    },
}

impl DecodeOutcome {
    pub fn valid_routes(&self) -> Option<&RouteSet> {
        match self {
            DecodeOutcome::Routes { routes, report } if report.is_valid() => Some(routes),
            _ => None,
        }
    }

    pub fn problems(&self) -> Vec<Violation> {
        match self {
            DecodeOutcome::Routes { report, .. } => report.violations.clone(),
            DecodeOutcome::Malformed { problems } => problems.clone(),
        }
    }
}

/// Decodes the bitstring through the QUBO's variable map and walks the
/// selected arcs from each start node.
pub fn decode_routes(instance: &MissionInstance, qubo: &Qubo, bits: &[u8]) -> Result<DecodeOutcome> {
    let (assignment, _) = qubo.decode(bits)?;
    Ok(routes_from_assignment(instance, &assignment))
}

/// Walks `e.{a}.{b} = 1` arcs from each drone's start node. Node ids cannot
/// contain `.`, so the variable name splits unambiguously.
pub fn routes_from_assignment(
    instance: &MissionInstance,
    assignment: &BTreeMap<String, i64>,
) -> DecodeOutcome {
    let mut problems: Vec<Violation> = Vec::new();
    let mut problem = |tag: &str, message: String| {
        problems.push(Violation {
            tag: tag.to_string(),
            message,
        });
    };

    let mut out: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    let mut unused: BTreeSet<(&str, &str)> = BTreeSet::new();
    for (name, &v) in assignment {
        if v != 1 {
            continue;
        }
        let mut parts = name.split('.');
        if parts.next() != Some("e") {
            continue;
        }
        let (Some(from), Some(to), None) = (parts.next(), parts.next(), parts.next()) else {
            continue;
        };
        out.entry(from).or_default().push(to);
        unused.insert((from, to));
    }

    let mut sequences: Vec<(usize, Vec<String>)> = Vec::new();
    for di in 0..instance.drones.len() {
        let Some(start) = start_node_id(instance, di) else {
            problem("structure", format!("drone {di} has no start node"));
            continue;
        };
        let mut seq = vec![start.to_string()];
        let mut cur = start;
        loop {
            let node = instance.node(cur);
            if node.map_or(false, |n| n.has_kind(NodeKind::End)) {
                break;
            }
            let nexts = out.get(cur).map_or(&[][..], |v| &v[..]);
            match nexts {
                [] => {
                    problem("structure", format!("drone {di} route dead-ends at {cur}"));
                    break;
                }
                [next] => {
                    unused.remove(&(cur, *next));
                    seq.push(next.to_string());
                    cur = next;
                }
                many => {
                    problem(
                        "structure",
                        format!("node {cur} has {} outgoing arcs", many.len()),
                    );
                    break;
                }
            }
            if seq.len() > instance.nodes.len() {
                problem("structure", format!("drone {di} route revisits a node"));
                break;
            }
        }
        sequences.push((di, seq));
    }
    for (from, to) in unused {
        problem(
            "structure",
            format!("arc ({from}, {to}) forms a cycle unreachable from any start"),
        );
    }
    if !problems.is_empty() {
        return DecodeOutcome::Malformed { problems };
    }

    let routes: Vec<DroneRoute> = sequences
        .into_iter()
        .map(|(di, nodes)| {
            let lookup = |prefix: &str, id: &str, default: i64| {
                assignment
                    .get(&format!("{prefix}.{id}"))
                    .copied()
                    .unwrap_or(default)
            };
            let b_default = instance.drones.get(di).map_or(0, |d| d.b_max);
            let arrival = nodes.iter().map(|id| lookup("t", id, 0)).collect();
            let battery = nodes.iter().map(|id| lookup("B", id, b_default)).collect();
            let quantity = if nodes.iter().all(|id| assignment.contains_key(&format!("Q.{id}"))) {
                nodes.iter().map(|id| lookup("Q", id, 0)).collect()
            } else {
                vec![]
            };
            DroneRoute {
                drone: di,
                nodes,
                arrival,
                battery,
                quantity,
            }
        })
        .collect();
    let makespan = routes
        .iter()
        .filter_map(|r| r.arrival.last())
        .max()
        .copied()
        .unwrap_or(0);
    let routes = RouteSet { routes, makespan };
    let report = crate::milp::validate_routes(instance, &routes);
    DecodeOutcome::Routes { routes, report }
}

/// Clamps that pin a route set's structure into a model: every arc binary
/// and visit binary fixed to its decoded value. Time, battery, resource and
/// ID variables stay free.
pub fn structural_fixing(
    model: &crate::milp::MilpModel,
    routes: &RouteSet,
) -> BTreeMap<String, (i64, i64)> {
    let mut used_arcs: BTreeSet<(String, String)> = BTreeSet::new();
    let mut visited: BTreeSet<&str> = BTreeSet::new();
    for r in &routes.routes {
        for w in r.nodes.windows(2) {
            used_arcs.insert((w[0].clone(), w[1].clone()));
        }
        for n in &r.nodes {
            visited.insert(n);
        }
    }
    let mut fixes = BTreeMap::new();
    for v in &model.variables {
        let mut parts = v.name.split('.');
        match parts.next() {
            Some("e") => {
                let (Some(from), Some(to)) = (parts.next(), parts.next()) else {
                    continue;
                };
                let on = used_arcs.contains(&(from.to_string(), to.to_string()));
                fixes.insert(v.name.clone(), (on as i64, on as i64));
            }
            Some("x") => {
                let Some(id) = parts.next() else { continue };
                let on = visited.contains(id);
                fixes.insert(v.name.clone(), (on as i64, on as i64));
            }
            _ => {}
        }
    }
    fixes
}
