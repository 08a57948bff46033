//! Route-set artifact and the direct constraint-family validator.

use serde::{Deserialize, Serialize};

use crate::instance::{MissionInstance, NodeKind};

/// One drone's route: node sequence with arrival times and claimed
/// battery/quantity lower-bound traces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DroneRoute {
    pub drone: usize,
    pub nodes: Vec<String>,
    /// Arrival time at each node; waiting before the next hop is the slack
    /// over the edge time.
    pub arrival: Vec<i64>,
    /// Battery lower bound on arrival at each node.
    pub battery: Vec<i64>,
    /// Resource lower bound on arrival at each node (empty when inactive).
    #[serde(default)]
    pub quantity: Vec<i64>,
}

impl DroneRoute {
    /// Waiting time spent at node `i` before hop `i -> i+1`.
    pub fn waits(&self, instance: &MissionInstance) -> Vec<i64> {
        (0..self.nodes.len().saturating_sub(1))
            .map(|i| {
                let t = instance
                    .edge(&self.nodes[i], &self.nodes[i + 1])
                    .map_or(0, |e| e.time);
                self.arrival[i + 1] - self.arrival[i] - t
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RouteSet {
    pub routes: Vec<DroneRoute>,
    pub makespan: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// Constraint-family tag, matching the MILP builder's tags.
    pub tag: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, tag: &str, message: String) {
        self.violations.push(Violation {
            tag: tag.to_string(),
            message,
        });
    }
}

/// Checks every constraint family directly on the route traces. Violations
/// are data, not errors; unvisited nodes are ignored.
pub fn validate_routes(instance: &MissionInstance, routes: &RouteSet) -> ValidationReport {
    let mut report = ValidationReport::default();
    let fleet = instance.drones.first();

    // structure: one route per drone, start to end, arcs exist
    if routes.routes.len() != instance.drones.len() {
        report.push(
            "degree",
            format!(
                "expected {} routes, got {}",
                instance.drones.len(),
                routes.routes.len()
            ),
        );
    }
    for route in &routes.routes {
        let di = route.drone;
        if route.nodes.is_empty() {
            report.push("degree", format!("drone {di} has an empty route"));
            continue;
        }
        if route.arrival.len() != route.nodes.len() || route.battery.len() != route.nodes.len() {
            report.push("degree", format!("drone {di} traces have mismatched lengths"));
            continue;
        }
        let first = instance.node(&route.nodes[0]);
        let last = instance.node(route.nodes.last().unwrap());
        match first {
            Some(n) if n.has_kind(NodeKind::Start) && n.owner == Some(di) => {}
            _ => report.push(
                "degree.start",
                format!("drone {di} does not begin at its start node"),
            ),
        }
        match last {
            Some(n) if n.has_kind(NodeKind::End) && n.owner == Some(di) => {}
            _ => report.push(
                "degree.end",
                format!("drone {di} does not finish at its end node"),
            ),
        }
        for w in route.nodes.windows(2) {
            if instance.edge(&w[0], &w[1]).is_none() {
                report.push("degree", format!("missing edge ({}, {})", w[0], w[1]));
            }
        }
    }

    // coverage: objectives visited exactly once, mandatory edges traversed,
    // no node visited twice
    let mut visit_count: std::collections::BTreeMap<&str, usize> = Default::default();
    let mut used_edges: std::collections::BTreeSet<(String, String)> = Default::default();
    for route in &routes.routes {
        for id in &route.nodes {
            *visit_count.entry(id.as_str()).or_insert(0) += 1;
        }
        for w in route.nodes.windows(2) {
            used_edges.insert(crate::instance::edge_key(&w[0], &w[1]));
        }
    }
    for n in &instance.nodes {
        let count = visit_count.get(n.id.as_str()).copied().unwrap_or(0);
        if n.has_kind(NodeKind::Objective) && count != 1 {
            report.push(
                "degree.out",
                format!("objective node {} visited {count} times", n.id),
            );
        } else if count > 1 {
            report.push(
                "consistency.out",
                format!("node {} visited {count} times", n.id),
            );
        }
    }
    for ((a, b), e) in &instance.edges {
        if e.mandatory && !used_edges.contains(&crate::instance::edge_key(a, b)) {
            report.push("degree.edge", format!("mandatory edge ({a}, {b}) not traversed"));
        }
    }

    // time arithmetic, windows, battery, quantity, capabilities
    for route in &routes.routes {
        if route.nodes.len() != route.arrival.len() {
            continue;
        }
        let di = route.drone;
        let drone = instance.drones.get(di).or(fleet);
        for (i, id) in route.nodes.iter().enumerate() {
            let Some(node) = instance.node(id) else { continue };
            let t = route.arrival[i];
            if t < 0 || t > instance.t_max {
                report.push("time", format!("arrival {t} at {id} outside [0, t_max]"));
            }
            if let Some((lo, hi)) = node.time_window {
                if t < lo || t > hi {
                    report.push("time", format!("arrival {t} at {id} outside window [{lo}, {hi}]"));
                }
            }
            if let Some(need) = (node.capabilities != 0).then_some(node.capabilities) {
                if let Some(d) = drone {
                    for j in 0..d.id_bits.len().min(64) {
                        if need >> j & 1 == 1 && d.id_bits.as_bytes()[j] != b'1' {
                            report.push(
                                "id",
                                format!("drone {di} lacks capability {j} required at {id}"),
                            );
                        }
                    }
                }
            }
            if let Some(owner) = node.owner {
                if owner != di {
                    report.push("id", format!("drone {di} visits node {id} owned by drone {owner}"));
                }
            }
        }
        for i in 0..route.nodes.len().saturating_sub(1) {
            let (a, b) = (&route.nodes[i], &route.nodes[i + 1]);
            let Some(edge) = instance.edge(a, b) else { continue };
            let delta = route.arrival[i + 1] - route.arrival[i] - edge.time;
            if delta < 0 {
                report.push(
                    "time",
                    format!("hop ({a}, {b}) arrives {} early", -delta),
                );
            }
            if let Some(d) = drone {
                let (ba, bb) = (route.battery[i], route.battery[i + 1]);
                if !(0..=d.b_max).contains(&ba) || !(0..=d.b_max).contains(&bb) {
                    report.push("battery", format!("battery trace outside [0, {}]", d.b_max));
                    continue;
                }
                let from_recharge = instance.node(a).map_or(false, |n| n.has_kind(NodeKind::Recharge));
                if from_recharge {
                    if bb > ba + delta * d.b_recharge - edge.battery {
                        report.push(
                            "battery",
                            format!("hop ({a}, {b}) claims more battery than recharge allows"),
                        );
                    }
                    if ba + delta * d.b_recharge > d.b_max {
                        report.push(
                            "batcap",
                            format!("hop ({a}, {b}) overcharges past B_max"),
                        );
                    }
                } else if bb > ba - edge.battery - d.b_hov * delta {
                    report.push(
                        "battery",
                        format!("hop ({a}, {b}) claims more battery than remains"),
                    );
                }
                if !route.quantity.is_empty() {
                    let to_recharge = instance.node(b).map_or(false, |n| n.has_kind(NodeKind::Recharge));
                    let qa = route.quantity[i];
                    let qb = route.quantity[i + 1];
                    if !(0..=d.q_max).contains(&qa) || !(0..=d.q_max).contains(&qb) {
                        report.push("quantity", format!("quantity trace outside [0, {}]", d.q_max));
                    } else if !to_recharge {
                        let demand = instance.node(a).map_or(0, |n| n.q);
                        if qb - demand > qa {
                            report.push("quantity", format!("hop ({a}, {b}) gains resource"));
                        }
                    }
                }
            }
        }
    }

    // crash disjunctions on the listed pairs
    let departure = |edge: &(String, String)| -> Vec<i64> {
        // arrival time at the canonical first endpoint for every traversal
        let mut out = Vec::new();
        for route in &routes.routes {
            for (i, w) in route.nodes.windows(2).enumerate() {
                let key = crate::instance::edge_key(&w[0], &w[1]);
                if key == *edge {
                    let a_pos = if w[0] == edge.0 { i } else { i + 1 };
                    out.push(route.arrival[a_pos]);
                }
            }
        }
        out
    };
    for (k, (e1, e2)) in instance.crash_pairs.iter().enumerate() {
        let key1 = crate::instance::edge_key(&e1.0, &e1.1);
        let key2 = crate::instance::edge_key(&e2.0, &e2.1);
        let (Some(spec1), Some(spec2)) = (instance.edges.get(&key1), instance.edges.get(&key2))
        else {
            continue;
        };
        for t_a in departure(&key1) {
            for t_c in departure(&key2) {
                let ok = t_c >= t_a + spec1.time || t_a >= t_c + spec2.time;
                if !ok {
                    report.push(
                        "crash",
                        format!("crash pair {k}: traversals at t={t_a} and t={t_c} overlap"),
                    );
                }
            }
        }
    }

    // makespan bookkeeping
    let max_end = routes
        .routes
        .iter()
        .filter_map(|r| r.arrival.last())
        .max()
        .copied()
        .unwrap_or(0);
    if routes.makespan != max_end {
        report.push(
            "makespan",
            format!("claimed makespan {} but last arrival is {max_end}", routes.makespan),
        );
    }

    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::rewrite_bases;
    use crate::samples;

    fn toy_optimal_routes() -> (MissionInstance, RouteSet) {
        let rw = rewrite_bases(&samples::toy_mission(), 1).unwrap();
        let route = DroneRoute {
            drone: 0,
            nodes: ["A_s0", "B", "D", "A_r0_0", "C", "A_e0"]
                .map(String::from)
                .to_vec(),
            arrival: vec![0, 2, 7, 9, 14, 17],
            battery: vec![4, 3, 2, 0, 1, 0],
            quantity: vec![],
        };
        (
            rw,
            RouteSet {
                routes: vec![route],
                makespan: 17,
            },
        )
    }

    #[test]
    fn toy_optimal_route_is_valid() {
        let (rw, routes) = toy_optimal_routes();
        let report = validate_routes(&rw, &routes);
        assert!(report.is_valid(), "{:?}", report.violations);
        assert_eq!(routes.makespan, 17);
    }

    #[test]
    fn overcharged_battery_trace_flagged() {
        let (rw, mut routes) = toy_optimal_routes();
        routes.routes[0].battery[1] = 5; // exceeds B_max = 4
        let report = validate_routes(&rw, &routes);
        assert!(report.violations.iter().any(|v| v.tag == "battery"));
    }

    #[test]
    fn skipped_objective_flagged() {
        let (rw, mut routes) = toy_optimal_routes();
        // skip C by routing A_r0_0 -> A_e0 directly
        let r = &mut routes.routes[0];
        r.nodes = ["A_s0", "B", "D", "A_r0_0", "A_e0"].map(String::from).to_vec();
        r.arrival = vec![0, 2, 7, 9, 9];
        r.battery = vec![4, 3, 2, 0, 0];
        routes.makespan = 9;
        let report = validate_routes(&rw, &routes);
        assert!(report.violations.iter().any(|v| v.tag.starts_with("degree")));
    }

    #[test]
    fn waits_computed_from_slack() {
        let (rw, routes) = toy_optimal_routes();
        let waits = routes.routes[0].waits(&rw);
        assert_eq!(waits, vec![0, 0, 0, 2, 0]);
    }
}
