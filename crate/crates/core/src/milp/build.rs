//! Builds the full mission MILP from a rewritten instance.
//!
//! Variable semantics: `t.{a}` is the arrival time at node `a`, `B.{a}` a
//! lower bound on the battery on arrival, `Q.{a}` a lower bound on the
//! remaining resource, `e.{a}.{b}` a directed-arc binary, `x.{a}` a visit
//! binary for intermediate nodes and `D.{a}.{j}` the j-th bit of the ID of
//! the drone visiting `a`. Waiting time at `a` before traversing `(a, b)` is
//! the slack `t_b - t_a - T_ab` of the time constraint; it is never a
//! declared variable.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::instance::{MissionInstance, NodeKind};
use crate::milp::gadgets::{compute_big_m, gadget_min_max};
use crate::milp::rewrite::copy_rank;
use crate::milp::{MilpModel, VarRole};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveKind {
    /// Minimize the time for the last drone to reach its end node.
    Makespan,
    /// Minimize total battery spent on traversed arcs.
    Energy,
}

#[derive(Debug, Clone)]
pub struct FormulationOptions {
    pub objective: ObjectiveKind,
    /// Emit crash-avoidance disjunctions for the instance's crash pairs.
    pub include_crash: bool,
    /// Objective nodes demoted to intermediates (decomposition pipeline).
    pub relaxed_objectives: BTreeSet<String>,
}

impl Default for FormulationOptions {
    fn default() -> Self {
        FormulationOptions {
            objective: ObjectiveKind::Makespan,
            include_crash: true,
            relaxed_objectives: BTreeSet::new(),
        }
    }
}

/// Directed arc expanded from an undirected edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arc {
    pub from: String,
    pub to: String,
    pub time: i64,
    pub battery: i64,
}

impl Arc {
    pub fn e_name(&self) -> String {
        format!("e.{}.{}", self.from, self.to)
    }
}

/// Directed arcs of a rewritten instance: both orientations of each edge,
/// except into start nodes, out of end nodes, and backwards along the
/// zero-cost chain of one drone's base copies.
pub fn arc_list(instance: &MissionInstance) -> Vec<Arc> {
    let rec_copies = instance
        .nodes
        .iter()
        .filter(|n| n.owner == Some(0) && n.has_kind(NodeKind::Recharge))
        .count();
    let mut arcs = Vec::new();
    for ((a, b), e) in &instance.edges {
        let na = instance.node(a).unwrap();
        let nb = instance.node(b).unwrap();
        for (from, to) in [(na, nb), (nb, na)] {
            if to.has_kind(NodeKind::Start) || from.has_kind(NodeKind::End) {
                continue;
            }
            if from.owner.is_some() && from.owner == to.owner {
                // same drone's base copies: forward along the chain only
                let (Some(rf), Some(rt)) = (copy_rank(from, rec_copies), copy_rank(to, rec_copies))
                else {
                    continue;
                };
                if rf >= rt {
                    continue;
                }
            }
            arcs.push(Arc {
                from: from.id.clone(),
                to: to.id.clone(),
                time: e.time,
                battery: e.battery,
            });
        }
    }
    arcs
}

/// Constraint switched off by `e = 0`, staged so the family big-M can be
/// computed over the whole family before emission.
struct Switched {
    coeffs: BTreeMap<usize, i64>,
    d: i64,
    e_var: usize,
    tag: String,
}

fn emit_family(model: &mut MilpModel, family: Vec<Switched>) -> Result<()> {
    let mut big_m = 0;
    for s in &family {
        big_m = big_m.max(compute_big_m(model, &s.coeffs, s.d)?);
    }
    for s in family {
        let mut coeffs = s.coeffs;
        *coeffs.entry(s.e_var).or_insert(0) += big_m;
        model.add_constraint(coeffs, None, Some(s.d + big_m), s.tag)?;
    }
    Ok(())
}

pub fn build_milp(instance: &MissionInstance, opts: &FormulationOptions) -> Result<MilpModel> {
    instance.validate()?;
    for (di, d) in instance.drones.iter().enumerate() {
        let base = instance
            .node(&d.base)
            .ok_or_else(|| Error::Build(format!("missing base {}", d.base)))?;
        if !base.has_kind(NodeKind::Start) || base.owner != Some(di) {
            return Err(Error::Build(
                "instance must be rewritten with rewrite_bases first".into(),
            ));
        }
    }
    for n in &instance.nodes {
        if n.id.contains('.') {
            return Err(Error::Build(format!(
                "node id {} may not contain '.' (reserved by the variable naming scheme)",
                n.id
            )));
        }
    }
    // The node-based formulation shares one set of t/B/Q variables across the
    // fleet, so per-drone physical parameters must agree.
    if let Some(first) = instance.drones.first() {
        for d in &instance.drones[1..] {
            if (d.b_max, d.b_hov, d.q_max, d.b_recharge)
                != (first.b_max, first.b_hov, first.q_max, first.b_recharge)
            {
                return Err(Error::Build(
                    "heterogeneous fleet parameters are not expressible in the node-based model"
                        .into(),
                ));
            }
        }
    }
    let fleet = instance.drones.first().cloned();
    let arcs = arc_list(instance);

    let is_objective =
        |n: &crate::instance::NodeSpec| n.has_kind(NodeKind::Objective) && !opts.relaxed_objectives.contains(&n.id);
    let is_intermediate = |n: &crate::instance::NodeSpec| {
        !is_objective(n) && !n.has_kind(NodeKind::Start) && !n.has_kind(NodeKind::End)
    };

    let battery_active = fleet.as_ref().map_or(false, |f| {
        f.b_hov > 0 || instance.edges.values().any(|e| e.battery > 0)
    });
    let quantity_active = fleet
        .as_ref()
        .map_or(false, |f| f.q_max > 0 && instance.nodes.iter().any(|n| n.q > 0));
    let id_bits_len = fleet.as_ref().map_or(0, |f| f.id_bits.len());
    let id_active = id_bits_len > 0
        && (instance.drones.len() > 1 || instance.nodes.iter().any(|n| n.capabilities != 0));

    let mut model = MilpModel::new();

    // variables
    for n in &instance.nodes {
        let (lo, hi) = match n.time_window {
            Some((lo, hi)) => (lo.max(0), hi.min(instance.t_max)),
            None => (0, instance.t_max),
        };
        if lo > hi {
            return Err(Error::Build(format!("empty time window at node {}", n.id)));
        }
        model.add_var(format!("t.{}", n.id), lo, hi, VarRole::TTime)?;
    }
    for arc in &arcs {
        model.add_var(arc.e_name(), 0, 1, VarRole::EEdge)?;
    }
    for n in instance.nodes.iter().filter(|n| is_intermediate(n)) {
        model.add_var(format!("x.{}", n.id), 0, 1, VarRole::XNode)?;
    }
    if battery_active {
        let b_max = fleet.as_ref().unwrap().b_max;
        for n in &instance.nodes {
            model.add_var(format!("B.{}", n.id), 0, b_max, VarRole::BBattery)?;
        }
    }
    if quantity_active {
        let q_max = fleet.as_ref().unwrap().q_max;
        for n in &instance.nodes {
            model.add_var(format!("Q.{}", n.id), 0, q_max, VarRole::QQuantity)?;
        }
    }
    if id_active {
        for n in &instance.nodes {
            for j in 0..id_bits_len {
                // capability fixing: clamp required bits, and the whole ID at
                // a drone's own start/end/recharge copies
                let (mut lo, mut hi) = (0, 1);
                if j < 64 && n.capabilities >> j & 1 == 1 {
                    lo = 1;
                }
                if let Some(di) = n.owner {
                    let bit = instance.drones[di].id_bits.as_bytes()[j] - b'0';
                    lo = bit as i64;
                    hi = bit as i64;
                }
                if lo > hi {
                    return Err(Error::Build(format!(
                        "node {} requires capability {j} its owner drone lacks",
                        n.id
                    )));
                }
                model.add_var(format!("D.{}.{}", n.id, j), lo, hi, VarRole::DIdBit)?;
            }
        }
    }

    let t_var = |model: &MilpModel, id: &str| model.var(&format!("t.{id}")).unwrap();
    let e_var = |model: &MilpModel, arc: &Arc| model.var(&arc.e_name()).unwrap();

    // (a) degree constraints: objective coverage, start/end, mandatory edges
    for n in &instance.nodes {
        let outs: Vec<usize> = arcs
            .iter()
            .filter(|a| a.from == n.id)
            .map(|a| e_var(&model, a))
            .collect();
        let ins: Vec<usize> = arcs
            .iter()
            .filter(|a| a.to == n.id)
            .map(|a| e_var(&model, a))
            .collect();
        let sum = |vars: &[usize]| -> BTreeMap<usize, i64> { vars.iter().map(|&v| (v, 1)).collect() };
        if is_objective(n) {
            if let Some((lo, hi)) = n.time_window {
                let earliest = arcs
                    .iter()
                    .filter(|a| a.to == n.id)
                    .map(|a| a.time + model.variables[t_var(&model, &a.from)].lower)
                    .min();
                if let Some(earliest) = earliest {
                    if hi.min(instance.t_max) < earliest {
                        return Err(Error::Build(format!(
                            "time window [{lo}, {hi}] at node {} closes before the earliest possible arrival {earliest}",
                            n.id
                        )));
                    }
                }
            }
            if outs.is_empty() || ins.is_empty() {
                return Err(Error::Build(format!("objective node {} is unreachable", n.id)));
            }
            model.add_constraint(sum(&outs), Some(1), Some(1), format!("degree.out.{}", n.id))?;
            model.add_constraint(sum(&ins), Some(1), Some(1), format!("degree.in.{}", n.id))?;
        } else if n.has_kind(NodeKind::Start) {
            model.add_constraint(sum(&outs), Some(1), Some(1), format!("degree.start.{}", n.id))?;
        } else if n.has_kind(NodeKind::End) {
            model.add_constraint(sum(&ins), Some(1), Some(1), format!("degree.end.{}", n.id))?;
        } else {
            // (b) intermediate consistency in both directions
            let x = model.var(&format!("x.{}", n.id)).unwrap();
            let mut c_out = sum(&outs);
            c_out.insert(x, -1);
            model.add_constraint(c_out, Some(0), Some(0), format!("consistency.out.{}", n.id))?;
            let mut c_in = sum(&ins);
            c_in.insert(x, -1);
            model.add_constraint(c_in, Some(0), Some(0), format!("consistency.in.{}", n.id))?;
        }
    }
    for ((a, b), e) in &instance.edges {
        if e.mandatory {
            let fwd = arcs.iter().find(|x| &x.from == a && &x.to == b);
            let bwd = arcs.iter().find(|x| &x.from == b && &x.to == a);
            let coeffs: BTreeMap<usize, i64> = fwd
                .iter()
                .chain(bwd.iter())
                .map(|x| (e_var(&model, x), 1))
                .collect();
            if coeffs.is_empty() {
                return Err(Error::Build(format!("mandatory edge ({a}, {b}) has no arcs")));
            }
            model.add_constraint(coeffs, Some(1), Some(1), format!("degree.edge.{a}.{b}"))?;
        }
    }

    // (c) time propagation: t_b >= t_a + T_ab - (1 - e)M_T
    let mut time_family = Vec::new();
    for arc in &arcs {
        let ta = t_var(&model, &arc.from);
        let tb = t_var(&model, &arc.to);
        time_family.push(Switched {
            coeffs: BTreeMap::from([(ta, 1), (tb, -1)]),
            d: -arc.time,
            e_var: e_var(&model, arc),
            tag: format!("time.{}.{}", arc.from, arc.to),
        });
    }
    emit_family(&mut model, time_family)?;

    // (d) battery propagation with hover drain, recharge and the B_max cap
    if battery_active {
        let fleet = fleet.as_ref().unwrap();
        let (h, r, b_max) = (fleet.b_hov, fleet.b_recharge, fleet.b_max);
        let b_var = |model: &MilpModel, id: &str| model.var(&format!("B.{id}")).unwrap();
        let mut family = Vec::new();
        for arc in &arcs {
            let (ba, bb) = (b_var(&model, &arc.from), b_var(&model, &arc.to));
            let (ta, tb) = (t_var(&model, &arc.from), t_var(&model, &arc.to));
            let from_recharge = instance.node(&arc.from).unwrap().has_kind(NodeKind::Recharge);
            if from_recharge {
                // B_b <= B_a + delta*B_recharge - B_ab
                let mut coeffs = BTreeMap::from([(bb, 1), (ba, -1)]);
                if r != 0 {
                    *coeffs.entry(tb).or_insert(0) += -r;
                    *coeffs.entry(ta).or_insert(0) += r;
                }
                family.push(Switched {
                    coeffs,
                    d: -arc.battery - r * arc.time,
                    e_var: e_var(&model, arc),
                    tag: format!("battery.{}.{}", arc.from, arc.to),
                });
                // B_a + delta*B_recharge <= B_max
                let mut cap = BTreeMap::from([(ba, 1)]);
                if r != 0 {
                    *cap.entry(tb).or_insert(0) += r;
                    *cap.entry(ta).or_insert(0) += -r;
                }
                family.push(Switched {
                    coeffs: cap,
                    d: b_max + r * arc.time,
                    e_var: e_var(&model, arc),
                    tag: format!("batcap.{}.{}", arc.from, arc.to),
                });
            } else {
                // B_b <= B_a - B_ab - B_hov*delta
                let mut coeffs = BTreeMap::from([(bb, 1), (ba, -1)]);
                if h != 0 {
                    *coeffs.entry(tb).or_insert(0) += h;
                    *coeffs.entry(ta).or_insert(0) += -h;
                }
                family.push(Switched {
                    coeffs,
                    d: h * arc.time - arc.battery,
                    e_var: e_var(&model, arc),
                    tag: format!("battery.{}.{}", arc.from, arc.to),
                });
            }
        }
        emit_family(&mut model, family)?;
    }

    // (e) resource propagation: Q_b - q_a <= Q_a unless b is a recharge node
    if quantity_active {
        let q_var = |model: &MilpModel, id: &str| model.var(&format!("Q.{id}")).unwrap();
        let mut family = Vec::new();
        for arc in &arcs {
            if instance.node(&arc.to).unwrap().has_kind(NodeKind::Recharge) {
                continue;
            }
            let (qa, qb) = (q_var(&model, &arc.from), q_var(&model, &arc.to));
            family.push(Switched {
                coeffs: BTreeMap::from([(qb, 1), (qa, -1)]),
                d: instance.node(&arc.from).unwrap().q,
                e_var: e_var(&model, arc),
                tag: format!("quantity.{}.{}", arc.from, arc.to),
            });
        }
        emit_family(&mut model, family)?;
    }

    // (f) drone-ID equality via paired inequalities with M_d = 1
    if id_active {
        for arc in &arcs {
            let e = e_var(&model, arc);
            for j in 0..id_bits_len {
                let da = model.var(&format!("D.{}.{}", arc.from, j)).unwrap();
                let db = model.var(&format!("D.{}.{}", arc.to, j)).unwrap();
                model.add_constraint(
                    BTreeMap::from([(db, 1), (da, -1), (e, 1)]),
                    None,
                    Some(1),
                    format!("id.{}.{}.{}.up", arc.from, arc.to, j),
                )?;
                model.add_constraint(
                    BTreeMap::from([(da, 1), (db, -1), (e, 1)]),
                    None,
                    Some(1),
                    format!("id.{}.{}.{}.dn", arc.from, arc.to, j),
                )?;
            }
        }
    }

    // (h) crash-avoidance disjunctions over orientation-summed arc binaries
    if opts.include_crash && !instance.crash_pairs.is_empty() {
        let (_, t_hi) = {
            let coeffs: BTreeMap<usize, i64> = instance
                .nodes
                .iter()
                .map(|n| (t_var(&model, &n.id), 1))
                .collect();
            (0, coeffs.keys().map(|&v| model.variables[v].upper).max().unwrap())
        };
        let max_time = instance.edges.values().map(|e| e.time).max().unwrap_or(0);
        let big_m = t_hi + max_time;
        for (k, ((a1, b1), (a2, b2))) in instance.crash_pairs.clone().iter().enumerate() {
            let arc_sum = |model: &MilpModel, a: &str, b: &str| -> Vec<usize> {
                arcs.iter()
                    .filter(|x| (x.from == *a && x.to == *b) || (x.from == *b && x.to == *a))
                    .map(|x| e_var(model, x))
                    .collect()
            };
            let first = arc_sum(&model, a1, b1);
            let second = arc_sum(&model, a2, b2);
            if first.is_empty() || second.is_empty() {
                continue; // an edge with no usable arcs can never be traversed
            }
            let y = model.add_var(format!("y.{k}"), 0, 1, VarRole::YProduct)?;
            let sel = model.add_var(format!("b.{k}"), 0, 1, VarRole::BDisjunct)?;
            // product gadget on the orientation sums
            let mut sum_c: BTreeMap<usize, i64> =
                first.iter().chain(second.iter()).map(|&v| (v, 1)).collect();
            sum_c.insert(y, -1);
            model.add_constraint(sum_c, None, Some(1), format!("crash.{k}.prod.sum"))?;
            let mut le1: BTreeMap<usize, i64> = first.iter().map(|&v| (v, -1)).collect();
            le1.insert(y, 1);
            model.add_constraint(le1, None, Some(0), format!("crash.{k}.prod.le1"))?;
            let mut le2: BTreeMap<usize, i64> = second.iter().map(|&v| (v, -1)).collect();
            le2.insert(y, 1);
            model.add_constraint(le2, None, Some(0), format!("crash.{k}.prod.le2"))?;
            // either the first traversal finishes before the second starts,
            // or vice versa, selected by `b`
            let time1 = instance.edge(a1, b1).unwrap().time;
            let time2 = instance.edge(a2, b2).unwrap().time;
            let (t_a, t_c) = (t_var(&model, a1), t_var(&model, a2));
            model.add_constraint(
                BTreeMap::from([(t_a, 1), (t_c, -1), (y, big_m), (sel, -big_m)]),
                None,
                Some(big_m - time1),
                format!("crash.{k}.first"),
            )?;
            model.add_constraint(
                BTreeMap::from([(t_c, 1), (t_a, -1), (y, big_m), (sel, big_m)]),
                None,
                Some(2 * big_m - time2),
                format!("crash.{k}.second"),
            )?;
        }
    }

    // (j) objective
    match opts.objective {
        ObjectiveKind::Makespan => {
            let ends: Vec<usize> = instance
                .nodes
                .iter()
                .filter(|n| n.has_kind(NodeKind::End))
                .map(|n| t_var(&model, &n.id))
                .collect();
            if ends.is_empty() {
                return Err(Error::Build("makespan objective needs at least one end node".into()));
            }
            let t = gadget_min_max(&mut model, &ends, "T", "makespan")?;
            model.objective = BTreeMap::from([(t, 1)]);
        }
        ObjectiveKind::Energy => {
            model.objective = arcs
                .iter()
                .filter(|a| a.battery != 0)
                .map(|a| (e_var(&model, a), a.battery))
                .collect();
        }
    }

    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{DroneSpec, EdgeSpec, MissionInstance, NodeKind, NodeSpec};
    use crate::milp::rewrite_bases;
    use crate::samples;

    fn line_instance() -> MissionInstance {
        // single objective O between start and end, T(s,o) = T(o,e) = 1
        let mut inst = MissionInstance {
            nodes: vec![
                NodeSpec::new("H", &[NodeKind::Intermediate]),
                NodeSpec::new("O", &[NodeKind::Objective]),
            ],
            edges: Default::default(),
            drones: vec![DroneSpec {
                id_bits: "0".into(),
                b_max: 10,
                b_hov: 0,
                q_max: 0,
                b_recharge: 0,
                base: "H".into(),
            }],
            crash_pairs: vec![],
            t_max: 5,
        };
        inst.add_edge(
            "H",
            "O",
            EdgeSpec {
                time: 1,
                battery: 0,
                mandatory: false,
            },
        );
        inst
    }

    #[test]
    fn toy_model_shape() {
        let rw = rewrite_bases(&samples::toy_mission(), 1).unwrap();
        let model = build_milp(&rw, &FormulationOptions::default()).unwrap();
        // 6 t vars, some arcs, B vars, one x for the recharge copy, one T
        let count = |role: VarRole| model.variables.iter().filter(|v| v.role == role).count();
        assert_eq!(count(VarRole::TTime), 6);
        assert_eq!(count(VarRole::BBattery), 6);
        assert_eq!(count(VarRole::XNode), 1);
        assert_eq!(count(VarRole::TMakespan), 1);
        assert_eq!(count(VarRole::QQuantity), 0);
        assert_eq!(count(VarRole::DIdBit), 0);
        assert!(count(VarRole::EEdge) > 12);
        // every constraint references declared vars with finite bounds
        for v in &model.variables {
            assert!(v.lower <= v.upper);
        }
    }

    #[test]
    fn single_objective_forced_route_optimum_two() {
        let rw = rewrite_bases(&line_instance(), 0).unwrap();
        let model = build_milp(&rw, &FormulationOptions::default()).unwrap();
        // enumerate: route must be H_s0 -> O -> H_e0, makespan 2
        let best = crate::solvers::brute_force_milp(&model).unwrap();
        let (assignment, value) = best.expect("feasible");
        assert_eq!(value, 2);
        let e = model.var("e.H_s0.O").unwrap();
        assert_eq!(assignment[e], 1);
    }

    #[test]
    fn closed_time_window_detected_at_build() {
        let mut inst = line_instance();
        inst.nodes[1].time_window = Some((0, 0)); // O cannot be reached by t=0
        let rw = rewrite_bases(&inst, 0).unwrap();
        let err = build_milp(&rw, &FormulationOptions::default());
        match err {
            Err(Error::Build(msg)) => assert!(msg.contains('O'), "{msg}"),
            other => panic!("expected build error, got {other:?}"),
        }
    }

    #[test]
    fn unrewritten_instance_rejected() {
        let err = build_milp(&samples::toy_mission(), &FormulationOptions::default());
        assert!(err.is_err());
    }
}
