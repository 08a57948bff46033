//! Graph rewriting: expands each drone's base node into start, end and
//! recharge copies that inherit the base node's edges.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::instance::{edge_key, EdgeSpec, MissionInstance, NodeKind, NodeSpec};

pub fn start_node_id(instance: &MissionInstance, drone: usize) -> Option<&str> {
    instance
        .nodes
        .iter()
        .find(|n| n.owner == Some(drone) && n.has_kind(NodeKind::Start))
        .map(|n| n.id.as_str())
}

pub fn end_node_id(instance: &MissionInstance, drone: usize) -> Option<&str> {
    instance
        .nodes
        .iter()
        .find(|n| n.owner == Some(drone) && n.has_kind(NodeKind::End))
        .map(|n| n.id.as_str())
}

/// Rank of a base copy within its drone's chain; zero-cost arcs only run
/// from lower to higher rank so the copies cannot form a cycle.
pub(crate) fn copy_rank(node: &NodeSpec, recharge_copies: usize) -> Option<usize> {
    if node.owner.is_none() {
        return None;
    }
    if node.has_kind(NodeKind::Start) {
        Some(0)
    } else if node.has_kind(NodeKind::End) {
        Some(recharge_copies + 1)
    } else if node.has_kind(NodeKind::Recharge) {
        // recharge copies carry a trailing _<k> suffix
        node.id
            .rsplit('_')
            .next()
            .and_then(|s| s.parse::<usize>().ok())
            .map(|k| k + 1)
    } else {
        None
    }
}

/// Replaces every drone's base node with one start node, one end node and
/// `recharge_copies` recharge nodes, inheriting the base's edges. Returns
/// the instance unchanged when there are no drones.
pub fn rewrite_bases(instance: &MissionInstance, recharge_copies: usize) -> Result<MissionInstance> {
    instance.validate()?;
    if instance.drones.is_empty() {
        return Ok(instance.clone());
    }
    if instance
        .nodes
        .iter()
        .any(|n| n.owner.is_some() || n.has_kind(NodeKind::Start) || n.has_kind(NodeKind::End))
    {
        return Err(Error::Build("instance is already rewritten".into()));
    }
    let bases: std::collections::BTreeSet<&str> =
        instance.drones.iter().map(|d| d.base.as_str()).collect();
    for b in &bases {
        if instance.node(b).unwrap().has_kind(NodeKind::Objective) {
            return Err(Error::Build(format!(
                "base node {b} cannot itself be an objective"
            )));
        }
    }

    let mut nodes: Vec<NodeSpec> = instance
        .nodes
        .iter()
        .filter(|n| !bases.contains(n.id.as_str()))
        .cloned()
        .collect();
    // (copy id, drone, base id) for edge inheritance
    let mut copies: Vec<(String, usize, String)> = Vec::new();
    for (di, drone) in instance.drones.iter().enumerate() {
        let base = instance.node(&drone.base).unwrap();
        let mut copy = |id: String, kinds: &[NodeKind]| {
            let mut n = NodeSpec::new(id.clone(), kinds);
            n.q = base.q;
            n.capabilities = base.capabilities;
            n.time_window = base.time_window;
            n.owner = Some(di);
            nodes.push(n);
            copies.push((id, di, drone.base.clone()));
        };
        copy(format!("{}_s{di}", drone.base), &[NodeKind::Start]);
        for k in 0..recharge_copies {
            copy(
                format!("{}_r{di}_{k}", drone.base),
                &[NodeKind::Recharge, NodeKind::Intermediate],
            );
        }
        copy(format!("{}_e{di}", drone.base), &[NodeKind::End]);
    }

    let mut edges: BTreeMap<(String, String), EdgeSpec> = instance
        .edges
        .iter()
        .filter(|((a, b), _)| !bases.contains(a.as_str()) && !bases.contains(b.as_str()))
        .map(|(k, v)| (k.clone(), *v))
        .collect();
    let zero = EdgeSpec {
        time: 0,
        battery: 0,
        mandatory: false,
    };
    for (ci, (cid, di, base)) in copies.iter().enumerate() {
        // edges to surviving original nodes
        for n in instance.nodes.iter().filter(|n| !bases.contains(n.id.as_str())) {
            if let Some(e) = instance.edge(base, &n.id) {
                edges.insert(edge_key(cid, &n.id), *e);
            }
        }
        // edges to other drones' copies of other bases
        for (oid, odi, obase) in &copies[..ci] {
            if obase == base {
                if odi == di {
                    // zero-cost chain within one drone's copies
                    edges.insert(edge_key(cid, oid), zero);
                }
                // different drones sharing a base: no edge
            } else if let Some(e) = instance.edge(base, obase) {
                edges.insert(edge_key(cid, oid), *e);
            }
        }
    }

    let mut drones = instance.drones.clone();
    for (di, d) in drones.iter_mut().enumerate() {
        d.base = format!("{}_s{di}", d.base);
    }
    let out = MissionInstance {
        nodes,
        edges,
        drones,
        crash_pairs: instance.crash_pairs.clone(),
        t_max: instance.t_max,
    };
    out.validate()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples;

    #[test]
    fn toy_rewrite_single_recharge_copy() {
        let toy = samples::toy_mission();
        let rw = rewrite_bases(&toy, 1).unwrap();
        let ids: Vec<&str> = rw.nodes.iter().map(|n| n.id.as_str()).collect();
        assert_eq!(rw.nodes.len(), 6);
        for id in ["A_s0", "A_r0_0", "A_e0", "B", "C", "D"] {
            assert!(ids.contains(&id), "missing {id}");
        }
        // copies inherit the base's edges
        assert_eq!(rw.edge("A_s0", "B").unwrap().time, 2);
        assert_eq!(rw.edge("A_r0_0", "C").unwrap().time, 3);
        assert_eq!(rw.edge("A_e0", "D").unwrap().battery, 2);
        // zero-cost chain within the copies
        assert_eq!(rw.edge("A_s0", "A_e0").unwrap().time, 0);
        assert_eq!(start_node_id(&rw, 0), Some("A_s0"));
        assert_eq!(end_node_id(&rw, 0), Some("A_e0"));
    }

    #[test]
    fn zero_drones_unchanged() {
        let mut toy = samples::toy_mission();
        toy.drones.clear();
        let rw = rewrite_bases(&toy, 2).unwrap();
        assert_eq!(rw, toy);
    }

    #[test]
    fn two_drones_one_base_expand_to_eight() {
        let mut toy = samples::toy_mission();
        toy.drones.push(toy.drones[0].clone());
        toy.drones[0].id_bits = "00".into();
        toy.drones[1].id_bits = "01".into();
        let rw = rewrite_bases(&toy, 2).unwrap();
        let base_copies = rw.nodes.iter().filter(|n| n.owner.is_some()).count();
        assert_eq!(base_copies, 8);
        // no edges between different drones' copies of the same base
        assert!(rw.edge("A_s0", "A_s1").is_none());
        assert!(rw.edge("A_r0_0", "A_e1").is_none());
    }

    #[test]
    fn rewrite_is_not_idempotent() {
        let toy = samples::toy_mission();
        let rw = rewrite_bases(&toy, 1).unwrap();
        assert!(rewrite_bases(&rw, 1).is_err());
    }
}
