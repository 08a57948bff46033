//! Built-in demo instances used by tests, benches and the CLI.

use std::collections::BTreeMap;

use crate::instance::{DroneSpec, EdgeSpec, MissionInstance, NodeKind, NodeSpec, TspInstance};

/// Four-node toy mission: one drone based at A with 4 units of battery,
/// three objective nodes B, C, D. The optimal makespan is 17 and requires a
/// recharge stop at the base.
pub fn toy_mission() -> MissionInstance {
    let mut edges = BTreeMap::new();
    let mut add = |a: &str, b: &str, time: i64, battery: i64| {
        edges.insert(
            crate::instance::edge_key(a, b),
            EdgeSpec {
                time,
                battery,
                mandatory: false,
            },
        );
    };
    add("A", "B", 2, 1);
    add("B", "C", 6, 2);
    add("C", "D", 1, 2);
    add("A", "D", 2, 2);
    add("A", "C", 3, 1);
    add("B", "D", 5, 1);
    MissionInstance {
        nodes: vec![
            NodeSpec::new("A", &[NodeKind::Intermediate]),
            NodeSpec::new("B", &[NodeKind::Objective]),
            NodeSpec::new("C", &[NodeKind::Objective]),
            NodeSpec::new("D", &[NodeKind::Objective]),
        ],
        edges,
        drones: vec![DroneSpec {
            id_bits: "0".into(),
            b_max: 4,
            b_hov: 0,
            q_max: 0,
            b_recharge: 1,
            base: "A".into(),
        }],
        crash_pairs: vec![],
        t_max: 20,
    }
}

/// Six-node TSP demo: a base at the origin plus five targets.
pub fn tsp6() -> TspInstance {
    TspInstance::from_coords(&[
        (0.0, 0.0),
        (-10.558076410502618, -15.873358630771367),
        (-4.1576702955727605, -13.80110916790359),
        (-17.339396172816404, -3.9363594205970074),
        (16.718201723508756, 12.018094059832343),
        (10.606504100217538, -11.122872972387295),
    ])
    .unwrap()
}

/// Seven-node TSP demo.
pub fn tsp7() -> TspInstance {
    TspInstance::from_coords(&[
        (0.0, 0.0),
        (7.280182423519115, -16.335895676817444),
        (4.712653954456094, 13.676796182038245),
        (13.382011543043589, 0.6007090316539774),
        (5.241518611827061, -5.2308066374832585),
        (1.1207448807689886, -15.685732667890724),
        (7.317997353331862, 4.026734469991197),
    ])
    .unwrap()
}
