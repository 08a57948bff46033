//! Mission-planning problem data model and file format.
//!
//! A [`MissionInstance`] is a weighted graph of nodes and undirected edges
//! together with a fleet of drones. Undirected edges are stored once under a
//! canonical `(min, max)` key; the MILP builder expands them into two directed
//! arcs. All numeric quantities are fixed-precision integers in scaled units
//! so that downstream MILP/QUBO coefficients are exact.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Role a node plays in the mission graph. A node may carry several kinds,
/// e.g. a recharge copy of a base is both `Recharge` and `Intermediate`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Objective,
    Intermediate,
    Start,
    End,
    Recharge,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub id: String,
    pub kinds: Vec<NodeKind>,
    /// Resource demand consumed at this node (memory, payload, ...).
    #[serde(default)]
    pub q: i64,
    /// Bitmask of capabilities a visiting drone must possess.
    #[serde(default)]
    pub capabilities: u64,
    /// Optional departure-time window `(t_min, t_max)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_window: Option<(i64, i64)>,
    /// Index of the owning drone for start/end/recharge copies created by
    /// graph rewriting. `None` for shared nodes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub owner: Option<usize>,
}

impl NodeSpec {
    pub fn new(id: impl Into<String>, kinds: &[NodeKind]) -> Self {
        NodeSpec {
            id: id.into(),
            kinds: kinds.to_vec(),
            q: 0,
            capabilities: 0,
            time_window: None,
            owner: None,
        }
    }

    pub fn has_kind(&self, kind: NodeKind) -> bool {
        self.kinds.contains(&kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeSpec {
    /// Time to traverse the edge and complete the objective at its head.
    pub time: i64,
    /// Battery spent traversing the edge.
    pub battery: i64,
    /// Edge objective: must be traversed in either direction.
    #[serde(default)]
    pub mandatory: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DroneSpec {
    /// Binary string of length `r`; the first `k` bits are capability flags,
    /// the remainder a unique drone ID.
    pub id_bits: String,
    pub b_max: i64,
    pub b_hov: i64,
    pub q_max: i64,
    pub b_recharge: i64,
    /// Base node the drone starts from and returns to.
    pub base: String,
}

/// Canonical undirected edge key: `(min, max)` by node id.
pub fn edge_key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionInstance {
    pub nodes: Vec<NodeSpec>,
    /// Undirected edges under canonical `(min, max)` keys. Absent entries are
    /// forbidden paths.
    pub edges: BTreeMap<(String, String), EdgeSpec>,
    pub drones: Vec<DroneSpec>,
    /// Pairs of undirected edges flagged as geometrically intersecting.
    #[serde(default)]
    pub crash_pairs: Vec<((String, String), (String, String))>,
    /// Global time horizon; every departure time lies in `[0, t_max]`.
    pub t_max: i64,
}

/// On-disk JSON layout: edges as a flat array rather than a keyed map.
#[derive(Serialize, Deserialize)]
struct InstanceFile {
    nodes: Vec<NodeSpec>,
    edges: Vec<EdgeFile>,
    drones: Vec<DroneSpec>,
    #[serde(default)]
    crash_pairs: Vec<((String, String), (String, String))>,
    t_max: i64,
}

#[derive(Serialize, Deserialize)]
struct EdgeFile {
    a: String,
    b: String,
    time: i64,
    battery: i64,
    #[serde(default)]
    mandatory: bool,
}

impl MissionInstance {
    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    pub fn node(&self, id: &str) -> Option<&NodeSpec> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn edge(&self, a: &str, b: &str) -> Option<&EdgeSpec> {
        self.edges.get(&edge_key(a, b))
    }

    pub fn add_edge(&mut self, a: &str, b: &str, spec: EdgeSpec) {
        self.edges.insert(edge_key(a, b), spec);
    }

    /// Checks every structural invariant, naming the first violation.
    pub fn validate(&self) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::Validation("instance has no nodes".into()));
        }
        if self.t_max < 0 {
            return Err(Error::Validation("t_max must be non-negative".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for n in &self.nodes {
            if !seen.insert(&n.id) {
                return Err(Error::Validation(format!("duplicate node id {}", n.id)));
            }
            if n.kinds.is_empty() {
                return Err(Error::Validation(format!("node {} has no kinds", n.id)));
            }
            if n.q < 0 {
                return Err(Error::Validation(format!(
                    "node {} has negative resource demand",
                    n.id
                )));
            }
            if let Some((lo, hi)) = n.time_window {
                if lo > hi || lo < 0 || hi > self.t_max {
                    return Err(Error::Validation(format!(
                        "node {} has invalid time window [{lo}, {hi}]",
                        n.id
                    )));
                }
            }
        }
        for ((a, b), e) in &self.edges {
            if a == b {
                return Err(Error::Validation(format!("self-loop edge at {a}")));
            }
            for id in [a, b] {
                if self.node_index(id).is_none() {
                    return Err(Error::Validation(format!(
                        "edge ({a}, {b}) references unknown node {id}"
                    )));
                }
            }
            if e.time < 0 {
                return Err(Error::Validation(format!(
                    "edge ({a}, {b}) has negative time"
                )));
            }
            if e.battery < 0 {
                return Err(Error::Validation(format!(
                    "edge ({a}, {b}) has negative battery cost"
                )));
            }
        }
        let id_len = self.drones.first().map(|d| d.id_bits.len());
        for (i, d) in self.drones.iter().enumerate() {
            if self.node_index(&d.base).is_none() {
                return Err(Error::Validation(format!(
                    "drone {i} has unknown base node {}",
                    d.base
                )));
            }
            if d.b_max <= 0 {
                return Err(Error::Validation(format!("drone {i} must have b_max > 0")));
            }
            if d.b_hov < 0 || d.b_recharge < 0 || d.q_max < 0 {
                return Err(Error::Validation(format!("drone {i} has a negative rate")));
            }
            if !d.id_bits.chars().all(|c| c == '0' || c == '1') {
                return Err(Error::Validation(format!("drone {i} id_bits not binary")));
            }
            if Some(d.id_bits.len()) != id_len {
                return Err(Error::Validation("drone id_bits lengths differ".into()));
            }
        }
        for (ea, eb) in &self.crash_pairs {
            for (a, b) in [ea, eb] {
                if self.edges.get(&edge_key(a, b)).is_none() {
                    return Err(Error::Validation(format!(
                        "crash pair references unknown edge ({a}, {b})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let file = InstanceFile {
            nodes: self.nodes.clone(),
            edges: self
                .edges
                .iter()
                .map(|((a, b), e)| EdgeFile {
                    a: a.clone(),
                    b: b.clone(),
                    time: e.time,
                    battery: e.battery,
                    mandatory: e.mandatory,
                })
                .collect(),
            drones: self.drones.clone(),
            crash_pairs: self.crash_pairs.clone(),
            t_max: self.t_max,
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)?;
        let mut edges = BTreeMap::new();
        for e in file.edges {
            edges.insert(
                edge_key(&e.a, &e.b),
                EdgeSpec {
                    time: e.time,
                    battery: e.battery,
                    mandatory: e.mandatory,
                },
            );
        }
        let inst = MissionInstance {
            nodes: file.nodes,
            edges,
            drones: file.drones,
            crash_pairs: file.crash_pairs,
            t_max: file.t_max,
        };
        inst.validate()?;
        Ok(inst)
    }
}

/// Loads and validates a mission instance from a JSON file.
pub fn load_instance(path: impl AsRef<Path>) -> Result<MissionInstance> {
    let text = std::fs::read_to_string(path)?;
    MissionInstance::from_json(&text)
}

/// Plain travelling salesman instance: symmetric distance matrix with the
/// tour fixed to start at node 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TspInstance {
    pub n: usize,
    pub d: Vec<Vec<f64>>,
}

impl TspInstance {
    pub fn from_matrix(d: Vec<Vec<f64>>) -> Result<Self> {
        let n = d.len();
        for (i, row) in d.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Validation("distance matrix not square".into()));
            }
            if d[i][i] != 0.0 {
                return Err(Error::Validation("distance matrix diagonal not zero".into()));
            }
            for (j, &v) in row.iter().enumerate() {
                if v < 0.0 {
                    return Err(Error::Validation("negative distance".into()));
                }
                if (v - d[j][i]).abs() > 1e-9 {
                    return Err(Error::Validation("distance matrix not symmetric".into()));
                }
            }
        }
        Ok(TspInstance { n, d })
    }

    pub fn from_coords(coords: &[(f64, f64)]) -> Result<Self> {
        let n = coords.len();
        let mut d = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let dx = coords[i].0 - coords[j].0;
                let dy = coords[i].1 - coords[j].1;
                d[i][j] = (dx * dx + dy * dy).sqrt();
            }
        }
        TspInstance::from_matrix(d)
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.d[i][j]
    }
}

/// JSON layout for TSP inputs: either explicit coordinates or a full matrix.
#[derive(Serialize, Deserialize)]
struct TspFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coords: Option<Vec<(f64, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<Vec<Vec<f64>>>,
}

pub fn load_tsp(path: impl AsRef<Path>) -> Result<TspInstance> {
    let text = std::fs::read_to_string(path)?;
    let file: TspFile = serde_json::from_str(&text)?;
    match (file.coords, file.matrix) {
        (Some(c), None) => TspInstance::from_coords(&c),
        (None, Some(m)) => TspInstance::from_matrix(m),
        _ => Err(Error::Parse(
            "expected exactly one of `coords` or `matrix`".into(),
        )),
    }
}

/// Extracts the TSP special case from a mission instance.
///
/// Requires a single drone and no active battery, resource, capability,
/// window or crash constraints; the distance matrix is the edge time matrix
/// reordered so the drone's base is node 0.
pub fn tsp_from_mission(instance: &MissionInstance) -> Result<TspInstance> {
    instance.validate()?;
    if instance.drones.len() != 1 {
        return Err(Error::Unsupported(format!(
            "TSP requires exactly one drone, got {}",
            instance.drones.len()
        )));
    }
    let drone = &instance.drones[0];
    if drone.b_hov != 0 || instance.edges.values().any(|e| e.battery > 0) {
        return Err(Error::Unsupported("battery constraints active".into()));
    }
    if instance.nodes.iter().any(|n| n.q > 0) {
        return Err(Error::Unsupported("resource demands present".into()));
    }
    if instance.nodes.iter().any(|n| n.capabilities != 0) {
        return Err(Error::Unsupported("capability requirements present".into()));
    }
    if instance.nodes.iter().any(|n| n.time_window.is_some()) {
        return Err(Error::Unsupported("time windows present".into()));
    }
    if !instance.crash_pairs.is_empty() {
        return Err(Error::Unsupported("crash pairs present".into()));
    }
    if instance.edges.values().any(|e| e.mandatory) {
        return Err(Error::Unsupported("mandatory edges present".into()));
    }
    // Base first, remaining nodes in listed order.
    let mut order: Vec<usize> = Vec::with_capacity(instance.nodes.len());
    let base_idx = instance.node_index(&drone.base).unwrap();
    order.push(base_idx);
    order.extend((0..instance.nodes.len()).filter(|&i| i != base_idx));
    let n = order.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let a = &instance.nodes[order[i]].id;
            let b = &instance.nodes[order[j]].id;
            let e = instance
                .edge(a, b)
                .ok_or_else(|| Error::Unsupported(format!("missing edge ({a}, {b})")))?;
            d[i][j] = e.time as f64;
            d[j][i] = e.time as f64;
        }
    }
    TspInstance::from_matrix(d)
}
