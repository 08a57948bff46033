//! Mixed-integer linear program construction and validation.
//!
//! The model is built from a rewritten mission instance: every drone base is
//! expanded into start/end/recharge copies, undirected edges become directed
//! arc binaries, and each constraint family is tagged with its provenance so
//! that QUBO penalties and validation reports can name the family that
//! produced them.

mod build;
mod export;
mod gadgets;
mod rewrite;
mod routes;

pub use build::{build_milp, FormulationOptions, ObjectiveKind};
pub use export::{parse_lp, write_lp};
pub use gadgets::{compute_big_m, gadget_implication, gadget_min_max, gadget_product};
pub use rewrite::{end_node_id, rewrite_bases, start_node_id};
pub use routes::{validate_routes, DroneRoute, RouteSet, ValidationReport, Violation};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarRole {
    XNode,
    EEdge,
    TTime,
    BBattery,
    QQuantity,
    DIdBit,
    YProduct,
    BDisjunct,
    TMakespan,
    Slack,
}

impl VarRole {
    pub fn is_binary(self) -> bool {
        matches!(
            self,
            VarRole::XNode
                | VarRole::EEdge
                | VarRole::DIdBit
                | VarRole::YProduct
                | VarRole::BDisjunct
        )
    }

    pub fn prefix(self) -> &'static str {
        match self {
            VarRole::XNode => "x",
            VarRole::EEdge => "e",
            VarRole::TTime => "t",
            VarRole::BBattery => "B",
            VarRole::QQuantity => "Q",
            VarRole::DIdBit => "D",
            VarRole::YProduct => "y",
            VarRole::BDisjunct => "b",
            VarRole::TMakespan => "T",
            VarRole::Slack => "s",
        }
    }

    pub fn from_prefix(p: &str) -> Option<VarRole> {
        Some(match p {
            "x" => VarRole::XNode,
            "e" => VarRole::EEdge,
            "t" => VarRole::TTime,
            "B" => VarRole::BBattery,
            "Q" => VarRole::QQuantity,
            "D" => VarRole::DIdBit,
            "y" => VarRole::YProduct,
            "b" => VarRole::BDisjunct,
            "T" => VarRole::TMakespan,
            "s" => VarRole::Slack,
            _ => return None,
        })
    }
}

/// Integer variable with finite bounds. Names follow the stable
/// `role.index1.index2` scheme, e.g. `e.A.B` or `D.B.0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarSpec {
    pub name: String,
    pub lower: i64,
    pub upper: i64,
    pub role: VarRole,
}

/// Sparse linear constraint `lower <= c^T x <= upper`; `None` bounds are
/// infinite. `tag` names the constraint family that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub coefficients: BTreeMap<usize, i64>,
    pub lower: Option<i64>,
    pub upper: Option<i64>,
    pub tag: String,
}

impl LinearConstraint {
    /// Family prefix of the tag, up to the first `.`.
    pub fn family(&self) -> &str {
        self.tag.split('.').next().unwrap_or(&self.tag)
    }

    pub fn eval(&self, assignment: &[i64]) -> i64 {
        self.coefficients
            .iter()
            .map(|(&v, &c)| c * assignment[v])
            .sum()
    }

    pub fn satisfied_by(&self, assignment: &[i64]) -> bool {
        let v = self.eval(assignment);
        self.lower.map_or(true, |l| v >= l) && self.upper.map_or(true, |u| v <= u)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MilpModel {
    pub variables: Vec<VarSpec>,
    pub constraints: Vec<LinearConstraint>,
    /// Sparse minimization objective, var index -> coefficient.
    pub objective: BTreeMap<usize, i64>,
    #[serde(skip)]
    index: BTreeMap<String, usize>,
}

impl MilpModel {
    pub fn new() -> Self {
        MilpModel::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: i64, upper: i64, role: VarRole) -> Result<usize> {
        let name = name.into();
        if lower > upper {
            return Err(Error::Build(format!(
                "variable {name} has empty bounds [{lower}, {upper}]"
            )));
        }
        if role.is_binary() && (lower < 0 || upper > 1) {
            return Err(Error::Build(format!("variable {name} must be binary")));
        }
        if self.index.contains_key(&name) {
            return Err(Error::Build(format!("duplicate variable {name}")));
        }
        let idx = self.variables.len();
        self.index.insert(name.clone(), idx);
        self.variables.push(VarSpec {
            name,
            lower,
            upper,
            role,
        });
        Ok(idx)
    }

    pub fn var(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn add_constraint(
        &mut self,
        coefficients: BTreeMap<usize, i64>,
        lower: Option<i64>,
        upper: Option<i64>,
        tag: impl Into<String>,
    ) -> Result<usize> {
        let tag = tag.into();
        if lower.is_none() && upper.is_none() {
            return Err(Error::Build(format!("constraint {tag} has no finite bound")));
        }
        for &v in coefficients.keys() {
            if v >= self.variables.len() {
                return Err(Error::Build(format!(
                    "constraint {tag} references undeclared variable {v}"
                )));
            }
        }
        let idx = self.constraints.len();
        self.constraints.push(LinearConstraint {
            coefficients,
            lower,
            upper,
            tag,
        });
        Ok(idx)
    }

    /// Interval-arithmetic range of `c^T x` over the variable box.
    pub fn expr_range(&self, coefficients: &BTreeMap<usize, i64>) -> (i64, i64) {
        let mut lo = 0;
        let mut hi = 0;
        for (&v, &c) in coefficients {
            let spec = &self.variables[v];
            if c >= 0 {
                lo += c * spec.lower;
                hi += c * spec.upper;
            } else {
                lo += c * spec.upper;
                hi += c * spec.lower;
            }
        }
        (lo, hi)
    }

    /// Range of the objective over the variable box.
    pub fn objective_range(&self) -> (i64, i64) {
        self.expr_range(&self.objective)
    }

    pub fn objective_value(&self, assignment: &[i64]) -> i64 {
        self.objective
            .iter()
            .map(|(&v, &c)| c * assignment[v])
            .sum()
    }

    pub fn is_feasible(&self, assignment: &[i64]) -> bool {
        self.variables
            .iter()
            .enumerate()
            .all(|(i, v)| assignment[i] >= v.lower && assignment[i] <= v.upper)
            && self.constraints.iter().all(|c| c.satisfied_by(assignment))
    }

    /// Rebuilds the name index; needed after deserialization.
    pub fn reindex(&mut self) {
        self.index = self
            .variables
            .iter()
            .enumerate()
            .map(|(i, v)| (v.name.clone(), i))
            .collect();
    }

    /// Returns a reduced model with the given variables clamped to a value
    /// or a tighter bound.
    pub fn fix_partial(&self, assignments: &BTreeMap<String, (i64, i64)>) -> Result<MilpModel> {
        let mut model = self.clone();
        model.reindex();
        for (name, &(lo, hi)) in assignments {
            let idx = model
                .var(name)
                .ok_or_else(|| Error::Build(format!("unknown variable {name}")))?;
            let spec = &mut model.variables[idx];
            if lo < spec.lower || hi > spec.upper || lo > hi {
                return Err(Error::Build(format!(
                    "assignment [{lo}, {hi}] outside bounds of {name} [{}, {}]",
                    spec.lower, spec.upper
                )));
            }
            spec.lower = lo;
            spec.upper = hi;
        }
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fix_partial_clamps_and_rejects() {
        let mut m = MilpModel::new();
        let t = m.add_var("t.A", 0, 10, VarRole::TTime).unwrap();
        let fixed = m
            .fix_partial(&BTreeMap::from([("t.A".to_string(), (5, 5))]))
            .unwrap();
        assert_eq!(fixed.variables[t].lower, 5);
        assert_eq!(fixed.variables[t].upper, 5);

        let err = m.fix_partial(&BTreeMap::from([("t.A".to_string(), (5, 11))]));
        assert!(err.is_err());
    }

    #[test]
    fn expr_range_interval_arithmetic() {
        let mut m = MilpModel::new();
        let a = m.add_var("t.a", 0, 20, VarRole::TTime).unwrap();
        let b = m.add_var("t.b", 0, 20, VarRole::TTime).unwrap();
        let coeffs = BTreeMap::from([(a, 1), (b, -1)]);
        assert_eq!(m.expr_range(&coeffs), (-20, 20));
    }

    #[test]
    fn constraint_rejects_undeclared_vars() {
        let mut m = MilpModel::new();
        m.add_var("x.a", 0, 1, VarRole::XNode).unwrap();
        let r = m.add_constraint(BTreeMap::from([(3, 1)]), None, Some(1), "bad");
        assert!(r.is_err());
    }
}
