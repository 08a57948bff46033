//! Exact small-MILP search: depth-first branching with interval-arithmetic
//! bound propagation, plus an outer objective-tightening loop. Intended for
//! the scheduling subproblems left after a route structure has been fixed,
//! where propagation collapses most domains immediately.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::milp::{LinearConstraint, MilpModel};

/// Default branching-node budget for one `exact_milp_min` call.
pub const SEARCH_NODE_CAP: u64 = 2_000_000;

#[derive(Debug, Clone)]
struct Domains {
    lo: Vec<i64>,
    hi: Vec<i64>,
}

impl Domains {
    fn expr_range(&self, coefficients: &BTreeMap<usize, i64>) -> (i64, i64) {
        let mut lo = 0;
        let mut hi = 0;
        for (&v, &c) in coefficients {
            if c >= 0 {
                lo += c * self.lo[v];
                hi += c * self.hi[v];
            } else {
                lo += c * self.hi[v];
                hi += c * self.lo[v];
            }
        }
        (lo, hi)
    }
}

fn div_floor(a: i64, b: i64) -> i64 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

fn div_ceil(a: i64, b: i64) -> i64 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) == (b < 0)) {
        q + 1
    } else {
        q
    }
}

/// Tightens every variable bound against every constraint until a fixpoint;
/// returns false on an empty domain.
fn propagate(domains: &mut Domains, constraints: &[LinearConstraint]) -> bool {
    loop {
        let mut changed = false;
        for cons in constraints {
            let (emin, emax) = domains.expr_range(&cons.coefficients);
            if cons.lower.map_or(false, |l| emax < l) || cons.upper.map_or(false, |u| emin > u) {
                return false;
            }
            for (&v, &c) in &cons.coefficients {
                if c == 0 {
                    continue;
                }
                let (part_min, part_max) = if c >= 0 {
                    (c * domains.lo[v], c * domains.hi[v])
                } else {
                    (c * domains.hi[v], c * domains.lo[v])
                };
                let rest_min = emin - part_min;
                let rest_max = emax - part_max;
                // lo <= c*x + rest <= hi pinches c*x into [lo-rest_max, hi-rest_min]
                let mut cx_lo = i64::MIN;
                let mut cx_hi = i64::MAX;
                if let Some(l) = cons.lower {
                    cx_lo = l - rest_max;
                }
                if let Some(u) = cons.upper {
                    cx_hi = u - rest_min;
                }
                let (x_lo, x_hi) = if c > 0 {
                    (
                        if cx_lo == i64::MIN { domains.lo[v] } else { div_ceil(cx_lo, c) },
                        if cx_hi == i64::MAX { domains.hi[v] } else { div_floor(cx_hi, c) },
                    )
                } else {
                    (
                        if cx_hi == i64::MAX { domains.lo[v] } else { div_ceil(cx_hi, c) },
                        if cx_lo == i64::MIN { domains.hi[v] } else { div_floor(cx_lo, c) },
                    )
                };
                if x_lo > domains.lo[v] {
                    domains.lo[v] = x_lo;
                    changed = true;
                }
                if x_hi < domains.hi[v] {
                    domains.hi[v] = x_hi;
                    changed = true;
                }
                if domains.lo[v] > domains.hi[v] {
                    return false;
                }
            }
        }
        if !changed {
            return true;
        }
    }
}

fn dfs(
    domains: &Domains,
    constraints: &[LinearConstraint],
    nodes: &mut u64,
    cap: u64,
) -> Result<Option<Vec<i64>>> {
    *nodes += 1;
    if *nodes > cap {
        return Err(Error::Build(format!(
            "exact search exceeded its node budget of {cap}"
        )));
    }
    let mut domains = domains.clone();
    if !propagate(&mut domains, constraints) {
        return Ok(None);
    }
    // branch on the tightest undecided domain; ties to the lowest index
    let branch = (0..domains.lo.len())
        .filter(|&v| domains.lo[v] < domains.hi[v])
        .min_by_key(|&v| domains.hi[v] - domains.lo[v]);
    let Some(v) = branch else {
        return Ok(Some(domains.lo.clone()));
    };
    for value in domains.lo[v]..=domains.hi[v] {
        let mut child = domains.clone();
        child.lo[v] = value;
        child.hi[v] = value;
        if let Some(solution) = dfs(&child, constraints, nodes, cap)? {
            return Ok(Some(solution));
        }
    }
    Ok(None)
}

/// Exact minimum of a small MILP: finds a feasible point, then repeatedly
/// demands a strictly better objective until the search proves optimality.
/// `None` means infeasible. Errors when the node budget is exhausted.
pub fn exact_milp_min(model: &MilpModel, cap: u64) -> Result<Option<(Vec<i64>, i64)>> {
    let domains = Domains {
        lo: model.variables.iter().map(|v| v.lower).collect(),
        hi: model.variables.iter().map(|v| v.upper).collect(),
    };
    let mut constraints = model.constraints.clone();
    let mut nodes = 0u64;
    let Some(first) = dfs(&domains, &constraints, &mut nodes, cap)? else {
        return Ok(None);
    };
    let mut best_value = model.objective_value(&first);
    let mut best = first;
    if model.objective.is_empty() {
        return Ok(Some((best, best_value)));
    }
    loop {
        let bound = LinearConstraint {
            coefficients: model.objective.clone(),
            lower: None,
            upper: Some(best_value - 1),
            tag: "search.bound".into(),
        };
        constraints.push(bound);
        match dfs(&domains, &constraints, &mut nodes, cap)? {
            Some(better) => {
                best_value = model.objective_value(&better);
                best = better;
                constraints.pop();
            }
            None => return Ok(Some((best, best_value))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::VarRole;

    #[test]
    fn minimizes_simple_chain() {
        // t0 in [0,10], t1 >= t0 + 3, minimize t1
        let mut m = MilpModel::new();
        let t0 = m.add_var("t.a", 0, 10, VarRole::TTime).unwrap();
        let t1 = m.add_var("t.b", 0, 10, VarRole::TTime).unwrap();
        m.add_constraint(BTreeMap::from([(t0, 1), (t1, -1)]), None, Some(-3), "time.a.b")
            .unwrap();
        m.objective = BTreeMap::from([(t1, 1)]);
        let (solution, value) = exact_milp_min(&m, 10_000).unwrap().unwrap();
        assert_eq!(value, 3);
        assert_eq!(solution[t1], 3);
    }

    #[test]
    fn reports_infeasible() {
        let mut m = MilpModel::new();
        let x = m.add_var("x.a", 0, 1, VarRole::XNode).unwrap();
        m.add_constraint(BTreeMap::from([(x, 1)]), Some(2), Some(2), "degree.a")
            .unwrap();
        assert!(exact_milp_min(&m, 10_000).unwrap().is_none());
    }

    #[test]
    fn node_budget_is_enforced() {
        let mut m = MilpModel::new();
        let vars: Vec<usize> = (0..8)
            .map(|i| m.add_var(format!("t.{i}"), 0, 50, VarRole::TTime).unwrap())
            .collect();
        // pairwise-distinct-ish constraints that propagation cannot collapse
        for w in vars.windows(2) {
            m.add_constraint(
                BTreeMap::from([(w[0], 1), (w[1], 1)]),
                Some(10),
                None,
                "time.pair",
            )
            .unwrap();
        }
        m.objective = vars.iter().map(|&v| (v, 1)).collect();
        let err = exact_milp_min(&m, 3);
        assert!(err.is_err());
    }
}
