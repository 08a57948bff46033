//! QUBO compilation: binary expansion of integer variables, slack variables
//! for inequalities, and squared-penalty terms per constraint.
//!
//! With integer model coefficients every violated constraint contributes a
//! penalty of at least 1, so `auto_lambda` (objective range + 1) guarantees
//! any infeasible bitstring costs strictly more than every feasible one.

mod io;

pub use io::{read_qubo, write_qubo};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::milp::MilpModel;

/// Minimal-width binary expansion of the span `upper - lower`: weights
/// `1, 2, ..., 2^(k-2)` plus a residual last weight, so sums cover exactly
/// `0..=span`.
pub fn binary_expand(lower: i64, upper: i64) -> Result<Vec<i64>> {
    if upper < lower {
        return Err(Error::Build(format!("empty range [{lower}, {upper}]")));
    }
    let span = upper - lower;
    if span == 0 {
        return Ok(vec![]);
    }
    let k = 64 - (span as u64).leading_zeros() as i64; // bits of span
    let mut weights: Vec<i64> = (0..k - 1).map(|j| 1i64 << j).collect();
    weights.push(span - ((1i64 << (k - 1)) - 1));
    Ok(weights)
}

/// Bits backing one integer quantity: a MILP variable or a slack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BitGroup {
    /// MILP variable name, or `s.<constraint index>` for slacks.
    pub var: String,
    pub lower: i64,
    /// Contiguous bit indices and their weights.
    pub first_bit: usize,
    pub weights: Vec<i64>,
    /// Index of the constraint this slack belongs to, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slack_for: Option<usize>,
}

impl BitGroup {
    pub fn value(&self, bits: &[u8]) -> i64 {
        self.lower
            + self
                .weights
                .iter()
                .enumerate()
                .map(|(j, w)| w * bits[self.first_bit + j] as i64)
                .sum::<i64>()
    }
}

/// One squared penalty `lambda * (sum a_i b_i + c)^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltyTerm {
    pub tag: String,
    pub terms: Vec<(usize, i64)>,
    pub constant: i64,
    pub lambda: f64,
}

impl PenaltyTerm {
    /// Unweighted residual `(sum a_i b_i + c)^2`; zero iff satisfied.
    pub fn residual(&self, bits: &[u8]) -> i64 {
        let v: i64 = self.constant
            + self
                .terms
                .iter()
                .map(|&(b, a)| a * bits[b] as i64)
                .sum::<i64>();
        v * v
    }

    pub fn family(&self) -> &str {
        self.tag.split('.').next().unwrap_or(&self.tag)
    }
}

/// Symmetric QUBO with constant offset and the decode map back to MILP
/// variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Qubo {
    pub n: usize,
    /// Dense symmetric matrix, row-major.
    pub q: Vec<f64>,
    pub offset: f64,
    pub groups: Vec<BitGroup>,
    pub penalties: Vec<PenaltyTerm>,
}

impl Qubo {
    pub fn zero(n: usize) -> Self {
        Qubo {
            n,
            q: vec![0.0; n * n],
            offset: 0.0,
            groups: vec![],
            penalties: vec![],
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.q[i * self.n + j]
    }

    fn add(&mut self, i: usize, j: usize, v: f64) {
        self.q[i * self.n + j] += v;
        if i != j {
            self.q[j * self.n + i] += v;
        }
    }

    /// `x^T Q x + offset` for a 0/1 bitstring.
    pub fn energy(&self, bits: &[u8]) -> Result<f64> {
        if bits.len() != self.n {
            return Err(Error::Build(format!(
                "bitstring length {} does not match n = {}",
                bits.len(),
                self.n
            )));
        }
        let mut e = self.offset;
        for i in 0..self.n {
            if bits[i] == 0 {
                continue;
            }
            e += self.entry(i, i);
            for j in (i + 1)..self.n {
                if bits[j] == 1 {
                    e += 2.0 * self.entry(i, j);
                }
            }
        }
        Ok(e)
    }

    /// Decoded MILP assignment (by variable name) plus per-family penalty
    /// residuals so callers can tell feasible from near-feasible samples.
    pub fn decode(&self, bits: &[u8]) -> Result<(BTreeMap<String, i64>, BTreeMap<String, i64>)> {
        if bits.len() != self.n {
            return Err(Error::Build("bitstring length mismatch".into()));
        }
        let mut assignment = BTreeMap::new();
        for g in self.groups.iter().filter(|g| g.slack_for.is_none()) {
            assignment.insert(g.var.clone(), g.value(bits));
        }
        let mut residuals: BTreeMap<String, i64> = BTreeMap::new();
        for p in &self.penalties {
            let r = p.residual(bits);
            if r != 0 {
                *residuals.entry(p.family().to_string()).or_insert(0) += r;
            }
        }
        Ok((assignment, residuals))
    }

    /// Encodes a full MILP assignment, choosing slack values that zero the
    /// penalties of satisfied constraints.
    pub fn encode(&self, assignment: &BTreeMap<String, i64>) -> Result<Vec<u8>> {
        let mut bits = vec![0u8; self.n];
        fn set_group(bits: &mut [u8], g: &BitGroup, value: i64) -> Result<()> {
            let mut rem = value - g.lower;
            if rem < 0 {
                return Err(Error::Build(format!("{} below lower bound", g.var)));
            }
            for (j, &w) in g.weights.iter().enumerate().rev() {
                if rem >= w {
                    bits[g.first_bit + j] = 1;
                    rem -= w;
                }
            }
            if rem != 0 {
                return Err(Error::Build(format!(
                    "value {value} not representable for {}",
                    g.var
                )));
            }
            Ok(())
        }
        for g in self.groups.iter().filter(|g| g.slack_for.is_none()) {
            let v = assignment
                .get(&g.var)
                .copied()
                .ok_or_else(|| Error::Build(format!("assignment missing {}", g.var)))?;
            set_group(&mut bits, g, v)?;
        }
        // slacks: s = -(expr + c - s_terms) evaluated on the now-set bits
        for g in self.groups.iter().filter(|g| g.slack_for.is_some()) {
            let ci = g.slack_for.unwrap();
            let p = &self.penalties[ci];
            let slack_bits: std::collections::BTreeSet<usize> =
                (g.first_bit..g.first_bit + g.weights.len()).collect();
            let expr: i64 = p.constant
                + p.terms
                    .iter()
                    .filter(|(b, _)| !slack_bits.contains(b))
                    .map(|&(b, a)| a * bits[b] as i64)
                    .sum::<i64>();
            let span: i64 = g.weights.iter().sum();
            let s = (-expr).clamp(0, span);
            set_group(&mut bits, g, s)?;
        }
        Ok(bits)
    }
}

/// Per-constraint-family penalty multipliers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltyWeights {
    pub default: f64,
    pub overrides: BTreeMap<String, f64>,
}

impl PenaltyWeights {
    pub fn uniform(lambda: f64) -> Self {
        PenaltyWeights {
            default: lambda,
            overrides: BTreeMap::new(),
        }
    }

    pub fn get(&self, family: &str) -> f64 {
        self.overrides.get(family).copied().unwrap_or(self.default)
    }

    pub fn validate(&self) -> Result<()> {
        if self.default <= 0.0 || self.overrides.values().any(|&l| l <= 0.0) {
            return Err(Error::Build("penalty weights must be positive".into()));
        }
        Ok(())
    }
}

/// `lambda = objective range over the box + 1` for every family: a single
/// unit of violation then always costs more than any objective gain.
pub fn auto_lambda(model: &MilpModel) -> PenaltyWeights {
    let (lo, hi) = model.objective_range();
    PenaltyWeights::uniform((hi - lo + 1) as f64)
}

/// Compiles a MILP into `Q = diag(c) + sum_i lambda_i P_i` over the binary
/// expansion of its variables.
pub fn milp_to_qubo(model: &MilpModel, lambda: &PenaltyWeights) -> Result<Qubo> {
    lambda.validate()?;
    let mut groups: Vec<BitGroup> = Vec::new();
    let mut var_group: Vec<usize> = Vec::new();
    let mut next_bit = 0usize;
    for v in &model.variables {
        let weights = binary_expand(v.lower, v.upper)?;
        var_group.push(groups.len());
        groups.push(BitGroup {
            var: v.name.clone(),
            lower: v.lower,
            first_bit: next_bit,
            weights: weights.clone(),
            slack_for: None,
        });
        next_bit += weights.len();
    }

    // expand each constraint to bit terms, adding slack bits for ranges
    let mut penalties: Vec<PenaltyTerm> = Vec::new();
    for cons in &model.constraints {
        let (box_lo, box_hi) = model.expr_range(&cons.coefficients);
        let lo = cons.lower.map_or(box_lo, |l| l.max(box_lo));
        let hi = cons.upper.map_or(box_hi, |u| u.min(box_hi));
        if lo > hi {
            return Err(Error::Build(format!(
                "constraint {} is unsatisfiable over the variable box",
                cons.tag
            )));
        }
        if lo <= box_lo && hi >= box_hi {
            continue; // vacuous over the box
        }
        let mut terms: Vec<(usize, i64)> = Vec::new();
        let mut constant: i64 = -hi;
        for (&v, &c) in &cons.coefficients {
            let g = &groups[var_group[v]];
            constant += c * g.lower;
            for (j, &w) in g.weights.iter().enumerate() {
                terms.push((g.first_bit + j, c * w));
            }
        }
        let ci = penalties.len();
        if hi > lo {
            let weights = binary_expand(0, hi - lo)?;
            for (j, &w) in weights.iter().enumerate() {
                terms.push((next_bit + j, w));
            }
            groups.push(BitGroup {
                var: format!("s.{ci}"),
                lower: 0,
                first_bit: next_bit,
                weights: weights.clone(),
                slack_for: Some(ci),
            });
            next_bit += weights.len();
        }
        penalties.push(PenaltyTerm {
            tag: cons.tag.clone(),
            terms,
            constant,
            lambda: lambda.get(cons.family()),
        });
    }

    let mut qubo = Qubo::zero(next_bit);
    // objective diagonal over bit weights
    for (&v, &c) in &model.objective {
        let g = &groups[var_group[v]];
        qubo.offset += (c * g.lower) as f64;
        for (j, &w) in g.weights.iter().enumerate() {
            let i = g.first_bit + j;
            qubo.add(i, i, (c * w) as f64);
        }
    }
    // squared penalties
    for p in &penalties {
        let l = p.lambda;
        qubo.offset += l * (p.constant * p.constant) as f64;
        for (idx, &(bi, a)) in p.terms.iter().enumerate() {
            qubo.add(bi, bi, l * (a * a + 2 * p.constant * a) as f64);
            for &(bj, a2) in &p.terms[idx + 1..] {
                if bi == bj {
                    // same bit appearing twice: b^2 = b stays diagonal
                    qubo.add(bi, bi, l * (2 * a * a2) as f64);
                } else {
                    qubo.add(bi, bj, l * (a * a2) as f64);
                }
            }
        }
    }
    qubo.groups = groups;
    qubo.penalties = penalties;
    Ok(qubo)
}
