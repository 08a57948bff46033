//! Exhaustive ground-truth solvers for small QUBOs and MILPs.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::milp::MilpModel;
use crate::qubo::Qubo;
use crate::solvers::SolveResult;

pub const BRUTE_FORCE_BIT_CAP: usize = 26;

/// Exact minimum by Gray-code enumeration: successive bitstrings differ in
/// one bit, so each step is a single incremental flip.
pub fn brute_force(qubo: &Qubo) -> Result<SolveResult> {
    brute_force_capped(qubo, BRUTE_FORCE_BIT_CAP)
}

pub fn brute_force_capped(qubo: &Qubo, cap: usize) -> Result<SolveResult> {
    let start = Instant::now();
    let n = qubo.n;
    if n > cap {
        return Err(Error::SizeLimit(format!(
            "brute force over {n} bits exceeds the {cap}-bit cap"
        )));
    }
    let mut bits = vec![0u8; n];
    let mut field = vec![0.0; n]; // sum_{j != i} Q_ij x_j
    let mut energy = qubo.offset;
    let mut best_bits = bits.clone();
    let mut best_energy = energy;
    for k in 1u64..1u64 << n {
        let i = k.trailing_zeros() as usize; // Gray-code flip position
        let s = if bits[i] == 0 { 1.0 } else { -1.0 };
        energy += s * (qubo.entry(i, i) + 2.0 * field[i]);
        bits[i] ^= 1;
        for j in 0..n {
            if j != i {
                field[j] += s * qubo.entry(i, j);
            }
        }
        if energy < best_energy {
            best_energy = energy;
            best_bits = bits.clone();
        }
    }
    Ok(SolveResult::finish(
        best_bits,
        qubo,
        vec![best_energy],
        start,
    ))
}

pub const BRUTE_FORCE_STATE_CAP: u128 = 50_000_000;

/// Exact MILP minimum by odometer enumeration over the variable box.
/// Returns `None` when no assignment is feasible.
pub fn brute_force_milp(model: &MilpModel) -> Result<Option<(Vec<i64>, i64)>> {
    let mut states: u128 = 1;
    for v in &model.variables {
        states = states.saturating_mul((v.upper - v.lower + 1) as u128);
        if states > BRUTE_FORCE_STATE_CAP {
            return Err(Error::SizeLimit(format!(
                "variable box exceeds {BRUTE_FORCE_STATE_CAP} states"
            )));
        }
    }
    let mut a: Vec<i64> = model.variables.iter().map(|v| v.lower).collect();
    let mut best: Option<(Vec<i64>, i64)> = None;
    loop {
        if model.constraints.iter().all(|c| c.satisfied_by(&a)) {
            let value = model.objective_value(&a);
            if best.as_ref().map_or(true, |(_, b)| value < *b) {
                best = Some((a.clone(), value));
            }
        }
        let mut i = 0;
        loop {
            if i == a.len() {
                return Ok(best);
            }
            if a[i] < model.variables[i].upper {
                a[i] += 1;
                break;
            }
            a[i] = model.variables[i].lower;
            i += 1;
        }
    }
}
