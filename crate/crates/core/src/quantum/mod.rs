//! Statevector simulator restricted to the permutation subspace of the
//! time-indexed travelling-salesman encoding.
//!
//! A route visiting node `p(t)` at step `t` is the basis state `|p⟩`; the
//! full register space never mixes permutation states with anything else
//! under the gates used here, so the simulator stores one complex amplitude
//! per permutation (n! of them) instead of 2^(n^2).

mod dense;
mod network;
mod optimize;
pub mod perm;
mod qswap;

pub use dense::{dense_apply_vswap, dense_embed, dense_project};
pub use network::{
    minimal_sorting_network, reaching_params, vqe_apply, vqe_optimize, SortingNetwork, VqeConfig,
    VqeRun,
};
pub use optimize::{minimize, OptimizeConfig, OptimizerKind};
pub use qswap::{
    fit_sinusoid, fitted_minimum, qswap_step, run_qswap, strategy_mutations,
    strategy_random_1swap, strategy_random_both, ArTracePoint, QswapConfig, QswapRun, QswapStep,
    Strategy,
};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::instance::TspInstance;
use perm::{compose, factorial, is_involution, perm_rank, perm_unrank};

/// Amplitude cap: 8! = 40320 amplitudes.
pub const STATE_NODE_CAP: usize = 8;

/// Statevector over the n! permutation basis states, Lehmer-indexed.
#[derive(Debug, Clone, PartialEq)]
pub struct PermutationState {
    pub n: usize,
    pub amplitudes: Vec<Complex64>,
}

impl PermutationState {
    /// `(1/sqrt(n!)) * sum_p |p>`.
    pub fn uniform(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Build("need at least 2 nodes".into()));
        }
        if n > STATE_NODE_CAP {
            return Err(Error::SizeLimit(format!(
                "{n} nodes exceed the {STATE_NODE_CAP}-node simulator cap"
            )));
        }
        let len = factorial(n);
        let amp = Complex64::new(1.0 / (len as f64).sqrt(), 0.0);
        Ok(PermutationState {
            n,
            amplitudes: vec![amp; len],
        })
    }

    /// Basis state `|p⟩`.
    pub fn basis(p: &[u8]) -> Result<Self> {
        let n = p.len();
        if n < 2 || n > STATE_NODE_CAP {
            return Err(Error::SizeLimit(format!("bad node count {n}")));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); factorial(n)];
        amplitudes[perm_rank(p)] = Complex64::new(1.0, 0.0);
        Ok(PermutationState { n, amplitudes })
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Both permutations must square to the identity so that the two-sided
/// relabelling `|p⟩ → |σ p τ⟩` is its own inverse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwapPair {
    pub sigma: Vec<u8>,
    pub tau: Vec<u8>,
}

impl SwapPair {
    pub fn new(sigma: Vec<u8>, tau: Vec<u8>) -> Result<Self> {
        if !is_involution(&sigma) || !is_involution(&tau) {
            return Err(Error::Build("swap pair permutations must be involutions".into()));
        }
        if sigma.len() != tau.len() {
            return Err(Error::Build("swap pair length mismatch".into()));
        }
        Ok(SwapPair { sigma, tau })
    }

    pub fn identity(n: usize) -> Self {
        SwapPair {
            sigma: perm::identity(n),
            tau: perm::identity(n),
        }
    }

    /// Image of `|p⟩` under the relabelling: route matrix entry (i, j) moves
    /// to (sigma(i), tau(j)), i.e. p ↦ tau ∘ p ∘ sigma.
    pub fn map(&self, p: &[u8]) -> Vec<u8> {
        compose(&self.tau, &compose(p, &self.sigma))
    }
}

/// Diagonal route-cost Hamiltonian: entry(p) is the cyclic tour cost of p.
#[derive(Debug, Clone, PartialEq)]
pub struct TspHamiltonian {
    pub n: usize,
    pub route_cost: Vec<f64>,
    pub h_min: f64,
    pub h_max: f64,
}

impl TspHamiltonian {
    pub fn new(tsp: &TspInstance) -> Result<Self> {
        let n = tsp.n;
        if n < 2 || n > STATE_NODE_CAP {
            return Err(Error::SizeLimit(format!(
                "{n} nodes outside the simulator's [2, {STATE_NODE_CAP}] range"
            )));
        }
        let route_cost: Vec<f64> = (0..factorial(n))
            .map(|r| {
                let p = perm_unrank(n, r);
                (0..n)
                    .map(|t| tsp.d[p[t] as usize][p[(t + 1) % n] as usize])
                    .sum()
            })
            .collect();
        let h_min = route_cost.iter().copied().fold(f64::INFINITY, f64::min);
        let h_max = route_cost.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(TspHamiltonian {
            n,
            route_cost,
            h_min,
            h_max,
        })
    }

    pub fn cost(&self, p: &[u8]) -> f64 {
        self.route_cost[perm_rank(p)]
    }
}

/// `amp(p) *= exp(i * delta * cost(p))`; diagonal, so ⟨H⟩ is unchanged.
pub fn apply_phase(state: &mut PermutationState, h: &TspHamiltonian, delta: f64) {
    assert_eq!(state.amplitudes.len(), h.route_cost.len());
    for (a, &c) in state.amplitudes.iter_mut().zip(&h.route_cost) {
        *a *= Complex64::from_polar(1.0, delta * c);
    }
}

/// `e^{i θ V} = cos θ · I + i sin θ · V`, valid because V is an involution:
/// two-element orbits {p, σpτ} rotate in a 2x2 block, fixed points pick up
/// the scalar phase `e^{iθ}`.
pub fn apply_vswap(state: &mut PermutationState, pair: &SwapPair, theta: f64) -> Result<()> {
    if pair.sigma.len() != state.n {
        return Err(Error::Build("swap pair size does not match state".into()));
    }
    if !is_involution(&pair.sigma) || !is_involution(&pair.tau) {
        return Err(Error::Build("swap pair permutations must be involutions".into()));
    }
    let (c, s) = (theta.cos(), theta.sin());
    let is_ = Complex64::new(0.0, s);
    let phase = Complex64::new(c, s);
    for ip in 0..state.amplitudes.len() {
        let p = perm_unrank(state.n, ip);
        let jp = perm_rank(&pair.map(&p));
        if jp == ip {
            state.amplitudes[ip] *= phase;
        } else if ip < jp {
            let (a, b) = (state.amplitudes[ip], state.amplitudes[jp]);
            state.amplitudes[ip] = c * a + is_ * b;
            state.amplitudes[jp] = c * b + is_ * a;
        }
    }
    Ok(())
}

/// Exact `⟨ψ|H|ψ⟩ = Σ_p |amp(p)|² cost(p)`.
pub fn expectation(state: &PermutationState, h: &TspHamiltonian) -> f64 {
    state
        .amplitudes
        .iter()
        .zip(&h.route_cost)
        .map(|(a, &c)| a.norm_sqr() * c)
        .sum()
}

/// `AR = ⟨H⟩ / h_min`; equals 1 exactly on the ground state.
pub fn average_ratio(state: &PermutationState, h: &TspHamiltonian) -> Result<f64> {
    if h.h_min <= 0.0 {
        return Err(Error::Build(
            "average ratio needs a strictly positive minimum tour cost".into(),
        ));
    }
    Ok(expectation(state, h) / h.h_min)
}

/// Born-rule sampling; tours are reported in canonical rotation starting at
/// node 0 and sorted by ascending cost.
pub fn sample_routes(
    state: &PermutationState,
    h: &TspHamiltonian,
    shots: usize,
    rng: &mut impl rand::Rng,
) -> Vec<(Vec<u8>, f64)> {
    let mut out = Vec::with_capacity(shots);
    for _ in 0..shots {
        let mut u: f64 = rng.gen::<f64>();
        let mut idx = state.amplitudes.len() - 1;
        for (i, a) in state.amplitudes.iter().enumerate() {
            u -= a.norm_sqr();
            if u <= 0.0 {
                idx = i;
                break;
            }
        }
        let p = perm_unrank(state.n, idx);
        let cost = h.route_cost[idx];
        out.push((canonical_rotation(&p), cost));
    }
    out.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    out
}

/// Rotates a cyclic tour so it starts at node 0.
pub fn canonical_rotation(p: &[u8]) -> Vec<u8> {
    let start = p.iter().position(|&x| x == 0).unwrap_or(0);
    (0..p.len()).map(|i| p[(start + i) % p.len()]).collect()
}

#[cfg(test)]
mod tests;
