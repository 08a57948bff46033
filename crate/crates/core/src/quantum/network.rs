//! Sorting-network ansatz: each comparator becomes a parameterized partial
//! swap of two route positions, so the circuit can reach every permutation
//! from the identity start state.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::TspInstance;
use crate::quantum::optimize::{minimize, OptimizeConfig, OptimizerKind};
use crate::quantum::perm::{identity, transposition};
use crate::quantum::{
    apply_vswap, expectation, ArTracePoint, PermutationState, SwapPair, TspHamiltonian,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortingNetwork {
    pub n: usize,
    pub comparators: Vec<(usize, usize)>,
}

impl SortingNetwork {
    pub fn parameter_count(&self) -> usize {
        self.comparators.len()
    }

    /// 0/1-principle check: a comparator network sorts all inputs iff it
    /// sorts every binary input.
    pub fn sorts_everything(&self) -> bool {
        if self.n > 20 {
            return false; // exhaustive check not attempted
        }
        for mask in 0u32..1 << self.n {
            let mut v: Vec<u8> = (0..self.n).map(|i| (mask >> i & 1) as u8).collect();
            for &(i, j) in &self.comparators {
                if v[i] > v[j] {
                    v.swap(i, j);
                }
            }
            if v.windows(2).any(|w| w[0] > w[1]) {
                return false;
            }
        }
        true
    }
}

/// Size-optimal networks for small n; 1, 3, 5, 9 and 12 comparators for
/// n = 2..6. Larger n falls back to odd-even mergesort.
fn optimal_table(n: usize) -> Option<Vec<(usize, usize)>> {
    Some(match n {
        2 => vec![(0, 1)],
        3 => vec![(0, 1), (0, 2), (1, 2)],
        4 => vec![(0, 1), (2, 3), (0, 2), (1, 3), (1, 2)],
        5 => vec![
            (0, 1),
            (3, 4),
            (2, 4),
            (2, 3),
            (1, 4),
            (0, 3),
            (0, 2),
            (1, 3),
            (1, 2),
        ],
        6 => vec![
            (1, 2),
            (4, 5),
            (0, 2),
            (3, 5),
            (0, 1),
            (3, 4),
            (2, 5),
            (0, 3),
            (1, 4),
            (2, 4),
            (1, 3),
            (2, 3),
        ],
        _ => return None,
    })
}

/// Batcher odd-even mergesort over the next power of two, dropping
/// comparators that touch padding wires; still sorts the first n wires.
fn batcher(n: usize) -> Vec<(usize, usize)> {
    let mut p2 = 1;
    while p2 < n {
        p2 *= 2;
    }
    let mut out = Vec::new();
    let mut p = 1;
    while p < p2 {
        let mut k = p;
        while k >= 1 {
            let mut j = k % p;
            while j <= p2 - 1 - k {
                for i in 0..=(k - 1).min(p2 - j - k - 1) {
                    if (i + j) / (2 * p) == (i + j + k) / (2 * p) {
                        let (a, b) = (i + j, i + j + k);
                        if a < n && b < n {
                            out.push((a, b));
                        }
                    }
                }
                j += 2 * k;
            }
            k /= 2;
        }
        p *= 2;
    }
    out
}

pub fn minimal_sorting_network(n: usize) -> Result<SortingNetwork> {
    if n < 2 {
        return Err(Error::Build("a sorting network needs at least 2 wires".into()));
    }
    let comparators = optimal_table(n).unwrap_or_else(|| batcher(n));
    let network = SortingNetwork { n, comparators };
    if n <= 16 && !network.sorts_everything() {
        return Err(Error::Build(format!("generated network fails to sort n = {n}")));
    }
    Ok(network)
}

/// Runs the ansatz from the identity basis state. Comparator (i, j) with
/// angle θ partially swaps route positions i and j: each |p⟩ mixes with
/// |p ∘ (i j)⟩ by cos θ / i sin θ.
pub fn vqe_apply(network: &SortingNetwork, params: &[f64]) -> Result<PermutationState> {
    if params.len() != network.comparators.len() {
        return Err(Error::Build(format!(
            "expected {} parameters, got {}",
            network.comparators.len(),
            params.len()
        )));
    }
    let n = network.n;
    let mut state = PermutationState::basis(&identity(n))?;
    let id = identity(n);
    for (&(i, j), &theta) in network.comparators.iter().zip(params) {
        let pair = SwapPair {
            sigma: transposition(n, i, j),
            tau: id.clone(),
        };
        apply_vswap(&mut state, &pair, theta)?;
    }
    Ok(state)
}

#[derive(Debug, Clone)]
pub struct VqeConfig {
    pub restarts: usize,
    pub max_evals: usize,
    pub optimizer: OptimizerKind,
    pub seed: u64,
}

impl VqeConfig {
    pub fn new(seed: u64) -> Self {
        VqeConfig {
            restarts: 10,
            max_evals: 2000,
            optimizer: OptimizerKind::NelderMead,
            seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct VqeRun {
    pub best_params: Vec<f64>,
    pub best_ar: f64,
    /// One point per objective evaluation across all restarts.
    pub trace: Vec<ArTracePoint>,
}

/// Minimizes the exact expectation over the ansatz parameters with
/// independent seeded restarts; records AR at every evaluation.
pub fn vqe_optimize(
    network: &SortingNetwork,
    tsp: &TspInstance,
    cfg: &VqeConfig,
) -> Result<VqeRun> {
    let h = TspHamiltonian::new(tsp)?;
    if h.h_min <= 0.0 {
        return Err(Error::Build("tour costs must be strictly positive".into()));
    }
    let dim = network.parameter_count();
    let mut trace: Vec<ArTracePoint> = Vec::new();
    let mut best_params = vec![0.0; dim];
    let mut best_value = f64::INFINITY;
    for r in 0..cfg.restarts {
        let mut rng =
            ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add((r as u64).wrapping_mul(0x9E37_79B9)));
        let start: Vec<f64> = (0..dim)
            .map(|_| rng.gen_range(0.0..std::f64::consts::PI))
            .collect();
        let mut objective = |params: &[f64]| -> f64 {
            let state = vqe_apply(network, params).expect("dimension fixed");
            let e = expectation(&state, &h);
            trace.push(ArTracePoint {
                step: trace.len(),
                expectation: e,
                ar: e / h.h_min,
                strategy: "vqe".to_string(),
                sigma: vec![],
                tau: vec![],
                theta_star: 0.0,
            });
            e
        };
        let opt = OptimizeConfig {
            max_evals: cfg.max_evals,
            kind: cfg.optimizer,
        };
        let (params, value) = minimize(&mut objective, &start, &opt);
        if value < best_value {
            best_value = value;
            best_params = params;
        }
    }
    Ok(VqeRun {
        best_params,
        best_ar: best_value / h.h_min,
        trace,
    })
}

/// Angles in {0, π/2} reaching the target basis state: sorting the target's
/// inverse records exactly the comparators whose full swap reproduces the
/// target from the identity start state.
pub fn reaching_params(network: &SortingNetwork, target: &[u8]) -> Option<Vec<f64>> {
    let mut inv = vec![0u8; target.len()];
    for (i, &v) in target.iter().enumerate() {
        inv[v as usize] = i as u8;
    }
    let mut swapped = vec![false; network.comparators.len()];
    for (k, &(i, j)) in network.comparators.iter().enumerate() {
        if inv[i] > inv[j] {
            inv.swap(i, j);
            swapped[k] = true;
        }
    }
    if inv.windows(2).any(|w| w[0] > w[1]) {
        return None;
    }
    Some(
        swapped
            .iter()
            .map(|&s| if s { std::f64::consts::FRAC_PI_2 } else { 0.0 })
            .collect(),
    )
}
