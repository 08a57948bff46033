//! Q-SWAP: alternate a diagonal cost phase with an involution rotation whose
//! angle comes from a three-point sinusoid fit of the exact expectation.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::instance::TspInstance;
use crate::quantum::perm::{identity, random_involution, transposition};
use crate::quantum::{
    apply_phase, apply_vswap, average_ratio, expectation, PermutationState, SwapPair,
    TspHamiltonian,
};

/// Recovers `f(θ) = A + B cos(2θ - φ)` from f(0), f(π/4), f(π/2), with
/// B ≥ 0, and the minimizing angle θ* = (φ + π)/2 where f(θ*) = A - B.
pub fn fit_sinusoid(f0: f64, f45: f64, f90: f64) -> (f64, f64, f64, f64) {
    let a = (f0 + f90) / 2.0;
    let bc = f0 - a;
    let bs = f45 - a;
    let b = bc.hypot(bs);
    if b < 1e-15 {
        return (a, 0.0, 0.0, 0.0);
    }
    let phi = bs.atan2(bc);
    let theta_star = (phi + PI) / 2.0;
    (a, b, phi, theta_star)
}

/// Exact f(θ) for one candidate pair: expectation after rotating a copy.
fn f_at(state: &PermutationState, h: &TspHamiltonian, pair: &SwapPair, theta: f64) -> f64 {
    let mut copy = state.clone();
    apply_vswap(&mut copy, pair, theta).expect("pair pre-validated");
    expectation(&copy, h)
}

/// Three-point fit of a pair's landscape: returns (θ*, predicted minimum).
pub fn fitted_minimum(state: &PermutationState, h: &TspHamiltonian, pair: &SwapPair) -> (f64, f64) {
    let f0 = expectation(state, h);
    let f45 = f_at(state, h, pair, FRAC_PI_4);
    let f90 = f_at(state, h, pair, FRAC_PI_2);
    let (a, b, _, theta_star) = fit_sinusoid(f0, f45, f90);
    (theta_star, a - b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// τ fixed to the identity, σ sampled from uniform transpositions.
    Random1Swap { samples: usize },
    /// Alternating coordinate improvement of σ then τ over random
    /// involution proposals.
    RandomBoth { rounds: usize },
    /// Hill climb over pairs at involution distance 1: grow a transposition
    /// between fixed points or dissolve an existing 2-cycle.
    Mutations,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Random1Swap { .. } => "1swap",
            Strategy::RandomBoth { .. } => "both",
            Strategy::Mutations => "mutations",
        }
    }
}

pub fn strategy_random_1swap(
    state: &PermutationState,
    h: &TspHamiltonian,
    samples: usize,
    rng: &mut impl Rng,
) -> SwapPair {
    let n = state.n;
    let id = identity(n);
    let mut best = SwapPair::identity(n);
    let mut best_value = f64::INFINITY;
    let mut seen = std::collections::BTreeSet::new();
    for _ in 0..samples {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n - 1);
        let j = if j >= i { j + 1 } else { j };
        if !seen.insert((i.min(j), i.max(j))) {
            continue;
        }
        let pair = SwapPair {
            sigma: transposition(n, i, j),
            tau: id.clone(),
        };
        let (_, value) = fitted_minimum(state, h, &pair);
        if value < best_value {
            best_value = value;
            best = pair;
        }
    }
    best
}

const BOTH_PROPOSALS: usize = 8;

pub fn strategy_random_both(
    state: &PermutationState,
    h: &TspHamiltonian,
    rounds: usize,
    rng: &mut impl Rng,
) -> SwapPair {
    let n = state.n;
    let mut pair = SwapPair {
        sigma: random_involution(n, rng),
        tau: random_involution(n, rng),
    };
    let mut value = fitted_minimum(state, h, &pair).1;
    for round in 0..rounds {
        // even rounds re-propose sigma, odd rounds tau
        for _ in 0..BOTH_PROPOSALS {
            let mut candidate = pair.clone();
            if round % 2 == 0 {
                candidate.sigma = random_involution(n, rng);
            } else {
                candidate.tau = random_involution(n, rng);
            }
            let v = fitted_minimum(state, h, &candidate).1;
            if v < value {
                value = v;
                pair = candidate;
            }
        }
    }
    pair
}

/// Involutions one move away: toggle a 2-cycle on or off.
fn involution_neighbors(p: &[u8]) -> Vec<Vec<u8>> {
    let n = p.len();
    let fixed: Vec<usize> = (0..n).filter(|&i| p[i] as usize == i).collect();
    let mut out = Vec::new();
    for (a, &i) in fixed.iter().enumerate() {
        for &j in &fixed[a + 1..] {
            let mut q = p.to_vec();
            q.swap(i, j);
            out.push(q);
        }
    }
    for i in 0..n {
        if (p[i] as usize) > i {
            let mut q = p.to_vec();
            q.swap(i, p[i] as usize);
            out.push(q);
        }
    }
    out
}

pub fn strategy_mutations(
    state: &PermutationState,
    h: &TspHamiltonian,
    rng: &mut impl Rng,
) -> SwapPair {
    let n = state.n;
    let mut pair = SwapPair {
        sigma: random_involution(n, rng),
        tau: random_involution(n, rng),
    };
    let mut value = fitted_minimum(state, h, &pair).1;
    loop {
        let mut best_move: Option<(SwapPair, f64)> = None;
        for sigma in involution_neighbors(&pair.sigma) {
            let candidate = SwapPair {
                sigma,
                tau: pair.tau.clone(),
            };
            let v = fitted_minimum(state, h, &candidate).1;
            if v < best_move.as_ref().map_or(value, |(_, bv)| *bv) {
                best_move = Some((candidate, v));
            }
        }
        for tau in involution_neighbors(&pair.tau) {
            let candidate = SwapPair {
                sigma: pair.sigma.clone(),
                tau,
            };
            let v = fitted_minimum(state, h, &candidate).1;
            if v < best_move.as_ref().map_or(value, |(_, bv)| *bv) {
                best_move = Some((candidate, v));
            }
        }
        match best_move {
            Some((p, v)) if v < value - 1e-12 => {
                pair = p;
                value = v;
            }
            _ => return pair,
        }
    }
}

#[derive(Debug, Clone)]
pub struct QswapStep {
    pub pair: SwapPair,
    pub theta_star: f64,
    pub expectation: f64,
}

/// One phase-plus-rotation layer. The phase is diagonal, the rotation is
/// applied at its fitted exact minimum, so ⟨H⟩ cannot increase.
pub fn qswap_step(
    state: &mut PermutationState,
    h: &TspHamiltonian,
    delta: f64,
    strategy: Strategy,
    rng: &mut impl Rng,
) -> QswapStep {
    apply_phase(state, h, delta);
    let pair = match strategy {
        Strategy::Random1Swap { samples } => strategy_random_1swap(state, h, samples, rng),
        Strategy::RandomBoth { rounds } => strategy_random_both(state, h, rounds, rng),
        Strategy::Mutations => strategy_mutations(state, h, rng),
    };
    let (theta_star, _) = fitted_minimum(state, h, &pair);
    let before = expectation(state, h);
    let mut best_theta = theta_star;
    let mut best = f_at(state, h, &pair, theta_star);
    if before < best {
        // the fit is exact in θ, but guard against a degenerate pair anyway
        best_theta = 0.0;
        best = before;
    }
    apply_vswap(state, &pair, best_theta).expect("strategy pairs are involutions");
    QswapStep {
        pair,
        theta_star: best_theta,
        expectation: best,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArTracePoint {
    pub step: usize,
    pub expectation: f64,
    pub ar: f64,
    pub strategy: String,
    pub sigma: Vec<u8>,
    pub tau: Vec<u8>,
    pub theta_star: f64,
}

impl ArTracePoint {
    pub fn csv_header() -> &'static str {
        "step,expectation,ar,strategy,sigma,tau,theta_star"
    }

    pub fn csv_line(&self) -> String {
        let fmt = |p: &[u8]| {
            p.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        format!(
            "{},{},{},{},{},{},{}",
            self.step,
            self.expectation,
            self.ar,
            self.strategy,
            fmt(&self.sigma),
            fmt(&self.tau),
            self.theta_star
        )
    }
}

#[derive(Debug, Clone)]
pub struct QswapConfig {
    pub steps: usize,
    /// Phase angle per layer; `None` scales the spectrum to (0, π].
    pub delta: Option<f64>,
    pub strategy: Strategy,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct QswapRun {
    pub state: PermutationState,
    pub trace: Vec<ArTracePoint>,
    pub final_ar: f64,
}

const EARLY_STOP_WINDOW: usize = 5;
const EARLY_STOP_EPS: f64 = 1e-6;

/// Runs Q-SWAP from the uniform superposition with a fixed step budget and
/// early stop once improvement stalls.
pub fn run_qswap(tsp: &TspInstance, cfg: &QswapConfig) -> Result<QswapRun> {
    let h = TspHamiltonian::new(tsp)?;
    let mut state = PermutationState::uniform(tsp.n)?;
    let delta = cfg.delta.unwrap_or(PI / h.h_max.max(f64::MIN_POSITIVE));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut trace = vec![ArTracePoint {
        step: 0,
        expectation: expectation(&state, &h),
        ar: average_ratio(&state, &h)?,
        strategy: cfg.strategy.name().to_string(),
        sigma: vec![],
        tau: vec![],
        theta_star: 0.0,
    }];
    let mut stalled = 0;
    for step in 1..=cfg.steps {
        let before = expectation(&state, &h);
        let info = qswap_step(&mut state, &h, delta, cfg.strategy, &mut rng);
        trace.push(ArTracePoint {
            step,
            expectation: info.expectation,
            ar: average_ratio(&state, &h)?,
            strategy: cfg.strategy.name().to_string(),
            sigma: info.pair.sigma.clone(),
            tau: info.pair.tau.clone(),
            theta_star: info.theta_star,
        });
        if before - info.expectation < EARLY_STOP_EPS {
            stalled += 1;
            if stalled >= EARLY_STOP_WINDOW {
                break;
            }
        } else {
            stalled = 0;
        }
    }
    let final_ar = average_ratio(&state, &h)?;
    Ok(QswapRun {
        state,
        trace,
        final_ar,
    })
}
