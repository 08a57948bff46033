use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::perm::*;
use super::*;
use crate::samples;

fn tsp3() -> crate::instance::TspInstance {
    crate::instance::TspInstance::from_matrix(vec![
        vec![0.0, 1.0, 4.0],
        vec![1.0, 0.0, 2.0],
        vec![4.0, 2.0, 0.0],
    ])
    .unwrap()
}

fn random_state(n: usize, rng: &mut impl Rng) -> PermutationState {
    let mut s = PermutationState::uniform(n).unwrap();
    for a in s.amplitudes.iter_mut() {
        *a = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    }
    let norm = s.norm();
    for a in s.amplitudes.iter_mut() {
        *a /= norm;
    }
    s
}

#[test]
fn uniform_superposition_shape() {
    let s = PermutationState::uniform(3).unwrap();
    assert_eq!(s.amplitudes.len(), 6);
    let expect = 1.0 / 6f64.sqrt();
    for a in &s.amplitudes {
        assert!((a.re - expect).abs() < 1e-12 && a.im == 0.0);
    }
    assert_eq!(PermutationState::uniform(6).unwrap().amplitudes.len(), 720);
    assert!((PermutationState::uniform(5).unwrap().norm() - 1.0).abs() < 1e-12);
    assert!(PermutationState::uniform(1).is_err());
    assert!(PermutationState::uniform(9).is_err());
}

#[test]
fn phase_gate_is_diagonal() {
    let h = TspHamiltonian::new(&samples::tsp6()).unwrap();
    let mut s = PermutationState::uniform(6).unwrap();
    let before = s.clone();
    apply_phase(&mut s, &h, 0.0);
    assert_eq!(s, before);
    let e0 = expectation(&s, &h);
    apply_phase(&mut s, &h, 0.7);
    assert!((expectation(&s, &h) - e0).abs() < 1e-9);
    assert!((s.norm() - 1.0).abs() < 1e-10);
}

#[test]
fn default_delta_scales_phases_into_zero_pi() {
    let h = TspHamiltonian::new(&samples::tsp6()).unwrap();
    let delta = PI / h.h_max;
    for &c in &h.route_cost {
        let phase = delta * c;
        assert!(phase > 0.0 && phase <= PI + 1e-12, "phase {phase}");
    }
}

#[test]
fn vswap_quarter_turn_swaps_amplitudes() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let s0 = random_state(4, &mut rng);
    let pair = SwapPair::new(transposition(4, 0, 2), transposition(4, 1, 3)).unwrap();
    let mut s = s0.clone();
    apply_vswap(&mut s, &pair, FRAC_PI_2).unwrap();
    for r in 0..s.amplitudes.len() {
        let p = perm_unrank(4, r);
        let partner = perm_rank(&pair.map(&p));
        let expect = Complex64::new(0.0, 1.0) * s0.amplitudes[partner];
        assert!((s.amplitudes[r] - expect).norm() < 1e-10);
    }
}

#[test]
fn vswap_identity_pair_is_global_phase() {
    let h = TspHamiltonian::new(&tsp3()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let s0 = random_state(3, &mut rng);
    let mut s = s0.clone();
    apply_vswap(&mut s, &SwapPair::identity(3), 0.9).unwrap();
    let e0 = expectation(&s0, &h);
    assert!((expectation(&s, &h) - e0).abs() < 1e-10);
    let phase = Complex64::from_polar(1.0, 0.9);
    for (a, b) in s.amplitudes.iter().zip(&s0.amplitudes) {
        assert!((a - phase * b).norm() < 1e-10);
    }
}

#[test]
fn vswap_theta_then_minus_theta_is_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let s0 = random_state(5, &mut rng);
        let pair = SwapPair::new(random_involution(5, &mut rng), random_involution(5, &mut rng))
            .unwrap();
        let theta = rng.gen_range(-2.0..2.0);
        let mut s = s0.clone();
        apply_vswap(&mut s, &pair, theta).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-10);
        apply_vswap(&mut s, &pair, -theta).unwrap();
        let diff: f64 = s
            .amplitudes
            .iter()
            .zip(&s0.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .sum();
        assert!(diff < 1e-10);
    }
}

#[test]
fn vswap_rejects_non_involutions() {
    let mut s = PermutationState::uniform(3).unwrap();
    let pair = SwapPair {
        sigma: vec![1, 2, 0],
        tau: identity(3),
    };
    assert!(apply_vswap(&mut s, &pair, 0.5).is_err());
    assert!(SwapPair::new(vec![1, 2, 0], identity(3)).is_err());
}

#[test]
fn expectation_matches_direct_enumeration() {
    let h = TspHamiltonian::new(&samples::tsp6()).unwrap();
    let uniform = PermutationState::uniform(6).unwrap();
    let mean: f64 = h.route_cost.iter().sum::<f64>() / 720.0;
    assert!((expectation(&uniform, &h) - mean).abs() < 1e-9);

    let p = vec![2u8, 0, 1, 3, 4, 5];
    let basis = PermutationState::basis(&p).unwrap();
    assert!((expectation(&basis, &h) - h.cost(&p)).abs() < 1e-12);
}

#[test]
fn average_ratio_basics() {
    let h = TspHamiltonian::new(&tsp3()).unwrap();
    let ground = h
        .route_cost
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .unwrap()
        .0;
    let basis = PermutationState::basis(&perm_unrank(3, ground)).unwrap();
    assert!((average_ratio(&basis, &h).unwrap() - 1.0).abs() < 1e-12);

    let uniform = PermutationState::uniform(3).unwrap();
    assert!(average_ratio(&uniform, &h).unwrap() >= 1.0);

    let degenerate = crate::instance::TspInstance::from_matrix(vec![
        vec![0.0, 0.0],
        vec![0.0, 0.0],
    ])
    .unwrap();
    let h0 = TspHamiltonian::new(&degenerate).unwrap();
    assert!(average_ratio(&uniform_2(), &h0).is_err());
}

fn uniform_2() -> PermutationState {
    PermutationState::uniform(2).unwrap()
}

#[test]
fn sinusoid_fit_examples() {
    let (a, b, phi, theta) = fit_sinusoid(3.0, 2.0, 1.0);
    assert!((a - 2.0).abs() < 1e-12);
    assert!((b - 1.0).abs() < 1e-12);
    assert!(phi.abs() < 1e-12);
    assert!((theta - FRAC_PI_2).abs() < 1e-12);

    let (_, b, _, theta) = fit_sinusoid(4.0, 4.0, 4.0);
    assert_eq!(b, 0.0);
    assert_eq!(theta, 0.0);
}

#[test]
fn sinusoid_fit_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..100 {
        let a = rng.gen_range(-5.0..5.0);
        let b = rng.gen_range(0.1..3.0);
        let phi = rng.gen_range(-PI..PI);
        let f = |t: f64| a + b * (2.0 * t - phi).cos();
        let (a2, b2, phi2, _) = fit_sinusoid(f(0.0), f(PI / 4.0), f(FRAC_PI_2));
        assert!((a - a2).abs() < 1e-9);
        assert!((b - b2).abs() < 1e-9);
        let mut dphi = (phi - phi2).rem_euclid(2.0 * PI);
        if dphi > PI {
            dphi -= 2.0 * PI;
        }
        assert!(dphi.abs() < 1e-9, "phi {phi} vs {phi2}");
    }
}

#[test]
fn exact_f_obeys_the_sinusoid_law() {
    let h = TspHamiltonian::new(&samples::tsp6()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let s = random_state(6, &mut rng);
        let pair = SwapPair::new(random_involution(6, &mut rng), random_involution(6, &mut rng))
            .unwrap();
        let f = |theta: f64| {
            let mut c = s.clone();
            apply_vswap(&mut c, &pair, theta).unwrap();
            expectation(&c, &h)
        };
        let (a, b, phi, _) = fit_sinusoid(f(0.0), f(PI / 4.0), f(FRAC_PI_2));
        for k in 0..8 {
            let theta = k as f64 * PI / 8.0;
            let predicted = a + b * (2.0 * theta - phi).cos();
            assert!((f(theta) - predicted).abs() < 1e-9);
        }
    }
}

#[test]
fn qswap_expectation_never_increases() {
    let tsp = samples::tsp6();
    for strategy in [
        Strategy::Random1Swap { samples: 5 },
        Strategy::RandomBoth { rounds: 2 },
        Strategy::Mutations,
    ] {
        let run = run_qswap(
            &tsp,
            &QswapConfig {
                steps: 15,
                delta: None,
                strategy,
                seed: 9,
            },
        )
        .unwrap();
        for w in run.trace.windows(2) {
            assert!(
                w[1].expectation <= w[0].expectation + 1e-9,
                "{} rose to {}",
                w[0].expectation,
                w[1].expectation
            );
        }
        assert!(run.final_ar >= 1.0 - 1e-12);
    }
}

#[test]
fn exhaustive_1swap_matches_enumeration() {
    let h = TspHamiltonian::new(&tsp3()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let s = random_state(3, &mut rng);
    // enough samples to draw every transposition with near certainty
    let best = strategy_random_1swap(&s, &h, 500, &mut rng);
    let id = identity(3);
    let mut best_value = f64::INFINITY;
    for i in 0..3 {
        for j in i + 1..3 {
            let pair = SwapPair::new(transposition(3, i, j), id.clone()).unwrap();
            let v = fitted_minimum(&s, &h, &pair).1;
            best_value = best_value.min(v);
        }
    }
    let sampled_value = fitted_minimum(&s, &h, &best).1;
    assert!((sampled_value - best_value).abs() < 1e-9);
}

#[test]
fn network_sizes_match_known_optima() {
    for (n, size) in [(2usize, 1usize), (3, 3), (4, 5), (5, 9), (6, 12)] {
        let net = minimal_sorting_network(n).unwrap();
        assert_eq!(net.comparators.len(), size, "n = {n}");
        assert!(net.sorts_everything());
    }
    for n in 7..=9 {
        assert!(minimal_sorting_network(n).unwrap().sorts_everything());
    }
    assert!(minimal_sorting_network(1).is_err());
}

#[test]
fn vqe_apply_endpoints() {
    let net = minimal_sorting_network(4).unwrap();
    let zeros = vec![0.0; net.parameter_count()];
    let s = vqe_apply(&net, &zeros).unwrap();
    assert!((s.amplitudes[perm_rank(&identity(4))].norm() - 1.0).abs() < 1e-12);

    // all comparators at pi/2 compose the full swaps classically
    let full = vec![FRAC_PI_2; net.parameter_count()];
    let s = vqe_apply(&net, &full).unwrap();
    let mut p = identity(4);
    for &(i, j) in &net.comparators {
        p.swap(i, j);
    }
    let idx = perm_rank(&p);
    assert!((s.amplitudes[idx].norm() - 1.0).abs() < 1e-10);
    assert!((s.norm() - 1.0).abs() < 1e-10);
    assert!(vqe_apply(&net, &[0.0]).is_err());
}

#[test]
fn sorting_network_reaches_every_permutation() {
    for n in 2..=5 {
        let net = minimal_sorting_network(n).unwrap();
        for r in 0..factorial(n) {
            let target = perm_unrank(n, r);
            let params = reaching_params(&net, &target).expect("network sorts everything");
            let s = vqe_apply(&net, &params).unwrap();
            assert!(
                (s.amplitudes[r].norm() - 1.0).abs() < 1e-9,
                "n = {n}, target {target:?}"
            );
        }
    }
}

#[test]
fn vqe_converges_on_two_nodes() {
    let tsp = crate::instance::TspInstance::from_matrix(vec![
        vec![0.0, 3.0],
        vec![3.0, 0.0],
    ])
    .unwrap();
    let net = minimal_sorting_network(2).unwrap();
    let run = vqe_optimize(&net, &tsp, &VqeConfig::new(1)).unwrap();
    assert!((run.best_ar - 1.0).abs() < 1e-6, "AR {}", run.best_ar);
}

#[test]
fn dense_embedding_agrees_with_subspace_vswap() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let s = random_state(3, &mut rng);
        let pair = SwapPair::new(random_involution(3, &mut rng), random_involution(3, &mut rng))
            .unwrap();
        let theta = rng.gen_range(-2.0..2.0);
        let dense = dense_embed(&s).unwrap();
        let dense = dense_apply_vswap(&dense, 3, &pair, theta).unwrap();
        let projected = dense_project(&dense, 3).unwrap();
        let mut direct = s.clone();
        apply_vswap(&mut direct, &pair, theta).unwrap();
        let diff: f64 = projected
            .amplitudes
            .iter()
            .zip(&direct.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .sum();
        assert!(diff < 1e-10, "diff {diff}");
    }
}

#[test]
fn sampling_basics() {
    let h = TspHamiltonian::new(&samples::tsp6()).unwrap();
    let p = vec![3u8, 1, 0, 2, 4, 5];
    let basis = PermutationState::basis(&p).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let shots = sample_routes(&basis, &h, 50, &mut rng);
    assert_eq!(shots.len(), 50);
    let canon = canonical_rotation(&p);
    assert_eq!(canon[0], 0);
    for (tour, cost) in &shots {
        assert_eq!(*tour, canon);
        assert!((cost - h.cost(&p)).abs() < 1e-12);
    }
}

#[test]
fn uniform_sampling_is_roughly_uniform() {
    let h = TspHamiltonian::new(&tsp3()).unwrap();
    let s = PermutationState::uniform(3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let shots = 60_000usize;
    let mut counts = std::collections::BTreeMap::new();
    for _ in 0..shots / 100 {
        for (tour, _) in sample_routes(&s, &h, 100, &mut rng) {
            *counts.entry(tour).or_insert(0usize) += 1;
        }
    }
    // 6 permutations collapse to 2 canonical cyclic classes of 3 each
    assert_eq!(counts.len(), 2);
    let expect = shots as f64 / 2.0;
    let chi2: f64 = counts
        .values()
        .map(|&c| (c as f64 - expect).powi(2) / expect)
        .sum();
    assert!(chi2 < 10.83, "chi-square {chi2}"); // p = 0.001, 1 dof
}
