//! Literal n²-qubit construction of the two-sided relabelling unitary, used
//! to anchor the compressed simulator: for n = 3 the full register space is
//! only 2^9 = 512 dimensional, so the subspace update can be compared
//! against the dense matrix action directly.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quantum::perm::{factorial, perm_unrank};
use crate::quantum::{PermutationState, SwapPair};

/// Register basis index of a bit grid `x_{i,j}`: bit (i, j) at position
/// `n*i + j`.
fn grid_index(bits: &[Vec<u8>]) -> usize {
    let n = bits.len();
    let mut idx = 0;
    for i in 0..n {
        for j in 0..n {
            if bits[i][j] == 1 {
                idx |= 1 << (n * i + j);
            }
        }
    }
    idx
}

fn grid_of(index: usize, n: usize) -> Vec<Vec<u8>> {
    (0..n)
        .map(|i| (0..n).map(|j| (index >> (n * i + j) & 1) as u8).collect())
        .collect()
}

/// Embeds a permutation-subspace state into the full 2^(n²) register space.
pub fn dense_embed(state: &PermutationState) -> Result<Vec<Complex64>> {
    let n = state.n;
    if n * n > 20 {
        return Err(Error::SizeLimit(format!("dense space for n = {n} is too large")));
    }
    let mut dense = vec![Complex64::new(0.0, 0.0); 1 << (n * n)];
    for (r, &amp) in state.amplitudes.iter().enumerate() {
        let p = perm_unrank(n, r);
        let mut grid = vec![vec![0u8; n]; n];
        for (t, &node) in p.iter().enumerate() {
            grid[t][node as usize] = 1;
        }
        dense[grid_index(&grid)] = amp;
    }
    Ok(dense)
}

/// Applies `e^{iθV}` to a dense register state, where V permutes grid bits
/// as `x'_{i,j} = x_{σ(i),τ(j)}`. V is an involution on basis states, so
/// orbits of size 2 rotate and fixed points take the phase `e^{iθ}`.
pub fn dense_apply_vswap(
    dense: &[Complex64],
    n: usize,
    pair: &SwapPair,
    theta: f64,
) -> Result<Vec<Complex64>> {
    if dense.len() != 1 << (n * n) {
        return Err(Error::Build("dense vector length mismatch".into()));
    }
    let image = |idx: usize| -> usize {
        let grid = grid_of(idx, n);
        let mapped: Vec<Vec<u8>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| grid[pair.sigma[i] as usize][pair.tau[j] as usize])
                    .collect()
            })
            .collect();
        grid_index(&mapped)
    };
    let (c, s) = (theta.cos(), theta.sin());
    let is_ = Complex64::new(0.0, s);
    let phase = Complex64::new(c, s);
    let mut out = dense.to_vec();
    for idx in 0..dense.len() {
        let jdx = image(idx);
        if jdx == idx {
            out[idx] = dense[idx] * phase;
        } else if idx < jdx {
            out[idx] = c * dense[idx] + is_ * dense[jdx];
            out[jdx] = c * dense[jdx] + is_ * dense[idx];
        }
    }
    Ok(out)
}

/// Projects a dense register state back onto the permutation subspace.
/// Errors if any amplitude lives outside it.
pub fn dense_project(dense: &[Complex64], n: usize) -> Result<PermutationState> {
    let mut state = PermutationState {
        n,
        amplitudes: vec![Complex64::new(0.0, 0.0); factorial(n)],
    };
    let mut seen = vec![false; dense.len()];
    for (r, amp) in state.amplitudes.iter_mut().enumerate() {
        let p = perm_unrank(n, r);
        let mut grid = vec![vec![0u8; n]; n];
        for (t, &node) in p.iter().enumerate() {
            grid[t][node as usize] = 1;
        }
        let idx = grid_index(&grid);
        *amp = dense[idx];
        seen[idx] = true;
    }
    for (idx, &a) in dense.iter().enumerate() {
        if !seen[idx] && a.norm() > 1e-10 {
            return Err(Error::Build(format!(
                "dense state leaked outside the permutation subspace at basis {idx}"
            )));
        }
    }
    Ok(state)
}
