//! Permutations of {0..n-1} as `Vec<u8>`, ranked by Lehmer code so the
//! statevector index of a permutation is stable and dense.

use rand::Rng;

pub fn factorial(n: usize) -> usize {
    (1..=n).product()
}

pub fn identity(n: usize) -> Vec<u8> {
    (0..n as u8).collect()
}

pub fn transposition(n: usize, i: usize, j: usize) -> Vec<u8> {
    let mut p = identity(n);
    p.swap(i, j);
    p
}

/// `compose(f, g)(i) = f(g(i))`.
pub fn compose(f: &[u8], g: &[u8]) -> Vec<u8> {
    g.iter().map(|&i| f[i as usize]).collect()
}

pub fn is_involution(p: &[u8]) -> bool {
    p.iter()
        .enumerate()
        .all(|(i, &v)| (v as usize) < p.len() && p[v as usize] as usize == i)
}

/// Lehmer-code rank: index of `p` in lexicographic order, in `0..n!`.
pub fn perm_rank(p: &[u8]) -> usize {
    let n = p.len();
    let mut rank = 0;
    for i in 0..n {
        let smaller = p[i + 1..].iter().filter(|&&x| x < p[i]).count();
        rank += smaller * factorial(n - 1 - i);
    }
    rank
}

pub fn perm_unrank(n: usize, mut rank: usize) -> Vec<u8> {
    let mut pool: Vec<u8> = (0..n as u8).collect();
    let mut out = Vec::with_capacity(n);
    for i in (0..n).rev() {
        let f = factorial(i);
        let idx = rank / f;
        rank %= f;
        out.push(pool.remove(idx));
    }
    out
}

/// Random involution built as a random partial matching: every cycle has
/// length at most 2.
pub fn random_involution(n: usize, rng: &mut impl Rng) -> Vec<u8> {
    let mut order: Vec<u8> = (0..n as u8).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    let mut p = identity(n);
    let mut i = 0;
    while i + 1 < n {
        if rng.gen_bool(0.5) {
            let (a, b) = (order[i] as usize, order[i + 1] as usize);
            p.swap(a, b);
            i += 2;
        } else {
            i += 1;
        }
    }
    p
}
