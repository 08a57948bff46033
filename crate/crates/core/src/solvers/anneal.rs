//! Single-bit-flip simulated annealing over a dense QUBO.
//!
//! Penalty-compiled QUBOs (matrix = objective diagonal + squared penalty
//! terms) get a structured engine: proposals flip one model bit and
//! deterministically re-point the slack registers of the touched
//! constraints at their penalty-minimizing values, so the Metropolis test
//! sees the true violation cost instead of an uncompensated big-M jump.
//! Arbitrary matrices fall back to a plain local-field engine.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::qubo::Qubo;

/// Geometric inverse-temperature schedule with independent restarts.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnealSchedule {
    pub sweeps: u32,
    pub beta_start: f64,
    pub beta_end: f64,
    pub restarts: u32,
    pub seed: u64,
}

impl AnnealSchedule {
    pub fn new(seed: u64) -> Self {
        AnnealSchedule {
            sweeps: 2000,
            beta_start: 5e-4,
            beta_end: 0.5,
            restarts: 100,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta_start > 0.0 && self.beta_end >= self.beta_start) {
            return Err(Error::Build(
                "annealing requires beta_end >= beta_start > 0".into(),
            ));
        }
        if self.sweeps == 0 || self.restarts == 0 {
            return Err(Error::Build("annealing requires sweeps, restarts >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub best_bits: Vec<u8>,
    pub best_energy: f64,
    /// No penalty term has a nonzero residual on `best_bits`.
    pub feasible: bool,
    /// Best energy found so far after each restart; non-increasing.
    pub restart_trace: Vec<f64>,
    pub wall_time: Duration,
}

impl SolveResult {
    pub(crate) fn finish(bits: Vec<u8>, qubo: &Qubo, trace: Vec<f64>, start: Instant) -> Self {
        let energy = qubo.energy(&bits).expect("bits sized by solver");
        let feasible = qubo.penalties.iter().all(|p| p.residual(&bits) == 0);
        SolveResult {
            best_bits: bits,
            best_energy: energy,
            feasible,
            restart_trace: trace,
            wall_time: start.elapsed(),
        }
    }
}

/// Local-field view of a QUBO: `field[i] = sum_{j != i} Q_ij x_j`, so a flip
/// of bit i changes the energy by `s * (Q_ii + 2 field[i])`.
struct FlipState<'a> {
    qubo: &'a Qubo,
    bits: Vec<u8>,
    field: Vec<f64>,
    energy: f64,
}

impl<'a> FlipState<'a> {
    fn new(qubo: &'a Qubo, bits: Vec<u8>) -> Self {
        let n = qubo.n;
        let mut field = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                if i != j && bits[j] == 1 {
                    field[i] += qubo.entry(i, j);
                }
            }
        }
        let energy = qubo.energy(&bits).expect("sized");
        FlipState {
            qubo,
            bits,
            field,
            energy,
        }
    }

    fn delta(&self, i: usize) -> f64 {
        let s = if self.bits[i] == 0 { 1.0 } else { -1.0 };
        s * (self.qubo.entry(i, i) + 2.0 * self.field[i])
    }

    fn flip(&mut self, i: usize) {
        self.energy += self.delta(i);
        let s = if self.bits[i] == 0 { 1.0 } else { -1.0 };
        self.bits[i] ^= 1;
        for j in 0..self.qubo.n {
            if j != i {
                self.field[j] += s * self.qubo.entry(i, j);
            }
        }
    }

    /// Zero-temperature descent: flip any improving bit until none remain.
    fn greedy(&mut self) {
        loop {
            let mut improved = false;
            for i in 0..self.qubo.n {
                if self.delta(i) < 0.0 {
                    self.flip(i);
                    improved = true;
                }
            }
            if !improved {
                return;
            }
        }
    }
}

/// Structured view of a penalty-compiled QUBO, available when the matrix is
/// exactly an objective diagonal plus the recorded squared penalties.
struct PenaltyForm {
    /// Linear objective weight of each bit.
    w: Vec<f64>,
    /// Offset with the penalties' constant squares removed.
    obj_off: f64,
    /// Penalties touching each non-slack bit, with coefficients.
    incident: Vec<Vec<(usize, i64)>>,
    /// Group index of each penalty's slack register.
    slack_group: Vec<Option<usize>>,
    /// All bits outside slack registers; the proposal set.
    var_bits: Vec<usize>,
}

impl PenaltyForm {
    /// Verifies the matrix identity entry by entry; `None` means the QUBO
    /// was not produced by the penalty compiler and gets the plain engine.
    fn derive(q: &Qubo) -> Option<PenaltyForm> {
        if q.penalties.is_empty() || q.n == 0 {
            return None;
        }
        let mut slack_group = vec![None; q.penalties.len()];
        let mut is_slack = vec![false; q.n];
        for (gi, g) in q.groups.iter().enumerate() {
            if let Some(p) = g.slack_for {
                if *slack_group.get(p)? != None {
                    return None;
                }
                slack_group[p] = Some(gi);
                for b in g.first_bit..g.first_bit + g.weights.len() {
                    if b >= q.n || is_slack[b] {
                        return None;
                    }
                    is_slack[b] = true;
                }
            }
        }
        let mut w = vec![0.0; q.n];
        let mut off_diag = vec![0.0; q.n * q.n];
        let mut obj_off = q.offset;
        let mut incident: Vec<Vec<(usize, i64)>> = vec![vec![]; q.n];
        for (pi, p) in q.penalties.iter().enumerate() {
            obj_off -= p.lambda * (p.constant * p.constant) as f64;
            let mut seen = vec![];
            for &(b, a) in &p.terms {
                if b >= q.n || seen.contains(&b) {
                    return None; // duplicate bits would break the linear view
                }
                seen.push(b);
                w[b] -= p.lambda * (a * a + 2 * p.constant * a) as f64;
                if !is_slack[b] {
                    incident[b].push((pi, a));
                }
            }
            for (k, &(bi, ai)) in p.terms.iter().enumerate() {
                for &(bj, aj) in &p.terms[k + 1..] {
                    off_diag[bi * q.n + bj] += p.lambda * (ai * aj) as f64;
                    off_diag[bj * q.n + bi] += p.lambda * (ai * aj) as f64;
                }
            }
        }
        for i in 0..q.n {
            w[i] += q.entry(i, i);
            for j in 0..q.n {
                if i != j && (q.entry(i, j) - off_diag[i * q.n + j]).abs() > 1e-9 {
                    return None;
                }
            }
        }
        let var_bits: Vec<usize> = (0..q.n).filter(|&b| !is_slack[b]).collect();
        if var_bits.is_empty() {
            return None;
        }
        Some(PenaltyForm {
            w,
            obj_off,
            incident,
            slack_group,
            var_bits,
        })
    }
}

/// Annealing state under the structured engine: tracks each penalty's inner
/// expression and slack-register value instead of local fields.
struct PenaltyState<'a> {
    q: &'a Qubo,
    form: &'a PenaltyForm,
    bits: Vec<u8>,
    expr: Vec<i64>,
    slack_val: Vec<i64>,
    energy: f64,
}

impl<'a> PenaltyState<'a> {
    fn new(q: &'a Qubo, form: &'a PenaltyForm, bits: Vec<u8>) -> Self {
        let mut st = PenaltyState {
            q,
            form,
            bits,
            expr: vec![0; q.penalties.len()],
            slack_val: vec![0; q.penalties.len()],
            energy: form.obj_off,
        };
        for b in 0..q.n {
            if st.bits[b] == 1 {
                st.energy += form.w[b];
            }
        }
        for (pi, p) in q.penalties.iter().enumerate() {
            st.expr[pi] = p.constant
                + p.terms
                    .iter()
                    .map(|&(b, a)| a * st.bits[b] as i64)
                    .sum::<i64>();
            if let Some(gi) = form.slack_group[pi] {
                st.slack_val[pi] = q.groups[gi].value(&st.bits);
            }
            st.energy += p.lambda * (st.expr[pi] * st.expr[pi]) as f64;
        }
        for pi in 0..q.penalties.len() {
            st.repair(pi);
        }
        st
    }

    /// Slack value minimizing penalty `pi` given the current model bits.
    fn slack_target(&self, pi: usize, expr: i64) -> (i64, i64) {
        let g = &self.q.groups[self.form.slack_group[pi].expect("ranged")];
        let span: i64 = g.weights.iter().sum();
        let base = expr - self.slack_val[pi];
        (base, (-base).clamp(0, span))
    }

    fn repair(&mut self, pi: usize) {
        if self.form.slack_group[pi].is_none() {
            return;
        }
        let (base, target) = self.slack_target(pi, self.expr[pi]);
        if target == self.slack_val[pi] {
            return;
        }
        let gi = self.form.slack_group[pi].unwrap();
        let g = &self.q.groups[gi];
        // weights are 1, 2, ..., 2^(k-2) plus a residual: greedy high-to-low
        // writes any value in range exactly
        let mut rem = target;
        for (j, &wt) in g.weights.iter().enumerate().rev() {
            let bit = g.first_bit + j;
            if rem >= wt {
                rem -= wt;
                self.bits[bit] = 1;
            } else {
                self.bits[bit] = 0;
            }
        }
        let old = self.expr[pi];
        let new = base + target;
        self.expr[pi] = new;
        self.slack_val[pi] = target;
        self.energy += self.q.penalties[pi].lambda * (new * new - old * old) as f64;
    }

    /// Energy change of flipping model bit `i`, incident slacks repaired.
    fn delta(&self, i: usize) -> f64 {
        let s: i64 = if self.bits[i] == 1 { -1 } else { 1 };
        let mut d = s as f64 * self.form.w[i];
        for &(pi, a) in &self.form.incident[i] {
            let mut e = self.expr[pi] + s * a;
            if self.form.slack_group[pi].is_some() {
                let (base, target) = self.slack_target(pi, e);
                e = base + target;
            }
            d += self.q.penalties[pi].lambda * (e * e - self.expr[pi] * self.expr[pi]) as f64;
        }
        d
    }

    fn flip(&mut self, i: usize) {
        let s: i64 = if self.bits[i] == 1 { -1 } else { 1 };
        self.energy += s as f64 * self.form.w[i];
        self.bits[i] ^= 1;
        for k in 0..self.form.incident[i].len() {
            let (pi, a) = self.form.incident[i][k];
            let old = self.expr[pi];
            self.expr[pi] += s * a;
            let new = self.expr[pi];
            self.energy += self.q.penalties[pi].lambda * (new * new - old * old) as f64;
            self.repair(pi);
        }
    }

    fn greedy(&mut self) {
        loop {
            let mut improved = false;
            for k in 0..self.form.var_bits.len() {
                let i = self.form.var_bits[k];
                if self.delta(i) < -1e-12 {
                    self.flip(i);
                    improved = true;
                }
            }
            if !improved {
                return;
            }
        }
    }
}

/// Metropolis annealing; deterministic given the schedule's seed. Restarts
/// are independent and merged by minimum energy.
pub fn simulated_anneal(qubo: &Qubo, sched: &AnnealSchedule) -> Result<SolveResult> {
    sched.validate()?;
    let start = Instant::now();
    let n = qubo.n;
    if n == 0 {
        return Ok(SolveResult::finish(vec![], qubo, vec![qubo.offset], start));
    }
    let form = PenaltyForm::derive(qubo);
    let ratio = (sched.beta_end / sched.beta_start).powf(1.0 / sched.sweeps.max(1) as f64);
    let mut best_bits: Option<Vec<u8>> = None;
    let mut best_energy = f64::INFINITY;
    let mut trace = Vec::with_capacity(sched.restarts as usize);
    for r in 0..sched.restarts as u64 {
        let mut rng =
            ChaCha8Rng::seed_from_u64(sched.seed.wrapping_add(r.wrapping_mul(0x9E37_79B9_7F4A_7C15)));
        let init: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2u8)).collect();
        let (run_best, run_best_energy) = match &form {
            Some(form) => anneal_once_structured(qubo, form, sched, ratio, init, &mut rng),
            None => anneal_once_plain(qubo, sched, ratio, init, &mut rng),
        };
        if run_best_energy < best_energy {
            best_energy = run_best_energy;
            best_bits = Some(run_best);
        }
        trace.push(best_energy);
    }
    Ok(SolveResult::finish(best_bits.unwrap(), qubo, trace, start))
}

fn anneal_once_plain(
    qubo: &Qubo,
    sched: &AnnealSchedule,
    ratio: f64,
    init: Vec<u8>,
    rng: &mut ChaCha8Rng,
) -> (Vec<u8>, f64) {
    let mut state = FlipState::new(qubo, init);
    let mut run_best = state.bits.clone();
    let mut run_best_energy = state.energy;
    let mut beta = sched.beta_start;
    for _ in 0..sched.sweeps {
        for i in 0..qubo.n {
            let d = state.delta(i);
            if d <= 0.0 || rng.gen::<f64>() < (-beta * d).exp() {
                state.flip(i);
            }
        }
        if state.energy < run_best_energy {
            run_best_energy = state.energy;
            run_best = state.bits.clone();
        }
        beta *= ratio;
    }
    let mut state = FlipState::new(qubo, run_best);
    state.greedy();
    (state.bits, state.energy)
}

fn anneal_once_structured(
    qubo: &Qubo,
    form: &PenaltyForm,
    sched: &AnnealSchedule,
    ratio: f64,
    init: Vec<u8>,
    rng: &mut ChaCha8Rng,
) -> (Vec<u8>, f64) {
    let mut state = PenaltyState::new(qubo, form, init);
    let mut run_best = state.bits.clone();
    let mut run_best_energy = state.energy;
    let mut beta = sched.beta_start;
    let m = form.var_bits.len();
    for _ in 0..sched.sweeps {
        for _ in 0..m {
            let i = form.var_bits[rng.gen_range(0..m)];
            let d = state.delta(i);
            if d <= 0.0 || rng.gen::<f64>() < (-beta * d).exp() {
                state.flip(i);
                if state.energy < run_best_energy {
                    run_best_energy = state.energy;
                    run_best = state.bits.clone();
                }
            }
        }
        beta *= ratio;
    }
    let mut state = PenaltyState::new(qubo, form, run_best);
    state.greedy();
    (state.bits, state.energy)
}
