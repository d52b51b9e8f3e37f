//! Expected first-passage time of the confirmation-phase chain on a BSC.
//!
//! States `S_0 .. S_n`, where `S_n` absorbs. From `S_j` (`j >= 1`) the chain
//! moves up with probability `q` and down with probability `p`, one step
//! each. From `S_0` it moves up with probability `q` (one step) or takes a
//! self loop with probability `p` whose expected duration is `delta0`
//! (a fallback into the communication phase and back).
//!
//! Three independent routes to `v_0`, the expected time from `S_0` to `S_n`:
//! a closed form, a tridiagonal solve of the node equations, and a Monte
//! Carlo simulation of the chain.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::confirmation_bound_bsc;
use crate::channel::h2;
use crate::error::{Error, Result};
use crate::session_sim::trial_rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstPassageProblem {
    /// Forward states before absorption.
    pub n: u32,
    /// Backward probability, in `(0, 1/2)`.
    pub p: f64,
    /// Expected self-loop weight at `S_0`, at least 1.
    pub delta0: f64,
}

impl FirstPassageProblem {
    pub fn new(n: u32, p: f64, delta0: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::domain("n must be at least 1"));
        }
        if !(p > 0.0 && p < 0.5) {
            return Err(Error::domain(format!("p = {p} outside (0, 1/2)")));
        }
        if !(delta0 >= 1.0) || !delta0.is_finite() {
            return Err(Error::domain(format!("delta0 = {delta0} must be finite and at least 1")));
        }
        Ok(FirstPassageProblem { n, p, delta0 })
    }

    /// The chain for a BSC(p) session with target `epsilon`:
    /// `n = ceil(log2((1-eps)/eps) / C2)`, `delta0` the u-free bound
    /// `1 + (log2(2q)/q + C2) / C`.
    pub fn for_bsc(p: f64, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(Error::domain(format!("epsilon = {epsilon} outside (0, 1/2)")));
        }
        if !(p > 0.0 && p < 0.5) {
            return Err(Error::domain(format!("p = {p} outside (0, 1/2)")));
        }
        let q = 1.0 - p;
        let c2 = (q / p).log2();
        let c = 1.0 - h2(p);
        let n = (((1.0 - epsilon) / epsilon).log2() / c2).ceil().max(1.0) as u32;
        let delta0 = 1.0 + ((2.0 * q).log2() / q + c2) / c;
        Self::new(n, p, delta0)
    }

    pub fn q(&self) -> f64 {
        1.0 - self.p
    }

    /// Self-loop weight of the plain i.i.d. random walk, `2q / (1 - 2p)`;
    /// the recursion for the loop weights is stationary there.
    pub fn fixed_point_delta(&self) -> f64 {
        2.0 * self.q() / (1.0 - 2.0 * self.p)
    }
}

/// `v_0 = n/(1-2p) + p/(1-2p) (1 - (p/q)^n) (delta0 - 2q/(1-2p))`.
pub fn v0_closed_form(prob: &FirstPassageProblem) -> f64 {
    let (p, q) = (prob.p, prob.q());
    let r = (p / q).powi(prob.n as i32);
    prob.n as f64 / (1.0 - 2.0 * p) + p / (1.0 - 2.0 * p) * (1.0 - r) * (prob.delta0 - prob.fixed_point_delta())
}

/// Self-loop weight `Delta_{n-1}` seen from the last transient state, closed form.
pub fn delta_recursion(prob: &FirstPassageProblem) -> f64 {
    let r = (prob.p / prob.q()).powi(prob.n as i32 - 1);
    r * prob.delta0 + prob.fixed_point_delta() * (1.0 - r)
}

/// `Delta_{n-1}` by iterating `Delta_i = 2 + (p/q) Delta_{i-1}`.
pub fn delta_iterate(prob: &FirstPassageProblem) -> Vec<f64> {
    let ratio = prob.p / prob.q();
    let mut out = Vec::with_capacity(prob.n as usize);
    let mut d = prob.delta0;
    out.push(d);
    for _ in 1..prob.n {
        d = 2.0 + ratio * d;
        out.push(d);
    }
    out
}

const MAX_NODES: u32 = 10_000;

/// Solve the node equations for `v_0 .. v_{n-1}` by tridiagonal elimination.
///
/// Row `j` reads `-p v_{j-1} + v_j - q v_{j+1} = 1` for `1 <= j <= n-1`
/// (with `v_n = 0`), and row 0 reads `(1 - p) v_0 - q v_1 = q + p delta0`.
pub fn node_solve(prob: &FirstPassageProblem) -> Result<Vec<f64>> {
    if prob.n > MAX_NODES {
        return Err(Error::domain(format!("n = {} exceeds {MAX_NODES}", prob.n)));
    }
    let n = prob.n as usize;
    let (p, q) = (prob.p, prob.q());
    // sub[j] multiplies v_{j-1}, diag[j] v_j, sup[j] v_{j+1}
    let mut sub = vec![-p; n];
    let mut diag = vec![1.0; n];
    let sup = vec![-q; n];
    let mut rhs = vec![1.0; n];
    sub[0] = 0.0;
    diag[0] = 1.0 - p;
    rhs[0] = q + p * prob.delta0;

    // forward sweep
    let mut c_prime = vec![0.0; n];
    let mut d_prime = vec![0.0; n];
    for j in 0..n {
        let pivot = if j == 0 { diag[0] } else { diag[j] - sub[j] * c_prime[j - 1] };
        if pivot.abs() < 1e-14 {
            return Err(Error::Numerical(format!("pivot {pivot} at row {j}")));
        }
        diag[j] = pivot;
        c_prime[j] = if j + 1 < n { sup[j] / pivot } else { 0.0 };
        let prev = if j == 0 { 0.0 } else { d_prime[j - 1] };
        d_prime[j] = (rhs[j] - sub[j] * prev) / pivot;
    }
    rhs.clear();
    sub.clear();
    // back substitution
    let mut v = vec![0.0; n];
    for j in (0..n).rev() {
        let next = if j + 1 < n { v[j + 1] } else { 0.0 };
        v[j] = d_prime[j] - c_prime[j] * next;
    }
    Ok(v)
}

/// Confirmation-phase bound for a BSC(p) session; see
/// [`crate::bounds::confirmation_bound_bsc`].
pub fn confirmation_bound(p: f64, epsilon: f64) -> Result<f64> {
    confirmation_bound_bsc(p, epsilon)
}

/// `v_0` at the integer `n` and u-free `delta0` of [`FirstPassageProblem::for_bsc`],
/// before `n` is relaxed to `log2((1-eps)/eps)/C2 + 1`. Never exceeds
/// [`confirmation_bound`].
pub fn confirmation_bound_exact_n(p: f64, epsilon: f64) -> Result<f64> {
    Ok(v0_closed_form(&FirstPassageProblem::for_bsc(p, epsilon)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
}

fn chain_walk<R: Rng + ?Sized>(prob: &FirstPassageProblem, rng: &mut R) -> f64 {
    let q = prob.q();
    let mut state = 0u32;
    let mut time = 0.0;
    while state < prob.n {
        let up = rng.gen::<f64>() < q;
        if state == 0 {
            if up {
                time += 1.0;
                state = 1;
            } else {
                time += prob.delta0;
            }
        } else {
            time += 1.0;
            if up {
                state += 1;
            } else {
                state -= 1;
            }
        }
    }
    time
}

/// Mean absorption time of the chain from `S_0` over `trials` simulated
/// walks; the self loop costs exactly `delta0` per traversal.
pub fn mc_first_passage(prob: &FirstPassageProblem, trials: u64, seed: u64) -> Result<McEstimate> {
    if trials < 2 {
        return Err(Error::domain("need at least two trials"));
    }
    let times: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|i| chain_walk(prob, &mut trial_rng(seed, i)))
        .collect();
    let n = trials as f64;
    let mean = times.iter().sum::<f64>() / n;
    let var = times.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / (n - 1.0);
    Ok(McEstimate { mean, stderr: (var / n).sqrt(), trials })
}
