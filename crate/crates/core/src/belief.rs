//! Posterior belief over the message set and its exact one-step dynamics.
//!
//! Posteriors live in the linear domain and are renormalized after every
//! update. The drift helpers below evaluate, without sampling, the expected
//! change of a message's log-likelihood ratio over one channel use; the
//! test suites use them to check the submartingale properties of the SED
//! encoder state by state.

use serde::{Deserialize, Serialize};

use crate::channel::{kl_divergence, ChannelSpec};
use crate::error::{Error, Result};
use crate::numeric::compensated_sum;

/// Posterior vector `rho` at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefState {
    rho: Vec<f64>,
    t: u64,
}

/// Uniform prior over `m` messages.
pub fn init_belief(m: usize) -> Result<BeliefState> {
    if m == 0 {
        return Err(Error::domain("message set must be nonempty"));
    }
    Ok(BeliefState { rho: vec![1.0 / m as f64; m], t: 0 })
}

impl BeliefState {
    pub fn uniform(m: usize) -> Result<Self> {
        init_belief(m)
    }

    /// Build a state from arbitrary positive weights; they are normalized.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::domain("message set must be nonempty"));
        }
        if weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(Error::domain("posterior weights must be positive and finite"));
        }
        let mut rho = weights;
        let z = compensated_sum(rho.iter().copied());
        rho.iter_mut().for_each(|r| *r /= z);
        Ok(BeliefState { rho, t: 0 })
    }

    /// Wrap a posterior vector without renormalizing it.
    #[cfg(test)]
    pub(crate) fn from_raw(rho: Vec<f64>, t: u64) -> Self {
        BeliefState { rho, t }
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    /// Largest posterior and its index; ties go to the lowest index.
    pub fn argmax(&self) -> (usize, f64) {
        let mut best = (0, self.rho[0]);
        for (i, &r) in self.rho.iter().enumerate().skip(1) {
            if r > best.1 {
                best = (i, r);
            }
        }
        best
    }

    pub fn total(&self) -> f64 {
        compensated_sum(self.rho.iter().copied())
    }

    /// In-place Bayes update. `in_s1[i]` is the input symbol sent for message `i`.
    pub(crate) fn update_in_place(&mut self, in_s1: &[bool], y: u8, spec: &ChannelSpec) -> Result<()> {
        debug_assert_eq!(in_s1.len(), self.rho.len());
        let l0 = spec.likelihood(y, 0);
        let l1 = spec.likelihood(y, 1);
        for (r, &one) in self.rho.iter_mut().zip(in_s1) {
            *r *= if one { l1 } else { l0 };
        }
        let z = compensated_sum(self.rho.iter().copied());
        if !(z > 0.0) || !z.is_finite() {
            return Err(Error::Numerical(format!("posterior normalizer {z} at t = {}", self.t)));
        }
        self.rho.iter_mut().for_each(|r| *r /= z);
        self.t += 1;
        Ok(())
    }
}

/// Two-way split of the message set with cached group masses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    in_s1: Vec<bool>,
    pi0: f64,
    pi1: f64,
}

impl Partition {
    /// Build from a membership mask (`true` = input symbol 1); the masses are
    /// summed from `b` in index order.
    pub fn from_mask(b: &BeliefState, in_s1: Vec<bool>) -> Result<Self> {
        if in_s1.len() != b.len() {
            return Err(Error::domain(format!(
                "partition covers {} messages, belief has {}",
                in_s1.len(),
                b.len()
            )));
        }
        let pi1 = compensated_sum(b.rho.iter().zip(&in_s1).filter(|(_, &s)| s).map(|(&r, _)| r));
        let pi0 = compensated_sum(b.rho.iter().zip(&in_s1).filter(|(_, &s)| !s).map(|(&r, _)| r));
        Ok(Partition { in_s1, pi0, pi1 })
    }

    /// Partition whose `S1` is exactly `s1` (0-based indices).
    pub fn from_s1(b: &BeliefState, s1: &[usize]) -> Result<Self> {
        let mut mask = vec![false; b.len()];
        for &i in s1 {
            *mask
                .get_mut(i)
                .ok_or_else(|| Error::domain(format!("index {i} outside message set")))? = true;
        }
        Self::from_mask(b, mask)
    }

    /// `S1 = {i}`, `S0` = everything else.
    pub fn exclusive(b: &BeliefState, i: usize) -> Result<Self> {
        Self::from_s1(b, &[i])
    }

    pub fn mask(&self) -> &[bool] {
        &self.in_s1
    }

    pub fn symbol(&self, i: usize) -> u8 {
        u8::from(self.in_s1[i])
    }

    pub fn s0(&self) -> Vec<usize> {
        (0..self.in_s1.len()).filter(|&i| !self.in_s1[i]).collect()
    }

    pub fn s1(&self) -> Vec<usize> {
        (0..self.in_s1.len()).filter(|&i| self.in_s1[i]).collect()
    }

    pub fn pi0(&self) -> f64 {
        self.pi0
    }

    pub fn pi1(&self) -> f64 {
        self.pi1
    }

    pub fn mass(&self, x: u8) -> f64 {
        if x == 0 {
            self.pi0
        } else {
            self.pi1
        }
    }
}

/// Bayes update of `b` after observing `y` with inputs given by `part`.
pub fn bayes_update(b: &BeliefState, part: &Partition, y: u8, spec: &ChannelSpec) -> Result<BeliefState> {
    if part.in_s1.len() != b.len() {
        return Err(Error::domain("partition and belief sizes differ"));
    }
    let mut next = b.clone();
    next.update_in_place(&part.in_s1, y, spec)?;
    Ok(next)
}

/// Log-likelihood ratio of a single posterior, in bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Llr {
    pub bits: f64,
    /// The input was outside `[1e-300, 1 - 1e-16]` and was clamped.
    pub saturated: bool,
}

const LLR_FLOOR: f64 = 1e-300;
const LLR_CEIL: f64 = 1.0 - 1e-16;

/// `log2(rho / (1 - rho))`.
///
/// Inputs of exactly 0 or 1 give signed infinity. Inputs outside
/// `[1e-300, 1 - 1e-16]` are clamped to that range and flagged.
pub fn llr(rho: f64) -> Llr {
    if rho <= 0.0 {
        return Llr { bits: f64::NEG_INFINITY, saturated: true };
    }
    if rho >= 1.0 {
        return Llr { bits: f64::INFINITY, saturated: true };
    }
    let clamped = rho.clamp(LLR_FLOOR, LLR_CEIL);
    Llr {
        bits: (clamped / (1.0 - clamped)).log2(),
        saturated: clamped != rho,
    }
}

/// Extrinsic probabilities `(own, other)` for message `i`: the group masses
/// with `i` itself removed and renormalized, listed as (mass of `i`'s own
/// symbol, mass of the opposite symbol).
pub fn extrinsic_probs(b: &BeliefState, part: &Partition, i: usize) -> Result<(f64, f64)> {
    let rho_i = *b.rho.get(i).ok_or_else(|| Error::domain(format!("index {i} outside message set")))?;
    if rho_i >= 1.0 {
        return Err(Error::domain("extrinsic probabilities undefined when rho_i = 1"));
    }
    let x = part.symbol(i);
    let own = (part.mass(x) - rho_i) / (1.0 - rho_i);
    let other = part.mass(1 - x) / (1.0 - rho_i);
    Ok((own, other))
}

/// Exact `E[U_i(t+1) - U_i(t) | theta = i]`: the divergence between the output
/// law of `i`'s input and the output law induced by the extrinsic mixture.
pub fn expected_drift(b: &BeliefState, part: &Partition, i: usize, spec: &ChannelSpec) -> Result<f64> {
    let (own, other) = extrinsic_probs(b, part, i)?;
    let x = part.symbol(i);
    let p_own = spec.output_dist(x);
    let p_other = spec.output_dist(1 - x);
    let mixture = [
        own * p_own[0] + other * p_other[0],
        own * p_own[1] + other * p_other[1],
    ];
    Ok(kl_divergence(p_own, mixture))
}

/// Uniform bound on the one-step LLR change, `C2 = log2((1 - p1) / p0)`.
pub fn max_step(spec: &ChannelSpec) -> f64 {
    ((1.0 - spec.p1()) / spec.p0()).log2()
}
