//! Posterior kept physically in encoder order, for the simulator's hot loop.
//!
//! Values live in descending order (ties by ascending message index) next to
//! their message ids. A Bayes update multiplies all of `S0` by one factor and
//! all of `S1` by another, so each group stays sorted: one stable split plus a
//! linear merge restores the order, with a final adjacent-pair pass for ties
//! that rounding creates inside a group. All passes are sequential over
//! contiguous memory.

use crate::channel::ChannelSpec;
use crate::error::{Error, Result};
use crate::sed_encoder::{sed_holds, EncoderConfig};

#[derive(Debug, Clone)]
pub(crate) struct SortedPosterior {
    val: Vec<f64>,
    id: Vec<u32>,
    s1: Vec<bool>,
    // split buffers, one spare slot each for the merge sentinel
    a_val: Vec<f64>,
    a_id: Vec<u32>,
    b_val: Vec<f64>,
    b_id: Vec<u32>,
    tracked: u32,
    tracked_pos: usize,
    pi0: f64,
    pi1: f64,
    t: u64,
}

#[inline]
fn before(va: f64, ia: u32, vb: f64, ib: u32) -> bool {
    (va > vb) | ((va == vb) & (ia < ib))
}

impl SortedPosterior {
    /// Uniform prior over `m` messages, following message `tracked`.
    pub fn uniform(m: usize, tracked: usize) -> Self {
        let u = 1.0 / m as f64;
        SortedPosterior {
            val: vec![u; m],
            id: (0..m as u32).collect(),
            s1: vec![false; m],
            a_val: vec![0.0; m + 1],
            a_id: vec![0; m + 1],
            b_val: vec![0.0; m + 1],
            b_id: vec![0; m + 1],
            tracked: tracked as u32,
            tracked_pos: tracked,
            pi0: 1.0,
            pi1: 0.0,
            t: 0,
        }
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn top(&self) -> (usize, f64) {
        (self.id[0] as usize, self.val[0])
    }

    pub fn tracked_rho(&self) -> f64 {
        self.val[self.tracked_pos]
    }

    /// Input symbol of the tracked message under the current split.
    pub fn tracked_symbol(&self) -> u8 {
        u8::from(self.s1[self.tracked_pos])
    }

    /// Posterior vector in message-index order.
    #[cfg(test)]
    pub fn rho(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.val.len()];
        for (&v, &i) in self.val.iter().zip(&self.id) {
            out[i as usize] = v;
        }
        out
    }

    /// Split mask in message-index order.
    #[cfg(test)]
    pub fn mask(&self) -> Vec<bool> {
        let mut out = vec![false; self.val.len()];
        for (&s, &i) in self.s1.iter().zip(&self.id) {
            out[i as usize] = s;
        }
        out
    }

    /// Choose the split for the current posterior (confirmation or greedy).
    pub fn split(&mut self, cfg: &EncoderConfig) -> Result<()> {
        let top = self.val[0];
        if top >= cfg.pi1_star {
            self.s1.fill(false);
            self.s1[0] = true;
            self.pi1 = top;
            self.pi0 = self.val[1..].iter().sum();
            return Ok(());
        }
        let lambda = cfg.lambda;
        let (mut pi0, mut pi1) = (top, 0.0);
        let (mut min0, mut min1) = (top, f64::INFINITY);
        self.s1[0] = false;
        for (s, &r) in self.s1[1..].iter_mut().zip(&self.val[1..]) {
            let one = pi1 < lambda * pi0;
            *s = one;
            if one {
                pi1 += r;
                min1 = r;
            } else {
                pi0 += r;
                min0 = r;
            }
        }
        if !sed_holds(pi0, pi1, min0, min1, lambda) {
            return Err(Error::Internal("greedy partition violates the SED condition".into()));
        }
        self.pi0 = pi0;
        self.pi1 = pi1;
        Ok(())
    }

    /// Bayes update for output `y` under the current split.
    pub fn update(&mut self, y: u8, spec: &ChannelSpec) -> Result<()> {
        let l0 = spec.likelihood(y, 0);
        let l1 = spec.likelihood(y, 1);
        let z = l0 * self.pi0 + l1 * self.pi1;
        if !(z > 0.0) || !z.is_finite() {
            return Err(Error::Numerical(format!("posterior normalizer {z} at t = {}", self.t)));
        }
        let (f0, f1) = (l0 / z, l1 / z);
        let m = self.val.len();
        debug_assert!(self.a_val.len() == m + 1 && self.b_val.len() == m + 1);

        // Stable split into the scaled S0 and S1 runs. Each write index is at
        // most `s`, below the buffers' length `m + 1`.
        let (mut na, mut nb) = (0, 0);
        for ((&v, &i), &one) in self.val.iter().zip(&self.id).zip(&self.s1) {
            unsafe {
                *self.a_val.get_unchecked_mut(na) = v * f0;
                *self.a_id.get_unchecked_mut(na) = i;
                *self.b_val.get_unchecked_mut(nb) = v * f1;
                *self.b_id.get_unchecked_mut(nb) = i;
            }
            na += usize::from(!one);
            nb += usize::from(one);
        }
        self.a_val[na] = f64::NEG_INFINITY;
        self.a_id[na] = u32::MAX;
        self.b_val[nb] = f64::NEG_INFINITY;
        self.b_id[nb] = u32::MAX;

        // Merge. The sentinels lose every comparison against a real entry, so
        // `ia <= na` and `ib <= nb` throughout.
        let (mut ia, mut ib) = (0, 0);
        let tracked = self.tracked;
        for (s, (v, i)) in self.val.iter_mut().zip(self.id.iter_mut()).enumerate() {
            let (va, xa, vb, xb) = unsafe {
                (
                    *self.a_val.get_unchecked(ia),
                    *self.a_id.get_unchecked(ia),
                    *self.b_val.get_unchecked(ib),
                    *self.b_id.get_unchecked(ib),
                )
            };
            let take_a = before(va, xa, vb, xb);
            *v = if take_a { va } else { vb };
            *i = if take_a { xa } else { xb };
            if *i == tracked {
                self.tracked_pos = s;
            }
            ia += usize::from(take_a);
            ib += usize::from(!take_a);
        }

        // Rounding can leave equal values out of index order; sort each such
        // run of equal values by id.
        let mut s = 1;
        while s < m {
            if before(self.val[s - 1], self.id[s - 1], self.val[s], self.id[s]) {
                s += 1;
                continue;
            }
            let v = self.val[s];
            let lo = self.val[..s].iter().rposition(|&x| x != v).map_or(0, |j| j + 1);
            let hi = self.val[s..].iter().position(|&x| x != v).map_or(m, |j| s + j);
            let run = &mut self.id[lo..hi];
            run.sort_unstable();
            if let Some(j) = run.iter().position(|&i| i == tracked) {
                self.tracked_pos = lo + j;
            }
            s = hi;
        }
        self.t += 1;
        Ok(())
    }
}
