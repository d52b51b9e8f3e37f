//! Non-asymptotic bounds on the average blocklength `E[tau]`.
//!
//! Upper bounds (achievability, for the SED encoder with the threshold
//! stopping rule):
//! - [`bound_thm1`]: the EJS-divergence bound for symmetric binary-input channels,
//! - [`bound_cor1`]: the two-phase submartingale bound,
//! - [`bound_thm3_bac`]: optimized submartingale synthesis, any regularized BAC,
//! - [`bound_thm6_bsc`]: communication/confirmation split, BSC only.
//!
//! Lower bounds (converse, any VLF code): [`converse_vlf`].
//!
//! All values are real numbers of channel uses.

use serde::{Deserialize, Serialize};

use crate::channel::{h2, ChannelSpec, ChannelStats};
use crate::error::{Error, Result};
use crate::numeric::grid_then_golden;

fn check_eps(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::domain(format!("epsilon = {epsilon} outside (0, 1/2)")));
    }
    Ok(())
}

fn check_m(m: u64) -> Result<()> {
    if m < 2 {
        return Err(Error::domain(format!("M = {m} must be at least 2")));
    }
    Ok(())
}

fn log_odds(epsilon: f64) -> f64 {
    ((1.0 - epsilon) / epsilon).log2()
}

/// Shared tail factor `(1 - eps/(1-eps) 2^{-C2}) / (1 - 2^{-C2})`.
fn tail_factor(epsilon: f64, c2: f64) -> f64 {
    let a = (-c2).exp2();
    (1.0 - epsilon / (1.0 - epsilon) * a) / (1.0 - a)
}

/// `(log M + log log(M/eps))/C + (log(1/eps) + 1)/C1 + 96 2^{2 C2} / (C C1)`.
pub fn bound_thm1(m: u64, epsilon: f64, stats: &ChannelStats) -> Result<f64> {
    check_m(m)?;
    check_eps(epsilon)?;
    let log_m = (m as f64).log2();
    let inner = (m as f64 / epsilon).log2();
    if inner <= 1.0 {
        return Err(Error::domain(format!("log2(M/eps) = {inner} leaves log log nonpositive")));
    }
    let (c, c1, c2) = (stats.c, stats.c1, stats.c2);
    Ok((log_m + inner.log2()) / c + ((1.0 / epsilon).log2() + 1.0) / c1 + 96.0 * (2.0 * c2).exp2() / (c * c1))
}

/// `log M / C + log((1-eps)/eps) / C1 + 3 C2^2 / (C C1)`.
pub fn bound_cor1(m: u64, epsilon: f64, stats: &ChannelStats) -> Result<f64> {
    check_m(m)?;
    check_eps(epsilon)?;
    let (c, c1, c2) = (stats.c, stats.c1, stats.c2);
    Ok((m as f64).log2() / c + log_odds(epsilon) / c1 + 3.0 * c2 * c2 / (c * c1))
}

/// Regularized-BAC bound from the optimized submartingale synthesis.
pub fn bound_thm3_bac(m: u64, epsilon: f64, stats: &ChannelStats) -> Result<f64> {
    check_m(m)?;
    check_eps(epsilon)?;
    let (c, c1, c2) = (stats.c, stats.c1, stats.c2);
    Ok((m as f64).log2() / c
        + (log_odds(epsilon) + c2) / c1
        + c2 * (1.0 / c - 1.0 / c1) * tail_factor(epsilon, c2))
}

/// Constants of a BSC(p) computed from `p` alone.
struct BscConsts {
    q: f64,
    c: f64,
    c1: f64,
    c2: f64,
}

fn bsc_consts(p: f64) -> Result<BscConsts> {
    if !(p > 0.0 && p < 0.5) {
        return Err(Error::domain(format!("BSC crossover {p} outside (0, 1/2)")));
    }
    let q = 1.0 - p;
    let c2 = (q / p).log2();
    Ok(BscConsts { q, c: 1.0 - h2(p), c1: (1.0 - 2.0 * p) * c2, c2 })
}

/// Bound on the mean time for the true message's posterior to first reach
/// 1/2 on a BSC(p): `log M / C + log(2q) / (q C)`.
pub fn communication_bound_bsc(m: u64, p: f64) -> Result<f64> {
    check_m(m)?;
    let k = bsc_consts(p)?;
    Ok((m as f64).log2() / k.c + (2.0 * k.q).log2() / (k.q * k.c))
}

/// Bound on the mean confirmation time (from the first crossing of 1/2 to
/// the stopping threshold) on a BSC(p).
pub fn confirmation_bound_bsc(p: f64, epsilon: f64) -> Result<f64> {
    check_eps(epsilon)?;
    let k = bsc_consts(p)?;
    let (q, c, c1, c2) = (k.q, k.c, k.c1, k.c2);
    let a = (-c2).exp2();
    Ok((log_odds(epsilon) + c2) / c1
        + a * c2 * ((1.0 + (2.0 * q).log2() / (q * c2)) / c - 1.0 / c1) * tail_factor(epsilon, c2))
}

/// Refined BSC(p) bound: communication bound plus confirmation bound.
pub fn bound_thm6_bsc(m: u64, epsilon: f64, p: f64) -> Result<f64> {
    Ok(communication_bound_bsc(m, p)? + confirmation_bound_bsc(p, epsilon)?)
}

fn check_converse_domain(m: u64, epsilon: f64) -> Result<()> {
    check_m(m)?;
    let hi = 1.0 - 1.0 / m as f64;
    if !(epsilon > 0.0 && epsilon <= hi) {
        return Err(Error::domain(format!("epsilon = {epsilon} outside (0, 1 - 1/M]")));
    }
    Ok(())
}

/// `F_M(x) = x log(M - 1) + h(x)`.
fn f_m(m: u64, x: f64) -> f64 {
    x * ((m - 1) as f64).log2() + h2(x)
}

/// Objective of the sup-form converse at `xi`.
fn converse_objective(m: u64, epsilon: f64, stats: &ChannelStats, xi: f64) -> f64 {
    let log_m = (m as f64).log2();
    let first = (log_m - f_m(m, xi) - f_m(m, epsilon).min(epsilon / xi * log_m)) / stats.c;
    let second = (1.0 - epsilon) / stats.c1 * (stats.lambda1 * xi / (epsilon * (1.0 - xi))).log2()
        - h2(epsilon) / stats.c1;
    first + second.max(0.0)
}

const CONVERSE_GRID: usize = 1024;

/// Sup-form converse: returns `(best grid value, refined value)`.
pub fn converse_sup_detail(m: u64, epsilon: f64, stats: &ChannelStats) -> Result<(f64, f64)> {
    check_converse_domain(m, epsilon)?;
    let hi = (m - 1) as f64 / m as f64;
    let lo = hi / CONVERSE_GRID as f64;
    let f = |xi: f64| converse_objective(m, epsilon, stats, xi);
    let grid_best = (0..CONVERSE_GRID)
        .map(|i| if i + 1 == CONVERSE_GRID { hi } else { lo + (hi - lo) * i as f64 / (CONVERSE_GRID - 1) as f64 })
        .map(&f)
        .fold(f64::NEG_INFINITY, f64::max);
    let (_, refined) = grid_then_golden(f, lo, hi, CONVERSE_GRID, 1e-9);
    Ok((grid_best, refined))
}

/// Sup-form converse bound, maximized over `xi in (0, (M-1)/M]`.
pub fn converse_sup(m: u64, epsilon: f64, stats: &ChannelStats) -> Result<f64> {
    converse_sup_detail(m, epsilon, stats).map(|(_, r)| r)
}

/// `((1 - eps) log M - h(eps)) / C`. May be negative.
pub fn converse_weak(m: u64, epsilon: f64, stats: &ChannelStats) -> Result<f64> {
    check_converse_domain(m, epsilon)?;
    Ok(((1.0 - epsilon) * (m as f64).log2() - h2(epsilon)) / stats.c)
}

/// Converse lower bound on `E[tau]` for any VLF code: the larger of the
/// sup-form and weak converses, clamped at 0.
pub fn converse_vlf(m: u64, epsilon: f64, stats: &ChannelStats) -> Result<f64> {
    let sup = converse_sup(m, epsilon, stats)?;
    let weak = converse_weak(m, epsilon, stats)?;
    Ok(sup.max(weak).max(0.0))
}

/// Burnashev reliability function `C1 (1 - R/C)` for `0 <= R <= C`.
pub fn error_exponent(rate: f64, stats: &ChannelStats) -> Result<f64> {
    if !(rate >= 0.0 && rate <= stats.c) {
        return Err(Error::domain(format!("rate {rate} outside [0, C = {}]", stats.c)));
    }
    Ok(stats.c1 * (1.0 - rate / stats.c))
}

/// Every bound for one `(M, epsilon)` operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSet {
    pub m: u64,
    pub thm1: f64,
    pub cor1: f64,
    pub thm3_bac: f64,
    /// Only defined for symmetric channels.
    pub thm6_bsc: Option<f64>,
    pub converse_vlf: f64,
    pub converse_sup: f64,
    pub converse_weak: f64,
}

impl BoundSet {
    /// Rate `log2 M / bound` implied by a blocklength bound.
    pub fn rate_of(&self, bound: f64) -> f64 {
        (self.m as f64).log2() / bound
    }
}

pub fn bound_set(m: u64, epsilon: f64, spec: &ChannelSpec) -> Result<BoundSet> {
    let stats = spec.stats()?;
    let thm6_bsc = if spec.is_symmetric() {
        Some(bound_thm6_bsc(m, epsilon, spec.p0())?)
    } else {
        None
    };
    Ok(BoundSet {
        m,
        thm1: bound_thm1(m, epsilon, &stats)?,
        cor1: bound_cor1(m, epsilon, &stats)?,
        thm3_bac: bound_thm3_bac(m, epsilon, &stats)?,
        thm6_bsc,
        converse_vlf: converse_vlf(m, epsilon, &stats)?,
        converse_sup: converse_sup(m, epsilon, &stats)?,
        converse_weak: converse_weak(m, epsilon, &stats)?,
    })
}
