//! Full feedback sessions and Monte Carlo ensembles.
//!
//! A session runs encoder, channel, Bayes decoder and the stopping rule
//! `max_i rho_i >= 1 - epsilon` until it fires. Ensembles draw the message
//! and the channel noise for trial `i` from ChaCha8 stream `i` under the run
//! seed, and aggregate with exact integer sums, so a summary depends only on
//! `(config, trials, seed)` and never on the worker count.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::belief::{init_belief, BeliefState};
use crate::bounds::{bound_set, BoundSet};
use crate::channel::{ChannelSpec, ChannelStats};
use crate::error::{Error, Result};
use crate::numeric::{wilson_interval, Z95};
use crate::sed_encoder::{encode_step, Algorithm, EncoderConfig};
use crate::sorted_posterior::SortedPosterior;

/// Largest supported message length in bits.
pub const MAX_K: u32 = 24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub spec: ChannelSpec,
    pub stats: ChannelStats,
    /// Message bits; `M = 2^k`.
    pub k: u32,
    pub epsilon: f64,
    pub encoder: EncoderConfig,
    pub max_steps: u64,
}

impl SessionConfig {
    /// Configuration with the default step cap
    /// `100 * (log2 M / C + log2((1 - eps) / eps) / C1)`.
    pub fn new(spec: ChannelSpec, k: u32, epsilon: f64, algorithm: Algorithm) -> Result<Self> {
        if k > MAX_K {
            return Err(Error::domain(format!("k = {k} exceeds the supported maximum {MAX_K}")));
        }
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(Error::domain(format!("epsilon = {epsilon} outside (0, 1/2)")));
        }
        let stats = spec.stats()?;
        let encoder = EncoderConfig::new(algorithm, &stats)?;
        let lead = k as f64 / stats.c + ((1.0 - epsilon) / epsilon).log2() / stats.c1;
        let max_steps = (100.0 * lead).ceil().max(1.0) as u64;
        Ok(SessionConfig { spec, stats, k, epsilon, encoder, max_steps })
    }

    pub fn with_max_steps(mut self, max_steps: u64) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn messages(&self) -> usize {
        1usize << self.k
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    /// Channel uses until the stopping rule fired.
    pub tau: u64,
    pub theta: usize,
    pub theta_hat: usize,
    pub correct: bool,
    /// First time the true posterior reached 1/2, if before `tau`.
    pub nu: Option<u64>,
    /// Times the true posterior dropped back below 1/2 after reaching it.
    pub fallbacks: u64,
}

impl TrialRecord {
    /// `nu` with unreached crossings counted as `tau`.
    pub fn nu_or_tau(&self) -> u64 {
        self.nu.unwrap_or(self.tau)
    }
}

/// The random stream owned by trial `index` of a run with `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Run one session transmitting message `theta` (0-based).
pub fn run_trial<R: Rng + ?Sized>(cfg: &SessionConfig, theta: usize, rng: &mut R) -> Result<TrialRecord> {
    let m = cfg.messages();
    if theta >= m {
        return Err(Error::domain(format!("message index {theta} outside 0..{m}")));
    }
    match cfg.encoder.algorithm {
        Algorithm::Greedy => run_sorted(cfg, theta, rng),
        Algorithm::Original => run_trial_reference(cfg, theta, rng).map(|(rec, _)| rec),
    }
}

/// Session state tracking for the receiver's stopping time and the
/// tracked message's crossings of 1/2.
struct Crossings {
    nu: Option<u64>,
    above: bool,
    fallbacks: u64,
}

impl Crossings {
    fn new(rho_theta: f64) -> Self {
        let above = rho_theta >= 0.5;
        Crossings { nu: above.then_some(0), above, fallbacks: 0 }
    }

    fn observe(&mut self, rho_theta: f64, t: u64) {
        let now = rho_theta >= 0.5;
        if now && self.nu.is_none() {
            self.nu = Some(t);
        }
        if self.above && !now {
            self.fallbacks += 1;
        }
        self.above = now;
    }

    fn record(self, tau: u64, theta: usize, theta_hat: usize) -> TrialRecord {
        TrialRecord { tau, theta, theta_hat, correct: theta == theta_hat, nu: self.nu, fallbacks: self.fallbacks }
    }
}

fn run_sorted<R: Rng + ?Sized>(cfg: &SessionConfig, theta: usize, rng: &mut R) -> Result<TrialRecord> {
    let mut post = SortedPosterior::uniform(cfg.messages(), theta);
    let threshold = 1.0 - cfg.epsilon;
    let mut cross = Crossings::new(post.tracked_rho());
    loop {
        let (top, top_rho) = post.top();
        if top_rho >= threshold {
            return Ok(cross.record(post.t(), theta, top));
        }
        if post.t() >= cfg.max_steps {
            return Err(Error::CapExceeded { count: 1, max_steps: cfg.max_steps });
        }
        post.split(&cfg.encoder)?;
        let y = cfg.spec.sample_output(post.tracked_symbol(), rng);
        post.update(y, &cfg.spec)?;
        cross.observe(post.tracked_rho(), post.t());
    }
}

/// Draw the message for trial `index` and run it.
pub fn run_indexed_trial(cfg: &SessionConfig, seed: u64, index: u64) -> Result<TrialRecord> {
    let mut rng = trial_rng(seed, index);
    let theta = rng.gen_range(0..cfg.messages());
    run_trial(cfg, theta, &mut rng)
}

/// Monte Carlo summary of an ensemble of sessions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    pub trials: u64,
    pub errors: u64,
    pub avg_tau: f64,
    pub tau_stderr: f64,
    pub pe_hat: f64,
    pub pe_ci_lo: f64,
    pub pe_ci_hi: f64,
    /// `log2 M / avg_tau`; infinite when `avg_tau = 0`.
    pub rate: f64,
    pub avg_nu: f64,
    pub nu_stderr: f64,
    /// Mean of `tau - nu`.
    pub avg_confirm: f64,
    pub confirm_stderr: f64,
    pub avg_fallbacks: f64,
    /// Exact totals behind the averages.
    pub tau_total: u64,
    pub nu_total: u64,
    pub confirm_total: u64,
}

#[derive(Default)]
struct Moments {
    n: u64,
    sum: u128,
    sum_sq: u128,
}

impl Moments {
    fn push(&mut self, x: u64) {
        self.n += 1;
        self.sum += x as u128;
        self.sum_sq += (x as u128) * (x as u128);
    }

    fn mean(&self) -> f64 {
        self.sum as f64 / self.n as f64
    }

    fn stderr(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as u128;
        // n * sum_sq - sum^2 is exact in integers
        let num = n * self.sum_sq - self.sum * self.sum;
        let var = num as f64 / (self.n as f64 * (self.n - 1) as f64);
        (var / self.n as f64).sqrt()
    }
}

/// Aggregate trial records, in any order, into a summary.
pub fn summarize(k: u32, records: &[TrialRecord]) -> Result<SimSummary> {
    if records.is_empty() {
        return Err(Error::domain("cannot summarize zero trials"));
    }
    let mut tau = Moments::default();
    let mut nu = Moments::default();
    let mut confirm = Moments::default();
    let mut errors = 0u64;
    let mut fallbacks = 0u64;
    for r in records {
        let n = r.nu_or_tau();
        tau.push(r.tau);
        nu.push(n);
        confirm.push(r.tau - n);
        errors += u64::from(!r.correct);
        fallbacks += r.fallbacks;
    }
    let trials = records.len() as u64;
    let avg_tau = tau.mean();
    let (pe_ci_lo, pe_ci_hi) = wilson_interval(errors, trials, Z95);
    Ok(SimSummary {
        trials,
        errors,
        avg_tau,
        tau_stderr: tau.stderr(),
        pe_hat: errors as f64 / trials as f64,
        pe_ci_lo,
        pe_ci_hi,
        rate: if avg_tau > 0.0 { k as f64 / avg_tau } else { f64::INFINITY },
        avg_nu: nu.mean(),
        nu_stderr: nu.stderr(),
        avg_confirm: confirm.mean(),
        confirm_stderr: confirm.stderr(),
        avg_fallbacks: fallbacks as f64 / trials as f64,
        tau_total: tau.sum as u64,
        nu_total: nu.sum as u64,
        confirm_total: confirm.sum as u64,
    })
}

/// Run `trials` sessions on the current rayon pool.
pub fn monte_carlo(cfg: &SessionConfig, trials: u64, seed: u64) -> Result<SimSummary> {
    let records = run_records(cfg, trials, seed)?;
    summarize(cfg.k, &records)
}

/// [`monte_carlo`] on a dedicated pool of `workers` threads.
pub fn monte_carlo_with_workers(cfg: &SessionConfig, trials: u64, seed: u64, workers: usize) -> Result<SimSummary> {
    with_workers(workers, || monte_carlo(cfg, trials, seed))
}

/// Run `f` inside a rayon pool with `workers` threads.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool")
        .install(f)
}

/// All trial records of a run, in trial order.
pub fn run_records(cfg: &SessionConfig, trials: u64, seed: u64) -> Result<Vec<TrialRecord>> {
    if trials == 0 {
        return Err(Error::domain("trials must be at least 1"));
    }
    let results: Vec<Result<TrialRecord>> = (0..trials)
        .into_par_iter()
        .map(|i| run_indexed_trial(cfg, seed, i))
        .collect();
    let mut records = Vec::with_capacity(results.len());
    let mut capped = 0u64;
    for r in results {
        match r {
            Ok(rec) => records.push(rec),
            Err(Error::CapExceeded { .. }) => capped += 1,
            Err(e) => return Err(e),
        }
    }
    if capped > 0 {
        return Err(Error::CapExceeded { count: capped, max_steps: cfg.max_steps });
    }
    Ok(records)
}

/// One sweep row: simulation estimates joined with the bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub k: u32,
    pub m: u64,
    pub epsilon: f64,
    pub trials: u64,
    pub summary: std::result::Result<SimSummary, Error>,
    pub bounds: std::result::Result<BoundSet, Error>,
    pub runtime_s: f64,
}

/// Simulate every configuration and join it with its bounds, in input order.
/// Row failures are recorded in the row and do not stop the sweep.
pub fn sweep(cfgs: &[SessionConfig], trials: u64, seed: u64) -> Result<Vec<SweepRow>> {
    if cfgs.is_empty() {
        return Err(Error::domain("sweep needs at least one configuration"));
    }
    if trials == 0 {
        return Err(Error::domain("trials must be at least 1"));
    }
    Ok(cfgs
        .iter()
        .map(|cfg| {
            let start = Instant::now();
            let summary = monte_carlo(cfg, trials, seed);
            let runtime_s = start.elapsed().as_secs_f64();
            let m = 1u64 << cfg.k;
            SweepRow {
                k: cfg.k,
                m,
                epsilon: cfg.epsilon,
                trials,
                summary,
                bounds: bound_set(m, cfg.epsilon, &cfg.spec),
                runtime_s,
            }
        })
        .collect())
}

/// Straightforward session loop through [`encode_step`] (full sort every
/// step), returning the final belief as well. Serves the original algorithm
/// and as the reference for the greedy fast path.
pub fn run_trial_reference<R: Rng + ?Sized>(
    cfg: &SessionConfig,
    theta: usize,
    rng: &mut R,
) -> Result<(TrialRecord, BeliefState)> {
    let m = cfg.messages();
    if theta >= m {
        return Err(Error::domain(format!("message index {theta} outside 0..{m}")));
    }
    let mut belief = init_belief(m)?;
    let threshold = 1.0 - cfg.epsilon;
    let mut cross = Crossings::new(belief.rho()[theta]);
    loop {
        let (top, top_rho) = belief.argmax();
        if top_rho >= threshold {
            return Ok((cross.record(belief.t(), theta, top), belief));
        }
        if belief.t() >= cfg.max_steps {
            return Err(Error::CapExceeded { count: 1, max_steps: cfg.max_steps });
        }
        let part = encode_step(&belief, &cfg.encoder)?;
        let y = cfg.spec.sample_output(part.symbol(theta), rng);
        belief.update_in_place(part.mask(), y, &cfg.spec)?;
        cross.observe(belief.rho()[theta], belief.t());
    }
}
