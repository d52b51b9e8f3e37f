//! The memoryless binary asymmetric channel (BAC).
//!
//! A BAC is described by two crossover probabilities, `p0 = P(Y=1|X=0)` and
//! `p1 = P(Y=0|X=1)`. Every nondegenerate BAC can be brought into the
//! *regularized* region `0 < p0 < 1/2, p0 <= p1 <= 1 - p0` by swapping the
//! input labels, the output labels, or both; everything downstream works on
//! the regularized pair.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::golden_max;

/// Binary entropy in bits, with `0 log 0 = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("binary entropy argument {p} outside [0, 1]")));
    }
    Ok(h2(p))
}

/// Unchecked binary entropy for callers that already hold a probability.
#[inline]
pub(crate) fn h2(p: f64) -> f64 {
    xlog2x(p) + xlog2x(1.0 - p)
}

#[inline]
fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.log2()
    }
}

/// KL divergence `D(P || Q)` in bits between two distributions on `{0, 1}`.
///
/// Uses `0 log(0/a) = 0` and `b log(b/0) = +inf` for `b > 0`; an infinite
/// divergence is returned as `f64::INFINITY`.
pub fn kl_divergence(p: [f64; 2], q: [f64; 2]) -> f64 {
    let mut d = 0.0;
    for (&pp, &qq) in p.iter().zip(q.iter()) {
        if pp <= 0.0 {
            continue;
        }
        if qq <= 0.0 {
            return f64::INFINITY;
        }
        d += pp * (pp / qq).log2();
    }
    // rounding can leave a tiny negative residue when P == Q
    d.max(0.0)
}

/// Label transform taking the raw channel to its regularized form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relabel {
    None,
    SwapInput,
    SwapOutput,
    SwapBoth,
}

impl Relabel {
    pub const ALL: [Relabel; 4] = [
        Relabel::None,
        Relabel::SwapInput,
        Relabel::SwapOutput,
        Relabel::SwapBoth,
    ];

    /// Apply the transform to a crossover pair. Every transform is an
    /// involution, so applying it twice returns the input.
    pub fn apply(self, p0: f64, p1: f64) -> (f64, f64) {
        match self {
            Relabel::None => (p0, p1),
            // rows of the transition matrix exchanged
            Relabel::SwapInput => (1.0 - p1, 1.0 - p0),
            // columns exchanged
            Relabel::SwapOutput => (1.0 - p0, 1.0 - p1),
            Relabel::SwapBoth => (p1, p0),
        }
    }
}

fn is_regularized(p0: f64, p1: f64) -> bool {
    p0 > 0.0 && p0 < 0.5 && p0 <= p1 && p1 <= 1.0 - p0
}

/// A regularized BAC together with the relabel that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    p0: f64,
    p1: f64,
    relabel: Relabel,
}

/// Bring `(p0, p1)` into the regularized region.
pub fn regularize(p0: f64, p1: f64) -> Result<ChannelSpec> {
    for (name, p) in [("p0", p0), ("p1", p1)] {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::domain(format!("{name} = {p} must lie in (0, 1)")));
        }
    }
    if p0 + p1 == 1.0 {
        return Err(Error::ZeroCapacity { p0, p1 });
    }
    for relabel in Relabel::ALL {
        let (a, b) = relabel.apply(p0, p1);
        if is_regularized(a, b) && 1.0 - a - b != 0.0 {
            return Ok(ChannelSpec { p0: a, p1: b, relabel });
        }
    }
    // only reachable when p0 + p1 rounds to 1 under one of the transforms
    Err(Error::ZeroCapacity { p0, p1 })
}

impl ChannelSpec {
    /// Regularize a raw crossover pair; same as [`regularize`].
    pub fn new(p0: f64, p1: f64) -> Result<Self> {
        regularize(p0, p1)
    }

    /// Binary symmetric channel with crossover `p`.
    pub fn bsc(p: f64) -> Result<Self> {
        regularize(p, p)
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn relabel(&self) -> Relabel {
        self.relabel
    }

    pub fn is_symmetric(&self) -> bool {
        self.p0 == self.p1
    }

    /// The crossover pair as originally supplied.
    pub fn original(&self) -> (f64, f64) {
        self.relabel.apply(self.p0, self.p1)
    }

    /// `P(Y = y | X = x)` of the regularized channel.
    #[inline]
    pub fn likelihood(&self, y: u8, x: u8) -> f64 {
        match (x, y) {
            (0, 0) => 1.0 - self.p0,
            (0, _) => self.p0,
            (_, 0) => self.p1,
            _ => 1.0 - self.p1,
        }
    }

    /// Output distribution `[P(Y=0|X=x), P(Y=1|X=x)]`.
    pub fn output_dist(&self, x: u8) -> [f64; 2] {
        [self.likelihood(0, x), self.likelihood(1, x)]
    }

    /// Draw one channel output for input `x`.
    #[inline]
    pub fn sample_output<R: Rng + ?Sized>(&self, x: u8, rng: &mut R) -> u8 {
        let u: f64 = rng.gen();
        if x == 0 {
            u8::from(u < self.p0)
        } else {
            u8::from(u >= self.p1)
        }
    }

    /// Mutual information `I(pi0)` in bits for the input law `(pi0, 1 - pi0)`.
    pub fn mutual_information(&self, pi0: f64) -> f64 {
        let (p0, p1) = (self.p0, self.p1);
        h2(pi0 * (1.0 - p0 - p1) + p1) - pi0 * (h2(p0) - h2(p1)) - h2(p1)
    }
}

/// Free-function form of [`ChannelSpec::sample_output`].
pub fn sample_output<R: Rng + ?Sized>(spec: &ChannelSpec, x: u8, rng: &mut R) -> u8 {
    spec.sample_output(x, rng)
}

/// Closed-form constants of a regularized BAC. All information quantities in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelStats {
    /// Capacity.
    pub c: f64,
    /// Largest KL divergence between the two output laws.
    pub c1: f64,
    /// Largest one-step log-likelihood ratio magnitude.
    pub c2: f64,
    pub pi0_star: f64,
    pub pi1_star: f64,
    /// `pi1_star / pi0_star`, in `(0, 1]`.
    pub lambda: f64,
    /// Smallest likelihood ratio `P(y|x1) / P(y|x2)`.
    pub lambda1: f64,
    pub z: f64,
}

/// Closed-form capacity, capacity-achieving input law, `C1` and `C2`.
pub fn channel_stats(spec: &ChannelSpec) -> Result<ChannelStats> {
    let (p0, p1) = (spec.p0, spec.p1);
    let d = 1.0 - p0 - p1;
    if d == 0.0 {
        return Err(Error::ZeroCapacity { p0, p1 });
    }
    let (hp0, hp1) = (h2(p0), h2(p1));
    let z = ((hp0 - hp1) / d).exp2();
    let (c, pi0_star, pi1_star) = if p0 == p1 {
        (1.0 - hp0, 0.5, 0.5)
    } else {
        let c = p0 * hp1 / d - (1.0 - p1) * hp0 / d + (1.0 + z).log2();
        let pi0 = (1.0 - p1 * (1.0 + z)) / (d * (1.0 + z));
        let pi1 = ((1.0 - p0) * (1.0 + z) - 1.0) / (d * (1.0 + z));
        (c, pi0, pi1)
    };
    let c1 = kl_divergence(spec.output_dist(1), spec.output_dist(0));
    let c2 = ((1.0 - p1) / p0).log2();
    let lambda1 = [p0 / (1.0 - p1), p1 / (1.0 - p0)]
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    Ok(ChannelStats {
        c,
        c1,
        c2,
        pi0_star,
        pi1_star,
        lambda: pi1_star / pi0_star,
        lambda1,
        z,
    })
}

impl ChannelSpec {
    pub fn stats(&self) -> Result<ChannelStats> {
        channel_stats(self)
    }
}

/// Capacity by direct numerical maximization of the mutual information.
///
/// `I(pi0)` is strictly concave, so a coarse grid followed by golden-section
/// search to `|d pi0| < 1e-12` finds the global maximum. Independent of the
/// closed form in [`channel_stats`].
pub fn capacity_oracle(spec: &ChannelSpec) -> f64 {
    const LO: f64 = 1e-12;
    const HI: f64 = 1.0 - 1e-12;
    const GRID: usize = 64;
    let f = |x: f64| spec.mutual_information(x);
    let step = (HI - LO) / GRID as f64;
    let best = (0..=GRID)
        .map(|i| LO + step * i as f64)
        .map(|x| (x, f(x)))
        .fold((LO, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    let lo = (best.0 - step).max(LO);
    let hi = (best.0 + step).min(HI);
    golden_max(f, lo, hi, 1e-12).1
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn entropy_values() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        let c = 1.0 - binary_entropy(0.11).unwrap();
        assert!((c - 0.5).abs() < 1e-3);
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.5).is_err());
        assert!(binary_entropy(f64::NAN).is_err());
    }

    #[test]
    fn kl_values() {
        assert_eq!(kl_divergence([0.3, 0.7], [0.3, 0.7]), 0.0);
        assert_eq!(kl_divergence([1.0, 0.0], [0.5, 0.5]), 1.0);
        let c1 = kl_divergence([0.22, 0.78], [0.97, 0.03]);
        assert!((c1 - 3.1954).abs() < 5e-4, "{c1}");
        assert_eq!(kl_divergence([0.5, 0.5], [1.0, 0.0]), f64::INFINITY);
    }

    #[test]
    fn regularize_examples() {
        let s = regularize(0.03, 0.22).unwrap();
        assert_eq!(s.relabel(), Relabel::None);
        let s = regularize(0.11, 0.11).unwrap();
        assert_eq!(s.relabel(), Relabel::None);

        let s = regularize(0.78, 0.97).unwrap();
        assert!((s.p0() - 0.03).abs() < 1e-15 && (s.p1() - 0.22).abs() < 1e-15);
        let (a, b) = s.original();
        assert!((a - 0.78).abs() < 1e-15 && (b - 0.97).abs() < 1e-15);
    }

    #[test]
    fn regularize_rejects_zero_capacity_and_bad_input() {
        assert!(matches!(regularize(0.3, 0.7), Err(Error::ZeroCapacity { .. })));
        assert!(matches!(regularize(0.5, 0.5), Err(Error::ZeroCapacity { .. })));
        assert!(matches!(regularize(0.0, 0.2), Err(Error::Domain(_))));
        assert!(matches!(regularize(0.2, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn relabel_enumeration_oracle() {
        // Brute force: every relabel of every raw pair lands somewhere; exactly
        // the regularized images should be accepted, and capacity is invariant.
        let grid: Vec<f64> = (1..20).map(|i| i as f64 / 20.0).collect();
        for &a in &grid {
            for &b in &grid {
                if (a + b - 1.0).abs() < 1e-9 {
                    continue;
                }
                let spec = regularize(a, b).unwrap();
                assert!(is_regularized(spec.p0(), spec.p1()));
                let raw_ci = capacity_oracle(&ChannelSpec { p0: a, p1: b, relabel: Relabel::None });
                let reg_c = channel_stats(&spec).unwrap().c;
                assert!((raw_ci - reg_c).abs() < 1e-9, "({a},{b}): {raw_ci} vs {reg_c}");
            }
        }
    }

    #[test]
    fn reference_operating_points() {
        let s = channel_stats(&ChannelSpec::new(0.03, 0.22).unwrap()).unwrap();
        assert!((s.c - 0.5).abs() < 5e-4);
        assert!((s.c1 - 3.1954).abs() < 5e-4);
        assert!((s.c2 - 4.7).abs() < 5e-4);

        let s = channel_stats(&ChannelSpec::bsc(0.11).unwrap()).unwrap();
        assert!((s.c - 0.5).abs() < 5e-4);
        assert!((s.c1 - 2.3527).abs() < 5e-4);
        assert!((s.c2 - 3.0163).abs() < 5e-4);
        assert_eq!(s.pi0_star, 0.5);
        assert_eq!(s.pi1_star, 0.5);
        assert!((s.lambda1 - 0.11 / 0.89).abs() < 1e-15);
        assert!((s.lambda1 - (-s.c2).exp2()).abs() < 1e-15);
    }

    #[test]
    fn symmetric_channels_have_uniform_input() {
        for p in [0.01, 0.1, 0.2, 0.3, 0.45, 0.499] {
            let s = channel_stats(&ChannelSpec::bsc(p).unwrap()).unwrap();
            assert_eq!(s.pi0_star, 0.5);
            assert_eq!(s.pi1_star, 0.5);
            assert!((s.c - (1.0 - h2(p))).abs() < 1e-15);
        }
    }

    #[test]
    fn oracle_examples() {
        let spec = ChannelSpec::new(0.03, 0.22).unwrap();
        let closed = channel_stats(&spec).unwrap().c;
        assert!((capacity_oracle(&spec) - closed).abs() < 1e-9);

        let spec = ChannelSpec::bsc(0.11).unwrap();
        assert!((capacity_oracle(&spec) - (1.0 - h2(0.11))).abs() < 1e-12);

        let spec = ChannelSpec::new(0.25, 0.4).unwrap();
        let closed = channel_stats(&spec).unwrap().c;
        assert!((capacity_oracle(&spec) - closed).abs() < 1e-9);
    }

    #[test]
    fn sampling_is_deterministic_and_calibrated() {
        let spec = ChannelSpec::bsc(0.11).unwrap();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..1000).map(|i| spec.sample_output((i % 2) as u8, &mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(5), draw(5));
        assert_ne!(draw(5), draw(6));

        let n = 1_000_000u32;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let flips = (0..n).filter(|_| spec.sample_output(1, &mut rng) == 0).count() as f64;
        let freq = flips / n as f64;
        let se = (0.11f64 * 0.89 / n as f64).sqrt();
        assert!((freq - 0.11).abs() < 3.0 * se, "{freq}");
    }

    #[test]
    fn nearly_noiseless_channel_passes_input_through() {
        let spec = ChannelSpec::bsc(1e-12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!((0..10_000).all(|_| sample_output(&spec, 0, &mut rng) == 0));
        assert!((0..10_000).all(|_| sample_output(&spec, 1, &mut rng) == 1));
    }
}
