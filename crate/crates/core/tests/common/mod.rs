#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use sed_vlf::{BeliefState, ChannelSpec};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random regularized pair kept away from the zero-capacity line `p0 + p1 = 1`.
pub fn random_spec<R: Rng>(rng: &mut R) -> ChannelSpec {
    loop {
        let p0: f64 = rng.gen_range(0.005..0.495);
        let p1 = rng.gen_range(p0..1.0 - p0);
        if (1.0 - p0 - p1).abs() > 0.02 {
            return ChannelSpec::new(p0, p1).unwrap();
        }
    }
}

fn raw_weights<R: Rng>(rng: &mut R, m: usize) -> Vec<f64> {
    let shape = rng.gen_range(0.2..4.0);
    (0..m).map(|_| rng.gen_range(1e-6f64..1.0).powf(shape)).collect()
}

/// Random posterior over `m` messages whose maximum is below `cap`, mixed
/// toward uniform as needed. Requires `1/m < cap`.
pub fn random_belief_below<R: Rng>(rng: &mut R, m: usize, cap: f64) -> BeliefState {
    assert!(1.0 / (m as f64) < cap);
    let w = raw_weights(rng, m);
    let total: f64 = w.iter().sum();
    let rho: Vec<f64> = w.iter().map(|x| x / total).collect();
    let top = rho.iter().cloned().fold(0.0, f64::max);
    let u = 1.0 / m as f64;
    let target = u + (cap - u) * rng.gen_range(0.05..0.999);
    let alpha = if top <= target { 1.0 } else { (target - u) / (top - u) };
    let mixed: Vec<f64> = rho.iter().map(|r| alpha * r + (1.0 - alpha) * u).collect();
    let b = BeliefState::from_weights(mixed).unwrap();
    assert!(b.argmax().1 < cap);
    b
}

/// Random posterior whose top entry is at least `floor`.
pub fn random_belief_confirming<R: Rng>(rng: &mut R, m: usize, floor: f64) -> BeliefState {
    let top = rng.gen_range(floor..0.999_999);
    let w = raw_weights(rng, m - 1);
    let total: f64 = w.iter().sum();
    let pos = rng.gen_range(0..m);
    let mut rho: Vec<f64> = w.iter().map(|x| x / total * (1.0 - top)).collect();
    rho.insert(pos, top);
    BeliefState::from_weights(rho).unwrap()
}
