use std::time::Instant;
use sed_vlf::{session_sim::monte_carlo, Algorithm, ChannelSpec, SessionConfig};

fn main() {
    let k: u32 = std::env::args().nth(1).map_or(12, |s| s.parse().unwrap());
    let n: u64 = std::env::args().nth(2).map_or(10_000, |s| s.parse().unwrap());
    for spec in [ChannelSpec::bsc(0.11).unwrap(), ChannelSpec::new(0.03, 0.22).unwrap()] {
        let cfg = SessionConfig::new(spec, k, 1e-3, Algorithm::Greedy).unwrap();
        let t = Instant::now();
        let s = monte_carlo(&cfg, n, 1).unwrap();
        println!("{:?} {:.3}s {:?}", (spec.p0(), spec.p1()), t.elapsed().as_secs_f64(), s);
    }
}
