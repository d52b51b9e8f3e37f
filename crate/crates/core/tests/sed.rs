mod common;

use proptest::prelude::*;
use rand::Rng;
use sed_vlf::sed_encoder::{
    check_sed_condition, exhaustive_f_minimizer, objective_f, sed_partition_greedy, sed_partition_original,
    sed_partition_original_traced,
};
use sed_vlf::{BeliefState, Partition};

/// Random `(lambda, M, belief)` with `max rho < lambda / (1 + lambda)`.
fn random_case<R: Rng>(rng: &mut R, max_m: usize) -> (f64, BeliefState) {
    let lambda: f64 = if rng.gen_bool(0.25) { 1.0 } else { rng.gen_range(0.3..1.0) };
    let cap = lambda / (1.0 + lambda);
    let min_m = (1.0 / cap).floor() as usize + 1;
    let m = rng.gen_range(min_m.max(2)..=max_m.max(min_m + 1));
    (lambda, common::random_belief_below(rng, m, cap))
}

#[test]
fn greedy_and_original_valid_on_random_states() {
    let mut rng = common::rng(31);
    let mut most_moves = 0.0f64;
    for _ in 0..10_000 {
        let (lambda, b) = random_case(&mut rng, 64);
        let g = sed_partition_greedy(&b, lambda).unwrap();
        assert!(check_sed_condition(&b, &g, lambda));
        let (o, moves) = sed_partition_original_traced(&b, lambda).unwrap();
        assert!(check_sed_condition(&b, &o, lambda));
        assert!(moves <= 4 * b.len());
        most_moves = most_moves.max(moves as f64 / b.len() as f64);
    }
    assert!(most_moves <= 4.0);
}

#[test]
fn exhaustive_minimizer_valid_for_small_sets() {
    let mut rng = common::rng(32);
    for _ in 0..2_000 {
        let (lambda, b) = random_case(&mut rng, 12);
        let p = exhaustive_f_minimizer(&b, lambda).unwrap();
        assert!(check_sed_condition(&b, &p, lambda), "minimizer fails on {:?}", b.rho());
        // at least as good as the greedy split
        let f = objective_f(&p.s0(), &b, lambda);
        let g = sed_partition_greedy(&b, lambda).unwrap();
        assert!(f <= objective_f(&g.s0(), &b, lambda) + 1e-15);
    }
}

#[test]
fn one_sided_partitions_handled() {
    let b = BeliefState::from_weights(vec![0.3, 0.3, 0.2, 0.2]).unwrap();
    let all0 = Partition::from_s1(&b, &[]).unwrap();
    assert!(!check_sed_condition(&b, &all0, 1.0));
    let all1 = Partition::from_s1(&b, &[0, 1, 2, 3]).unwrap();
    assert!(!check_sed_condition(&b, &all1, 1.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn bsc_condition_is_two_sided_relaxation(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let m = rng.gen_range(3..=16);
        let b = common::random_belief_below(&mut rng, m, 0.5);
        let rho = b.rho();
        // every subset passing the one-sided rule 0 <= pi0 - pi1 <= min_{S0}
        // must pass the lambda = 1 condition; conversely every passing subset
        // meets the two-sided bound written out directly
        for mask in 0u32..(1 << m) {
            let s1: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
            let p = Partition::from_s1(&b, &s1).unwrap();
            let d = p.pi0() - p.pi1();
            let min0 = (0..m).filter(|i| mask >> i & 1 == 0).map(|i| rho[i]).fold(f64::INFINITY, f64::min);
            let min1 = s1.iter().map(|&i| rho[i]).fold(f64::INFINITY, f64::min);
            let ok = check_sed_condition(&b, &p, 1.0);
            if d >= 0.0 && d <= min0 {
                prop_assert!(ok);
            }
            if ok {
                prop_assert!(-min1 - 1e-12 <= d && d <= min0 + 1e-12);
            }
        }
    }

    #[test]
    fn partitions_are_deterministic(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let (lambda, b) = random_case(&mut rng, 64);
        let copy = b.clone();
        prop_assert_eq!(sed_partition_greedy(&b, lambda).unwrap(), sed_partition_greedy(&b, lambda).unwrap());
        prop_assert_eq!(sed_partition_original(&b, lambda).unwrap(), sed_partition_original(&copy, lambda).unwrap());
    }

    #[test]
    fn ties_go_to_lowest_index(m in 3usize..40) {
        // uniform posterior with lambda = 1 alternates 0, 1, 0, 1, ...
        let b = BeliefState::uniform(m).unwrap();
        let p = sed_partition_greedy(&b, 1.0).unwrap();
        for i in 0..m {
            prop_assert_eq!(p.symbol(i), (i % 2) as u8);
        }
    }
}
