use proptest::prelude::*;
use sed_vlf::first_passage::{
    confirmation_bound, confirmation_bound_exact_n, delta_iterate, delta_recursion, mc_first_passage, node_solve,
    v0_closed_form,
};
use sed_vlf::FirstPassageProblem;

fn grid() -> impl Iterator<Item = FirstPassageProblem> {
    (1..=50u32).flat_map(|n| {
        (1..=9).flat_map(move |j| {
            let p = 0.05 * j as f64;
            let fixed = FirstPassageProblem::new(n, p, 1.0).unwrap().fixed_point_delta();
            [1.0, fixed, 10.0].map(|d| FirstPassageProblem::new(n, p, d).unwrap())
        })
    })
}

#[test]
fn closed_form_matches_linear_solve_on_grid() {
    for prob in grid() {
        let closed = v0_closed_form(&prob);
        let v = node_solve(&prob).unwrap();
        assert!((closed - v[0]).abs() < 1e-10 * (1.0 + closed.abs()), "{prob:?}: {closed} vs {}", v[0]);
        assert!(v.windows(2).all(|w| w[0] > w[1]), "{prob:?} not decreasing");
    }
}

#[test]
fn recursion_matches_iteration_on_grid() {
    for prob in grid() {
        let last = *delta_iterate(&prob).last().unwrap();
        let closed = delta_recursion(&prob);
        assert!((last - closed).abs() < 1e-10 * (1.0 + closed.abs()));
    }
}

#[test]
fn monte_carlo_spot_checks() {
    let configs = [(1, 0.1, 1.0), (5, 0.2, f64::NAN), (3, 0.1, 5.0), (8, 0.3, 10.0), (4, 0.11, 5.5)];
    for (n, p, d) in configs {
        let mut prob = FirstPassageProblem::new(n, p, 1.0).unwrap();
        prob.delta0 = if d.is_nan() { prob.fixed_point_delta() } else { d };
        let mc = mc_first_passage(&prob, 200_000, 5).unwrap();
        let closed = v0_closed_form(&prob);
        assert!((mc.mean - closed).abs() <= 3.0 * mc.stderr, "{prob:?}: {} +- {} vs {closed}", mc.mean, mc.stderr);
    }
}

#[test]
fn monte_carlo_is_deterministic() {
    let prob = FirstPassageProblem::new(4, 0.2, 3.0).unwrap();
    assert_eq!(mc_first_passage(&prob, 5000, 9).unwrap(), mc_first_passage(&prob, 5000, 9).unwrap());
}

#[test]
fn confirmation_bound_covers_integer_chain() {
    for p in [0.02, 0.11, 0.2, 0.3, 0.45] {
        for eps in [1e-2, 1e-3, 1e-6] {
            let exact = confirmation_bound_exact_n(p, eps).unwrap();
            let relaxed = confirmation_bound(p, eps).unwrap();
            assert!(exact <= relaxed + 1e-9, "p={p} eps={eps}: {exact} > {relaxed}");
        }
    }
}

proptest! {
    #[test]
    fn bound_grows_with_log_inverse_eps(p in 0.01f64..0.49, e in 1.5f64..12.0) {
        let a = confirmation_bound(p, 10f64.powf(-e)).unwrap();
        let b = confirmation_bound(p, 10f64.powf(-e - 0.5)).unwrap();
        prop_assert!(b > a);
    }

    #[test]
    fn solve_agrees_off_grid(n in 1u32..200, p in 0.01f64..0.49, d in 1.0f64..50.0) {
        let prob = FirstPassageProblem::new(n, p, d).unwrap();
        let closed = v0_closed_form(&prob);
        let v = node_solve(&prob).unwrap();
        prop_assert!((closed - v[0]).abs() < 1e-10 * (1.0 + closed.abs()));
    }
}
