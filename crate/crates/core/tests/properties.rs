use nalgebra::{DMatrix, DVector};
use num_rational::Rational64;
use proptest::prelude::*;

use lqgid_core::analysis::{blended_t_eigenvalues, lambda_threshold, symmetric_h_inverse};
use lqgid_core::equilibrium::{
    bce_residuals, bne_coefficients, full_info_solution, induced_solution, noisy_private_structure, CovSolution,
};
use lqgid_core::experiments::{run_sweep, Experiment, Layout, SweepConfig};
use lqgid_core::game::GameSpec;
use lqgid_core::linalg;
use lqgid_core::montecarlo::simulate_play;
use lqgid_core::objectives::{
    action_space_reduction, conformism_f, evaluate, full_info_value, social_welfare_f, FMatrix,
};
use lqgid_core::sdp::{build_sdp, solve, SolveStatus, SolverOptions};

fn square(n: usize, lo: f64, hi: f64) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(lo..hi, n * n).prop_map(move |v| DMatrix::from_vec(n, n, v))
}

/// Game with positive definite symmetric part of `H`, possibly asymmetric.
fn game(n: usize) -> impl Strategy<Value = GameSpec> {
    (square(n, -1.0, 1.0), square(n, -0.3, 0.3), square(n, -1.0, 1.0), prop::collection::vec(-1.0..1.0, n))
        .prop_map(move |(a, skew, b, mu)| {
            let h = &a * a.transpose() / n as f64 + DMatrix::identity(n, n) + (&skew - skew.transpose());
            let sigma = &b * b.transpose() + DMatrix::identity(n, n) * 0.05;
            GameSpec::new(h, DVector::from_vec(mu), sigma).unwrap()
        })
}

fn any_game() -> impl Strategy<Value = GameSpec> {
    (2usize..=5).prop_flat_map(game)
}

fn outer(a: &DVector<f64>, gamma: &DVector<f64>) -> CovSolution {
    let n = a.len();
    let mut v = DVector::zeros(2 * n);
    v.rows_mut(0, n).copy_from(a);
    v.rows_mut(n, n).copy_from(gamma);
    CovSolution { x: &v * v.transpose(), mean_a: DVector::zeros(n) }
}

fn point(n: usize) -> impl Strategy<Value = (DVector<f64>, DVector<f64>)> {
    (prop::collection::vec(-3.0..3.0, n), prop::collection::vec(-3.0..3.0, n))
        .prop_map(|(a, g)| (DVector::from_vec(a), DVector::from_vec(g)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn own_gradient_matches_finite_difference(
        (g, (a, gamma), i) in any_game().prop_flat_map(|g| {
            let n = g.n;
            (Just(g), point(n), 0..n)
        })
    ) {
        let step = 1e-6;
        let mut up = a.clone();
        up[i] += step;
        let mut down = a.clone();
        down[i] -= step;
        let fd = (g.payoff(i, &up, &gamma) - g.payoff(i, &down, &gamma)) / (2.0 * step);
        prop_assert!((fd - g.own_gradient(i, &a, &gamma)).abs() < 1e-5 * (1.0 + fd.abs()));
    }

    #[test]
    fn welfare_form_is_payoff_sum_with_offsets(
        (g, (a, gamma)) in any_game().prop_flat_map(|g| { let n = g.n; (Just(g), point(n)) })
    ) {
        let f = social_welfare_f(&g).unwrap();
        // d_i(a_-i, γ) = Σ_{j≠i} H_ij a_i a_j restores the welfare quadratic form.
        let total: f64 = (0..g.n)
            .map(|i| {
                let d: f64 = (0..g.n).filter(|&j| j != i).map(|j| g.h[(i, j)] * a[i] * a[j]).sum();
                g.payoff(i, &a, &gamma) + d
            })
            .sum();
        let value = evaluate(&f, &outer(&a, &gamma)).unwrap();
        prop_assert!((value - total).abs() < 1e-9 * (1.0 + total.abs()));
    }

    #[test]
    fn conformism_form_is_negative_dispersion(n in 2usize..=7, a in prop::collection::vec(-3.0..3.0f64, 7)) {
        let a = DVector::from_column_slice(&a[..n]);
        let f = conformism_f(n).unwrap();
        let mean = a.mean();
        let dispersion: f64 = a.iter().map(|v| (v - mean).powi(2)).sum();
        let value = evaluate(&f, &outer(&a, &DVector::zeros(n))).unwrap();
        prop_assert!((value + dispersion).abs() < 1e-9 * (1.0 + dispersion));
        prop_assert!(linalg::sym_eigenvalues(&f.f11()).iter().all(|&e| e <= 1e-12));
    }

    #[test]
    fn action_space_reduction_matches_objective(
        (g, diag, f11) in any_game().prop_flat_map(|g| {
            let n = g.n;
            (Just(g), prop::collection::vec(-2.0..2.0f64, n), square(n, -2.0, 2.0))
        }),
        noise_scale in 0.1..3.0f64,
    ) {
        let n = g.n;
        let mut f = DMatrix::zeros(2 * n, 2 * n);
        f.view_mut((0, 0), (n, n)).copy_from(&linalg::symmetrize(&f11));
        for i in 0..n {
            f[(i, n + i)] = diag[i];
            f[(n + i, i)] = diag[i];
        }
        let f = FMatrix::custom(f).unwrap();
        let e = action_space_reduction(&f, &g).unwrap();
        let z = noisy_private_structure(&g, &(DMatrix::identity(n, n) * noise_scale)).unwrap();
        let x = induced_solution(&g, &z, &bne_coefficients(&g, &z).unwrap()).unwrap();
        let lhs = evaluate(&f, &x).unwrap();
        let rhs = linalg::frobenius(&e, &x.var_a());
        prop_assert!((lhs - rhs).abs() < 1e-8 * (1.0 + lhs.abs()), "{lhs} vs {rhs}");
    }

    #[test]
    fn full_info_value_matches_direct_evaluation(
        (g, f) in any_game().prop_flat_map(|g| { let n = g.n; (Just(g), square(2 * n, -2.0, 2.0)) })
    ) {
        let mut f = linalg::symmetrize(&f);
        let n = g.n;
        f.view_mut((n, n), (n, n)).fill(0.0);
        let f = FMatrix::custom(f).unwrap();
        let closed = full_info_value(&f, &g).unwrap();
        let direct = evaluate(&f, &full_info_solution(&g).unwrap()).unwrap();
        prop_assert!((closed - direct).abs() < 1e-9 * (1.0 + closed.abs()));
    }

    #[test]
    fn equilibrium_covariances_are_bce(
        (g, noise) in any_game().prop_flat_map(|g| { let n = g.n; (Just(g), square(n, -1.0, 1.0)) })
    ) {
        let n = g.n;
        let noise = &noise * noise.transpose() + DMatrix::identity(n, n) * 0.01;
        let z = noisy_private_structure(&g, &noise).unwrap();
        let s = bne_coefficients(&g, &z).unwrap();
        let x = induced_solution(&g, &z, &s).unwrap();
        let scale = linalg::max_abs(&x.x).max(1.0);
        prop_assert!(bce_residuals(&g, &x).unwrap().amax() < 1e-8 * scale);
        prop_assert!(linalg::min_eig(&x.x) > -1e-9 * scale);
        prop_assert!((x.var_gamma() - &g.sigma).amax() < 1e-12 * scale);
    }

    #[test]
    fn symmetric_inverse_is_inverse(n in 3usize..=8, t in 0.05..0.95f64) {
        let lo = -1.0 / (n as f64 - 1.0);
        let h = lo + (1.0 - lo) * t;
        prop_assume!(h.abs() > 1e-9);
        let inv = symmetric_h_inverse(n, h).unwrap();
        let hm = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { h });
        prop_assert!((&hm * inv - DMatrix::identity(n, n)).amax() < 1e-12);
    }

    #[test]
    fn threshold_is_exact_sign_change(p in 1i64..200, extra in 1i64..200, n in 2usize..10) {
        let h = Rational64::new(p, p + extra);
        let one = Rational64::from_integer(1);
        let zero = Rational64::from_integer(0);
        let thr = lambda_threshold(h).unwrap();
        prop_assert_eq!(thr, (one - h) / (one + one - h));
        let delta = Rational64::new(1, 1_000_000);
        prop_assert_eq!(blended_t_eigenvalues(n, h, thr).1, zero);
        prop_assert!(blended_t_eigenvalues(n, h, thr - delta).1 > zero);
        prop_assert!(blended_t_eigenvalues(n, h, thr + delta).1 < zero);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn optimum_is_sandwiched(g in any_game()) {
        let f = social_welfare_f(&g).unwrap();
        let opts = SolverOptions::default();
        let r = solve(&build_sdp(&g, &f).unwrap(), &opts).unwrap();
        prop_assert_eq!(r.status, SolveStatus::Converged);
        let full = full_info_value(&f, &g).unwrap();
        let none = evaluate(&f, &lqgid_core::equilibrium::no_info_solution(&g).unwrap()).unwrap();
        let slack = 10.0 * opts.tol * (1.0 + full.abs().max(none.abs()));
        prop_assert!(r.objective >= full.max(none) - slack, "{} < max({full}, {none})", r.objective);
        prop_assert!(r.objective <= r.dual_objective + slack);
    }

    #[test]
    fn simulation_is_deterministic(g in any_game(), seed in any::<u64>()) {
        let n = g.n;
        let z = noisy_private_structure(&g, &DMatrix::identity(n, n)).unwrap();
        let s = bne_coefficients(&g, &z).unwrap();
        let f = social_welfare_f(&g).unwrap();
        let a = simulate_play(&g, &z, &s, Some(&f), 2_000, seed).unwrap();
        let b = simulate_play(&g, &z, &s, Some(&f), 2_000, seed).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn sweep_rendering_is_deterministic() {
    let mut cfg = SweepConfig::new(Experiment::Fig3);
    cfg.lambda = Some(vec![0.0, 0.3, 0.7]);
    let a = run_sweep(&cfg, Layout::Csv).unwrap();
    let b = run_sweep(&cfg, Layout::Csv).unwrap();
    assert_eq!(a, b);
}
