//! Randomized invariants over operators, solvers, and objectives.

use proptest::prelude::*;

use sfhf_core::dense::DenseSymMatrix;
use sfhf_core::krylov::cg_solve;
use sfhf_core::linalg::{dot, power_iteration_norm, Vector};
use sfhf_core::objectives::{
    self, as_hessian_operator, fd_gradient, make_quadratic, make_rosenbrock, Objective,
    QuadraticSpec,
};

fn vec_strategy(dim: usize, bound: f64) -> impl Strategy<Value = Vector> {
    prop::collection::vec(-bound..bound, dim)
        .prop_map(|d| Vector::from_vec(d).expect("bounded draws are finite"))
}

fn spectrum_strategy(dim: usize, lo: f64, hi: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(lo..hi, dim)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    /// u·(Hw) = w·(Hu) for the network Hessian, up to rounding.
    #[test]
    fn mlp_hessian_operator_is_symmetric(
        theta_seed in 0u64..1000,
        u in vec_strategy(13, 2.0),
        w in vec_strategy(13, 2.0),
    ) {
        let mlp = objectives::xor_mlp();
        let theta = objectives::seeded_theta(13, theta_seed);
        let op = as_hessian_operator(&mlp, &theta);
        let uhw = dot(&u, &op.apply(&w).unwrap()).unwrap();
        let whu = dot(&w, &op.apply(&u).unwrap()).unwrap();
        let scale = uhw.abs().max(whu.abs()).max(1.0);
        prop_assert!((uhw - whu).abs() <= 1e-10 * scale);
    }

    /// v·(A²v) = ‖Av‖² stays non-negative even for indefinite A.
    #[test]
    fn squared_operator_is_positive_semidefinite(
        eigs in spectrum_strategy(6, -5.0, 5.0),
        seed in 0u64..1000,
        v in vec_strategy(6, 3.0),
    ) {
        let a = DenseSymMatrix::from_spectrum(&eigs, seed).unwrap();
        let squared = a.as_operator().compose_square();
        let quad = dot(&v, &squared.apply(&v).unwrap()).unwrap();
        prop_assert!(quad >= -1e-9 * v.norm().powi(2).max(1.0));
    }

    /// CG drives the true residual of SPD systems below tolerance, which
    /// pins the solution to the dense one within a condition-number factor.
    #[test]
    fn cg_solves_spd_systems_to_tolerance(
        eigs in spectrum_strategy(8, 0.5, 5.0),
        seed in 0u64..1000,
        b in vec_strategy(8, 4.0),
    ) {
        prop_assume!(b.norm() > 1e-6);
        let a = DenseSymMatrix::from_spectrum(&eigs, seed).unwrap();
        let op = a.as_operator();
        let solve = cg_solve(&op, &b, 1e-10, 100, None).unwrap();
        prop_assert!(solve.converged);
        let ax = a.mul_vec(&solve.solution).unwrap();
        let mut resid = 0.0;
        for i in 0..8 {
            let d = ax[i] - b[i];
            resid += d * d;
        }
        prop_assert!(resid.sqrt() / b.norm() <= 1e-8);
    }

    /// The quadratic Hessian ignores the evaluation point.
    #[test]
    fn quadratic_hvp_is_position_independent(
        eigs in spectrum_strategy(5, -4.0, 4.0),
        t1 in vec_strategy(5, 10.0),
        t2 in vec_strategy(5, 10.0),
        v in vec_strategy(5, 10.0),
    ) {
        let q = make_quadratic(QuadraticSpec {
            eigenvalues: Vector::from_vec(eigs).unwrap(),
            rotation_seed: Some(3),
            linear_term: Vector::zeros(5),
        }).unwrap();
        prop_assert_eq!(q.hvp(&t1, &v).unwrap(), q.hvp(&t2, &v).unwrap());
    }

    /// Power iteration never overshoots the true spectral norm by more than
    /// rounding slack.
    #[test]
    fn power_iteration_is_bounded_by_spectral_norm(
        eigs in spectrum_strategy(7, -6.0, 6.0),
        seed in 0u64..1000,
        probe_seed in 0u64..1000,
    ) {
        let a = DenseSymMatrix::from_spectrum(&eigs, seed).unwrap();
        let op = a.as_operator();
        let estimate = power_iteration_norm(&op, 60, probe_seed).unwrap();
        let true_norm = eigs.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        prop_assert!(estimate >= 0.0);
        prop_assert!(estimate <= true_norm * (1.0 + 1e-6));
    }

    /// Analytic Rosenbrock gradient agrees with central differences.
    #[test]
    fn rosenbrock_gradient_matches_finite_differences(
        theta in vec_strategy(6, 2.0),
    ) {
        let r = make_rosenbrock(6).unwrap();
        let got = r.grad(&theta).unwrap();
        let want = fd_gradient(&r, &theta).unwrap();
        let scale = want.norm().max(1.0);
        let mut diff = 0.0;
        for i in 0..6 {
            let d = got[i] - want[i];
            diff += d * d;
        }
        prop_assert!(diff.sqrt() / scale <= 1e-5);
    }

    /// Dense |H| agrees with H on PSD matrices and squares to H² everywhere.
    #[test]
    fn absolute_hessian_squares_back(
        eigs in spectrum_strategy(5, -3.0, 3.0),
        seed in 0u64..1000,
    ) {
        let a = DenseSymMatrix::from_spectrum(&eigs, seed).unwrap();
        let abs_a = sfhf_core::dense::matrix_abs(&a).unwrap();
        let diff = abs_a.sym_square().unwrap().max_abs_diff(&a.sym_square().unwrap());
        prop_assert!(diff <= 1e-8);
    }
}
