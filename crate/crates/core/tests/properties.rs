mod common;

use common::{case1_triq, dense_q, positive_vec, spectral_distance};
use eigmax::bounds::{collatz_wielandt, CwMode};
use eigmax::general::{initials_general, initials_uniform, GeneralOptions, UniformChoice};
use eigmax::iteration::rqi;
use eigmax::lanczos::lanczos_default;
use eigmax::linalg::{dense_shifted_solve, norm_inf};
use eigmax::next::killed_matrix;
use eigmax::oracle::{eigen_oracle, oracle_eigenvector};
use eigmax::tri_initials::{delta1, general_case, phi_and_h};
use eigmax::{Matrix, Measure};
use proptest::prelude::*;

fn dense(lo: usize, hi: usize) -> impl Strategy<Value = Matrix> {
    (lo..=hi).prop_flat_map(|n| {
        prop::collection::vec(-10.0f64..10.0, n * n).prop_map(move |e| Matrix::from_fn(n, |i, j| e[i * n + j]))
    })
}

fn positive_matrix(lo: usize, hi: usize) -> impl Strategy<Value = Matrix> {
    (lo..=hi).prop_flat_map(|n| {
        prop::collection::vec(0.1f64..10.0, n * n).prop_map(move |e| Matrix::from_fn(n, |i, j| e[i * n + j]))
    })
}

/// Conservative Q-matrix with symmetric positive rates.
fn symmetric_conservative(lo: usize, hi: usize) -> impl Strategy<Value = Matrix> {
    (lo..=hi).prop_flat_map(|n| {
        prop::collection::vec(0.1f64..5.0, n * n).prop_map(move |e| {
            let rate = |i: usize, j: usize| e[i.min(j) * n + i.max(j)];
            Matrix::from_fn(n, |i, j| {
                if i == j {
                    -(0..n).filter(|&k| k != i).map(|k| rate(i, k)).sum::<f64>()
                } else {
                    rate(i, j)
                }
            })
        })
    })
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn dense_solve_residual(m in dense(1, 12), z in -50.0f64..50.0, seed in positive_vec(12)) {
        let n = m.dim();
        let v = &seed[..n];
        let shifted = m.add_identity(-z);
        prop_assume!(eigen_oracle(&shifted).unwrap().eigenvalues.iter().all(|e| e.norm() > 1e-3));
        let w = dense_shifted_solve(&m, z, v).unwrap();
        let r = shifted.mul_vec(&w);
        let scale = shifted.norm_inf() * norm_inf(&w) + norm_inf(v);
        for i in 0..n {
            prop_assert!((r[i] - v[i]).abs() <= 1e-12 * scale);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn shift_identity(a in positive_matrix(2, 8), s in -20.0f64..20.0) {
        let pair = initials_uniform(&a, UniformChoice::I).unwrap();
        let opts = eigmax::IterationOptions { max_iter: 3, tol: f64::MIN_POSITIVE, ..pair.options() };
        let t1 = rqi(&a, &pair.v0, pair.z0, &opts).unwrap();
        let t2 = rqi(&a.add_identity(s), &pair.v0, pair.z0 + s, &opts).unwrap();
        let scale = a.norm_inf() + s.abs();
        for (x, y) in t1.z_values().iter().zip(t2.z_values()) {
            prop_assert!((x + s - y).abs() <= 1e-9 * scale, "{} vs {}", x + s, y);
        }
    }

    #[test]
    fn weighted_inner_is_bilinear(
        w in positive_vec(6), u in prop::collection::vec(-5.0f64..5.0, 6),
        v in prop::collection::vec(-5.0f64..5.0, 6), x in prop::collection::vec(-5.0f64..5.0, 6),
        a in -3.0f64..3.0, b in -3.0f64..3.0,
    ) {
        let mu = Measure::new(w).unwrap();
        let comb: Vec<f64> = u.iter().zip(&v).map(|(p, q)| a * p + b * q).collect();
        let lhs = mu.inner(&comb, &x).unwrap();
        let rhs = a * mu.inner(&u, &x).unwrap() + b * mu.inner(&v, &x).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
        prop_assert!((mu.inner(&u, &x).unwrap() - mu.inner(&x, &u).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn general_pipeline_relabeling(q in dense_q(2, 7), rot in 0usize..7) {
        let n = q.dim();
        let p: Vec<usize> = (0..n).map(|i| (i + rot) % n).collect();
        let lambda = eigen_oracle(&q.neg()).unwrap().min_real();
        for m in [q.clone(), q.permuted(&p)] {
            let a = m.add_identity(20.0 * n as f64);
            let g = initials_general(&a, &GeneralOptions::default()).unwrap();
            let opts = eigmax::IterationOptions { max_iter: 50, tol: 1e-13, ..g.pair.options() };
            let tr = rqi(&g.q.neg(), &g.pair.v0, g.pair.z0, &opts).unwrap();
            let est = g.m - tr.last_z() - 20.0 * n as f64;
            prop_assert!(rel(-est, lambda) <= 1e-8, "{} vs {}", -est, lambda);
        }
    }

    #[test]
    fn delta1_scales_inversely(t in case1_triq(2, 20), k in -4i32..5) {
        let s = 2f64.powi(k);
        let d = delta1(&t).unwrap();
        let ds = delta1(&t.scaled(s)).unwrap();
        prop_assert!(rel(ds * s, d) <= 1e-12, "{} vs {}", ds * s, d);
    }

    #[test]
    fn case1_reduction(t in case1_triq(2, 30)) {
        let g = general_case(&t).unwrap();
        let c = phi_and_h(&t).unwrap();
        let n = t.last();
        prop_assert!(g.r.iter().all(|&r| r == 1.0));
        prop_assert!(g.h[..=n].iter().all(|&h| h == 1.0));
        prop_assert_eq!(g.h[n + 1], t.c(n));
        prop_assert_eq!(g.phi, c.phi);
    }

    #[test]
    fn cw_pinches_at_perron_vector(a in positive_matrix(2, 10)) {
        let rho = eigen_oracle(&a).unwrap().max_real;
        let v = oracle_eigenvector(&a, rho).unwrap();
        let b = collatz_wielandt(&a, &v, CwMode::MatrixA).unwrap();
        prop_assert!(b.lower <= rho * (1.0 + 1e-10) && b.upper >= rho * (1.0 - 1e-10));
        prop_assert!(b.ratio() - 1.0 <= 1e-8, "ratio {}", b.ratio());
    }

    #[test]
    fn lanczos_preserves_spectrum_symmetric(a in positive_matrix(2, 8)) {
        let a = Matrix::from_fn(a.dim(), |i, j| a.get(i, j) + a.get(j, i));
        let r = lanczos_default(&a).unwrap();
        prop_assume!(r.breakdown_at.is_none());
        let sa = eigen_oracle(&a).unwrap();
        let st = eigen_oracle(&r.t).unwrap();
        let d = spectral_distance(&sa.eigenvalues, &st.eigenvalues);
        prop_assert!(d <= 1e-8 * a.norm_inf(), "distance {}", d);
    }

    #[test]
    fn lanczos_preserves_spectrum_small(a in positive_matrix(2, 4)) {
        let r = lanczos_default(&a).unwrap();
        prop_assume!(r.breakdown_at.is_none());
        let sa = eigen_oracle(&a).unwrap();
        let st = eigen_oracle(&r.t).unwrap();
        let d = spectral_distance(&sa.eigenvalues, &st.eigenvalues);
        prop_assert!(d <= 1e-6 * a.norm_inf(), "distance {}", d);
    }

    #[test]
    fn choice_one_reaches_perron_root(a in positive_matrix(2, 10)) {
        let rho = eigen_oracle(&a).unwrap().max_real;
        let pair = initials_uniform(&a, UniformChoice::I).unwrap();
        prop_assert!(pair.z0 >= rho * (1.0 - 1e-12));
        let opts = eigmax::IterationOptions { max_iter: 50, tol: 1e-13, ..pair.options() };
        let tr = rqi(&a, &pair.v0, pair.z0, &opts).unwrap();
        prop_assert!(rel(tr.last_z(), rho) <= 1e-9, "{} vs {}", tr.last_z(), rho);
    }

    #[test]
    fn killed_lambda0_monotone_below_lambda1(q in symmetric_conservative(2, 7)) {
        let lambda1 = eigen_oracle(&q.neg()).unwrap().real_parts_sorted()[1];
        let mut last = 0.0;
        for c in [2.0, 10.0, 100.0, 1000.0, 1e4] {
            let l0 = eigen_oracle(&killed_matrix(&q, c).neg()).unwrap().min_real();
            prop_assert!(l0 >= last - 1e-10 * lambda1, "not monotone at c = {}", c);
            prop_assert!(l0 <= lambda1 * (1.0 + 1e-10), "{} exceeds {}", l0, lambda1);
            last = l0;
        }
    }
}
