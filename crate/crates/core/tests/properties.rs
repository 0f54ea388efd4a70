//! Property tests over random symmetric and positive definite matrices.

use nalgebra::DMatrix;
use proptest::prelude::*;

use opineq::generate::{gen_pd, gen_sandwich, random_orthogonal};
use opineq::majorization::{bottomk_log_prod, olson_leq, topk_log_prod, weak_majorize, EigVector, DEFAULT_OLSON_GRID};
use opineq::means::{arith_mean, geo_mean, harm_mean, mu, Weight};
use opineq::spectral::{apply_fn, eig_sym, loewner_cmp, loewner_margin, mat_pow, HermMatrix, Tolerance};
use opineq::suite::{run_check, run_suite, CheckId, SuiteConfig, Verdict};
use opineq::{builtin_catalog, catalog::lookup};

fn symmetric(n: usize) -> impl Strategy<Value = HermMatrix> {
    prop::collection::vec(-10.0f64..10.0, n * n).prop_map(move |v| {
        let m = DMatrix::from_vec(n, n, v);
        HermMatrix::new((&m + m.transpose()) * 0.5).unwrap()
    })
}

fn pd_pair() -> impl Strategy<Value = (HermMatrix, HermMatrix)> {
    (1usize..=6, any::<u64>()).prop_map(|(n, seed)| {
        (gen_pd(n, (0.1, 10.0), seed).unwrap(), gen_pd(n, (0.1, 10.0), seed ^ 0x9e37_79b9).unwrap())
    })
}

fn weight() -> impl Strategy<Value = f64> {
    prop::sample::select(vec![0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn eigendecomposition_reconstructs(a in (1usize..=8).prop_flat_map(symmetric)) {
        let s = eig_sym(&a).unwrap();
        let err = s.reconstruct().sub(&a).unwrap().frobenius();
        prop_assert!(err <= 1e-10 * a.frobenius().max(1e-300), "{err}");
        prop_assert!(s.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn calculus_on_diagonals_is_entrywise(d in prop::collection::vec(0.05f64..20.0, 1..7)) {
        let catalog = builtin_catalog();
        for key in ["log", "exp", "reciprocal", "power[p=0.5]", "log_pow[p=2]"] {
            let f = lookup(&catalog, key).unwrap();
            let d: Vec<f64> = d.iter().map(|x| if key == "log_pow[p=2]" { 1.0 + x } else { *x }).collect();
            let fa = apply_fn(&HermMatrix::diag(&d).unwrap(), &f).unwrap();
            for (i, x) in d.iter().enumerate() {
                prop_assert_eq!(fa.get(i, i), f.eval(*x));
            }
            prop_assert!(fa.is_diagonal());
        }
    }

    #[test]
    fn power_law(n in 1usize..=6, seed in any::<u64>(), p in -2.0f64..2.0, q in -2.0f64..2.0) {
        let a = gen_pd(n, (0.2, 5.0), seed).unwrap();
        let lhs = mat_pow(&a, p).unwrap().matmul(&mat_pow(&a, q).unwrap()).unwrap();
        let rhs = mat_pow(&a, p + q).unwrap();
        let err = (&lhs - rhs.as_matrix()).norm();
        prop_assert!(err <= 1e-9 * rhs.frobenius().max(1.0), "{err}");
    }

    #[test]
    fn inverse_reverses_order(n in 1usize..=6, seed in any::<u64>()) {
        let a = gen_pd(n, (0.1, 5.0), seed).unwrap();
        let b = a.add(&gen_pd(n, (0.01, 3.0), seed.wrapping_add(1)).unwrap()).unwrap();
        let tol = Tolerance::default();
        prop_assert!(loewner_cmp(&a, &b, tol).unwrap().is_le());
        prop_assert!(loewner_cmp(&mat_pow(&a, -1.0).unwrap(), &mat_pow(&b, -1.0).unwrap(), tol).unwrap().is_ge());
    }

    #[test]
    fn young_chain((a, b) in pd_pair(), v in weight()) {
        let w = Weight::new(v).unwrap();
        let h = harm_mean(&a, &b, w).unwrap();
        let g = geo_mean(&a, &b, w).unwrap();
        let ar = arith_mean(&a, &b, w).unwrap();
        prop_assert!(loewner_margin(&h, &g).unwrap() >= -1e-9);
        prop_assert!(loewner_margin(&g, &ar).unwrap() >= -1e-9);
    }

    #[test]
    fn geometric_mean_is_congruence_invariant((a, b) in pd_pair(), v in weight(), seed in any::<u64>()) {
        let n = a.dim();
        let mut rng = opineq::exec::rng_from_seed(seed);
        let q = random_orthogonal(n, &mut rng);
        let d = DMatrix::from_fn(n, n, |i, j| if i == j { 0.5 + i as f64 } else { 0.0 });
        let t = q * d;
        let w = Weight::new(v).unwrap();
        let lhs = geo_mean(&a, &b, w).unwrap().congruence(&t).unwrap();
        let rhs = geo_mean(&a.congruence(&t).unwrap(), &b.congruence(&t).unwrap(), w).unwrap();
        let err = lhs.sub(&rhs).unwrap().frobenius();
        prop_assert!(err <= 1e-8 * lhs.frobenius(), "{err}");
    }

    #[test]
    fn reverse_young_under_sandwich(n in 1usize..=6, seed in any::<u64>(), s in 0.2f64..1.0, ratio in 1.0f64..8.0, v in weight()) {
        let p = gen_sandwich(n, s, s * ratio, seed).unwrap();
        let w = Weight::new(v).unwrap();
        let ar = arith_mean(&p.a, &p.b, w).unwrap();
        let g = geo_mean(&p.a, &p.b, w).unwrap().scale(mu(s, s * ratio).unwrap());
        prop_assert!(loewner_margin(&ar, &g).unwrap() >= -1e-9);
    }

    #[test]
    fn weak_majorization_is_a_preorder(xs in prop::collection::vec((-5.0f64..5.0, 0.0f64..2.0, 0.0f64..2.0), 1..8)) {
        let tol = Tolerance::default();
        let x = EigVector::from_unsorted(xs.iter().map(|t| t.0).collect());
        let y = EigVector::from_unsorted(xs.iter().map(|t| t.0 + t.1).collect());
        let z = EigVector::from_unsorted(xs.iter().map(|t| t.0 + t.1 + t.2).collect());
        prop_assert!(weak_majorize(&x, &x, tol).unwrap().holds);
        prop_assert!(weak_majorize(&x, &y, tol).unwrap().holds);
        prop_assert!(weak_majorize(&y, &z, tol).unwrap().holds);
        prop_assert!(weak_majorize(&x, &z, tol).unwrap().holds);
    }

    #[test]
    fn eigenvalue_products_of_geometric_mean((a, b) in pd_pair(), v in weight()) {
        let g = geo_mean(&a, &b, Weight::new(v).unwrap()).unwrap();
        for k in 1..=a.dim() {
            let top = (1.0 - v) * topk_log_prod(&a, k).unwrap() + v * topk_log_prod(&b, k).unwrap();
            prop_assert!(topk_log_prod(&g, k).unwrap() <= top + 1e-9);
            let bottom = (1.0 - v) * bottomk_log_prod(&a, k).unwrap() + v * bottomk_log_prod(&b, k).unwrap();
            prop_assert!(bottomk_log_prod(&g, k).unwrap() >= bottom - 1e-9);
        }
    }

    #[test]
    fn olson_order_implies_loewner_order((a, b) in pd_pair()) {
        let tol = Tolerance::default();
        let c = a.add(&b.scale(0.1)).unwrap();
        for (x, y) in [(&a, &b), (&a, &c), (&b, &c)] {
            if olson_leq(x, y, &DEFAULT_OLSON_GRID, tol).unwrap().holds {
                prop_assert!(loewner_cmp(x, y, tol).unwrap().is_le());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn loosening_tolerance_never_fails_a_pass(seed in any::<u64>(), scale in 1.0f64..1e3) {
        let cfg = SuiteConfig { checks: Some(CheckId::INEQUALITIES.to_vec()), trials: 2, dims: vec![2, 3], seed, controls: 1, ..SuiteConfig::default() };
        for r in run_suite(&cfg).unwrap().reports {
            let mut inst = r.instance.clone();
            inst.tol = Tolerance { rel: inst.tol.rel * scale, abs: inst.tol.abs * scale };
            let loose = run_check(r.check_id, &inst);
            if r.verdict == Verdict::Pass {
                prop_assert_eq!(loose.verdict, Verdict::Pass, "{}", r.check_id);
            }
            let again = run_check(r.check_id, &r.instance);
            prop_assert_eq!(again.margin.to_bits(), r.margin.to_bits());
            prop_assert_eq!(again.verdict, r.verdict);
        }
    }
}
