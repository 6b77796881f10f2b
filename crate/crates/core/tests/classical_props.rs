mod common;

use common::{random_problem, ref_bce, ref_kernel, RefKernel};
use hqids::classical::{
    gradient, kernel_eval, kkt_audit, loss, solve_dual, train_logreg, train_svm_smo, ClassWeight, KernelSpec, LogRegParams,
    SvmModel, SvmParams,
};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn points(max_n: usize, d: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-3.0..3.0f64, d), 1..=max_n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kernels_are_symmetric(a in prop::collection::vec(-3.0..3.0f64, 4), b in prop::collection::vec(-3.0..3.0f64, 4), g in 0.01..5.0f64) {
        for k in [KernelSpec::Linear, KernelSpec::rbf(g).unwrap()] {
            prop_assert_eq!(kernel_eval(&k, &a, &b).unwrap(), kernel_eval(&k, &b, &a).unwrap());
        }
        let r = kernel_eval(&KernelSpec::rbf(g).unwrap(), &a, &b).unwrap();
        prop_assert!((r - ref_kernel(RefKernel::Rbf(g), &a, &b)).abs() <= 1e-15);
    }

    #[test]
    fn rbf_gram_is_psd(x in points(20, 3), g in 0.01..5.0f64) {
        let k = KernelSpec::rbf(g).unwrap();
        let n = x.len();
        let gram = DMatrix::from_fn(n, n, |i, j| kernel_eval(&k, &x[i], &x[j]).unwrap());
        let min = gram.symmetric_eigen().eigenvalues.min();
        prop_assert!(min >= -1e-10, "min eigenvalue {}", min);
    }

    #[test]
    fn svm_dual_feasible_and_kkt(seed in any::<u64>(), n in 4usize..30, d in 1usize..4, c in 0.05..20.0f64, rbf in any::<bool>(), balanced in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y) = random_problem(&mut rng, n, d);
        let params = SvmParams {
            c,
            kernel: if rbf { KernelSpec::rbf(0.7).unwrap() } else { KernelSpec::Linear },
            class_weight: if balanced { ClassWeight::Balanced } else { ClassWeight::None },
            ..Default::default()
        };
        let sol = solve_dual(&x, &y, &params).unwrap();
        prop_assert!(sol.converged);
        let signed_sum: f64 = sol.alphas.iter().zip(&y).map(|(a, &l)| if l == 1 { *a } else { -a }).sum();
        prop_assert!(signed_sum.abs() <= 1e-8, "sum a_i y_i = {}", signed_sum);
        for (a, u) in sol.alphas.iter().zip(&sol.upper) {
            prop_assert!(*a >= 0.0 && a <= u);
        }
        let model = SvmModel::from_solution(&x, &y, &sol, &params);
        let audit = kkt_audit(&model, &sol, &x, &y, params.tol).unwrap();
        prop_assert!(audit.passed(), "{:?}", audit);

        // Free support vectors sit on the margin.
        for (t, (&a, &u)) in sol.alphas.iter().zip(&sol.upper).enumerate() {
            if a > 1e-9 && a < u - 1e-9 {
                let m = if y[t] == 1 { 1.0 } else { -1.0 } * model.decision(&x[t]).unwrap();
                prop_assert!((m - 1.0).abs() <= params.tol, "margin {}", m);
            }
        }
    }

    #[test]
    fn training_is_seed_deterministic(seed in any::<u64>(), n in 4usize..25) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y) = random_problem(&mut rng, n, 3);
        let lp = LogRegParams { epochs: 50, seed, ..Default::default() };
        prop_assert_eq!(train_logreg(&x, &y, &lp).unwrap(), train_logreg(&x, &y, &lp).unwrap());
        let sp = SvmParams { kernel: KernelSpec::rbf(1.0).unwrap(), seed, ..Default::default() };
        prop_assert_eq!(train_svm_smo(&x, &y, &sp).unwrap(), train_svm_smo(&x, &y, &sp).unwrap());
    }

    #[test]
    fn logreg_gradient_matches_finite_differences(
        seed in any::<u64>(),
        n in 2usize..30,
        w in prop::collection::vec(-2.0..2.0f64, 3),
        b in -2.0..2.0f64,
        sw in prop::collection::vec(0.1..5.0f64, 30),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y) = random_problem(&mut rng, n, 3);
        let sw = &sw[..n];
        prop_assert!((loss(&w, b, &x, &y, sw) - ref_bce(&w, b, &x, &y, sw)).abs() <= 1e-12);
        let (gw, gb) = gradient(&w, b, &x, &y, sw);
        let h = 1e-6;
        for i in 0..w.len() {
            let (mut up, mut dn) = (w.clone(), w.clone());
            up[i] += h;
            dn[i] -= h;
            let fd = (ref_bce(&up, b, &x, &y, sw) - ref_bce(&dn, b, &x, &y, sw)) / (2.0 * h);
            prop_assert!((fd - gw[i]).abs() <= 1e-7, "dw[{}]: fd {} analytic {}", i, fd, gw[i]);
        }
        let fd = (ref_bce(&w, b + h, &x, &y, sw) - ref_bce(&w, b - h, &x, &y, sw)) / (2.0 * h);
        prop_assert!((fd - gb).abs() <= 1e-7, "db: fd {} analytic {}", fd, gb);
    }

    #[test]
    fn logreg_descent_lowers_loss(seed in any::<u64>(), n in 4usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y) = random_problem(&mut rng, n, 3);
        let sw = vec![1.0; n];
        let short = train_logreg(&x, &y, &LogRegParams { epochs: 5, seed, ..Default::default() }).unwrap();
        let long = train_logreg(&x, &y, &LogRegParams { epochs: 200, seed, ..Default::default() }).unwrap();
        let l_short = ref_bce(&short.weights, short.bias, &x, &y, &sw);
        let l_long = ref_bce(&long.weights, long.bias, &x, &y, &sw);
        prop_assert!(l_long <= l_short + 1e-12, "{} > {}", l_long, l_short);
    }
}
