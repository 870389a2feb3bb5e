use bilistab::exact::ExactMatrixR;
use bilistab::{
    cmm_exact, double_to_rational, evaluate, exact_matmul, gauss_entrywise_bounds, get_builtin, growth_factor,
    materialize_tensor, multiply_conventional, multiply_recursive, new_alg_entrywise_bounds, rational_to_f64,
    thm_main_bound, verify_decomposition, BilinearDecomposition, Builtin, CmmAlgorithm, ComplexMatrix,
    ExactMatrixC, NormSpec, RealMatrix, RecursionPolicy, UnitRoundoff,
};
use proptest::prelude::*;

fn builtin() -> impl Strategy<Value = Builtin> {
    prop::sample::select(Builtin::ALL.to_vec())
}

fn with_order(b: Builtin) -> impl Strategy<Value = (BilinearDecomposition, Vec<usize>)> {
    let d = get_builtin(b).unwrap().decomposition;
    let r = d.rank();
    (Just(d), Just((0..r).collect::<Vec<_>>()).prop_shuffle())
}

fn small_int_matrix(rows: usize, cols: usize) -> impl Strategy<Value = RealMatrix> {
    prop::collection::vec(-8i32..=8, rows * cols)
        .prop_map(move |v| RealMatrix::from_vec(rows, cols, v.into_iter().map(f64::from).collect()).unwrap())
}

fn unit_matrix(rows: usize, cols: usize) -> impl Strategy<Value = RealMatrix> {
    prop::collection::vec(-1.0f64..1.0, rows * cols).prop_map(move |v| RealMatrix::from_vec(rows, cols, v).unwrap())
}

fn complex(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    (unit_matrix(n, n), unit_matrix(n, n)).prop_map(|(re, im)| ComplexMatrix::new(re, im).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn permuting_terms_preserves_tensor_and_growth((d, order) in builtin().prop_flat_map(with_order)) {
        let p = d.permuted(&order).unwrap();
        prop_assert_eq!(materialize_tensor(&p), materialize_tensor(&d));
        let (g, h) = (growth_factor(&d, NormSpec::Euclidean), growth_factor(&p, NormSpec::Euclidean));
        prop_assert!((g - h).abs() <= 1e-12 * g);
    }

    #[test]
    fn negating_a_pair_preserves_tensor_and_growth(b in builtin(), pick in 0usize..64) {
        let d = get_builtin(b).unwrap().decomposition;
        let i = pick % d.rank();
        let mut terms = d.terms().to_vec();
        terms[i].u = terms[i].u.iter().map(|c| -c).collect();
        terms[i].v = terms[i].v.iter().map(|c| -c).collect();
        let n = BilinearDecomposition::new(d.name(), d.dims(), terms).unwrap();
        prop_assert!(verify_decomposition(&n, &materialize_tensor(&d)).unwrap());
        prop_assert_eq!(growth_factor(&n, NormSpec::Euclidean), growth_factor(&d, NormSpec::Euclidean));
    }

    #[test]
    fn json_round_trip(b in builtin()) {
        let d = get_builtin(b).unwrap().decomposition;
        let back = BilinearDecomposition::from_json(&d.to_json().unwrap()).unwrap();
        prop_assert_eq!(&back, &d);
    }

    #[test]
    fn growth_at_least_nuclear_norm(b in builtin()) {
        let e = get_builtin(b).unwrap();
        if let Some(nu) = e.known_nuclear_norm {
            prop_assert!(growth_factor(&e.decomposition, NormSpec::Euclidean) >= nu - 1e-12);
        }
    }

    #[test]
    fn strassen_evaluation_is_bilinear(
        u1 in prop::collection::vec(-16i32..16, 4),
        u2 in prop::collection::vec(-16i32..16, 4),
        v in prop::collection::vec(-16i32..16, 4),
        alpha in -4i32..4,
    ) {
        // Small integers keep every intermediate exact.
        let d = get_builtin(Builtin::Strassen2x2).unwrap().decomposition;
        let f = |x: &[i32]| x.iter().map(|&t| f64::from(t)).collect::<Vec<_>>();
        let mix: Vec<i32> = u1.iter().zip(&u2).map(|(a, b)| alpha * a + b).collect();
        let lhs = evaluate(&d, &f(&mix), &f(&v)).unwrap();
        let (a, b) = (evaluate(&d, &f(&u1), &f(&v)).unwrap(), evaluate(&d, &f(&u2), &f(&v)).unwrap());
        let rhs: Vec<f64> = a.iter().zip(&b).map(|(x, y)| f64::from(alpha) * x + y).collect();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn recursive_schemes_exact_on_small_integers(a in small_int_matrix(6, 6), b in small_int_matrix(6, 6), cutoff in 1usize..4) {
        let want = multiply_conventional(&a, &b).unwrap();
        for bi in [Builtin::Strassen2x2, Builtin::Winograd2x2] {
            let d = get_builtin(bi).unwrap().decomposition;
            prop_assert_eq!(&multiply_recursive(&a, &b, &d, RecursionPolicy::new(cutoff).unwrap()).unwrap(), &want);
        }
    }

    #[test]
    fn exact_matmul_associative_and_distributive(a in unit_matrix(3, 4), b in unit_matrix(4, 2), c in unit_matrix(2, 3), d in unit_matrix(4, 2)) {
        let (ea, eb, ec, ed) = (ExactMatrixR::from_real(&a), ExactMatrixR::from_real(&b), ExactMatrixR::from_real(&c), ExactMatrixR::from_real(&d));
        let left = exact_matmul(&exact_matmul(&ea, &eb).unwrap(), &ec).unwrap();
        let right = exact_matmul(&ea, &exact_matmul(&eb, &ec).unwrap()).unwrap();
        prop_assert_eq!(left, right);
        let lhs = exact_matmul(&ea, &eb.add(&ed).unwrap()).unwrap();
        let rhs = exact_matmul(&ea, &eb).unwrap().add(&exact_matmul(&ea, &ed).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn every_scheme_is_exactly_correct(x in complex(3), y in complex(3), algo in prop::sample::select(CmmAlgorithm::ALL.to_vec())) {
        let want = exact_matmul(&ExactMatrixC::from_complex(&x), &ExactMatrixC::from_complex(&y)).unwrap();
        prop_assert_eq!(cmm_exact(&x, &y, algo).unwrap(), want);
    }

    #[test]
    fn double_rational_round_trip(bits in any::<u64>()) {
        let x = f64::from_bits(bits);
        prop_assume!(x.is_finite());
        prop_assert_eq!(rational_to_f64(&double_to_rational(x).unwrap()), x);
    }

    #[test]
    fn main_bound_is_linear(gamma in 0.0f64..100.0, nu in 0.0f64..10.0, nv in 0.0f64..10.0, k in 1u32..5) {
        let u = UnitRoundoff::default();
        let s = f64::from(1u32 << k);
        let base = thm_main_bound(2, 2, 3, gamma, nu, nv, u).first_order_bound;
        prop_assert_eq!(thm_main_bound(2, 2, 3, gamma * s, nu, nv, u).first_order_bound, base * s);
        prop_assert!(base >= 0.0);
    }

    #[test]
    fn entrywise_bounds_scale_quadratically(x in complex(4), y in complex(4)) {
        // Scaling every input by 2 is exact, so the bounds scale by exactly 4.
        let u = UnitRoundoff::default();
        let (x2, y2) = (x.scale(2.0), y.scale(2.0));
        for f in [new_alg_entrywise_bounds, gauss_entrywise_bounds] {
            let b = f(&x.re, &x.im, &y.re, &y.im, u).unwrap();
            let b2 = f(&x2.re, &x2.im, &y2.re, &y2.im, u).unwrap();
            prop_assert_eq!(b2.re, b.re.scale(4.0));
            prop_assert_eq!(b2.im, b.im.scale(4.0));
        }
    }
}
