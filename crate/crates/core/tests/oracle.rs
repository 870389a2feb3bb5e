use bilistab::gen::{gen_random, gen_random_complex, Dist, Seed};
use bilistab::{cmm, double_to_rational, exact_matmul, max_norm_rel_error, rational_to_f64, Backend, CmmAlgorithm, ExactMatrixC, ExactMatrixR};

#[test]
fn integer_products_go_through_both_paths_identically() {
    // Normal entries have scattered exponents, forcing the big-integer path; the
    // uniform ones fit the fixed-width path.
    let a = gen_random(6, 5, Dist::Normal, Seed(1)).unwrap();
    let b = gen_random(5, 7, Dist::uniform(-1.0, 1.0), Seed(2)).unwrap();
    let ea = ExactMatrixR::from_real(&a);
    let eb = ExactMatrixR::from_real(&b);
    let fast = exact_matmul(&ea, &eb).unwrap();
    let slow = ExactMatrixR::from_vec(
        6,
        7,
        (0..6)
            .flat_map(|i| {
                let (ea, eb) = (&ea, &eb);
                (0..7).map(move |j| (0..5).map(|k| ea.get(i, k) * eb.get(k, j)).sum())
            })
            .collect(),
    )
    .unwrap();
    assert_eq!(fast, slow);
}

#[test]
fn complex_oracle_matches_real_decomposition() {
    let x = gen_random_complex(5, 5, Dist::uniform(-1.0, 1.0), Seed(3)).unwrap();
    let y = gen_random_complex(5, 5, Dist::uniform(-1.0, 1.0), Seed(4)).unwrap();
    let e = exact_matmul(&ExactMatrixC::from_complex(&x), &ExactMatrixC::from_complex(&y)).unwrap();
    let r = |m: &bilistab::RealMatrix| ExactMatrixR::from_real(m);
    let (a, b, c, d) = (r(&x.re), r(&x.im), r(&y.re), r(&y.im));
    let re = exact_matmul(&a, &c).unwrap().sub(&exact_matmul(&b, &d).unwrap()).unwrap();
    let im = exact_matmul(&a, &d).unwrap().add(&exact_matmul(&b, &c).unwrap()).unwrap();
    assert_eq!(e.re, re);
    assert_eq!(e.im, im);
}

#[test]
fn errors_are_tiny_but_measured_exactly() {
    let x = gen_random_complex(16, 16, Dist::uniform(-1.0, 1.0), Seed(5)).unwrap();
    let y = gen_random_complex(16, 16, Dist::uniform(-1.0, 1.0), Seed(6)).unwrap();
    let e = exact_matmul(&ExactMatrixC::from_complex(&x), &ExactMatrixC::from_complex(&y)).unwrap();
    for algo in CmmAlgorithm::ALL {
        let z = cmm(&x, &y, algo, &Backend::Conventional).unwrap();
        let err = max_norm_rel_error(&z, &e, x.max_norm(), y.max_norm()).unwrap();
        assert!(err > 0.0 && err < 1e-14, "{algo}: {err}");
    }
    // The exact product rounded once is at least as accurate as any scheme.
    let rounded = e.to_f64();
    assert!(max_norm_rel_error(&rounded, &e, 1.0, 1.0).unwrap() <= 2f64.powi(-53) * e.to_f64().max_norm());
}

#[test]
fn round_trip_edge_doubles() {
    for x in [f64::MAX, f64::MIN_POSITIVE, f64::MIN_POSITIVE / 3.0, 5e-324, 1.0 + f64::EPSILON, -0.5, 3.0e-300] {
        assert_eq!(rational_to_f64(&double_to_rational(x).unwrap()), x);
    }
    assert!(double_to_rational(f64::NAN).is_err());
    assert!(double_to_rational(f64::INFINITY).is_err());
}
