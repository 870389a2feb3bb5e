//! End-to-end acceptance run: one PASS/FAIL line per criterion.
//!
//! Criterion 8 (speed) is informational and never fails the run; set
//! `BILISTAB_SKIP_SPEED=1` to skip it.

use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use bilistab::exact::entrywise_abs_error;
use bilistab::experiments::{
    kappa_sweep, mean_of, ordering_fraction, run, summarize, CmmInput, ExperimentConfig, ExperimentKind,
};
use bilistab::{
    cmm, double_to_rational, evaluate, exact_matmul, gauss_entrywise_bounds, gen_random, gen_random_complex,
    get_builtin, growth_factor, new_alg_entrywise_bounds, rational_to_f64, thm_main_bound, verify_decomposition,
    Backend, BigRational, Builtin, CmmAlgorithm, Dist, ExactMatrixC, ExactMatrixR, NormSpec, Seed, UnitRoundoff,
};
use dashu_float::FBig;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::Rng;

enum Outcome {
    Pass(String),
    Fail(String),
    /// Reported as PASS/FAIL but never fails the run.
    Info(bool, String),
    Skip(String),
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn c1_growth_factors() -> Outcome {
    let r2 = 2f64.sqrt();
    let r3 = 3f64.sqrt();
    let want = [
        (Builtin::Strassen2x2, 12.0 + 2.0 * r2),
        (Builtin::Winograd2x2, 7.0 + 4.0 * r2 + 3.0 * r3),
        (Builtin::ConventionalMm(2, 2, 2), 8.0),
        (Builtin::ComplexRegular, 4.0),
        (Builtin::ComplexGauss, 2.0 * (1.0 + r2)),
        (Builtin::ComplexNew, 4.0),
    ];
    let mut worst = 0f64;
    for (b, g) in want {
        let got = growth_factor(&get_builtin(b).unwrap().decomposition, NormSpec::Euclidean);
        worst = worst.max((got - g).abs() / g);
    }
    check(worst <= 1e-12, format!("max relative deviation {worst:.2e}"))
}

fn c2_exact_verification() -> Outcome {
    let mut failed = Vec::new();
    for b in Builtin::ALL {
        let e = get_builtin(b).unwrap();
        if !verify_decomposition(&e.decomposition, &e.target_tensor()).unwrap() {
            failed.push(b.name());
        }
    }
    check(failed.is_empty(), format!("{} entries verified, failures: {failed:?}", Builtin::ALL.len()))
}

fn c3_scalar_bound() -> Outcome {
    let mut rng = Seed(3).rng();
    let mut unit = || {
        let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        [t.cos(), t.sin()]
    };
    let mut worst_ratio = 0f64;
    for b in [Builtin::ComplexRegular, Builtin::ComplexGauss, Builtin::ComplexNew] {
        let d = get_builtin(b).unwrap().decomposition;
        let gamma = growth_factor(&d, NormSpec::Euclidean);
        for _ in 0..100_000 {
            let (x, y) = (unit(), unit());
            let norm = |v: &[f64; 2]| (v[0] * v[0] + v[1] * v[1]).sqrt();
            let bound = thm_main_bound(2, 2, d.rank(), gamma, norm(&x), norm(&y), UnitRoundoff::default());
            let z = evaluate(&d, &x, &y).unwrap();
            let q = |v: f64| double_to_rational(v).unwrap();
            let (a, bb, c, dd) = (q(x[0]), q(x[1]), q(y[0]), q(y[1]));
            let re = &a * &c - &bb * &dd;
            let im = &a * &dd + &bb * &c;
            let err = rational_to_f64(&(q(z[0]) - re).abs()).max(rational_to_f64(&(q(z[1]) - im).abs()));
            worst_ratio = worst_ratio.max(err / bound.with_slack());
        }
    }
    check(worst_ratio <= 1.0, format!("3×10⁵ pairs, worst error/bound {worst_ratio:.3}"))
}

fn c4_entrywise_bounds() -> Outcome {
    let n = 8;
    let mut worst = 0f64;
    for s in 0..20u64 {
        let seed = Seed(400 + s);
        let x = gen_random_complex(n, n, Dist::uniform(0.0, 1.0), seed.derive(1)).unwrap();
        let y = gen_random_complex(n, n, Dist::uniform(0.0, 1.0), seed.derive(2)).unwrap();
        let exact = exact_matmul(&ExactMatrixC::from_complex(&x), &ExactMatrixC::from_complex(&y)).unwrap();
        for algo in [CmmAlgorithm::New, CmmAlgorithm::Gauss] {
            let z = cmm(&x, &y, algo, &Backend::Conventional).unwrap();
            let b = match algo {
                CmmAlgorithm::New => new_alg_entrywise_bounds(&x.re, &x.im, &y.re, &y.im, UnitRoundoff::default()),
                _ => gauss_entrywise_bounds(&x.re, &x.im, &y.re, &y.im, UnitRoundoff::default()),
            }
            .unwrap();
            let (er, ei) = entrywise_abs_error(&z, &exact).unwrap();
            for (e, bd) in [(&er, &b.re), (&ei, &b.im)] {
                for (v, w) in e.as_slice().iter().zip(bd.as_slice()) {
                    worst = worst.max(v / (w * 1.01));
                }
            }
        }
    }
    check(worst <= 1.0, format!("20 seeds, worst entrywise error/bound {worst:.3}"))
}

fn c5_fmm_ordering() -> Outcome {
    let mut c = ExperimentConfig::new(ExperimentKind::FmmAccuracy);
    c.n = 64;
    c.cutoff = 2;
    c.trials = 10;
    c.seed = Seed(500);
    let r = run(&c).unwrap();
    let m = |a| mean_of(&r, a, |r| r.rel_error).unwrap();
    let (cv, st, wi) = (m("conventional"), m("strassen"), m("winograd"));
    check(cv < st && st < wi, format!("conventional {cv:.3e} < strassen {st:.3e} < winograd {wi:.3e}"))
}

fn c6_cmm_ordering() -> Outcome {
    let mut c = ExperimentConfig::new(ExperimentKind::CmmAccuracy);
    c.n = 64;
    c.trials = 10;
    c.kappas = kappa_sweep(34, 53, 10).unwrap();
    c.seed = Seed(600);
    let r = run(&c).unwrap();
    let frac = ordering_fraction(&summarize(&r), "regular", "new", "gauss");
    let ratio = mean_of(&r, "new", |r| r.rel_error).unwrap() / mean_of(&r, "gauss", |r| r.rel_error).unwrap();
    check(
        frac >= 0.8 && ratio < 0.7,
        format!("ordered at {:.0}% of {} κ points, mean(new)/mean(gauss) = {ratio:.3}", frac * 100.0, c.kappas.len()),
    )
}

fn c7_gauss_asymmetry() -> Outcome {
    let mut c = ExperimentConfig::new(ExperimentKind::CmmAccuracy);
    c.n = 64;
    c.trials = 20;
    c.cmm_input = CmmInput::Uniform { lo: 0.0, hi: 1.0 };
    c.algos = vec![CmmAlgorithm::Gauss];
    c.seed = Seed(700);
    let r = run(&c).unwrap();
    let ratio = mean_of(&r, "gauss", |r| r.im_error).unwrap() / mean_of(&r, "gauss", |r| r.re_error).unwrap();
    check((1.5..=5.0).contains(&ratio), format!("imag/real error ratio {ratio:.3}"))
}

fn c8_speed() -> Outcome {
    if std::env::var_os("BILISTAB_SKIP_SPEED").is_some() {
        return Outcome::Skip("BILISTAB_SKIP_SPEED set".into());
    }
    let mut c = ExperimentConfig::new(ExperimentKind::CmmSpeed);
    c.n = 2048;
    c.trials = 10;
    // One timing per trial keeps the run inside its time budget.
    c.repeats = 1;
    c.seed = Seed(800);
    let r = run(&c).unwrap();
    let t = |a| mean_of(&r, a, |r| Some(r.wall_time_s)).unwrap();
    let (reg, gau, new) = (t("regular"), t("gauss"), t("new"));
    let (rg, rn, gap) = (gau / reg, new / reg, (new - gau).abs() / gau);
    let ok = (0.6..=0.95).contains(&rg) && (0.6..=0.95).contains(&rn) && gap <= 0.15;
    Outcome::Info(
        ok,
        format!("gauss/regular {rg:.3}, new/regular {rn:.3}, |new−gauss|/gauss {gap:.3} (regular {reg:.2}s)"),
    )
}

fn c9_applications() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (kind, n) in [(ExperimentKind::Horner, 64), (ExperimentKind::Unitary, 64), (ExperimentKind::Cnn, 64)] {
        let mut c = ExperimentConfig::new(kind);
        c.n = n;
        // Regular and new differ by ~15% in Horner; 5 trials leave the
        // per-point means within noise of each other.
        c.trials = 20;
        c.seed = Seed(900);
        let r = run(&c).unwrap();
        let pts = summarize(&r);
        let frac = ordering_fraction(&pts, "regular", "new", "gauss");
        let flagged: usize = pts.iter().map(|p| p.inconsistent_trials).sum();
        ok &= frac >= 0.8;
        parts.push(format!("{kind} {:.0}%{}", frac * 100.0, if flagged > 0 { format!(" ({flagged} flagged)") } else { String::new() }));
    }
    check(ok, format!("ordered sweep points: {}", parts.join(", ")))
}

/// Exact value of a dashu float as a rational.
fn fbig_to_rational(x: &FBig) -> BigRational {
    let repr = x.repr();
    let sig = BigInt::from_str(&repr.significand().to_string()).unwrap();
    let e = repr.exponent();
    let two = BigInt::from(2);
    if e >= 0 {
        BigRational::from_integer(sig * two.pow(e as u32))
    } else {
        BigRational::new(sig, two.pow((-e) as u32))
    }
}

fn c10_oracle_consistency() -> Outcome {
    let tol = BigRational::new(BigInt::one(), BigInt::from(10).pow(60));
    let mut worst = BigRational::zero();
    for s in 0..10u64 {
        let a = gen_random(8, 8, Dist::Normal, Seed(1000 + s).derive(1)).unwrap();
        let b = gen_random(8, 8, Dist::uniform(-1.0, 1.0), Seed(1000 + s).derive(2)).unwrap();
        let exact = exact_matmul(&ExactMatrixR::from_real(&a), &ExactMatrixR::from_real(&b)).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let mut acc = FBig::ZERO.with_precision(256).value();
                for k in 0..8 {
                    let x = FBig::try_from(a.get(i, k)).unwrap().with_precision(256).value();
                    let y = FBig::try_from(b.get(k, j)).unwrap().with_precision(256).value();
                    acc += x * y;
                }
                let d = (fbig_to_rational(&acc) - exact.get(i, j)).abs();
                if d > worst {
                    worst = d;
                }
            }
        }
    }
    let mut rng = Seed(1010).rng();
    let mut specials = vec![0.0, -0.0, 1.0, -1.0, f64::MAX, f64::MIN, f64::MIN_POSITIVE, 5e-324, -5e-324, 0.1, 1e300];
    specials.extend((0..10_000).map(|_| f64::from_bits(rng.random::<u64>())).filter(|x| x.is_finite()));
    let mismatched = specials
        .iter()
        .filter(|&&x| rational_to_f64(&double_to_rational(x).unwrap()).to_bits() != x.to_bits() && x != 0.0)
        .count();
    check(
        worst <= tol && mismatched == 0,
        format!("max |exact − 256-bit| = {:.1e}, {} doubles round-tripped, {mismatched} mismatches", rational_to_f64(&worst), specials.len()),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("growth-factor constants", c1_growth_factors),
        ("exact decomposition verification", c2_exact_verification),
        ("scalar growth-factor bound", c3_scalar_bound),
        ("entrywise new/gauss bounds", c4_entrywise_bounds),
        ("fast matmul error ordering", c5_fmm_ordering),
        ("complex matmul error ordering", c6_cmm_ordering),
        ("gauss real/imaginary asymmetry", c7_gauss_asymmetry),
        ("complex matmul speed", c8_speed),
        ("application orderings", c9_applications),
        ("oracle self-consistency", c10_oracle_consistency),
    ];
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let outcome = f();
        let secs = t0.elapsed().as_secs_f64();
        let (tag, detail) = match outcome {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Fail(d) => {
                failures += 1;
                ("FAIL", d)
            }
            Outcome::Info(ok, d) => (if ok { "PASS" } else { "FAIL" }, d + " [informational]"),
            Outcome::Skip(d) => ("SKIP", d),
        };
        println!("{tag} [{:>2}] {name}: {detail} ({secs:.1}s)", i + 1);
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
