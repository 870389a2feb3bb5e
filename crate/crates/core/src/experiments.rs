//! Seeded accuracy and speed experiments. Every accuracy figure is measured
//! against the exact product of the double-precision inputs.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::bounds::{gauss_entrywise_bounds, new_alg_entrywise_bounds, EntrywiseBounds, UnitRoundoff};
use crate::catalog::{get_builtin, Builtin};
use crate::cmm::{cmm, Backend, CmmAlgorithm};
use crate::error::{Error, Result};
use crate::exact::{
    double_to_rational, exact_matmul, max_norm_rel_error, part_max_diff, rational_to_f64, rel_error_to_exact_norm,
    BigRational, ExactMatrixC, ExactMatrixR,
};
use crate::gen::{gen_conditioned_complex_rounded, gen_random, gen_random_complex, gen_unitary, ConditionedSpec, Dist, Seed};
use crate::matmul::{multiply_conventional, multiply_recursive, RecursionPolicy};
use crate::matrix::{ComplexMatrix, RealMatrix};

/// Largest `n` for which accuracy runs call the exact oracle.
pub const ORACLE_LIMIT: usize = 128;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExperimentKind {
    FmmAccuracy,
    CmmAccuracy,
    CmmSpeed,
    Horner,
    Unitary,
    Cnn,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::FmmAccuracy => "fmm_accuracy",
            ExperimentKind::CmmAccuracy => "cmm_accuracy",
            ExperimentKind::CmmSpeed => "cmm_speed",
            ExperimentKind::Horner => "horner",
            ExperimentKind::Unitary => "unitary",
            ExperimentKind::Cnn => "cnn",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Operands for the fast-matrix-multiplication comparison.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FmmInput {
    #[default]
    UniformReal,
    NormalReal,
    UniformComplex,
}

impl FromStr for FmmInput {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(FmmInput::UniformReal),
            "normal" => Ok(FmmInput::NormalReal),
            "complex" => Ok(FmmInput::UniformComplex),
            _ => Err(Error::InvalidSpec(format!("unknown input kind '{s}' (uniform, normal, complex)"))),
        }
    }
}

/// Operands for the complex-multiplication accuracy sweep.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum CmmInput {
    /// `HΛHᵀ` pairs with the requested condition number.
    #[default]
    Conditioned,
    /// Entries of all four parts uniform in `[lo, hi]`; the κ list is ignored.
    Uniform { lo: f64, hi: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub n: usize,
    pub trials: usize,
    pub kappas: Vec<u64>,
    pub seed: Seed,
    pub algos: Vec<CmmAlgorithm>,
    pub backend: Backend,
    /// Recursion cutoff for the fast matrix multiplication runs.
    pub cutoff: usize,
    pub fmm_input: FmmInput,
    pub cmm_input: CmmInput,
    /// Polynomial degree for Horner.
    pub degree: usize,
    /// Layer count for the network.
    pub depth: usize,
    /// Number of network inputs (columns of the input batch).
    pub batch: usize,
    /// Scale conditioned matrices by a power of two so their max entry is in `(1/2, 1]`.
    pub normalize: bool,
    /// Replace the generated operand by the identity (`X` for Horner, `U` for unitary).
    pub identity_operand: bool,
    /// Skip the oracle and only record times.
    pub timing_only: bool,
    /// Timed repetitions per measurement; the minimum is kept.
    pub repeats: usize,
}

/// Exponents `round(linspace(lo, hi, points))`, as powers of two.
pub fn kappa_sweep(lo_exp: u32, hi_exp: u32, points: usize) -> Result<Vec<u64>> {
    if lo_exp < 1 || hi_exp > 63 || lo_exp > hi_exp || points == 0 {
        return Err(Error::InvalidSpec(format!(
            "bad kappa sweep 2^{lo_exp}..2^{hi_exp} with {points} points"
        )));
    }
    if points == 1 {
        return Ok(vec![1u64 << lo_exp]);
    }
    let mut out: Vec<u64> = (0..points)
        .map(|i| {
            let e = lo_exp as f64 + (hi_exp - lo_exp) as f64 * i as f64 / (points - 1) as f64;
            1u64 << (e.round() as u32)
        })
        .collect();
    out.dedup();
    Ok(out)
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        let n = match experiment {
            ExperimentKind::CmmSpeed => 1024,
            ExperimentKind::Horner => 32,
            _ => 64,
        };
        Self {
            experiment,
            n,
            trials: 10,
            kappas: kappa_sweep(34, 53, 10).expect("valid default sweep"),
            seed: Seed(0),
            algos: CmmAlgorithm::ALL.to_vec(),
            backend: Backend::Conventional,
            cutoff: 2,
            fmm_input: FmmInput::UniformReal,
            cmm_input: CmmInput::Conditioned,
            degree: 5,
            depth: 6,
            batch: 25,
            normalize: false,
            identity_operand: false,
            timing_only: false,
            repeats: if experiment == ExperimentKind::CmmSpeed { 3 } else { 1 },
        }
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 || self.n == 0 || self.repeats == 0 {
            return Err(Error::InvalidSpec("n, trials and repeats must be at least 1".into()));
        }
        if self.algos.is_empty() {
            return Err(Error::InvalidSpec("no algorithms selected".into()));
        }
        let needs_oracle = !self.timing_only && self.experiment != ExperimentKind::CmmSpeed;
        if needs_oracle && self.n > ORACLE_LIMIT {
            return Err(Error::OracleInfeasible {
                n: self.n,
                limit: ORACLE_LIMIT,
            });
        }
        let conditioned = match self.experiment {
            ExperimentKind::CmmAccuracy => self.cmm_input == CmmInput::Conditioned,
            ExperimentKind::Horner => !self.identity_operand,
            ExperimentKind::Unitary | ExperimentKind::Cnn => true,
            ExperimentKind::FmmAccuracy | ExperimentKind::CmmSpeed => false,
        };
        if conditioned {
            if !self.n.is_power_of_two() || self.n < 2 {
                return Err(Error::InvalidSpec(format!("n = {} must be a power of 2", self.n)));
            }
            if self.kappas.is_empty() || self.kappas.iter().any(|&k| k < 2) {
                return Err(Error::InvalidSpec("kappa list must be nonempty with every kappa ≥ 2".into()));
            }
        }
        if self.experiment == ExperimentKind::FmmAccuracy && !self.n.is_power_of_two() {
            return Err(Error::InvalidSpec(format!("n = {} must be a power of 2", self.n)));
        }
        RecursionPolicy::new(self.cutoff)?;
        Ok(())
    }

    fn trial_seed(&self, t: usize) -> Seed {
        Seed(self.seed.0.wrapping_add(t as u64))
    }
}

/// One measured run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentRecord {
    pub experiment: String,
    pub algorithm: String,
    pub n: usize,
    pub kappa: Option<u64>,
    pub seed: u64,
    /// `None` for timing-only runs.
    pub rel_error: Option<f64>,
    pub wall_time_s: f64,
    pub bound: Option<f64>,
    /// Real- and imaginary-part errors under the same normalization as `rel_error`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub re_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub im_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unitary_cond: Option<f64>,
    /// Whether the floating forward pass took the exact pass's ReLU branches.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branch_consistent: Option<bool>,
}

impl ExperimentRecord {
    fn new(kind: ExperimentKind, algorithm: &str, n: usize, kappa: Option<u64>, seed: Seed) -> Self {
        Self {
            experiment: kind.name().into(),
            algorithm: algorithm.into(),
            n,
            kappa,
            seed: seed.0,
            rel_error: None,
            wall_time_s: 0.0,
            bound: None,
            re_error: None,
            im_error: None,
            unitary_cond: None,
            branch_consistent: None,
        }
    }
}

fn timed<T>(repeats: usize, mut f: impl FnMut() -> Result<T>) -> Result<(T, f64)> {
    let mut best = f64::INFINITY;
    let mut out = None;
    for _ in 0..repeats {
        let t0 = Instant::now();
        let v = f()?;
        best = best.min(t0.elapsed().as_secs_f64());
        out = Some(v);
    }
    Ok((out.expect("repeats ≥ 1"), best))
}

/// Power-of-two scale putting `‖x‖max` in `(1/2, 1]`; exact in binary.
fn normalizing_scale(x: &ComplexMatrix) -> f64 {
    let m = x.max_norm();
    if m == 0.0 {
        return 1.0;
    }
    2f64.powi(-(m.log2().ceil() as i32))
}

fn conditioned(cfg: &ExperimentConfig, kappa: u64, seed: Seed) -> Result<ComplexMatrix> {
    let spec = ConditionedSpec::new(cfg.n, kappa, seed)?;
    let x = gen_conditioned_complex_rounded(&spec).0;
    Ok(if cfg.normalize { x.scale(normalizing_scale(&x)) } else { x })
}

fn exact_of(x: &ComplexMatrix) -> ExactMatrixC {
    ExactMatrixC::from_complex(x)
}

fn to_bigrat(x: f64) -> BigRational {
    double_to_rational(x).expect("generated values are finite")
}

/// Largest entrywise bound, relative to `scale`, for the schemes that have one.
fn cmm_rel_bound(algo: CmmAlgorithm, x: &ComplexMatrix, y: &ComplexMatrix, scale: f64) -> Result<Option<f64>> {
    let u = UnitRoundoff::default();
    let b: Option<EntrywiseBounds> = match algo {
        CmmAlgorithm::Regular => None,
        CmmAlgorithm::Gauss => Some(gauss_entrywise_bounds(&x.re, &x.im, &y.re, &y.im, u)?),
        CmmAlgorithm::New => Some(new_alg_entrywise_bounds(&x.re, &x.im, &y.re, &y.im, u)?),
    };
    Ok(b.map(|b| b.re.max_norm().max(b.im.max_norm()) / scale))
}

/// Strassen vs Winograd vs conventional, error relative to `‖A‖max ‖B‖max`.
pub fn run_fmm_accuracy(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    let mut cfg = cfg.clone();
    cfg.experiment = ExperimentKind::FmmAccuracy;
    cfg.validate()?;
    let policy = RecursionPolicy::new(cfg.cutoff)?;
    let strassen = get_builtin(Builtin::Strassen2x2)?.decomposition;
    let winograd = get_builtin(Builtin::Winograd2x2)?.decomposition;
    let n = cfg.n;
    let mut out = Vec::new();
    for t in 0..cfg.trials {
        let seed = cfg.trial_seed(t);
        let (x, y) = match cfg.fmm_input {
            FmmInput::UniformReal | FmmInput::NormalReal => {
                let d = if cfg.fmm_input == FmmInput::NormalReal { Dist::Normal } else { Dist::uniform(-1.0, 1.0) };
                let a = gen_random(n, n, d, seed.derive(1))?;
                let b = gen_random(n, n, d, seed.derive(2))?;
                (ComplexMatrix::from_real(a), ComplexMatrix::from_real(b))
            }
            FmmInput::UniformComplex => (
                gen_random_complex(n, n, Dist::uniform(-1.0, 1.0), seed.derive(1))?,
                gen_random_complex(n, n, Dist::uniform(-1.0, 1.0), seed.derive(2))?,
            ),
        };
        let complex = cfg.fmm_input == FmmInput::UniformComplex;
        let exact = if complex {
            exact_matmul(&exact_of(&x), &exact_of(&y))?
        } else {
            let re = exact_matmul(&ExactMatrixR::from_real(&x.re), &ExactMatrixR::from_real(&y.re))?;
            ExactMatrixC::new(re, ExactMatrixR::zeros(n, n))?
        };
        for (name, d) in [("conventional", None), ("strassen", Some(&strassen)), ("winograd", Some(&winograd))] {
            let (z, secs) = timed(cfg.repeats, || -> Result<ComplexMatrix> {
                if complex {
                    let (xe, ye) = (x.to_elements(), y.to_elements());
                    let ze = match d {
                        None => multiply_conventional(&xe, &ye)?,
                        Some(d) => multiply_recursive(&xe, &ye, d, policy)?,
                    };
                    Ok(ComplexMatrix::from_elements(&ze))
                } else {
                    let re = match d {
                        None => multiply_conventional(&x.re, &y.re)?,
                        Some(d) => multiply_recursive(&x.re, &y.re, d, policy)?,
                    };
                    Ok(ComplexMatrix::from_real(re))
                }
            })?;
            let mut r = ExperimentRecord::new(ExperimentKind::FmmAccuracy, name, n, None, seed);
            r.rel_error = Some(max_norm_rel_error(&z, &exact, x.max_norm(), y.max_norm())?);
            r.wall_time_s = secs;
            out.push(r);
        }
    }
    Ok(out)
}

fn part_errors(z: &ComplexMatrix, exact: &ExactMatrixC, scale: &BigRational) -> Result<(f64, f64)> {
    let (re, im) = part_max_diff(z, exact)?;
    Ok((rational_to_f64(&(re / scale)), rational_to_f64(&(im / scale))))
}

/// Complex products of conditioned (or uniform) pairs, error relative to
/// `‖X‖max ‖Y‖max`.
pub fn run_cmm_accuracy(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    let mut cfg = cfg.clone();
    cfg.experiment = ExperimentKind::CmmAccuracy;
    cfg.validate()?;
    let n = cfg.n;
    let kappas: Vec<Option<u64>> = match cfg.cmm_input {
        CmmInput::Conditioned => cfg.kappas.iter().copied().map(Some).collect(),
        CmmInput::Uniform { .. } => vec![None],
    };
    let mut out = Vec::new();
    for &kappa in &kappas {
        for t in 0..cfg.trials {
            let seed = cfg.trial_seed(t);
            let (x, y) = match (cfg.cmm_input, kappa) {
                (CmmInput::Conditioned, Some(k)) => {
                    let s = seed.derive(k);
                    (conditioned(&cfg, k, s.derive(1))?, conditioned(&cfg, k, s.derive(2))?)
                }
                (CmmInput::Uniform { lo, hi }, _) => (
                    gen_random_complex(n, n, Dist::uniform(lo, hi), seed.derive(1))?,
                    gen_random_complex(n, n, Dist::uniform(lo, hi), seed.derive(2))?,
                ),
                _ => unreachable!("conditioned input always has a kappa"),
            };
            let exact = if cfg.timing_only { None } else { Some(exact_matmul(&exact_of(&x), &exact_of(&y))?) };
            let scale = x.max_norm() * y.max_norm();
            let exact_scale = to_bigrat(x.max_norm()) * to_bigrat(y.max_norm());
            for &algo in &cfg.algos {
                let (z, secs) = timed(cfg.repeats, || cmm(&x, &y, algo, &cfg.backend))?;
                let mut r = ExperimentRecord::new(ExperimentKind::CmmAccuracy, algo.name(), n, kappa, seed);
                r.wall_time_s = secs;
                if let Some(exact) = &exact {
                    let (re, im) = part_errors(&z, exact, &exact_scale)?;
                    r.rel_error = Some(max_norm_rel_error(&z, exact, x.max_norm(), y.max_norm())?);
                    r.re_error = Some(re);
                    r.im_error = Some(im);
                    if cfg.backend == Backend::Conventional {
                        r.bound = cmm_rel_bound(algo, &x, &y, scale)?;
                    }
                }
                out.push(r);
            }
        }
    }
    Ok(out)
}

/// Wall time of each scheme on uniform `[−1, 1]` inputs, best of `repeats`.
pub fn run_cmm_speed(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    let mut cfg = cfg.clone();
    cfg.experiment = ExperimentKind::CmmSpeed;
    cfg.validate()?;
    let n = cfg.n;
    let mut out = Vec::new();
    for t in 0..cfg.trials {
        let seed = cfg.trial_seed(t);
        let x = gen_random_complex(n, n, Dist::uniform(-1.0, 1.0), seed.derive(1))?;
        let y = gen_random_complex(n, n, Dist::uniform(-1.0, 1.0), seed.derive(2))?;
        for &algo in &cfg.algos {
            let (_, secs) = timed(cfg.repeats, || cmm(&x, &y, algo, &cfg.backend))?;
            let mut r = ExperimentRecord::new(ExperimentKind::CmmSpeed, algo.name(), n, None, seed);
            r.wall_time_s = secs;
            out.push(r);
        }
    }
    Ok(out)
}

fn horner_coefficients(degree: usize, seed: Seed) -> Vec<f64> {
    let mut rng = seed.rng();
    (0..=degree)
        .map(|_| loop {
            let v = (rand::RngCore::next_u64(&mut rng) >> 11) as f64 / (1u64 << 53) as f64;
            if v > 0.0 {
                break v;
            }
        })
        .collect()
}

/// `S = a₀I + a₁X`, then `P ← PX`, `S ← S + a_k P` for `k = 2..d`.
fn horner_float(x: &ComplexMatrix, a: &[f64], algo: CmmAlgorithm, backend: &Backend) -> Result<ComplexMatrix> {
    let n = x.rows();
    let mut s = ComplexMatrix::identity(n).scale(a[0]);
    if a.len() == 1 {
        return Ok(s);
    }
    s = s.add(&x.scale(a[1]))?;
    let mut p = x.clone();
    for &ak in &a[2..] {
        p = cmm(&p, x, algo, backend)?;
        s = s.add(&p.scale(ak))?;
    }
    Ok(s)
}

fn horner_exact(x: &ExactMatrixC, a: &[f64]) -> Result<ExactMatrixC> {
    let n = x.rows();
    let mut s = ExactMatrixC::identity(n).scale(&to_bigrat(a[0]));
    if a.len() == 1 {
        return Ok(s);
    }
    s = s.add(&x.scale(&to_bigrat(a[1])))?;
    let mut p = x.clone();
    for &ak in &a[2..] {
        p = exact_matmul(&p, x)?;
        s = s.add(&p.scale(&to_bigrat(ak)))?;
    }
    Ok(s)
}

/// Matrix polynomial by Horner's rule with every `PX` step done by `algo`;
/// error relative to `‖p(X)‖max`.
pub fn run_horner(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    let mut cfg = cfg.clone();
    cfg.experiment = ExperimentKind::Horner;
    cfg.validate()?;
    let n = cfg.n;
    let kappas: Vec<Option<u64>> = if cfg.identity_operand { vec![None] } else { cfg.kappas.iter().copied().map(Some).collect() };
    let mut out = Vec::new();
    for &kappa in &kappas {
        for t in 0..cfg.trials {
            let seed = cfg.trial_seed(t);
            let a = horner_coefficients(cfg.degree, seed.derive(3));
            let x = match kappa {
                Some(k) => conditioned(&cfg, k, seed.derive(k).derive(1))?,
                None => ComplexMatrix::identity(n),
            };
            let exact = if cfg.timing_only { None } else { Some(horner_exact(&exact_of(&x), &a)?) };
            for &algo in &cfg.algos {
                let (s, secs) = timed(cfg.repeats, || horner_float(&x, &a, algo, &cfg.backend))?;
                let mut r = ExperimentRecord::new(ExperimentKind::Horner, algo.name(), n, kappa, seed);
                r.wall_time_s = secs;
                if let Some(exact) = &exact {
                    r.rel_error = Some(rel_error_to_exact_norm(&s, exact)?);
                }
                out.push(r);
            }
        }
    }
    Ok(out)
}

/// `X ↦ UX` for a random unitary `U`; error relative to `‖U‖max ‖X‖max`.
pub fn run_unitary(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    let mut cfg = cfg.clone();
    cfg.experiment = ExperimentKind::Unitary;
    cfg.validate()?;
    let n = cfg.n;
    let mut out = Vec::new();
    for &kappa in &cfg.kappas {
        for t in 0..cfg.trials {
            let seed = cfg.trial_seed(t);
            let u = if cfg.identity_operand { ComplexMatrix::identity(n) } else { gen_unitary(n, seed.derive(4))? };
            let x = conditioned(&cfg, kappa, seed.derive(kappa).derive(1))?;
            let cond = if cfg.timing_only { None } else { Some(crate::svd::condition_number(&u.to_elements())) };
            let exact = if cfg.timing_only { None } else { Some(exact_matmul(&exact_of(&u), &exact_of(&x))?) };
            for &algo in &cfg.algos {
                let (z, secs) = timed(cfg.repeats, || cmm(&u, &x, algo, &cfg.backend))?;
                let mut r = ExperimentRecord::new(ExperimentKind::Unitary, algo.name(), n, Some(kappa), seed);
                r.wall_time_s = secs;
                r.unitary_cond = cond;
                if let Some(exact) = &exact {
                    r.rel_error = Some(max_norm_rel_error(&z, exact, u.max_norm(), x.max_norm())?);
                    if cfg.backend == Backend::Conventional {
                        r.bound = cmm_rel_bound(algo, &u, &x, u.max_norm() * x.max_norm())?;
                    }
                }
                out.push(r);
            }
        }
    }
    Ok(out)
}

/// `σ(a + bi) = max(a, 0) + max(b, 0)i`.
pub fn complex_relu(re: f64, im: f64) -> (f64, f64) {
    (re.max(0.0), im.max(0.0))
}

fn relu_float(z: &ComplexMatrix) -> ComplexMatrix {
    z.map_parts(|v| complex_relu(v, 0.0).0)
}

fn relu_exact(z: &ExactMatrixC) -> ExactMatrixC {
    z.map_parts(|v| if v.is_positive() { v.clone() } else { BigRational::zero() })
}

/// Whether every pre-activation part has the same "positive or not" status.
fn same_branches(z: &ComplexMatrix, e: &ExactMatrixC) -> bool {
    let part = |c: &RealMatrix, x: &ExactMatrixR| c.as_slice().iter().zip(x.as_slice()).all(|(&f, q)| (f > 0.0) == q.is_positive());
    part(&z.re, &e.re) && part(&z.im, &e.im)
}

/// `W_d σ(W_{d−1} σ(⋯ σ(W₁X)))` with every product done by `algo`; error
/// relative to `‖E‖max`. Trials where the floating pass took a different
/// ReLU branch from the exact pass are flagged in `branch_consistent`.
pub fn run_cnn(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    let mut cfg = cfg.clone();
    cfg.experiment = ExperimentKind::Cnn;
    cfg.validate()?;
    if cfg.depth == 0 || cfg.batch == 0 {
        return Err(Error::InvalidSpec("depth and batch must be at least 1".into()));
    }
    let n = cfg.n;
    let mut out = Vec::new();
    for &kappa in &cfg.kappas {
        for t in 0..cfg.trials {
            let seed = cfg.trial_seed(t);
            let ks = seed.derive(kappa);
            let weights: Vec<ComplexMatrix> = (0..cfg.depth)
                .map(|l| conditioned(&cfg, kappa, ks.derive(10 + l as u64)))
                .collect::<Result<_>>()?;
            let x0 = gen_random_complex(n, cfg.batch, Dist::uniform(-0.5, 0.5), seed.derive(5))?;
            // Exact pass, keeping pre-activations for the branch check.
            let mut pre_exact = Vec::with_capacity(cfg.depth);
            if !cfg.timing_only {
                let mut h = exact_of(&x0);
                for (l, w) in weights.iter().enumerate() {
                    let z = exact_matmul(&exact_of(w), &h)?;
                    if l + 1 < cfg.depth {
                        h = relu_exact(&z);
                    }
                    pre_exact.push(z);
                }
            }
            for &algo in &cfg.algos {
                let mut pre = Vec::with_capacity(cfg.depth);
                let (zout, secs) = timed(cfg.repeats, || -> Result<ComplexMatrix> {
                    pre.clear();
                    let mut h = x0.clone();
                    for (l, w) in weights.iter().enumerate() {
                        let z = cmm(w, &h, algo, &cfg.backend)?;
                        if l + 1 < cfg.depth {
                            h = relu_float(&z);
                            pre.push(z);
                        } else {
                            h = z;
                        }
                    }
                    Ok(h)
                })?;
                let mut r = ExperimentRecord::new(ExperimentKind::Cnn, algo.name(), n, Some(kappa), seed);
                r.wall_time_s = secs;
                if let Some(e) = pre_exact.last() {
                    r.rel_error = Some(rel_error_to_exact_norm(&zout, e)?);
                    r.branch_consistent = Some(pre.iter().zip(&pre_exact).all(|(z, e)| same_branches(z, e)));
                }
                out.push(r);
            }
        }
    }
    Ok(out)
}

pub fn run(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    match cfg.experiment {
        ExperimentKind::FmmAccuracy => run_fmm_accuracy(cfg),
        ExperimentKind::CmmAccuracy => run_cmm_accuracy(cfg),
        ExperimentKind::CmmSpeed => run_cmm_speed(cfg),
        ExperimentKind::Horner => run_horner(cfg),
        ExperimentKind::Unitary => run_unitary(cfg),
        ExperimentKind::Cnn => run_cnn(cfg),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::InvalidSpec(format!("unknown format '{s}' (csv, json)"))),
        }
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    experiment: &'a str,
    algorithm: &'a str,
    n: usize,
    kappa: Option<u64>,
    seed: u64,
    rel_error: Option<f64>,
    wall_time_s: f64,
    bound: Option<f64>,
}

impl<'a> From<&'a ExperimentRecord> for CsvRow<'a> {
    fn from(r: &'a ExperimentRecord) -> Self {
        CsvRow {
            experiment: &r.experiment,
            algorithm: &r.algorithm,
            n: r.n,
            kappa: r.kappa,
            seed: r.seed,
            rel_error: r.rel_error,
            wall_time_s: r.wall_time_s,
            bound: r.bound,
        }
    }
}

/// CSV rows with columns `experiment,algorithm,n,kappa,seed,rel_error,wall_time_s,bound`.
pub fn write_csv<W: Write>(w: W, records: &[ExperimentRecord], header: bool) -> Result<()> {
    let mut wr = csv::WriterBuilder::new().has_headers(header).from_writer(w);
    for r in records {
        wr.serialize(CsvRow::from(r)).map_err(|e| Error::Format(e.to_string()))?;
    }
    wr.flush()?;
    Ok(())
}

pub fn to_json(records: &[ExperimentRecord]) -> Result<String> {
    Ok(serde_json::to_string_pretty(records)?)
}

/// Writes to `path`. CSV appends to an existing file (header only when the
/// file is new or empty); JSON replaces the file.
pub fn write_records(path: &Path, format: OutputFormat, records: &[ExperimentRecord]) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
            let f = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
            write_csv(f, records, fresh)
        }
        OutputFormat::Json => Ok(std::fs::write(path, to_json(records)? + "\n")?),
    }
}

/// Mean error per algorithm at one sweep point.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub kappa: Option<u64>,
    pub mean_error: BTreeMap<String, f64>,
    /// Trials whose records carried `branch_consistent = false`.
    pub inconsistent_trials: usize,
}

/// Groups records by κ (records without an error are skipped).
pub fn summarize(records: &[ExperimentRecord]) -> Vec<SweepPoint> {
    // κ → (algorithm → (error sum, count), flagged records)
    type Acc = BTreeMap<Option<u64>, (BTreeMap<String, (f64, usize)>, usize)>;
    let mut acc = Acc::new();
    for r in records {
        let Some(e) = r.rel_error else { continue };
        let entry = acc.entry(r.kappa).or_default();
        let slot = entry.0.entry(r.algorithm.clone()).or_insert((0.0, 0));
        slot.0 += e;
        slot.1 += 1;
        if r.branch_consistent == Some(false) {
            entry.1 += 1;
        }
    }
    acc.into_iter()
        .map(|(kappa, (m, bad))| SweepPoint {
            kappa,
            mean_error: m.into_iter().map(|(k, (s, c))| (k, s / c as f64)).collect(),
            inconsistent_trials: bad,
        })
        .collect()
}

/// Fraction of sweep points at which `mean(a) ≤ mean(b) < mean(c)`.
pub fn ordering_fraction(points: &[SweepPoint], a: &str, b: &str, c: &str) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let ok = points
        .iter()
        .filter(|p| match (p.mean_error.get(a), p.mean_error.get(b), p.mean_error.get(c)) {
            (Some(x), Some(y), Some(z)) => x <= y && y < z,
            _ => false,
        })
        .count();
    ok as f64 / points.len() as f64
}

/// Mean over all records of `algorithm` of `field(record)`.
pub fn mean_of(records: &[ExperimentRecord], algorithm: &str, field: impl Fn(&ExperimentRecord) -> Option<f64>) -> Option<f64> {
    let xs: Vec<f64> = records.iter().filter(|r| r.algorithm == algorithm).filter_map(field).collect();
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(kind: ExperimentKind) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(kind);
        c.n = 8;
        c.trials = 2;
        c.kappas = vec![1 << 10, 1 << 20];
        c
    }

    #[test]
    fn default_sweep() {
        let k = kappa_sweep(34, 53, 10).unwrap();
        let exps: Vec<u32> = k.iter().map(|x| x.trailing_zeros()).collect();
        assert_eq!(exps, vec![34, 36, 38, 40, 42, 45, 47, 49, 51, 53]);
        assert!(kappa_sweep(10, 5, 3).is_err());
    }

    #[test]
    fn oracle_limit() {
        let mut c = small(ExperimentKind::CmmAccuracy);
        c.n = 256;
        assert!(matches!(run(&c), Err(Error::OracleInfeasible { n: 256, limit: 128 })));
        c.timing_only = true;
        c.trials = 1;
        c.kappas = vec![4];
        c.algos = vec![CmmAlgorithm::Gauss];
        assert!(run(&c).is_ok());
    }

    #[test]
    fn relu() {
        assert_eq!(complex_relu(1.0, -2.0), (1.0, 0.0));
        assert_eq!(complex_relu(-1.0, -1.0), (0.0, 0.0));
        let z = complex_relu(0.3, 0.7);
        assert_eq!(complex_relu(z.0, z.1), z);
    }

    #[test]
    fn horner_degree_zero_is_exact() {
        let mut c = small(ExperimentKind::Horner);
        c.degree = 0;
        for r in run(&c).unwrap() {
            assert_eq!(r.rel_error, Some(0.0));
        }
    }

    #[test]
    fn horner_identity_hook() {
        let mut c = small(ExperimentKind::Horner);
        c.identity_operand = true;
        let u = 2f64.powi(-53);
        for r in run(&c).unwrap() {
            assert!(r.rel_error.unwrap() <= 10.0 * c.degree as f64 * u, "{r:?}");
        }
    }

    #[test]
    fn unitary_identity_matches_bare_cmm() {
        let mut c = small(ExperimentKind::Unitary);
        c.identity_operand = true;
        let recs = run(&c).unwrap();
        let r0 = &recs[0];
        let x = conditioned(&c, r0.kappa.unwrap(), Seed(r0.seed).derive(r0.kappa.unwrap()).derive(1)).unwrap();
        let id = ComplexMatrix::identity(c.n);
        let z = cmm(&id, &x, CmmAlgorithm::Regular, &Backend::Conventional).unwrap();
        let e = exact_matmul(&exact_of(&id), &exact_of(&x)).unwrap();
        assert_eq!(r0.rel_error.unwrap(), max_norm_rel_error(&z, &e, 1.0, x.max_norm()).unwrap());
        assert!(recs.iter().all(|r| (r.unitary_cond.unwrap() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn unitary_is_well_conditioned() {
        let recs = run(&small(ExperimentKind::Unitary)).unwrap();
        assert!(recs.iter().all(|r| (r.unitary_cond.unwrap() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn accuracy_records_respect_bounds() {
        let recs = run(&small(ExperimentKind::CmmAccuracy)).unwrap();
        assert_eq!(recs.len(), 2 * 2 * 3);
        for r in &recs {
            if let Some(b) = r.bound {
                assert!(r.rel_error.unwrap() <= b * 1.01, "{r:?}");
            }
        }
    }

    #[test]
    fn fmm_without_recursion_is_conventional() {
        let mut c = small(ExperimentKind::FmmAccuracy);
        c.cutoff = c.n;
        let recs = run(&c).unwrap();
        for t in recs.chunks(3) {
            assert_eq!(t[0].rel_error, t[1].rel_error);
            assert_eq!(t[0].rel_error, t[2].rel_error);
        }
    }

    #[test]
    fn deterministic_csv() {
        let strip = |mut rs: Vec<ExperimentRecord>| {
            rs.iter_mut().for_each(|r| r.wall_time_s = 0.0);
            let mut buf = Vec::new();
            write_csv(&mut buf, &rs, true).unwrap();
            String::from_utf8(buf).unwrap()
        };
        let c = small(ExperimentKind::Cnn);
        let a = strip(run(&c).unwrap());
        assert_eq!(a, strip(run(&c).unwrap()));
        assert!(a.starts_with("experiment,algorithm,n,kappa,seed,rel_error,wall_time_s,bound\n"));
    }

    #[test]
    fn scalar_size_errors() {
        let mut c = small(ExperimentKind::CmmAccuracy);
        c.n = 1;
        c.cmm_input = CmmInput::Uniform { lo: -1.0, hi: 1.0 };
        for r in run(&c).unwrap() {
            assert!(r.rel_error.unwrap() <= 8.0 * 2f64.powi(-53), "{r:?}");
        }
    }

    #[test]
    fn summary_and_ordering() {
        let rec = |algo: &str, k, e| {
            let mut r = ExperimentRecord::new(ExperimentKind::CmmAccuracy, algo, 4, Some(k), Seed(0));
            r.rel_error = Some(e);
            r
        };
        let recs = vec![
            rec("regular", 4, 1.0),
            rec("new", 4, 2.0),
            rec("gauss", 4, 3.0),
            rec("regular", 8, 1.0),
            rec("new", 8, 5.0),
            rec("gauss", 8, 3.0),
        ];
        let pts = summarize(&recs);
        assert_eq!(pts.len(), 2);
        assert_eq!(ordering_fraction(&pts, "regular", "new", "gauss"), 0.5);
        assert_eq!(mean_of(&recs, "new", |r| r.rel_error), Some(3.5));
    }
}
