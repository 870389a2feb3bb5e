//! Seeded input generators.
//!
//! Every stream comes from xoshiro256** seeded through SplitMix64, so a seed
//! reproduces the same matrices on every platform. Uniform variates use the
//! top 53 bits of each output.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::Xoshiro256StarStar;

use crate::error::{Error, Result};
use crate::matrix::{ComplexElementMatrix, ComplexMatrix, Matrix, RealMatrix};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Seed(pub u64);

impl Seed {
    pub fn rng(self) -> Xoshiro256StarStar {
        Xoshiro256StarStar::seed_from_u64(self.0)
    }

    /// Independent child seed, e.g. one per trial or per operand.
    pub fn derive(self, stream: u64) -> Seed {
        let mut sm = self.0 ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        // One SplitMix64 step.
        sm = sm.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = sm;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        Seed(z ^ (z >> 31))
    }
}

impl From<u64> for Seed {
    fn from(s: u64) -> Self {
        Seed(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Dist {
    Uniform { lo: f64, hi: f64 },
    Normal,
}

impl Dist {
    pub fn uniform(lo: f64, hi: f64) -> Self {
        Dist::Uniform { lo, hi }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Dist::Uniform { lo, hi } if !(lo < hi && lo.is_finite() && hi.is_finite()) => {
                Err(Error::InvalidSpec(format!("uniform range [{lo}, {hi}] is empty or not finite")))
            }
            _ => Ok(()),
        }
    }

    fn sample(&self, rng: &mut impl RngCore) -> f64 {
        match *self {
            Dist::Uniform { lo, hi } => lo + (hi - lo) * unit(rng),
            Dist::Normal => rng.sample(StandardNormal),
        }
    }
}

/// `k / 2⁵³` for a uniform 53-bit `k`.
fn unit(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn check_dims(rows: usize, cols: usize) -> Result<()> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidSpec(format!("matrix dimensions must be positive, got {rows}x{cols}")));
    }
    Ok(())
}

pub fn gen_random(rows: usize, cols: usize, dist: Dist, seed: Seed) -> Result<RealMatrix> {
    check_dims(rows, cols)?;
    dist.validate()?;
    let mut rng = seed.rng();
    Ok(Matrix::from_fn(rows, cols, |_, _| dist.sample(&mut rng)))
}

/// Real part drawn first, then the imaginary part, from one stream.
pub fn gen_random_complex(rows: usize, cols: usize, dist: Dist, seed: Seed) -> Result<ComplexMatrix> {
    check_dims(rows, cols)?;
    dist.validate()?;
    let mut rng = seed.rng();
    let re = Matrix::from_fn(rows, cols, |_, _| dist.sample(&mut rng));
    let im = Matrix::from_fn(rows, cols, |_, _| dist.sample(&mut rng));
    ComplexMatrix::new(re, im)
}

fn check_pow2(n: usize) -> Result<()> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::InvalidSpec(format!("n = {n} must be a power of 2 (at least 2)")));
    }
    Ok(())
}

fn sylvester(n: usize) -> Vec<i8> {
    let mut h = vec![1i8];
    let mut k = 1;
    while k < n {
        let mut next = vec![0i8; 4 * k * k];
        for i in 0..k {
            for j in 0..k {
                let x = h[i * k + j];
                next[i * 2 * k + j] = x;
                next[i * 2 * k + j + k] = x;
                next[(i + k) * 2 * k + j] = x;
                next[(i + k) * 2 * k + j + k] = -x;
            }
        }
        h = next;
        k *= 2;
    }
    h
}

fn hadamard_signs(n: usize, rng: &mut impl RngCore) -> Vec<i8> {
    let base = sylvester(n);
    let mut rows: Vec<usize> = (0..n).collect();
    let mut cols: Vec<usize> = (0..n).collect();
    rows.shuffle(rng);
    cols.shuffle(rng);
    let rsign: Vec<i8> = (0..n).map(|_| if rng.next_u64() >> 63 == 0 { 1 } else { -1 }).collect();
    let csign: Vec<i8> = (0..n).map(|_| if rng.next_u64() >> 63 == 0 { 1 } else { -1 }).collect();
    let mut h = vec![0i8; n * n];
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] = base[rows[i] * n + cols[j]] * rsign[i] * csign[j];
        }
    }
    h
}

/// Sylvester Hadamard matrix under a random signed row and column
/// permutation, so `H Hᵀ = n I`.
pub fn gen_hadamard(n: usize, seed: Seed) -> Result<RealMatrix> {
    check_pow2(n)?;
    let h = hadamard_signs(n, &mut seed.rng());
    Ok(Matrix::from_fn(n, n, |i, j| h[i * n + j] as f64))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConditionedSpec {
    pub n: usize,
    pub kappa: u64,
    pub seed: Seed,
}

impl ConditionedSpec {
    pub fn new(n: usize, kappa: u64, seed: Seed) -> Result<Self> {
        check_pow2(n)?;
        if kappa < 2 {
            return Err(Error::InvalidSpec(format!("kappa = {kappa} must be at least 2")));
        }
        Ok(Self { n, kappa, seed })
    }

    /// Whether every entry of `HΛHᵀ` is guaranteed to be an exact double:
    /// `n κ < 2⁵³ / n`.
    pub fn exactly_representable(&self) -> bool {
        (self.n as u128) * (self.n as u128) * (self.kappa as u128) < 1u128 << 53
    }
}

/// `HΛHᵀ` as exact integers.
fn conjugate(h: &[i8], lambda: &[u64]) -> Vec<i128> {
    let n = lambda.len();
    let mut x = vec![0i128; n * n];
    for i in 0..n {
        for j in i..n {
            let s: i128 = (0..n)
                .map(|k| (h[i * n + k] * h[j * n + k]) as i128 * lambda[k] as i128)
                .sum();
            x[i * n + j] = s;
            x[j * n + i] = s;
        }
    }
    x
}

/// A diagonal with `1` at `pins.0`, `κ` at `pins.1`, the rest uniform in `[1, κ−1]`.
fn spectrum(n: usize, kappa: u64, pins: (usize, usize), rng: &mut impl RngCore) -> Vec<u64> {
    (0..n)
        .map(|k| {
            if k == pins.0 {
                1
            } else if k == pins.1 {
                kappa
            } else {
                rng.random_range(1..kappa)
            }
        })
        .collect()
}

fn pin_positions(n: usize, rng: &mut impl RngCore) -> (usize, usize) {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    (idx[0], idx[1])
}

/// Exact integer entries of a conditioned matrix, and its diagonals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionedExact {
    pub n: usize,
    pub entries: Vec<i128>,
    pub lambda: Vec<u64>,
}

impl ConditionedExact {
    /// Nearest doubles to the entries; exact when `exactly_representable` holds.
    pub fn to_f64(&self) -> RealMatrix {
        Matrix::from_fn(self.n, self.n, |i, j| self.entries[i * self.n + j] as f64)
    }
}

fn conditioned_parts(spec: &ConditionedSpec, complex: bool) -> (ConditionedExact, Option<ConditionedExact>) {
    let mut rng = spec.seed.rng();
    let h = hadamard_signs(spec.n, &mut rng);
    let pins = pin_positions(spec.n, &mut rng);
    let la = spectrum(spec.n, spec.kappa, pins, &mut rng);
    let a = ConditionedExact {
        n: spec.n,
        entries: conjugate(&h, &la),
        lambda: la,
    };
    let b = complex.then(|| {
        let lb = spectrum(spec.n, spec.kappa, pins, &mut rng);
        ConditionedExact {
            n: spec.n,
            entries: conjugate(&h, &lb),
            lambda: lb,
        }
    });
    (a, b)
}

fn refuse(spec: &ConditionedSpec) -> Error {
    Error::Domain(format!(
        "n = {}, kappa = {}: entries of HΛHᵀ may not be exact doubles (need n²κ < 2^53)",
        spec.n, spec.kappa
    ))
}

/// `X = HΛHᵀ` with singular values `n·Λ`, so `κ₂(X) = κ`. Refuses when
/// entries might not be exact doubles; see [`gen_conditioned_rounded`].
pub fn gen_conditioned(spec: &ConditionedSpec) -> Result<RealMatrix> {
    if !spec.exactly_representable() {
        return Err(refuse(spec));
    }
    Ok(conditioned_parts(spec, false).0.to_f64())
}

/// Same construction without the guard: the exact integer matrix and its
/// entrywise nearest doubles. For large `n²κ` the doubles are only close to
/// the exactly conditioned matrix.
pub fn gen_conditioned_rounded(spec: &ConditionedSpec) -> (RealMatrix, ConditionedExact) {
    let (a, _) = conditioned_parts(spec, false);
    (a.to_f64(), a)
}

/// `A + iB` with `A = HΛ_AHᵀ`, `B = HΛ_BHᵀ` sharing `H` and the positions of
/// `1` and `κ`, so `κ₂(A) = κ₂(B) = κ₂(A + iB) = κ`.
pub fn gen_conditioned_complex(spec: &ConditionedSpec) -> Result<ComplexMatrix> {
    if !spec.exactly_representable() {
        return Err(refuse(spec));
    }
    Ok(gen_conditioned_complex_rounded(spec).0)
}

pub fn gen_conditioned_complex_rounded(spec: &ConditionedSpec) -> (ComplexMatrix, ConditionedExact, ConditionedExact) {
    let (a, b) = conditioned_parts(spec, true);
    let b = b.expect("complex parts requested");
    let x = ComplexMatrix::new(a.to_f64(), b.to_f64()).expect("parts share a shape");
    (x, a, b)
}

/// Random unitary `Q` from the Householder QR of a matrix with entries in
/// `U[0,1] + iU[0,1]`, with column phases chosen so `diag(R)` is real and
/// nonnegative.
pub fn gen_unitary(n: usize, seed: Seed) -> Result<ComplexMatrix> {
    check_dims(n, n)?;
    let x = gen_random_complex(n, n, Dist::uniform(0.0, 1.0), seed)?;
    let mut a: Vec<Complex64> = x.to_elements().into_vec();
    let mut reflectors = Vec::with_capacity(n);
    let mut rdiag = Vec::with_capacity(n);
    for k in 0..n {
        let norm = (k..n).map(|i| a[i * n + k].norm_sqr()).sum::<f64>().sqrt();
        let x0 = a[k * n + k];
        let phase = if x0.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -phase * norm;
        let mut v: Vec<Complex64> = (k..n).map(|i| a[i * n + k]).collect();
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm > 0.0 {
            v.iter_mut().for_each(|z| *z /= vnorm);
            // A[k.., k..] -= 2 v (vᴴ A[k.., k..])
            for j in k..n {
                let dot: Complex64 = v.iter().enumerate().map(|(t, vi)| vi.conj() * a[(k + t) * n + j]).sum();
                for (t, vi) in v.iter().enumerate() {
                    a[(k + t) * n + j] -= 2.0 * vi * dot;
                }
            }
        }
        rdiag.push(a[k * n + k]);
        reflectors.push(v);
    }
    // Q = H₀ H₁ ⋯ H_{n−1}, applied to I from the last reflector back.
    let mut q = ComplexElementMatrix::identity(n).into_vec();
    for (k, v) in reflectors.iter().enumerate().rev() {
        for j in 0..n {
            let dot: Complex64 = v.iter().enumerate().map(|(t, vi)| vi.conj() * q[(k + t) * n + j]).sum();
            for (t, vi) in v.iter().enumerate() {
                q[(k + t) * n + j] -= 2.0 * vi * dot;
            }
        }
    }
    for (j, r) in rdiag.iter().enumerate() {
        if r.norm() > 0.0 {
            let d = r / r.norm();
            for i in 0..n {
                q[i * n + j] *= d;
            }
        }
    }
    Ok(ComplexMatrix::from_elements(&Matrix::from_vec(n, n, q)?))
}
