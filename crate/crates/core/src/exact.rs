//! Exact ground truth for the floating-point experiments.
//!
//! Every IEEE 754 double is a dyadic rational, so the inputs fed to a
//! floating-point algorithm can be lifted into `ℚ` (or `ℚ + ℚi`) without loss.
//! Products are then formed exactly and the error of a computed result is
//! measured in rational arithmetic, with a single rounding at the very end.
//!
//! Matrix products work on a common-denominator integer form: each operand is
//! written as `N / L` with `L` the lcm of its denominators, the integer product
//! `N_a N_b` is formed (with an `i128` fast path when the operand sizes allow
//! it) and the result is `N_a N_b / (L_a L_b)`.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{dim_err, Error, Result};
use crate::matrix::{ComplexMatrix, RealMatrix};

pub use num_rational::BigRational;

/// `re + im·i` with rational parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn zero() -> Self {
        Self::new(BigRational::zero(), BigRational::zero())
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    /// Max of `|re|` and `|im|`, the entrywise max-norm contribution.
    pub fn max_abs_part(&self) -> BigRational {
        let (a, b) = (self.re.abs(), self.im.abs());
        if a >= b {
            a
        } else {
            b
        }
    }
}

impl std::ops::Add for &GaussianRational {
    type Output = GaussianRational;
    fn add(self, rhs: Self) -> GaussianRational {
        GaussianRational::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl std::ops::Sub for &GaussianRational {
    type Output = GaussianRational;
    fn sub(self, rhs: Self) -> GaussianRational {
        GaussianRational::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl std::ops::Mul for &GaussianRational {
    type Output = GaussianRational;
    fn mul(self, rhs: Self) -> GaussianRational {
        GaussianRational::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

/// Exact value of a finite double, in lowest terms.
pub fn double_to_rational(x: f64) -> Result<BigRational> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("{x} has no rational value")));
    }
    let bits = x.to_bits();
    let negative = bits >> 63 == 1;
    let exp_field = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mut mant, mut exp) = if exp_field == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp_field - 1075)
    };
    if mant == 0 {
        return Ok(BigRational::zero());
    }
    let tz = mant.trailing_zeros();
    mant >>= tz;
    exp += tz as i64;
    let mut num = BigInt::from(mant);
    if negative {
        num = -num;
    }
    Ok(if exp >= 0 {
        BigRational::from_integer(num << exp as usize)
    } else {
        // mant is odd, so num / 2^k is already in lowest terms.
        BigRational::new_raw(num, BigInt::one() << (-exp) as usize)
    })
}

/// Nearest double to `q` (round half to even), `±inf` on overflow.
pub fn rational_to_f64(q: &BigRational) -> f64 {
    if q.is_zero() {
        return 0.0;
    }
    let negative = q.is_negative();
    let p = q.numer().abs();
    let d = q.denom().abs();
    let magnitude = positive_ratio_to_f64(&p, &d);
    if negative {
        -magnitude
    } else {
        magnitude
    }
}

fn positive_ratio_to_f64(p: &BigInt, q: &BigInt) -> f64 {
    let e = p.bits() as i64 - q.bits() as i64;
    // floor(log2(p/q)) is e or e-1.
    let floor_log2 = if e >= 0 {
        if *p >= (q << e as usize) {
            e
        } else {
            e - 1
        }
    } else if (p << (-e) as usize) >= *q {
        e
    } else {
        e - 1
    };
    if floor_log2 > 1023 {
        return f64::INFINITY;
    }
    let normal = floor_log2 >= -1022;
    let shift = if normal { 52 - floor_log2 } else { 1074 };
    let (num, den) = if shift >= 0 {
        (p << shift as usize, q.clone())
    } else {
        (p.clone(), q << (-shift) as usize)
    };
    let (mut m, r) = num.div_rem(&den);
    let twice_r: BigInt = r << 1usize;
    if twice_r > den || (twice_r == den && m.is_odd()) {
        m += 1u32;
    }
    let mut mant = m.to_u64().expect("mantissa fits in 54 bits");
    let mut exponent = floor_log2;
    if normal {
        if mant == 1u64 << 53 {
            mant = 1u64 << 52;
            exponent += 1;
            if exponent > 1023 {
                return f64::INFINITY;
            }
        }
        f64::from_bits((((exponent + 1023) as u64) << 52) | (mant - (1u64 << 52)))
    } else {
        // mant <= 2^52; 2^52 encodes the smallest normal number.
        f64::from_bits(mant)
    }
}

/// Dense rational matrix, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactMatrixR {
    rows: usize,
    cols: usize,
    data: Vec<BigRational>,
}

impl ExactMatrixR {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<BigRational>) -> Result<Self> {
        if data.len() != rows * cols {
            return dim_err(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            ));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![BigRational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigRational::one();
        }
        m
    }

    /// Exact lift of a double matrix.
    pub fn from_real(a: &RealMatrix) -> Self {
        let data = a
            .as_slice()
            .iter()
            .map(|&x| double_to_rational(x).expect("RealMatrix entries are finite"))
            .collect();
        Self {
            rows: a.rows(),
            cols: a.cols(),
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.data[i * self.cols + j]
    }

    pub fn as_slice(&self) -> &[BigRational] {
        &self.data
    }

    pub fn to_f64(&self) -> RealMatrix {
        let data = self.data.iter().map(rational_to_f64).collect();
        RealMatrix::from_vec_unchecked(self.rows, self.cols, data)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        self.map(|x| x * s)
    }

    pub fn map(&self, f: impl Fn(&BigRational) -> BigRational) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(&BigRational, &BigRational) -> BigRational,
    ) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return dim_err(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            ));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| f(a, b))
                .collect(),
        })
    }

    /// Max |entry|, exactly.
    pub fn max_abs(&self) -> BigRational {
        self.data
            .iter()
            .map(|x| x.abs())
            .max()
            .unwrap_or_else(BigRational::zero)
    }
}

/// Dense Gaussian-rational matrix stored as exact real and imaginary parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactMatrixC {
    pub re: ExactMatrixR,
    pub im: ExactMatrixR,
}

impl ExactMatrixC {
    pub fn new(re: ExactMatrixR, im: ExactMatrixR) -> Result<Self> {
        if re.rows != im.rows || re.cols != im.cols {
            return dim_err("real and imaginary parts differ in shape");
        }
        Ok(Self { re, im })
    }

    pub fn from_entries(rows: usize, cols: usize, entries: Vec<GaussianRational>) -> Result<Self> {
        if entries.len() != rows * cols {
            return dim_err(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            ));
        }
        let (re, im) = entries.into_iter().map(|z| (z.re, z.im)).unzip();
        Ok(Self {
            re: ExactMatrixR { rows, cols, data: re },
            im: ExactMatrixR { rows, cols, data: im },
        })
    }

    pub fn from_complex(x: &ComplexMatrix) -> Self {
        Self {
            re: ExactMatrixR::from_real(&x.re),
            im: ExactMatrixR::from_real(&x.im),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            re: ExactMatrixR::identity(n),
            im: ExactMatrixR::zeros(n, n),
        }
    }

    pub fn rows(&self) -> usize {
        self.re.rows
    }

    pub fn cols(&self) -> usize {
        self.re.cols
    }

    pub fn get(&self, i: usize, j: usize) -> GaussianRational {
        GaussianRational::new(self.re.get(i, j).clone(), self.im.get(i, j).clone())
    }

    pub fn to_f64(&self) -> ComplexMatrix {
        ComplexMatrix::new(self.re.to_f64(), self.im.to_f64()).expect("parts share a shape")
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            re: self.re.add(&other.re)?,
            im: self.im.add(&other.im)?,
        })
    }

    /// Multiplication by a real rational scalar.
    pub fn scale(&self, s: &BigRational) -> Self {
        Self {
            re: self.re.scale(s),
            im: self.im.scale(s),
        }
    }

    pub fn map_parts(&self, f: impl Fn(&BigRational) -> BigRational) -> Self {
        Self {
            re: self.re.map(&f),
            im: self.im.map(&f),
        }
    }

    /// `max{|re_ij|, |im_ij|}`, exactly.
    pub fn max_norm(&self) -> BigRational {
        let (a, b) = (self.re.max_abs(), self.im.max_abs());
        if a >= b {
            a
        } else {
            b
        }
    }
}

/// Exact matrix products over `ℚ` or `ℚ + ℚi`.
pub trait ExactMatmul: Sized {
    fn exact_matmul(&self, rhs: &Self) -> Result<Self>;
}

impl ExactMatmul for ExactMatrixR {
    fn exact_matmul(&self, rhs: &Self) -> Result<Self> {
        check_inner(self.rows, self.cols, rhs.rows, rhs.cols)?;
        let a = IntForm::new(&[&self.data]);
        let b = IntForm::new(&[&rhs.data]);
        let prod = int_matmul(&a.nums[0], &b.nums[0], self.rows, self.cols, rhs.cols);
        Ok(a.finish(&b, prod, self.rows, rhs.cols))
    }
}

impl ExactMatmul for ExactMatrixC {
    fn exact_matmul(&self, rhs: &Self) -> Result<Self> {
        check_inner(self.rows(), self.cols(), rhs.rows(), rhs.cols())?;
        let (m, k, n) = (self.rows(), self.cols(), rhs.cols());
        let x = IntForm::new(&[&self.re.data, &self.im.data]);
        let y = IntForm::new(&[&rhs.re.data, &rhs.im.data]);
        let (a, b) = (&x.nums[0], &x.nums[1]);
        let (c, d) = (&y.nums[0], &y.nums[1]);
        let ac = int_matmul(a, c, m, k, n);
        let bd = int_matmul(b, d, m, k, n);
        let ad = int_matmul(a, d, m, k, n);
        let bc = int_matmul(b, c, m, k, n);
        let re: Vec<BigInt> = ac.into_iter().zip(bd).map(|(p, q)| p - q).collect();
        let im: Vec<BigInt> = ad.into_iter().zip(bc).map(|(p, q)| p + q).collect();
        Ok(Self {
            re: x.finish(&y, re, m, n),
            im: x.finish(&y, im, m, n),
        })
    }
}

/// Free-function form of [`ExactMatmul::exact_matmul`].
pub fn exact_matmul<M: ExactMatmul>(a: &M, b: &M) -> Result<M> {
    a.exact_matmul(b)
}

fn check_inner(m: usize, k: usize, k2: usize, n: usize) -> Result<()> {
    if k != k2 {
        return dim_err(format!("cannot multiply {m}x{k} by {k2}x{n}"));
    }
    Ok(())
}

/// Matrices sharing one denominator: `value = nums / den`.
struct IntForm {
    nums: Vec<Vec<BigInt>>,
    den: BigInt,
}

impl IntForm {
    fn new(parts: &[&[BigRational]]) -> Self {
        let mut den = BigInt::one();
        for part in parts {
            for x in part.iter() {
                if !x.denom().is_one() {
                    den = den.lcm(x.denom());
                }
            }
        }
        let nums = parts
            .iter()
            .map(|part| {
                part.iter()
                    .map(|x| {
                        if x.denom() == &den {
                            x.numer().clone()
                        } else {
                            x.numer() * (&den / x.denom())
                        }
                    })
                    .collect()
            })
            .collect();
        Self { nums, den }
    }

    fn finish(&self, rhs: &IntForm, prod: Vec<BigInt>, rows: usize, cols: usize) -> ExactMatrixR {
        let den = &self.den * &rhs.den;
        let data = prod
            .into_iter()
            .map(|num| BigRational::new(num, den.clone()))
            .collect();
        ExactMatrixR { rows, cols, data }
    }
}

fn max_bits(xs: &[BigInt]) -> u64 {
    xs.iter().map(|x| x.bits()).max().unwrap_or(0)
}

fn int_matmul(a: &[BigInt], b: &[BigInt], m: usize, k: usize, n: usize) -> Vec<BigInt> {
    let (ba, bb) = (max_bits(a), max_bits(b));
    let kbits = 64 - (k as u64).leading_zeros() as u64;
    if ba <= 63 && bb <= 63 && ba + bb + kbits <= 126 {
        let a: Vec<i128> = a.iter().map(|x| x.to_i64().unwrap() as i128).collect();
        let b: Vec<i128> = b.iter().map(|x| x.to_i64().unwrap() as i128).collect();
        let mut c = vec![0i128; m * n];
        for i in 0..m {
            let row = &mut c[i * n..(i + 1) * n];
            for p in 0..k {
                let aip = a[i * k + p];
                if aip == 0 {
                    continue;
                }
                for (cij, &bpj) in row.iter_mut().zip(&b[p * n..(p + 1) * n]) {
                    *cij += aip * bpj;
                }
            }
        }
        return c.into_iter().map(BigInt::from).collect();
    }
    let mut c = vec![BigInt::zero(); m * n];
    for i in 0..m {
        for p in 0..k {
            let aip = &a[i * k + p];
            if aip.sign() == Sign::NoSign {
                continue;
            }
            for j in 0..n {
                let bpj = &b[p * n + j];
                if bpj.sign() != Sign::NoSign {
                    c[i * n + j] += aip * bpj;
                }
            }
        }
    }
    c
}

/// Exact `max |computed - exact|` over real and imaginary parts of all entries.
pub fn max_norm_diff(computed: &ComplexMatrix, exact: &ExactMatrixC) -> Result<BigRational> {
    let (re, im) = part_max_diff(computed, exact)?;
    Ok(if re >= im { re } else { im })
}

/// Exact max abs error of the real part and of the imaginary part, separately.
pub fn part_max_diff(
    computed: &ComplexMatrix,
    exact: &ExactMatrixC,
) -> Result<(BigRational, BigRational)> {
    if computed.rows() != exact.rows() || computed.cols() != exact.cols() {
        return dim_err(format!(
            "computed {}x{} vs exact {}x{}",
            computed.rows(),
            computed.cols(),
            exact.rows(),
            exact.cols()
        ));
    }
    let part = |c: &RealMatrix, e: &ExactMatrixR| -> BigRational {
        c.as_slice()
            .iter()
            .zip(e.as_slice())
            .map(|(&x, y)| (double_to_rational(x).expect("finite entry") - y).abs())
            .max()
            .unwrap_or_else(BigRational::zero)
    };
    Ok((part(&computed.re, &exact.re), part(&computed.im, &exact.im)))
}

/// Entrywise `|computed - exact|` for both parts, each rounded to nearest.
pub fn entrywise_abs_error(
    computed: &ComplexMatrix,
    exact: &ExactMatrixC,
) -> Result<(RealMatrix, RealMatrix)> {
    if computed.rows() != exact.rows() || computed.cols() != exact.cols() {
        return dim_err("computed and exact shapes differ");
    }
    let part = |c: &RealMatrix, e: &ExactMatrixR| -> RealMatrix {
        let data = c
            .as_slice()
            .iter()
            .zip(e.as_slice())
            .map(|(&x, y)| rational_to_f64(&(double_to_rational(x).expect("finite") - y).abs()))
            .collect();
        RealMatrix::from_vec_unchecked(c.rows(), c.cols(), data)
    };
    Ok((part(&computed.re, &exact.re), part(&computed.im, &exact.im)))
}

/// `‖computed − exact‖max / (scale_x · scale_y)` with one final rounding.
pub fn max_norm_rel_error(
    computed: &ComplexMatrix,
    exact: &ExactMatrixC,
    scale_x: f64,
    scale_y: f64,
) -> Result<f64> {
    if !(scale_x > 0.0 && scale_y > 0.0) || !scale_x.is_finite() || !scale_y.is_finite() {
        return Err(Error::Domain(format!(
            "scales must be positive and finite, got {scale_x} and {scale_y}"
        )));
    }
    let diff = max_norm_diff(computed, exact)?;
    let denom = double_to_rational(scale_x)? * double_to_rational(scale_y)?;
    Ok(rational_to_f64(&(diff / denom)))
}

/// `‖computed − exact‖max / ‖exact‖max`, or the absolute error when `exact` is zero.
pub fn rel_error_to_exact_norm(computed: &ComplexMatrix, exact: &ExactMatrixC) -> Result<f64> {
    let diff = max_norm_diff(computed, exact)?;
    let norm = exact.max_norm();
    if norm.is_zero() {
        return Ok(rational_to_f64(&diff));
    }
    Ok(rational_to_f64(&(diff / norm)))
}
