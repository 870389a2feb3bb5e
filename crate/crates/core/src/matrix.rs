//! Dense row-major matrices over `f64` and `Complex64`, and the split
//! real/imaginary [`ComplexMatrix`] used by the complex-multiplication schemes.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::error::{dim_err, Error, Result};

/// Element type of a [`Matrix`].
pub trait Scalar:
    Copy
    + PartialEq
    + fmt::Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    fn is_finite(&self) -> bool;
    fn from_f64(x: f64) -> Self;
    /// Largest absolute real or imaginary component.
    fn max_abs_part(&self) -> f64;
}

impl Scalar for f64 {
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn max_abs_part(&self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn max_abs_part(&self) -> f64 {
        self.re.abs().max(self.im.abs())
    }
}

#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

/// Real double-precision matrix.
pub type RealMatrix = Matrix<f64>;
/// Matrix with `Complex64` entries (multiplied with the regular 4-mult formula).
pub type ComplexElementMatrix = Matrix<Complex64>;

impl<T: Scalar> Matrix<T> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::ContractViolation(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return dim_err(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            ));
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::Domain(format!("non-finite entry at index {pos}")));
        }
        Ok(Self { rows, cols, data })
    }

    pub(crate) fn from_vec_unchecked(rows: usize, cols: usize, data: Vec<T>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: T) {
        self.data[i * self.cols + j] = value;
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        if self.shape() != other.shape() {
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
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|x| s * x)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// Copy of the `rows x cols` block whose top-left corner is `(r0, c0)`.
    /// Positions outside `self` read as zero.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| {
            let (r, c) = (r0 + i, c0 + j);
            if r < self.rows && c < self.cols {
                self.get(r, c)
            } else {
                T::zero()
            }
        })
    }

    /// Writes `src` at `(r0, c0)`, clipping whatever falls outside `self`.
    pub fn write_block(&mut self, r0: usize, c0: usize, src: &Self) {
        for i in 0..src.rows {
            let r = r0 + i;
            if r >= self.rows {
                break;
            }
            for j in 0..src.cols {
                let c = c0 + j;
                if c >= self.cols {
                    break;
                }
                self.set(r, c, src.get(i, j));
            }
        }
    }

    /// `max |a_ij|` (over both parts for complex entries).
    pub fn max_norm(&self) -> f64 {
        self.data
            .iter()
            .map(Scalar::max_abs_part)
            .fold(0.0, f64::max)
    }
}

impl RealMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return dim_err("ragged rows");
        }
        Self::from_vec(r, c, rows.concat())
    }

    pub fn abs(&self) -> Self {
        self.map(f64::abs)
    }
}

impl ComplexElementMatrix {
    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn from_split(x: &ComplexMatrix) -> Self {
        Self {
            rows: x.rows(),
            cols: x.cols(),
            data: x
                .re
                .data
                .iter()
                .zip(&x.im.data)
                .map(|(&re, &im)| Complex64::new(re, im))
                .collect(),
        }
    }
}

impl<T: Scalar> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[i * self.cols..(i + 1) * self.cols])?;
        }
        write!(f, "]")
    }
}

/// `A + iB`, stored as the two real matrices `A` and `B`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    pub re: RealMatrix,
    pub im: RealMatrix,
}

impl ComplexMatrix {
    pub fn new(re: RealMatrix, im: RealMatrix) -> Result<Self> {
        if re.shape() != im.shape() {
            return dim_err(format!(
                "real part {:?} vs imaginary part {:?}",
                re.shape(),
                im.shape()
            ));
        }
        Ok(Self { re, im })
    }

    pub fn from_parts(rows: usize, cols: usize, re: Vec<f64>, im: Vec<f64>) -> Result<Self> {
        Self::new(
            RealMatrix::from_vec(rows, cols, re)?,
            RealMatrix::from_vec(rows, cols, im)?,
        )
    }

    /// Real matrix viewed as complex with zero imaginary part.
    pub fn from_real(re: RealMatrix) -> Self {
        let (r, c) = re.shape();
        Self {
            re,
            im: RealMatrix::zeros(r, c),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_real(RealMatrix::identity(n))
    }

    pub fn rows(&self) -> usize {
        self.re.rows()
    }

    pub fn cols(&self) -> usize {
        self.re.cols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.re.shape()
    }

    /// `max{|a_ij|, |b_ij|}`.
    pub fn max_norm(&self) -> f64 {
        self.re.max_norm().max(self.im.max_norm())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            re: self.re.add(&other.re)?,
            im: self.im.add(&other.im)?,
        })
    }

    /// Multiplication by a real scalar.
    pub fn scale(&self, s: f64) -> Self {
        Self {
            re: self.re.scale(s),
            im: self.im.scale(s),
        }
    }

    pub fn map_parts(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            re: self.re.map(&f),
            im: self.im.map(&f),
        }
    }

    pub fn to_elements(&self) -> ComplexElementMatrix {
        ComplexElementMatrix::from_split(self)
    }

    pub fn from_elements(z: &ComplexElementMatrix) -> Self {
        let re = z.map_to_f64(|c| c.re);
        let im = z.map_to_f64(|c| c.im);
        Self { re, im }
    }
}

impl ComplexElementMatrix {
    fn map_to_f64(&self, f: impl Fn(Complex64) -> f64) -> RealMatrix {
        RealMatrix::from_vec_unchecked(self.rows, self.cols, self.data.iter().map(|&z| f(z)).collect())
    }
}

/// Plain-text export: a `rows cols` header line followed by one row per line,
/// entries printed with enough digits to round-trip.
pub fn write_text(m: &RealMatrix) -> String {
    let mut out = format!("{} {}\n", m.rows(), m.cols());
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|j| format!("{:?}", m.get(i, j))).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn read_text(text: &str) -> Result<RealMatrix> {
    let mut tokens = text.split_whitespace();
    let mut next_usize = |what: &str| -> Result<usize> {
        tokens
            .next()
            .ok_or_else(|| Error::Format(format!("missing {what}")))?
            .parse()
            .map_err(|e| Error::Format(format!("bad {what}: {e}")))
    };
    let rows = next_usize("row count")?;
    let cols = next_usize("column count")?;
    let data = tokens
        .map(|t| t.parse::<f64>().map_err(|e| Error::Format(format!("bad entry `{t}`: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    RealMatrix::from_vec(rows, cols, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructor_checks() {
        assert!(matches!(
            RealMatrix::from_vec(2, 2, vec![1.0; 3]),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            RealMatrix::from_vec(1, 1, vec![f64::NAN]),
            Err(Error::Domain(_))
        ));
        assert!(RealMatrix::from_vec(0, 1, vec![]).is_err());
        assert!(ComplexMatrix::new(RealMatrix::zeros(2, 2), RealMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn block_reads_zero_outside() {
        let m = RealMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let b = m.block(1, 1, 2, 2);
        assert_eq!(b.as_slice(), &[4.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn text_round_trip() {
        let m = RealMatrix::from_rows(&[vec![0.1, -2.5e300], vec![3.0, 1.0 / 3.0]]).unwrap();
        assert_eq!(read_text(&write_text(&m)).unwrap(), m);
    }

    #[test]
    fn complex_max_norm_looks_at_both_parts() {
        let z = ComplexMatrix::from_parts(1, 2, vec![1.0, -0.5], vec![0.0, -3.0]).unwrap();
        assert_eq!(z.max_norm(), 3.0);
    }
}
