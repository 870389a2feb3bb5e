//! Complex matrix multiplication from real products: regular (four products),
//! Gauss (three), and the 1/√3-scaled three-product scheme.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_traits::Zero as _;

use crate::catalog::{get_builtin, Builtin};
use crate::coeff::ExactCoefficient;
use crate::error::{dim_err, Error, Result};
use crate::exact::{double_to_rational, ExactMatrixC, ExactMatrixR};
use crate::matmul::{multiply_conventional, multiply_recursive, RecursionPolicy};
use crate::matrix::{ComplexMatrix, RealMatrix};
use crate::tensor::BilinearDecomposition;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmmAlgorithm {
    Regular,
    Gauss,
    New,
}

impl CmmAlgorithm {
    pub const ALL: [CmmAlgorithm; 3] = [CmmAlgorithm::Regular, CmmAlgorithm::Gauss, CmmAlgorithm::New];

    pub fn name(&self) -> &'static str {
        match self {
            CmmAlgorithm::Regular => "regular",
            CmmAlgorithm::Gauss => "gauss",
            CmmAlgorithm::New => "new",
        }
    }
}

impl fmt::Display for CmmAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CmmAlgorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "regular" => Ok(CmmAlgorithm::Regular),
            "gauss" => Ok(CmmAlgorithm::Gauss),
            "new" => Ok(CmmAlgorithm::New),
            _ => Err(Error::InvalidSpec(format!("unknown complex algorithm '{s}' (regular, gauss, new)"))),
        }
    }
}

/// Real matrix multiplication used for each of the 3–4 products.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Backend {
    #[default]
    Conventional,
    Strassen(RecursionPolicy),
    Winograd(RecursionPolicy),
}

fn cached(cell: &'static OnceLock<BilinearDecomposition>, b: Builtin) -> &'static BilinearDecomposition {
    cell.get_or_init(|| get_builtin(b).expect("builtin").decomposition)
}

impl Backend {
    pub fn multiply(&self, a: &RealMatrix, b: &RealMatrix) -> Result<RealMatrix> {
        static STRASSEN: OnceLock<BilinearDecomposition> = OnceLock::new();
        static WINOGRAD: OnceLock<BilinearDecomposition> = OnceLock::new();
        match *self {
            Backend::Conventional => multiply_conventional(a, b),
            Backend::Strassen(p) => multiply_recursive(a, b, cached(&STRASSEN, Builtin::Strassen2x2), p),
            Backend::Winograd(p) => multiply_recursive(a, b, cached(&WINOGRAD, Builtin::Winograd2x2), p),
        }
    }
}

/// Real products needed by one complex product.
pub fn product_count(algo: CmmAlgorithm) -> usize {
    match algo {
        CmmAlgorithm::Regular => 4,
        CmmAlgorithm::Gauss | CmmAlgorithm::New => 3,
    }
}

#[derive(Clone, Copy)]
enum Const {
    InvSqrt3,
    EightThirds,
    Half,
    HalfSqrt3,
}

impl Const {
    fn exact(self) -> ExactCoefficient {
        match self {
            Const::InvSqrt3 => ExactCoefficient::from_ratios(0, 1, 1, 3),
            Const::EightThirds => ExactCoefficient::from_ratios(8, 3, 0, 1),
            Const::Half => ExactCoefficient::from_ratios(1, 2, 0, 1),
            Const::HalfSqrt3 => ExactCoefficient::from_ratios(0, 1, 1, 2),
        }
    }

    fn nearest(self) -> f64 {
        static TABLE: OnceLock<[f64; 4]> = OnceLock::new();
        let t = TABLE.get_or_init(|| {
            [Const::InvSqrt3, Const::EightThirds, Const::Half, Const::HalfSqrt3].map(|c| c.exact().to_f64())
        });
        t[self as usize]
    }
}

/// Arithmetic the schemes are written against: floating point with a chosen
/// backend, or exact arithmetic in ℚ(√3).
trait Ring {
    type M;
    fn mul(&self, a: &Self::M, b: &Self::M) -> Result<Self::M>;
    fn add(&self, a: &Self::M, b: &Self::M) -> Self::M;
    fn sub(&self, a: &Self::M, b: &Self::M) -> Self::M;
    fn scale(&self, c: Const, a: &Self::M) -> Self::M;
}

/// Returns `(re, im)` of `(a + ib)(c + id)`, with every operation in the
/// order of the displayed formulas.
fn scheme<R: Ring>(r: &R, algo: CmmAlgorithm, a: &R::M, b: &R::M, c: &R::M, d: &R::M) -> Result<(R::M, R::M)> {
    match algo {
        CmmAlgorithm::Regular => {
            // (AC − BD) + i[AD + BC]
            let (ac, bd, ad, bc) = (r.mul(a, c)?, r.mul(b, d)?, r.mul(a, d)?, r.mul(b, c)?);
            Ok((r.sub(&ac, &bd), r.add(&ad, &bc)))
        }
        CmmAlgorithm::Gauss => {
            // (AC − BD) + i[(A+B)(C+D) − AC − BD]
            let (ac, bd) = (r.mul(a, c)?, r.mul(b, d)?);
            let s = r.mul(&r.add(a, b), &r.add(c, d))?;
            Ok((r.sub(&ac, &bd), r.sub(&r.sub(&s, &ac), &bd)))
        }
        CmmAlgorithm::New => {
            let (bs, ds) = (r.scale(Const::InvSqrt3, b), r.scale(Const::InvSqrt3, d));
            let p1 = r.mul(&r.add(a, &bs), &r.add(c, &ds))?;
            let p2 = r.mul(&r.sub(a, &bs), &r.sub(c, &ds))?;
            let bd = r.mul(b, d)?;
            // ½[(P₁ + P₂) − (8/3)BD] + i(√3/2)[P₁ − P₂]
            let re = r.scale(Const::Half, &r.sub(&r.add(&p1, &p2), &r.scale(Const::EightThirds, &bd)));
            let im = r.scale(Const::HalfSqrt3, &r.sub(&p1, &p2));
            Ok((re, im))
        }
    }
}

struct Float<'a>(&'a Backend);

impl Ring for Float<'_> {
    type M = RealMatrix;
    fn mul(&self, a: &RealMatrix, b: &RealMatrix) -> Result<RealMatrix> {
        self.0.multiply(a, b)
    }
    fn add(&self, a: &RealMatrix, b: &RealMatrix) -> RealMatrix {
        a.add(b).expect("operand shapes agree")
    }
    fn sub(&self, a: &RealMatrix, b: &RealMatrix) -> RealMatrix {
        a.sub(b).expect("operand shapes agree")
    }
    fn scale(&self, c: Const, a: &RealMatrix) -> RealMatrix {
        a.scale(c.nearest())
    }
}

fn check_shapes(x: &ComplexMatrix, y: &ComplexMatrix) -> Result<()> {
    if x.cols() != y.rows() {
        return dim_err(format!("cannot multiply {:?} by {:?}", x.shape(), y.shape()));
    }
    Ok(())
}

/// Multiplies `X = A + iB` by `Y = C + iD` with `algo`, using `backend` for
/// each real product and the nearest doubles to 1/√3, 8/3, 1/2, √3/2.
pub fn cmm(x: &ComplexMatrix, y: &ComplexMatrix, algo: CmmAlgorithm, backend: &Backend) -> Result<ComplexMatrix> {
    check_shapes(x, y)?;
    let (re, im) = scheme(&Float(backend), algo, &x.re, &x.im, &y.re, &y.im)?;
    ComplexMatrix::new(re, im)
}

/// Dense matrix over ℚ(√3), for running a scheme with no rounding at all.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Q3Matrix {
    rows: usize,
    cols: usize,
    data: Vec<ExactCoefficient>,
}

impl Q3Matrix {
    fn from_f64(m: &RealMatrix) -> Result<Self> {
        let data = m
            .as_slice()
            .iter()
            .map(|&x| double_to_rational(x).map(ExactCoefficient::rational))
            .collect::<Result<_>>()?;
        Ok(Self {
            rows: m.rows(),
            cols: m.cols(),
            data,
        })
    }

    fn zip(&self, o: &Self, f: impl Fn(&ExactCoefficient, &ExactCoefficient) -> ExactCoefficient) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| f(a, b)).collect(),
        }
    }

    fn into_rational(self) -> Result<ExactMatrixR> {
        let data = self
            .data
            .into_iter()
            .map(|x| {
                if x.b().is_zero() {
                    Ok(x.a().clone())
                } else {
                    Err(Error::Domain(format!("entry {x} is irrational")))
                }
            })
            .collect::<Result<_>>()?;
        ExactMatrixR::from_vec(self.rows, self.cols, data)
    }
}

struct Exact;

impl Ring for Exact {
    type M = Q3Matrix;
    fn mul(&self, a: &Q3Matrix, b: &Q3Matrix) -> Result<Q3Matrix> {
        let (m, n, p) = (a.rows, a.cols, b.cols);
        let mut data = Vec::with_capacity(m * p);
        for i in 0..m {
            for k in 0..p {
                let s = (0..n).fold(ExactCoefficient::zero(), |acc, j| &acc + &(&a.data[i * n + j] * &b.data[j * p + k]));
                data.push(s);
            }
        }
        Ok(Q3Matrix { rows: m, cols: p, data })
    }
    fn add(&self, a: &Q3Matrix, b: &Q3Matrix) -> Q3Matrix {
        a.zip(b, |x, y| x + y)
    }
    fn sub(&self, a: &Q3Matrix, b: &Q3Matrix) -> Q3Matrix {
        a.zip(b, |x, y| x - y)
    }
    fn scale(&self, c: Const, a: &Q3Matrix) -> Q3Matrix {
        let k = c.exact();
        Q3Matrix {
            rows: a.rows,
            cols: a.cols,
            data: a.data.iter().map(|x| &k * x).collect(),
        }
    }
}

/// Runs `algo` in exact ℚ(√3) arithmetic on the (exactly converted) inputs.
/// Every scheme must reproduce the true Gaussian-rational product; an
/// irrational entry in the result is reported as a domain error.
pub fn cmm_exact(x: &ComplexMatrix, y: &ComplexMatrix, algo: CmmAlgorithm) -> Result<ExactMatrixC> {
    check_shapes(x, y)?;
    let [a, b, c, d] = [&x.re, &x.im, &y.re, &y.im].map(Q3Matrix::from_f64);
    let (re, im) = scheme(&Exact, algo, &a?, &b?, &c?, &d?)?;
    ExactMatrixC::new(re.into_rational()?, im.into_rational()?)
}
