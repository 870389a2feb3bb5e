//! Real and complex-element matrix multiplication: the inner-product
//! algorithm and recursive application of a 2x2 bilinear decomposition.

use crate::error::{dim_err, Error, Result};
use crate::matrix::{ComplexElementMatrix, Matrix, Scalar};
use crate::tensor::BilinearDecomposition;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Padding {
    /// Odd dimensions get one zero row/column at every level that needs it.
    #[default]
    PadEvenPerLevel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RecursionPolicy {
    cutoff: usize,
    pub padding: Padding,
}

impl Default for RecursionPolicy {
    fn default() -> Self {
        Self {
            cutoff: 64,
            padding: Padding::PadEvenPerLevel,
        }
    }
}

impl RecursionPolicy {
    pub fn new(cutoff: usize) -> Result<Self> {
        if cutoff == 0 {
            return Err(Error::ContractViolation("recursion cutoff must be at least 1".into()));
        }
        Ok(Self {
            cutoff,
            padding: Padding::PadEvenPerLevel,
        })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }
}

fn check_inner<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<()> {
    if a.cols() != b.rows() {
        return dim_err(format!("cannot multiply {:?} by {:?}", a.shape(), b.shape()));
    }
    Ok(())
}

const ROW_BLOCK: usize = 4;
const INNER_BLOCK: usize = 128;
const COL_BLOCK: usize = 512;

/// `c += a b` over one tile. Entry `c[i][k]` receives `a[i][j] b[j][k]` for
/// increasing `j` only, so tiling never changes the summation order.
#[allow(clippy::too_many_arguments)]
fn tile<T: Scalar>(a: &[T], b: &[T], c: &mut [T], n: usize, p: usize, rows: std::ops::Range<usize>, js: std::ops::Range<usize>, ks: std::ops::Range<usize>) {
    let mut i = rows.start;
    while i + ROW_BLOCK <= rows.end {
        let (c0, rest) = c[i * p..(i + ROW_BLOCK) * p].split_at_mut(p);
        let (c1, rest) = rest.split_at_mut(p);
        let (c2, c3) = rest.split_at_mut(p);
        let (c0, c1, c2, c3) = (&mut c0[ks.clone()], &mut c1[ks.clone()], &mut c2[ks.clone()], &mut c3[ks.clone()]);
        for j in js.clone() {
            let (a0, a1, a2, a3) = (a[i * n + j], a[(i + 1) * n + j], a[(i + 2) * n + j], a[(i + 3) * n + j]);
            let brow = &b[j * p + ks.start..j * p + ks.end];
            for (k, &bk) in brow.iter().enumerate() {
                c0[k] = c0[k] + a0 * bk;
                c1[k] = c1[k] + a1 * bk;
                c2[k] = c2[k] + a2 * bk;
                c3[k] = c3[k] + a3 * bk;
            }
        }
        i += ROW_BLOCK;
    }
    for i in i..rows.end {
        let crow = &mut c[i * p + ks.start..i * p + ks.end];
        for j in js.clone() {
            let aij = a[i * n + j];
            let brow = &b[j * p + ks.start..j * p + ks.end];
            for (ck, &bk) in crow.iter_mut().zip(brow) {
                *ck = *ck + aij * bk;
            }
        }
    }
}

/// Inner-product algorithm; each entry is a dot product summed left to right.
pub fn multiply_conventional<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    check_inner(a, b)?;
    let (m, n, p) = (a.rows(), a.cols(), b.cols());
    let (av, bv) = (a.as_slice(), b.as_slice());
    let mut c = vec![T::zero(); m * p];
    for k0 in (0..p).step_by(COL_BLOCK) {
        let ks = k0..(k0 + COL_BLOCK).min(p);
        for j0 in (0..n).step_by(INNER_BLOCK) {
            let js = j0..(j0 + INNER_BLOCK).min(n);
            tile(av, bv, &mut c, n, p, 0..m, js, ks.clone());
        }
    }
    Ok(Matrix::from_vec_unchecked(m, p, c))
}

/// Nonzero coefficients of one functional, as `(block index, value)`.
type Combo = Vec<(usize, f64)>;

struct BlockScheme {
    u: Vec<Combo>,
    v: Vec<Combo>,
    w: Vec<Combo>,
}

impl BlockScheme {
    fn new(d: &BilinearDecomposition) -> Result<Self> {
        if d.dims() != (4, 4, 4) {
            return Err(Error::ContractViolation(format!(
                "{} has dims {:?}; recursive multiplication needs a 2x2 block decomposition (4, 4, 4)",
                d.name(),
                d.dims()
            )));
        }
        let nz = |xs: &[crate::coeff::ExactCoefficient]| -> Combo {
            xs.iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(j, c)| (j, c.to_f64()))
                .collect()
        };
        let terms = d.terms();
        // Output block l is Σᵢ w_il Mᵢ; store it per block, ordered by i.
        let w = (0..4)
            .map(|l| {
                terms
                    .iter()
                    .enumerate()
                    .filter(|(_, t)| !t.w[l].is_zero())
                    .map(|(i, t)| (i, t.w[l].to_f64()))
                    .collect()
            })
            .collect();
        Ok(Self {
            u: terms.iter().map(|t| nz(&t.u)).collect(),
            v: terms.iter().map(|t| nz(&t.v)).collect(),
            w,
        })
    }
}

/// `Σ c X` over the listed blocks, left to right. The zero combination yields zeros.
fn combine<T: Scalar>(combo: &[(usize, f64)], blocks: &[Matrix<T>], shape: (usize, usize)) -> Matrix<T> {
    let mut iter = combo.iter();
    let Some(&(j, c)) = iter.next() else {
        return Matrix::zeros(shape.0, shape.1);
    };
    let mut acc = if c == 1.0 {
        blocks[j].clone()
    } else {
        blocks[j].scale(T::from_f64(c))
    };
    for &(j, c) in iter {
        let s = T::from_f64(c);
        let src = blocks[j].as_slice();
        let dst = acc.data_mut();
        if c == 1.0 {
            dst.iter_mut().zip(src).for_each(|(x, &y)| *x = *x + y);
        } else if c == -1.0 {
            dst.iter_mut().zip(src).for_each(|(x, &y)| *x = *x - y);
        } else {
            dst.iter_mut().zip(src).for_each(|(x, &y)| *x = *x + s * y);
        }
    }
    acc
}

fn quadrants<T: Scalar>(x: &Matrix<T>) -> [Matrix<T>; 4] {
    let (h, w) = (x.rows().div_ceil(2), x.cols().div_ceil(2));
    [x.block(0, 0, h, w), x.block(0, w, h, w), x.block(h, 0, h, w), x.block(h, w, h, w)]
}

fn recurse<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>, s: &BlockScheme, cutoff: usize) -> Matrix<T> {
    let (m, n, p) = (a.rows(), a.cols(), b.cols());
    if m.max(n).max(p) <= cutoff {
        return multiply_conventional(a, b).expect("shapes checked by caller");
    }
    // Blocks of the padded operands; `block` reads zeros past the edge.
    let (ab, bb) = (quadrants(a), quadrants(b));
    let (ha, wa) = ab[0].shape();
    let (hb, wb) = bb[0].shape();
    let products: Vec<Matrix<T>> = s
        .u
        .iter()
        .zip(&s.v)
        .map(|(u, v)| recurse(&combine(u, &ab, (ha, wa)), &combine(v, &bb, (hb, wb)), s, cutoff))
        .collect();
    let mut c = Matrix::zeros(m, p);
    for (l, w) in s.w.iter().enumerate() {
        let blk = combine(w, &products, (ha, wb));
        c.write_block((l / 2) * ha, (l % 2) * wb, &blk);
    }
    c
}

/// Applies `d` to `2x2` block partitions recursively until every dimension is
/// at most the policy's cutoff, then falls back to [`multiply_conventional`].
pub fn multiply_recursive<T: Scalar>(
    a: &Matrix<T>,
    b: &Matrix<T>,
    d: &BilinearDecomposition,
    policy: RecursionPolicy,
) -> Result<Matrix<T>> {
    check_inner(a, b)?;
    let scheme = BlockScheme::new(d)?;
    Ok(recurse(a, b, &scheme, policy.cutoff))
}

/// Complex-element product; with `d = None` this is the inner-product
/// algorithm, otherwise the recursive block scheme. Scalar products use the
/// four-multiplication form.
pub fn multiply_complex_elements(
    a: &ComplexElementMatrix,
    b: &ComplexElementMatrix,
    d: Option<&BilinearDecomposition>,
    policy: RecursionPolicy,
) -> Result<ComplexElementMatrix> {
    match d {
        None => multiply_conventional(a, b),
        Some(d) => multiply_recursive(a, b, d, policy),
    }
}
