//! First-order forward-error bounds: the growth-factor bound for any bilinear
//! algorithm, and entrywise bounds for the Gauss and 1/√3 complex schemes.

use serde::Serialize;

use crate::error::{dim_err, Error, Result};
use crate::matmul::multiply_conventional;
use crate::matrix::RealMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UnitRoundoff(f64);

impl Default for UnitRoundoff {
    fn default() -> Self {
        UnitRoundoff(f64::EPSILON / 2.0)
    }
}

impl UnitRoundoff {
    pub fn new(u: f64) -> Result<Self> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::ContractViolation(format!("unit roundoff {u} must lie in (0, 1)")));
        }
        Ok(UnitRoundoff(u))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

/// Absorbs the `O(u²)` terms dropped by every bound here.
pub const DEFAULT_SLACK: f64 = 1.01;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MainBoundInputs {
    pub m: usize,
    pub n: usize,
    pub r: usize,
    pub gamma: f64,
    pub norm_u: f64,
    pub norm_v: f64,
    pub u: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub first_order_bound: f64,
    pub slack_factor: f64,
    pub inputs: MainBoundInputs,
}

impl BoundReport {
    pub fn with_slack(&self) -> f64 {
        self.first_order_bound * self.slack_factor
    }

    pub fn admits(&self, error: f64) -> bool {
        error <= self.with_slack()
    }
}

/// `(m + n + r + 1) γ ‖u‖ ‖v‖ u`, bounding `‖β(u,v) − β̂(u,v)‖∞`.
pub fn thm_main_bound(m: usize, n: usize, r: usize, gamma: f64, norm_u: f64, norm_v: f64, u: UnitRoundoff) -> BoundReport {
    let k = (m + n + r + 1) as f64;
    BoundReport {
        first_order_bound: k * gamma * norm_u * norm_v * u.0,
        slack_factor: DEFAULT_SLACK,
        inputs: MainBoundInputs {
            m,
            n,
            r,
            gamma,
            norm_u,
            norm_v,
            u: u.0,
        },
    }
}

/// Entrywise bounds on the real and imaginary parts.
#[derive(Clone, Debug, PartialEq)]
pub struct EntrywiseBounds {
    pub re: RealMatrix,
    pub im: RealMatrix,
}

struct Parts {
    a: RealMatrix,
    b: RealMatrix,
    c: RealMatrix,
    d: RealMatrix,
    n: f64,
}

fn parts(a: &RealMatrix, b: &RealMatrix, c: &RealMatrix, d: &RealMatrix) -> Result<Parts> {
    if a.shape() != b.shape() || c.shape() != d.shape() {
        return dim_err(format!(
            "real and imaginary parts differ in shape: {:?}/{:?}, {:?}/{:?}",
            a.shape(),
            b.shape(),
            c.shape(),
            d.shape()
        ));
    }
    if a.cols() != c.rows() {
        return dim_err(format!("cannot multiply {:?} by {:?}", a.shape(), c.shape()));
    }
    Ok(Parts {
        a: a.abs(),
        b: b.abs(),
        c: c.abs(),
        d: d.abs(),
        n: a.cols() as f64,
    })
}

fn mul(x: &RealMatrix, y: &RealMatrix) -> RealMatrix {
    multiply_conventional(x, y).expect("shapes checked")
}

fn lin(x: &RealMatrix, y: &RealMatrix, s: f64) -> RealMatrix {
    x.zip_map(y, |p, q| p + s * q).expect("shapes checked")
}

/// Real part: `(n+7)(|A|+|B|/√3)(|C|+|D|/√3)u + (4n/3+4)|B||D|u`;
/// imaginary part: `√3(n+6)(|A|+|B|/√3)(|C|+|D|/√3)u`.
pub fn new_alg_entrywise_bounds(
    a: &RealMatrix,
    b: &RealMatrix,
    c: &RealMatrix,
    d: &RealMatrix,
    u: UnitRoundoff,
) -> Result<EntrywiseBounds> {
    let p = parts(a, b, c, d)?;
    let r3 = 3f64.sqrt();
    let scaled = mul(&lin(&p.a, &p.b, 1.0 / r3), &lin(&p.c, &p.d, 1.0 / r3));
    let bd = mul(&p.b, &p.d);
    let (k1, k2, k3) = ((p.n + 7.0) * u.0, (4.0 * p.n / 3.0 + 4.0) * u.0, r3 * (p.n + 6.0) * u.0);
    Ok(EntrywiseBounds {
        re: scaled.zip_map(&bd, |s, t| k1 * s + k2 * t)?,
        im: scaled.scale(k3),
    })
}

/// Real part: `(n+1)(|A||C|+|B||D|)u`; imaginary part:
/// `(n+4)[(|A|+|B|)(|C|+|D|) + |A||C| + |B||D|]u`.
pub fn gauss_entrywise_bounds(
    a: &RealMatrix,
    b: &RealMatrix,
    c: &RealMatrix,
    d: &RealMatrix,
    u: UnitRoundoff,
) -> Result<EntrywiseBounds> {
    let p = parts(a, b, c, d)?;
    let acbd = mul(&p.a, &p.c).add(&mul(&p.b, &p.d))?;
    let sum = mul(&lin(&p.a, &p.b, 1.0), &lin(&p.c, &p.d, 1.0));
    let (k1, k2) = ((p.n + 1.0) * u.0, (p.n + 4.0) * u.0);
    Ok(EntrywiseBounds {
        re: acbd.scale(k1),
        im: sum.zip_map(&acbd, |s, t| k2 * (s + t))?,
    })
}

/// Leading-order error sizes when every entry of `A, B, C, D` is about `θ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AsymptoticTable {
    pub new_real: f64,
    pub new_imag: f64,
    pub gauss_real: f64,
    pub gauss_imag: f64,
}

impl AsymptoticTable {
    /// Coefficients of `n²θ²u`, from the dominant terms of the bounds.
    pub fn coefficients() -> AsymptoticTable {
        let r3 = 3f64.sqrt();
        AsymptoticTable {
            new_real: 1.0 + 5.0 / 3.0 + 2.0 / r3,
            new_imag: r3 + 2.0 + 1.0 / r3,
            gauss_real: 2.0,
            gauss_imag: 6.0,
        }
    }
}

pub fn asymptotic_compare(n: usize, theta: f64, u: UnitRoundoff) -> Result<AsymptoticTable> {
    if n == 0 || !(theta >= 0.0 && theta.is_finite()) {
        return Err(Error::ContractViolation(format!("need n ≥ 1 and finite θ ≥ 0, got n = {n}, θ = {theta}")));
    }
    let k = (n as f64).powi(2) * theta * theta * u.0;
    let c = AsymptoticTable::coefficients();
    Ok(AsymptoticTable {
        new_real: c.new_real * k,
        new_imag: c.new_imag * k,
        gauss_real: c.gauss_real * k,
        gauss_imag: c.gauss_imag * k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const U: f64 = 1.1102230246251565e-16;

    fn ones() -> RealMatrix {
        RealMatrix::from_rows(&[vec![1.0]]).unwrap()
    }

    #[test]
    fn default_roundoff() {
        assert_eq!(UnitRoundoff::default().value(), 2f64.powi(-53));
        assert!(UnitRoundoff::new(0.0).is_err() && UnitRoundoff::new(1.0).is_err());
    }

    #[test]
    fn main_bound_examples() {
        let g = 2.0 * (1.0 + 2f64.sqrt());
        let r = thm_main_bound(2, 2, 3, g, 1.0, 1.0, UnitRoundoff::default());
        assert!((r.first_order_bound - 8.0 * g * U).abs() < 1e-30);
        assert!((r.first_order_bound - 4.29e-15).abs() < 1e-17);
        let s = thm_main_bound(4, 4, 7, 12.0 + 2.0 * 2f64.sqrt(), 1.0, 1.0, UnitRoundoff::default());
        assert!((s.first_order_bound - 2.634e-14).abs() < 1e-16);
        assert_eq!(thm_main_bound(2, 2, 3, 0.0, 1.0, 1.0, UnitRoundoff::default()).first_order_bound, 0.0);
        assert_eq!(r.slack_factor, 1.01);
    }

    #[test]
    fn scalar_new_bounds() {
        let b = new_alg_entrywise_bounds(&ones(), &ones(), &ones(), &ones(), UnitRoundoff::default()).unwrap();
        let s = (1.0 + 1.0 / 3f64.sqrt()).powi(2);
        let want_re = (8.0 * s + 16.0 / 3.0) * U;
        let want_im = 3f64.sqrt() * 7.0 * s * U;
        assert!((b.re.get(0, 0) - want_re).abs() <= 4.0 * f64::EPSILON * want_re);
        assert!((b.im.get(0, 0) - want_im).abs() <= 4.0 * f64::EPSILON * want_im);
    }

    #[test]
    fn scalar_gauss_bounds() {
        let b = gauss_entrywise_bounds(&ones(), &ones(), &ones(), &ones(), UnitRoundoff::default()).unwrap();
        assert_eq!(b.re.get(0, 0), 4.0 * U);
        assert_eq!(b.im.get(0, 0), 30.0 * U);
    }

    #[test]
    fn zeros_give_zero() {
        let z = RealMatrix::zeros(3, 3);
        for f in [new_alg_entrywise_bounds, gauss_entrywise_bounds] {
            let b = f(&z, &z, &z, &z, UnitRoundoff::default()).unwrap();
            assert_eq!(b.re.max_norm() + b.im.max_norm(), 0.0);
        }
    }

    #[test]
    fn shape_checks() {
        let (a, c) = (RealMatrix::zeros(2, 3), RealMatrix::zeros(2, 3));
        assert!(gauss_entrywise_bounds(&a, &a, &c, &c, UnitRoundoff::default()).is_err());
        assert!(new_alg_entrywise_bounds(&a, &RealMatrix::zeros(3, 3), &c, &c, UnitRoundoff::default()).is_err());
    }

    #[test]
    fn asymptotic_table() {
        let c = AsymptoticTable::coefficients();
        assert!((c.new_real - 3.821).abs() < 1e-3);
        assert!((c.new_imag - 4.309).abs() < 1e-3);
        let t = asymptotic_compare(10, 1.0, UnitRoundoff::default()).unwrap();
        assert_eq!(t.gauss_imag / t.gauss_real, 3.0);
        let z = asymptotic_compare(10, 0.0, UnitRoundoff::default()).unwrap();
        assert_eq!(z.new_real + z.new_imag + z.gauss_real + z.gauss_imag, 0.0);
        assert!(asymptotic_compare(0, 1.0, UnitRoundoff::default()).is_err());
    }

    #[test]
    fn finite_bounds_follow_asymptotic_ordering() {
        let one = RealMatrix::from_fn(64, 64, |_, _| 1.0);
        let u = UnitRoundoff::default();
        let nb = new_alg_entrywise_bounds(&one, &one, &one, &one, u).unwrap();
        let gb = gauss_entrywise_bounds(&one, &one, &one, &one, u).unwrap();
        assert!(gb.re.get(0, 0) < nb.re.get(0, 0));
        assert!(nb.im.get(0, 0) < gb.im.get(0, 0));
    }
}
