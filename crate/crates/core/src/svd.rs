//! One-sided Jacobi singular values for small dense matrices. Used only to
//! check generated inputs; not tuned for speed.

use num_complex::Complex64;

use crate::matrix::{ComplexElementMatrix, ComplexMatrix, RealMatrix};

/// Singular values in decreasing order.
pub fn singular_values(a: &ComplexElementMatrix) -> Vec<f64> {
    let (m, n) = a.shape();
    // Columns stored contiguously.
    let mut cols: Vec<Vec<Complex64>> = (0..n).map(|j| (0..m).map(|i| a.get(i, j)).collect()).collect();
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: Complex64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g == 0.0 || g <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // Rephase column q so the inner product is real, then rotate.
                let phase = (gamma / g).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let x = cols[p][i];
                    let y = cols[q][i] * phase;
                    cols[p][i] = x * c - y * s;
                    cols[q][i] = x * s + y * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = cols.iter().map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

pub fn singular_values_real(a: &RealMatrix) -> Vec<f64> {
    singular_values(&ComplexMatrix::from_real(a.clone()).to_elements())
}

/// `σ_max / σ_min`.
pub fn condition_number(a: &ComplexElementMatrix) -> f64 {
    let s = singular_values(a);
    s[0] / s[s.len() - 1]
}
