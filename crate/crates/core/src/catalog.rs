//! Built-in decompositions: Strassen, Winograd, conventional matrix
//! multiplication, and the three complex-multiplication algorithms.

use std::fmt;
use std::str::FromStr;

use crate::coeff::ExactCoefficient;
use crate::error::{Error, Result};
use crate::tensor::{BilinearDecomposition, DenseTensor3, Term};

/// `a + b√2 + c√3` with integer coefficients; covers every closed form here.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClosedForm {
    pub int: i64,
    pub sqrt2: i64,
    pub sqrt3: i64,
}

impl ClosedForm {
    pub const fn new(int: i64, sqrt2: i64, sqrt3: i64) -> Self {
        Self { int, sqrt2, sqrt3 }
    }

    pub fn value(&self) -> f64 {
        self.int as f64 + self.sqrt2 as f64 * 2f64.sqrt() + self.sqrt3 as f64 * 3f64.sqrt()
    }
}

impl fmt::Display for ClosedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.int != 0 {
            parts.push(self.int.to_string());
        }
        for (c, root) in [(self.sqrt2, "√2"), (self.sqrt3, "√3")] {
            match c {
                0 => {}
                1 => parts.push(root.to_string()),
                _ => parts.push(format!("{c}{root}")),
            }
        }
        if parts.is_empty() {
            return f.write_str("0");
        }
        f.write_str(&parts.join(" + "))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Builtin {
    Strassen2x2,
    Winograd2x2,
    ConventionalMm(usize, usize, usize),
    ComplexRegular,
    ComplexGauss,
    ComplexNew,
}

impl Builtin {
    /// The six shipped entries, in listing order.
    pub const ALL: [Builtin; 6] = [
        Builtin::Strassen2x2,
        Builtin::Winograd2x2,
        Builtin::ConventionalMm(2, 2, 2),
        Builtin::ComplexRegular,
        Builtin::ComplexGauss,
        Builtin::ComplexNew,
    ];

    pub fn name(&self) -> String {
        match *self {
            Builtin::Strassen2x2 => "strassen_2x2".into(),
            Builtin::Winograd2x2 => "winograd_2x2".into(),
            Builtin::ConventionalMm(2, 2, 2) => "conventional_2x2".into(),
            Builtin::ConventionalMm(m, n, p) => format!("conventional_mm({m},{n},{p})"),
            Builtin::ComplexRegular => "complex_regular".into(),
            Builtin::ComplexGauss => "complex_gauss".into(),
            Builtin::ComplexNew => "complex_new".into(),
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Builtin {
    type Err = Error;

    /// Accepts the listed names plus `conventional_mm(m,n,p)` / `conventional_mm:m,n,p`.
    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        let fixed = match key.as_str() {
            "strassen" | "strassen_2x2" => Some(Builtin::Strassen2x2),
            "winograd" | "winograd_2x2" => Some(Builtin::Winograd2x2),
            "conventional" | "conventional_2x2" => Some(Builtin::ConventionalMm(2, 2, 2)),
            "regular" | "complex_regular" => Some(Builtin::ComplexRegular),
            "gauss" | "complex_gauss" => Some(Builtin::ComplexGauss),
            "new" | "complex_new" => Some(Builtin::ComplexNew),
            _ => None,
        };
        if let Some(b) = fixed {
            return Ok(b);
        }
        let args = key
            .strip_prefix("conventional_mm")
            .map(|rest| rest.trim_matches(|c| matches!(c, '(' | ')' | ':')))
            .ok_or_else(|| Error::UnknownBuiltin(s.to_string()))?;
        let dims: Vec<usize> = args
            .split(',')
            .map(|x| x.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::UnknownBuiltin(s.to_string()))?;
        match dims[..] {
            [m, n, p] if m >= 1 && n >= 1 && p >= 1 => Ok(Builtin::ConventionalMm(m, n, p)),
            [_, _, _] => Err(Error::ContractViolation(format!("{s}: dimensions must be at least 1"))),
            _ => Err(Error::UnknownBuiltin(s.to_string())),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub decomposition: BilinearDecomposition,
    pub closed_form_growth: ClosedForm,
    pub known_nuclear_norm: Option<f64>,
    pub source: &'static str,
    target: Target,
}

#[derive(Clone, Copy, Debug)]
enum Target {
    Matmul(usize, usize, usize),
    Complex,
}

impl CatalogEntry {
    /// The tensor this entry is supposed to decompose.
    pub fn target_tensor(&self) -> DenseTensor3 {
        match self.target {
            Target::Matmul(m, n, p) => DenseTensor3::matmul(m, n, p),
            Target::Complex => DenseTensor3::complex_mult(),
        }
    }
}

// 2x2 matrices flattened row-major: [x11, x12, x21, x22].
type Mat2 = [i64; 4];

fn mat2_terms(uvw: &[(Mat2, Mat2, Mat2)]) -> Vec<Term> {
    uvw.iter().map(|(u, v, w)| Term::from_ints(u, v, w)).collect()
}

fn strassen() -> Vec<Term> {
    mat2_terms(&[
        ([1, 0, 0, 1], [1, 0, 0, 1], [1, 0, 0, 1]),
        ([0, 0, 1, 1], [1, 0, 0, 0], [0, 0, 1, -1]),
        ([1, 0, 0, 0], [0, 1, 0, -1], [0, 1, 0, 1]),
        ([0, 0, 0, 1], [-1, 0, 1, 0], [1, 0, 1, 0]),
        ([1, 1, 0, 0], [0, 0, 0, 1], [-1, 1, 0, 0]),
        ([-1, 0, 1, 0], [1, 1, 0, 0], [0, 0, 0, 1]),
        ([0, 1, 0, -1], [0, 0, 1, 1], [1, 0, 0, 0]),
    ])
}

fn winograd() -> Vec<Term> {
    mat2_terms(&[
        ([-1, 0, 1, 1], [1, -1, 0, 1], [0, 1, 1, 1]),
        ([1, 0, 0, 0], [1, 0, 0, 0], [1, 1, 1, 1]),
        ([0, 1, 0, 0], [0, 0, 1, 0], [1, 0, 0, 0]),
        ([1, 0, -1, 0], [0, -1, 0, 1], [0, 0, 1, 1]),
        ([0, 0, 1, 1], [-1, 1, 0, 0], [0, 1, 0, 1]),
        ([1, 1, -1, -1], [0, 0, 0, 1], [0, 1, 0, 0]),
        ([0, 0, 0, 1], [1, -1, -1, 1], [0, 0, -1, 0]),
    ])
}

fn conventional(m: usize, n: usize, p: usize) -> Vec<Term> {
    let basis = |len: usize, at: usize| {
        (0..len)
            .map(|i| if i == at { ExactCoefficient::one() } else { ExactCoefficient::zero() })
            .collect::<Vec<_>>()
    };
    let mut terms = Vec::with_capacity(m * n * p);
    for i in 0..m {
        for j in 0..n {
            for k in 0..p {
                terms.push(Term::new(basis(m * n, i * n + j), basis(n * p, j * p + k), basis(m * p, i * p + k)));
            }
        }
    }
    terms
}

fn complex_regular() -> Vec<Term> {
    vec![
        Term::from_ints(&[1, 0], &[1, 0], &[1, 0]),
        Term::from_ints(&[0, 1], &[0, 1], &[-1, 0]),
        Term::from_ints(&[1, 0], &[0, 1], &[0, 1]),
        Term::from_ints(&[0, 1], &[1, 0], &[0, 1]),
    ]
}

fn complex_gauss() -> Vec<Term> {
    vec![
        Term::from_ints(&[1, 1], &[1, 1], &[0, 1]),
        Term::from_ints(&[1, 0], &[1, 0], &[1, -1]),
        Term::from_ints(&[0, 1], &[0, 1], &[-1, -1]),
    ]
}

/// The overall factor 4/3 is folded into the output vectors, which keeps
/// every functional a unit vector.
fn complex_new() -> Vec<Term> {
    let q = ExactCoefficient::from_ratios;
    let half_root3 = q(0, 1, 1, 2);
    let half = q(1, 2, 0, 1);
    vec![
        Term::new(
            vec![half_root3.clone(), half.clone()],
            vec![half_root3.clone(), half.clone()],
            vec![q(2, 3, 0, 1), q(0, 1, 2, 3)],
        ),
        Term::new(
            vec![half_root3.clone(), -&half],
            vec![half_root3, -&half],
            vec![q(2, 3, 0, 1), q(0, 1, -2, 3)],
        ),
        Term::new(
            vec![ExactCoefficient::zero(), ExactCoefficient::one()],
            vec![ExactCoefficient::zero(), ExactCoefficient::one()],
            vec![q(-4, 3, 0, 1), ExactCoefficient::zero()],
        ),
    ]
}

const COMPLEX_NUCLEAR_NORM: f64 = 4.0;

pub fn get_builtin(which: Builtin) -> Result<CatalogEntry> {
    let (terms, dims, growth, nuclear, source, target) = match which {
        Builtin::Strassen2x2 => (
            strassen(),
            (4, 4, 4),
            ClosedForm::new(12, 2, 0),
            None,
            "Strassen (1969), 2x2 blocks",
            Target::Matmul(2, 2, 2),
        ),
        Builtin::Winograd2x2 => (
            winograd(),
            (4, 4, 4),
            ClosedForm::new(7, 4, 3),
            None,
            "Winograd's variant of Strassen's algorithm, 2x2 blocks",
            Target::Matmul(2, 2, 2),
        ),
        Builtin::ConventionalMm(m, n, p) => {
            if m == 0 || n == 0 || p == 0 {
                return Err(Error::ContractViolation(format!("conventional_mm({m},{n},{p}): dimensions must be at least 1")));
            }
            let mnp = i64::try_from(m * n * p).map_err(|_| Error::ContractViolation("dimensions too large".into()))?;
            (
                conventional(m, n, p),
                (m * n, n * p, m * p),
                ClosedForm::new(mnp, 0, 0),
                None,
                "inner-product matrix multiplication",
                Target::Matmul(m, n, p),
            )
        }
        Builtin::ComplexRegular => (
            complex_regular(),
            (2, 2, 2),
            ClosedForm::new(4, 0, 0),
            Some(COMPLEX_NUCLEAR_NORM),
            "schoolbook complex multiplication",
            Target::Complex,
        ),
        Builtin::ComplexGauss => (
            complex_gauss(),
            (2, 2, 2),
            ClosedForm::new(2, 2, 0),
            Some(COMPLEX_NUCLEAR_NORM),
            "Gauss's three-multiplication complex product",
            Target::Complex,
        ),
        Builtin::ComplexNew => (
            complex_new(),
            (2, 2, 2),
            ClosedForm::new(4, 0, 0),
            Some(COMPLEX_NUCLEAR_NORM),
            "three-multiplication complex product through 1/√3-scaled sums",
            Target::Complex,
        ),
    };
    let closed = growth.to_string();
    let decomposition = BilinearDecomposition::new(which.name(), dims, terms)?.with_metadata(nuclear, Some(&closed));
    Ok(CatalogEntry {
        decomposition,
        closed_form_growth: growth,
        known_nuclear_norm: nuclear,
        source,
        target,
    })
}

/// Looks a builtin up by its textual name.
pub fn get_builtin_by_name(name: &str) -> Result<CatalogEntry> {
    get_builtin(name.parse()?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CatalogRow {
    pub name: String,
    pub rank: usize,
    pub growth_factor: f64,
    pub nuclear_norm: Option<f64>,
}

pub fn catalog_constants() -> Vec<CatalogRow> {
    Builtin::ALL
        .iter()
        .map(|&b| {
            let e = get_builtin(b).expect("builtins are well formed");
            CatalogRow {
                name: b.name(),
                rank: e.decomposition.rank(),
                growth_factor: crate::tensor::growth_factor(&e.decomposition, Default::default()),
                nuclear_norm: e.known_nuclear_norm,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{evaluate, growth_factor, materialize_tensor, verify_decomposition, NormSpec};

    #[test]
    fn closed_forms_match() {
        for b in Builtin::ALL {
            let e = get_builtin(b).unwrap();
            let g = growth_factor(&e.decomposition, NormSpec::Euclidean);
            let want = e.closed_form_growth.value();
            assert!(((g - want) / want).abs() < 1e-12, "{b}: {g} vs {want}");
        }
    }

    #[test]
    fn every_entry_verifies() {
        for b in Builtin::ALL.into_iter().chain([Builtin::ConventionalMm(2, 3, 4)]) {
            let e = get_builtin(b).unwrap();
            assert!(verify_decomposition(&e.decomposition, &e.target_tensor()).unwrap(), "{b}");
        }
    }

    #[test]
    fn ranks() {
        let ranks: Vec<_> = catalog_constants().iter().map(|r| r.rank).collect();
        assert_eq!(ranks, vec![7, 7, 8, 4, 3, 3]);
        assert_eq!(get_builtin(Builtin::ConventionalMm(2, 3, 4)).unwrap().decomposition.rank(), 24);
    }

    #[test]
    fn growth_ordering() {
        let rows = catalog_constants();
        assert!(rows[1].growth_factor > rows[0].growth_factor);
        assert!(rows[0].growth_factor > rows[2].growth_factor);
        assert!((rows[1].growth_factor - 17.8530).abs() < 1e-4);
        assert_eq!(rows[1].nuclear_norm, None);
        assert_eq!((rows[3].rank, rows[3].growth_factor, rows[3].nuclear_norm), (4, 4.0, Some(4.0)));
    }

    #[test]
    fn strassen_first_term_is_identity() {
        let e = get_builtin(Builtin::Strassen2x2).unwrap();
        let t = &e.decomposition.terms()[0];
        let id = Term::from_ints(&[1, 0, 0, 1], &[1, 0, 0, 1], &[1, 0, 0, 1]);
        assert_eq!(*t, id);
    }

    #[test]
    fn new_matches_regular_exactly() {
        let n = get_builtin(Builtin::ComplexNew).unwrap();
        let r = get_builtin(Builtin::ComplexRegular).unwrap();
        assert_eq!(materialize_tensor(&n.decomposition), materialize_tensor(&r.decomposition));
    }

    #[test]
    fn gauss_evaluates_complex_product() {
        let e = get_builtin(Builtin::ComplexGauss).unwrap();
        assert_eq!(evaluate(&e.decomposition, &[1.0, 2.0], &[3.0, 4.0]).unwrap(), vec![-5.0, 10.0]);
    }

    #[test]
    fn perturbed_strassen_fails() {
        let e = get_builtin(Builtin::Strassen2x2).unwrap();
        let mut terms = e.decomposition.terms().to_vec();
        terms[3].v[0] = &terms[3].v[0] + &ExactCoefficient::from_ratios(1, 1000, 0, 1);
        let d = BilinearDecomposition::new("bad", (4, 4, 4), terms).unwrap();
        assert!(!verify_decomposition(&d, &e.target_tensor()).unwrap());
    }

    #[test]
    fn name_parsing() {
        for b in Builtin::ALL {
            assert_eq!(b.name().parse::<Builtin>().unwrap(), b);
        }
        assert_eq!("conventional_mm(1,2,3)".parse::<Builtin>().unwrap(), Builtin::ConventionalMm(1, 2, 3));
        assert_eq!("conventional_mm:3,3,3".parse::<Builtin>().unwrap(), Builtin::ConventionalMm(3, 3, 3));
        assert!(matches!("karatsuba".parse::<Builtin>(), Err(Error::UnknownBuiltin(_))));
        assert!("conventional_mm(0,1,1)".parse::<Builtin>().is_err());
    }

    #[test]
    fn closed_form_display() {
        assert_eq!(ClosedForm::new(12, 2, 0).to_string(), "12 + 2√2");
        assert_eq!(ClosedForm::new(7, 4, 3).to_string(), "7 + 4√2 + 3√3");
        assert_eq!(ClosedForm::new(0, 0, 0).to_string(), "0");
    }
}
