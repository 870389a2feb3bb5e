//! Bilinear algorithms as rank-one decompositions `β = Σ φᵢ ⊗ ψᵢ ⊗ wᵢ`.
//!
//! Functionals are stored as coefficient vectors (`φ(x) = uᵀx`), and matrix
//! spaces are flattened row-major, so a `2x2` operand is a vector in `ℝ⁴`.

use serde::{Deserialize, Serialize};

use crate::coeff::ExactCoefficient;
use crate::error::{dim_err, Error, Result};

/// One rank-one term `(u, v, w)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub u: Vec<ExactCoefficient>,
    pub v: Vec<ExactCoefficient>,
    pub w: Vec<ExactCoefficient>,
}

impl Term {
    pub fn new(u: Vec<ExactCoefficient>, v: Vec<ExactCoefficient>, w: Vec<ExactCoefficient>) -> Self {
        Self { u, v, w }
    }

    /// Term built from integer coefficients.
    pub fn from_ints(u: &[i64], v: &[i64], w: &[i64]) -> Self {
        let lift = |xs: &[i64]| xs.iter().map(|&x| ExactCoefficient::integer(x)).collect();
        Self::new(lift(u), lift(v), lift(w))
    }

    fn is_zero_tensor(&self) -> bool {
        [&self.u, &self.v, &self.w]
            .iter()
            .any(|xs| xs.iter().all(ExactCoefficient::is_zero))
    }
}

/// Norms put on `𝕌`, `𝕍`, `𝕎`. Only the self-dual Euclidean (Frobenius on
/// flattened matrices) norm is supported.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum NormSpec {
    #[default]
    Euclidean,
}

/// A named bilinear algorithm `(ℝ^m × ℝ^n → ℝ^p)` with exact coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DecompositionFile", into = "DecompositionFile")]
pub struct BilinearDecomposition {
    name: String,
    dims: (usize, usize, usize),
    terms: Vec<Term>,
    known_nuclear_norm: Option<f64>,
    known_growth_factor_closed_form: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct DecompositionFile {
    name: String,
    dims: [usize; 3],
    terms: Vec<Term>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    known_nuclear_norm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    known_growth_factor_closed_form: Option<String>,
}

impl TryFrom<DecompositionFile> for BilinearDecomposition {
    type Error = Error;
    fn try_from(f: DecompositionFile) -> Result<Self> {
        let [m, n, p] = f.dims;
        let mut d = BilinearDecomposition::new(f.name, (m, n, p), f.terms)?;
        d.known_nuclear_norm = f.known_nuclear_norm;
        d.known_growth_factor_closed_form = f.known_growth_factor_closed_form;
        if let Some(nu) = d.known_nuclear_norm {
            if !(nu >= 0.0 && nu.is_finite()) {
                return Err(Error::Format(format!("nuclear norm {nu} must be nonnegative")));
            }
        }
        Ok(d)
    }
}

impl From<BilinearDecomposition> for DecompositionFile {
    fn from(d: BilinearDecomposition) -> Self {
        DecompositionFile {
            name: d.name,
            dims: [d.dims.0, d.dims.1, d.dims.2],
            terms: d.terms,
            known_nuclear_norm: d.known_nuclear_norm,
            known_growth_factor_closed_form: d.known_growth_factor_closed_form,
        }
    }
}

impl BilinearDecomposition {
    pub fn new(name: impl Into<String>, dims: (usize, usize, usize), terms: Vec<Term>) -> Result<Self> {
        let (m, n, p) = dims;
        if m == 0 || n == 0 || p == 0 {
            return Err(Error::ContractViolation(format!("dimensions must be positive, got {dims:?}")));
        }
        if terms.is_empty() {
            return Err(Error::ContractViolation("a decomposition needs at least one term".into()));
        }
        for (i, t) in terms.iter().enumerate() {
            if t.u.len() != m || t.v.len() != n || t.w.len() != p {
                return dim_err(format!(
                    "term {i} has lengths ({}, {}, {}), expected ({m}, {n}, {p})",
                    t.u.len(),
                    t.v.len(),
                    t.w.len()
                ));
            }
            if t.is_zero_tensor() {
                return Err(Error::ContractViolation(format!("term {i} is the zero tensor")));
            }
        }
        Ok(Self {
            name: name.into(),
            dims,
            terms,
            known_nuclear_norm: None,
            known_growth_factor_closed_form: None,
        })
    }

    pub fn with_metadata(mut self, nuclear_norm: Option<f64>, closed_form: Option<&str>) -> Self {
        self.known_nuclear_norm = nuclear_norm;
        self.known_growth_factor_closed_form = closed_form.map(str::to_owned);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Number of nonscalar multiplications `r`.
    pub fn rank(&self) -> usize {
        self.terms.len()
    }

    pub fn known_nuclear_norm(&self) -> Option<f64> {
        self.known_nuclear_norm
    }

    pub fn known_growth_factor_closed_form(&self) -> Option<&str> {
        self.known_growth_factor_closed_form.as_deref()
    }

    /// Same algorithm with the terms rearranged; `order[i]` is the old index of new term `i`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.terms.len()];
        if order.len() != self.terms.len() || order.iter().any(|&i| i >= seen.len() || std::mem::replace(&mut seen[i], true)) {
            return Err(Error::ContractViolation("not a permutation of the terms".into()));
        }
        let mut out = self.clone();
        out.terms = order.iter().map(|&i| self.terms[i].clone()).collect();
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }
}

/// Exact `m x n x p` array, index `[j][k][l]` flattened row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenseTensor3 {
    dims: (usize, usize, usize),
    entries: Vec<ExactCoefficient>,
}

impl DenseTensor3 {
    pub fn zeros(dims: (usize, usize, usize)) -> Self {
        Self {
            dims,
            entries: vec![ExactCoefficient::zero(); dims.0 * dims.1 * dims.2],
        }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    fn index(&self, j: usize, k: usize, l: usize) -> usize {
        (j * self.dims.1 + k) * self.dims.2 + l
    }

    pub fn get(&self, j: usize, k: usize, l: usize) -> &ExactCoefficient {
        &self.entries[self.index(j, k, l)]
    }

    pub fn set(&mut self, j: usize, k: usize, l: usize, value: ExactCoefficient) {
        let idx = self.index(j, k, l);
        self.entries[idx] = value;
    }

    pub fn entries(&self) -> &[ExactCoefficient] {
        &self.entries
    }

    /// Tensor of `(A, B) ↦ AB` for `A ∈ ℝ^{m×n}`, `B ∈ ℝ^{n×p}`.
    pub fn matmul(m: usize, n: usize, p: usize) -> Self {
        let mut t = Self::zeros((m * n, n * p, m * p));
        for i in 0..m {
            for j in 0..n {
                for k in 0..p {
                    t.set(i * n + j, j * p + k, i * p + k, ExactCoefficient::one());
                }
            }
        }
        t
    }

    /// Tensor of complex multiplication on `ℂ ≅ ℝ²`.
    pub fn complex_mult() -> Self {
        let mut t = Self::zeros((2, 2, 2));
        t.set(0, 0, 0, ExactCoefficient::one());
        t.set(1, 1, 0, ExactCoefficient::integer(-1));
        t.set(0, 1, 1, ExactCoefficient::one());
        t.set(1, 0, 1, ExactCoefficient::one());
        t
    }
}

/// Exact Euclidean norm squared, rounded once before the square root.
fn euclidean_norm(xs: &[ExactCoefficient]) -> f64 {
    let sq = xs
        .iter()
        .fold(ExactCoefficient::zero(), |acc, x| &acc + &x.square());
    sq.to_f64().sqrt()
}

/// `γ = Σᵢ ‖uᵢ‖ ‖vᵢ‖ ‖wᵢ‖`, summed left to right in double precision.
pub fn growth_factor(d: &BilinearDecomposition, norms: NormSpec) -> f64 {
    match norms {
        NormSpec::Euclidean => d.terms.iter().fold(0.0, |acc, t| {
            acc + euclidean_norm(&t.u) * euclidean_norm(&t.v) * euclidean_norm(&t.w)
        }),
    }
}

fn dot_left_to_right(coeffs: &[ExactCoefficient], x: &[f64]) -> f64 {
    let mut terms = coeffs.iter().zip(x).map(|(c, &xi)| c.to_f64() * xi);
    let first = terms.next().unwrap_or(0.0);
    terms.fold(first, |acc, t| acc + t)
}

/// Runs the algorithm: `cᵢ = φᵢ(u)ψᵢ(v)`, then `Σ cᵢwᵢ` accumulated left to right.
pub fn evaluate(d: &BilinearDecomposition, u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    let (m, n, p) = d.dims;
    if u.len() != m || v.len() != n {
        return dim_err(format!(
            "inputs of length ({}, {}) for a decomposition on ({m}, {n})",
            u.len(),
            v.len()
        ));
    }
    let mut acc: Option<Vec<f64>> = None;
    for t in &d.terms {
        let c = dot_left_to_right(&t.u, u) * dot_left_to_right(&t.v, v);
        let scaled = t.w.iter().map(|w| c * w.to_f64());
        match acc.as_mut() {
            None => acc = Some(scaled.collect()),
            Some(sum) => sum.iter_mut().zip(scaled).for_each(|(s, x)| *s += x),
        }
    }
    Ok(acc.unwrap_or_else(|| vec![0.0; p]))
}

/// `Σᵢ uᵢ ⊗ vᵢ ⊗ wᵢ` in exact arithmetic.
pub fn materialize_tensor(d: &BilinearDecomposition) -> DenseTensor3 {
    let mut t = DenseTensor3::zeros(d.dims);
    for term in &d.terms {
        for (j, uj) in term.u.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
            for (k, vk) in term.v.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
                let uv = uj * vk;
                for (l, wl) in term.w.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
                    let idx = t.index(j, k, l);
                    t.entries[idx] = &t.entries[idx] + &(&uv * wl);
                }
            }
        }
    }
    t
}

/// Exact, tolerance-free check that `d` decomposes `reference`.
pub fn verify_decomposition(d: &BilinearDecomposition, reference: &DenseTensor3) -> Result<bool> {
    if d.dims != reference.dims {
        return dim_err(format!(
            "decomposition dims {:?} vs reference {:?}",
            d.dims, reference.dims
        ));
    }
    Ok(materialize_tensor(d) == *reference)
}
