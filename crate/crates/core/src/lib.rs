//! Bilinear algorithms, their growth factors, and the rounding errors they
//! actually commit, measured against exact rational arithmetic.

pub mod bounds;
pub mod catalog;
pub mod cmm;
pub mod coeff;
pub mod error;
pub mod exact;
pub mod experiments;
pub mod gen;
pub mod matmul;
pub mod matrix;
#[doc(hidden)]
pub mod svd;
pub mod tensor;

pub use bounds::{
    asymptotic_compare, gauss_entrywise_bounds, new_alg_entrywise_bounds, thm_main_bound, AsymptoticTable, BoundReport,
    EntrywiseBounds, UnitRoundoff,
};
pub use catalog::{catalog_constants, get_builtin, get_builtin_by_name, Builtin, CatalogEntry, ClosedForm};
pub use cmm::{cmm, cmm_exact, Backend, CmmAlgorithm};
pub use coeff::ExactCoefficient;
pub use error::{Error, Result};
pub use exact::{
    double_to_rational, exact_matmul, max_norm_rel_error, rational_to_f64, BigRational, ExactMatrixC, ExactMatrixR,
    GaussianRational,
};
pub use experiments::{ExperimentConfig, ExperimentKind, ExperimentRecord, OutputFormat};
pub use gen::{gen_conditioned, gen_conditioned_complex, gen_random, gen_random_complex, gen_unitary, ConditionedSpec, Dist, Seed};
pub use matmul::{multiply_complex_elements, multiply_conventional, multiply_recursive, Padding, RecursionPolicy};
pub use matrix::{ComplexElementMatrix, ComplexMatrix, Matrix, RealMatrix, Scalar};
pub use tensor::{
    evaluate, growth_factor, materialize_tensor, verify_decomposition, BilinearDecomposition, DenseTensor3, NormSpec,
    Term,
};
