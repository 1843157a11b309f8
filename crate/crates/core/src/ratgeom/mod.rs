//! Exact rational scalars, vectors and matrices, plus the few
//! floating-point diagnostics that carry explicit guards.

mod dilation;
mod matrix;
mod rat;
mod spectral;

pub use dilation::{DilationKind, DilationSpec};
pub use matrix::{
    cyclic_matrix, cyclic_shift, nearest_integer_vector, scalar_power_probe, RatMatrix,
    DEFAULT_P_MAX,
};
pub use rat::{
    format_rat, from_f64, int, parse_rat, rat, rat_serde, round_half_toward_zero, to_f64, Rat,
    RatVec,
};
pub use spectral::{
    count_eigenvalues_below, expansive_check, gram, min_singular_exceeds, singular_values,
    Decision, SingularValues,
};

/// Determinant convenience wrapper.
pub fn det(m: &RatMatrix) -> Rat {
    m.det()
}

/// Exact inverse convenience wrapper.
pub fn mat_inverse(m: &RatMatrix) -> crate::error::Result<RatMatrix> {
    m.inverse()
}
