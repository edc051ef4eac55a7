//! Dense small-matrix numerics and seeded random ensembles.

mod decomp;
mod ensemble;
mod matrix;
mod nnls;
mod text;
pub mod vector;

pub use decomp::{
    default_zero_tol, operator_norm, orthogonal_complement, pseudo_inverse, sigma_min_plus,
    singular_values, smallest_nonzero_singular, smoothness_constant, svd, symmetric_eigen, Svd,
    SymmetricEigen,
};
pub use ensemble::{sample_ensemble, EnsembleKind, EnsembleSpec};
pub use matrix::DenseMatrix;
pub use nnls::nnls;
pub use text::{format_matrix, format_vector, parse_matrix, parse_vector};

#[cfg(test)]
mod tests;
